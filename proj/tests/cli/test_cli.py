"""End-to-end checks of the rom-surrogate executable.

usage: test_cli.py <path-to-rom-surrogate>
"""

import csv
import hashlib
import json
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

CLI = None


def run(*args, expect=0):
    proc = subprocess.run([CLI, *map(str, args)], capture_output=True, text=True)
    if proc.returncode != expect:
        raise AssertionError(f"{args}: exit {proc.returncode}, expected {expect}\n{proc.stderr}")
    return proc


def rows(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


def digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class CliTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.dir = Path(cls.tmp.name)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def test_generate_defaults_and_seed(self):
        a, b = self.dir / "a.csv", self.dir / "b.csv"
        run("-q", "generate", "--seed", 4, "--out", a)
        run("-q", "generate", "--seed", 4, "--out", b)
        table = rows(a)
        self.assertEqual(len(table), 2001)
        self.assertEqual(len(table[0]), 140)
        self.assertEqual(table[0][0], "p1")
        self.assertEqual(table[0][20], "tau_0")
        self.assertEqual(digest(a), digest(b))
        meta = json.loads(Path(str(a) + ".meta.json").read_text())
        self.assertEqual(meta["seed"], 4)

    def test_generate_short_signal(self):
        out = self.dir / "short.csv"
        run("-q", "generate", "--m", 10, "--n", 8, "--seed", 1, "--out", out)
        table = rows(out)
        self.assertEqual(len(table), 11)
        self.assertEqual(len(table[0]), 28)

    def test_reduce_analyze_band_limited(self):
        data = self.dir / "bl.csv"
        out = self.dir / "analysis"
        run("-q", "generate", "--m", 300, "--n", 120, "--seed", 2, "--variant", "band_limited", "--out", data)
        run("-q", "reduce-analyze", "--data", data, "--reduced-r", 11, "--out", out)
        mae = rows(out / "mae.csv")
        self.assertEqual(mae[0], ["r", "mae_per_signal", "mae_per_element"])
        values = [(int(r[0]), float(r[1])) for r in mae[1:]]
        self.assertEqual(values[-1][0], 61)
        for r, v in values:
            if r >= 11:
                self.assertLess(v, 1e-10, r)
        for (_, prev), (_, cur) in zip(values, values[1:]):
            self.assertLessEqual(cur, prev + 1e-12)
        self.assertTrue((out / "worst_r5.csv").exists())
        self.assertTrue((out / "reduced_r11.csv").exists())
        ranking = json.loads((out / "ranking.json").read_text())
        self.assertEqual(len(ranking["order"]), 61)

    def test_train_predict_evaluate_uq(self):
        data = self.dir / "train.csv"
        bundle = self.dir / "bundle"
        run("-q", "generate", "--m", 80, "--n", 60, "--seed", 3, "--variant", "band_limited", "--out", data)
        config = self.dir / "gp.json"
        config.write_text(json.dumps({"surrogate": {"gp": {"budget": 60}}}))
        run("-q", "train", "--config", config, "--data", data, "--reduction", "dft", "--rsm", "gp",
            "--r", 11, "--from", 0, "--to", 60, "--out", bundle)
        manifest = json.loads((bundle / "manifest.json").read_text())
        self.assertEqual(manifest["rsm"], "gp")

        # A training design reproduces its stored signal (GP interpolates).
        table = rows(data)
        designs = self.dir / "designs.csv"
        with open(designs, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(table[0][:20])
            w.writerow(table[1][:20])
        pred = self.dir / "pred.csv"
        run("-q", "predict", "--bundle", bundle, "--designs", designs, "--out", pred)
        got = [float(v) for v in rows(pred)[1]]
        truth = [float(v) for v in table[1][20:]]
        self.assertEqual(len(got), 60)
        self.assertLess(max(abs(g - t) / abs(t) for g, t in zip(got, truth)), 1e-4)

        ev = self.dir / "eval"
        run("-q", "evaluate", "--bundle", bundle, "--data", data, "--from", 60, "--to", 80, "--out", ev)
        report = json.loads((ev / "report.json").read_text())
        self.assertEqual(report["samples"], 20)
        self.assertGreater(report["signal_mape"], 0)

        uq = self.dir / "uq"
        run("-q", "uq", "--bundle", bundle, "--samples", 11000, "--seed", 5, "--n", 60, "--out", uq)
        stats = rows(uq / "stats.csv")
        self.assertEqual(stats[0], ["angle_deg", "mean", "std"])
        self.assertEqual(len(stats) - 1, 60)
        self.assertTrue((uq / "comparison.csv").exists())

    def test_error_exit_codes(self):
        run("generate", "--bogus", expect=2)
        run("generate", "--m", 0, "--out", self.dir / "x.csv", expect=2)
        data = self.dir / "tiny.csv"
        run("-q", "generate", "--m", 40, "--n", 60, "--seed", 6, "--out", data)
        bundle = self.dir / "tiny_bundle"
        run("-q", "train", "--data", data, "--reduction", "dft", "--rsm", "pce", "--out", bundle)
        designs = self.dir / "outside.csv"
        header = rows(data)[0][:20]
        designs.write_text(",".join(header) + "\n" + ",".join(["1e9"] * 20) + "\n")
        run("predict", "--bundle", bundle, "--designs", designs, "--out", self.dir / "o.csv", expect=3)
        run("predict", "--bundle", self.dir / "missing", "--designs", self.dir / "missing.csv",
            "--out", self.dir / "p.csv", expect=5)
        proc = run("generate", "--variant", "loud", "--out", self.dir / "y.csv", expect=2)
        err = json.loads(proc.stderr.strip().splitlines()[-1])
        self.assertEqual(err["error"]["kind"], "usage")


if __name__ == "__main__":
    CLI = sys.argv.pop(1)
    unittest.main()
