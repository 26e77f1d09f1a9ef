"""Python access to the rom_surrogate C++ core.

Configs and reports are plain dicts; arrays are numpy.
"""

import json

import numpy as np

from . import _core
from ._core import RomError, dft_forward, dft_inverse, rank_components, reconstruction_mae, set_threads

__all__ = [
    "RomError",
    "Surrogate",
    "default_space",
    "dft_forward",
    "dft_inverse",
    "generate",
    "rank_components",
    "reconstruction_mae",
    "set_threads",
    "uq_surrogate",
    "uq_synthetic",
]


def _dumps(obj):
    return "" if obj is None else json.dumps(obj)


def default_space():
    """Names and bounds of the 20 design parameters."""
    return json.loads(_core.default_space())


def generate(m, n=140, seed=1, variant="band_limited", space=None):
    """Sample ``m`` designs and their torque signals: returns (designs, signals)."""
    return _core.generate(m, n, seed, variant, _dumps(space))


class Surrogate:
    """Trained reduction plus response surface."""

    def __init__(self, core):
        self._core = core

    @classmethod
    def train(cls, designs, signals, config=None, space=None):
        designs = np.asarray(designs, dtype=float)
        signals = np.asarray(signals, dtype=float)
        return cls(_core.Surrogate.train(designs, signals, _dumps(config), _dumps(space)))

    @classmethod
    def load(cls, directory):
        return cls(_core.Surrogate.load(str(directory)))

    def save(self, directory):
        self._core.save(str(directory))

    def predict(self, designs):
        return self._core.predict(np.atleast_2d(np.asarray(designs, dtype=float)))

    def evaluate(self, designs, signals, strict=False):
        return json.loads(self._core.evaluate(np.asarray(designs, dtype=float), np.asarray(signals, dtype=float), strict))

    @property
    def reduction(self):
        return self._core.reduction

    @property
    def rsm(self):
        return self._core.rsm

    @property
    def signal_length(self):
        return self._core.signal_length

    @property
    def reduced_dimension(self):
        return self._core.reduced_dimension

    @property
    def metadata(self):
        return json.loads(self._core.metadata)


def uq_surrogate(surrogate, samples=11000, seed=1):
    """Per-angle (mean, std) of the surrogate under uniform design sampling."""
    return _core.uq_surrogate(surrogate._core, samples, seed)


def uq_synthetic(n=140, samples=11000, seed=1, variant="band_limited"):
    """Per-angle (mean, std) of the synthetic model itself."""
    return _core.uq_synthetic(n, samples, seed, variant)
