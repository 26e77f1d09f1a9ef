#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace rom {

using json = nlohmann::json;

/// Shortest text that reads back to the same double, capped at 17 significant
/// digits ("%.17g" semantics).
std::string format_double(double value);
double parse_double(std::string_view text);

/// SHA-256 of the bytes, lowercase hex.
std::string sha256_hex(std::string_view bytes);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// JSON text with stable formatting (2-space indent, trailing newline).
std::string dump_json(const json& value);
json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& value);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);
std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows);

json to_json(const Eigen::VectorXd& v);
json to_json(const Eigen::MatrixXd& m);  // row-major nested arrays
Eigen::VectorXd vector_from_json(const json& j);
Eigen::MatrixXd matrix_from_json(const json& j);

}  // namespace rom
