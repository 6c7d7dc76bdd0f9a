#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace chainspec::io {

// Thrown for semantic problems (bad values, unknown keys, shape mismatches);
// the CLI maps it to exit code 1.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown for missing, unreadable or malformed files; exit code 2.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Binary array container. On disk: magic "CSPC", u32 format version, u32
// dtype tag (1 = f32, 2 = f64), u32 rank, rank u64 dims, then the row-major
// little-endian payload.
struct Array {
  std::vector<std::uint64_t> dims;
  std::vector<double> data;

  std::uint64_t total() const {
    std::uint64_t t = 1;
    for (auto d : dims) t *= d;
    return t;
  }
};

void write_array(const std::string& path, const Array& array);
Array read_array(const std::string& path);

// row-major 2D helpers
Array from_matrix(const Eigen::MatrixXd& m);
Eigen::MatrixXd to_matrix(const Array& a);
Array from_vector(const Eigen::VectorXd& v);
Eigen::VectorXd to_vector(const Array& a);

// Delimiter-separated table with one header line; numbers are written with
// enough digits to round-trip doubles exactly.
void write_table(const std::string& path,
                 const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows);

nlohmann::json read_json(const std::string& path);
void write_json(const std::string& path, const nlohmann::json& value);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace chainspec::io
