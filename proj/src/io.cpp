#include "chainspec/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "array serialization assumes a little-endian host");

namespace chainspec::io {

namespace {

constexpr char kMagic[4] = {'C', 'S', 'P', 'C'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kTagF32 = 1;
constexpr std::uint32_t kTagF64 = 2;
constexpr std::uint32_t kMaxRank = 8;

[[noreturn]] void parse_fail(const std::string& path, std::uint64_t offset,
                             const std::string& what) {
  throw IoError(path + ": " + what + " at byte " + std::to_string(offset));
}

}  // namespace

void write_array(const std::string& path, const Array& array) {
  if (array.data.size() != array.total())
    throw ValidationError(path + ": array data does not match its dims");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  out.write(kMagic, 4);
  auto put32 = [&](std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
  };
  auto put64 = [&](std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), 8);
  };
  put32(kVersion);
  put32(kTagF64);
  put32(std::uint32_t(array.dims.size()));
  for (auto d : array.dims) put64(d);
  out.write(reinterpret_cast<const char*>(array.data.data()),
            std::streamsize(array.data.size() * sizeof(double)));
  if (!out) throw IoError(path + ": write failed");
}

Array read_array(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open");
  std::uint64_t offset = 0;
  auto need = [&](void* dst, std::size_t bytes, const char* what) {
    in.read(reinterpret_cast<char*>(dst), std::streamsize(bytes));
    if (std::size_t(in.gcount()) != bytes) parse_fail(path, offset, what);
    offset += bytes;
  };

  char magic[4];
  need(magic, 4, "truncated magic");
  if (std::memcmp(magic, kMagic, 4) != 0) parse_fail(path, 0, "bad magic");

  std::uint32_t version, tag, rank;
  need(&version, 4, "truncated version");
  if (version != kVersion)
    parse_fail(path, offset - 4,
               "unsupported format version " + std::to_string(version));
  need(&tag, 4, "truncated dtype tag");
  if (tag != kTagF32 && tag != kTagF64)
    parse_fail(path, offset - 4, "unknown dtype tag " + std::to_string(tag));
  need(&rank, 4, "truncated rank");
  if (rank > kMaxRank)
    parse_fail(path, offset - 4, "rank " + std::to_string(rank) + " too large");

  Array array;
  array.dims.resize(rank);
  for (std::uint32_t i = 0; i < rank; ++i)
    need(&array.dims[i], 8, "truncated dims");

  const std::uint64_t count = array.total();
  const std::size_t elem = tag == kTagF64 ? 8 : 4;
  if (count > (std::uint64_t(1) << 40) / elem)
    parse_fail(path, offset, "element count implausibly large");
  array.data.resize(count);
  if (tag == kTagF64) {
    need(array.data.data(), std::size_t(count) * 8, "truncated payload");
  } else {
    std::vector<float> raw(count);
    need(raw.data(), std::size_t(count) * 4, "truncated payload");
    for (std::uint64_t i = 0; i < count; ++i) array.data[i] = raw[i];
  }
  // trailing garbage makes the file ambiguous; reject it
  char extra;
  in.read(&extra, 1);
  if (in.gcount() != 0) parse_fail(path, offset, "trailing bytes");
  return array;
}

Array from_matrix(const Eigen::MatrixXd& m) {
  Array a;
  a.dims = {std::uint64_t(m.rows()), std::uint64_t(m.cols())};
  a.data.resize(std::size_t(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      a.data[std::size_t(r) * std::size_t(m.cols()) + std::size_t(c)] = m(r, c);
  return a;
}

Eigen::MatrixXd to_matrix(const Array& a) {
  if (a.dims.size() != 2)
    throw ValidationError("expected a rank-2 array, got rank " +
                          std::to_string(a.dims.size()));
  Eigen::MatrixXd m(Eigen::Index(a.dims[0]), Eigen::Index(a.dims[1]));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = a.data[std::size_t(r) * std::size_t(m.cols()) + std::size_t(c)];
  return m;
}

Array from_vector(const Eigen::VectorXd& v) {
  Array a;
  a.dims = {std::uint64_t(v.size())};
  a.data.assign(v.data(), v.data() + v.size());
  return a;
}

Eigen::VectorXd to_vector(const Array& a) {
  if (a.dims.size() != 1)
    throw ValidationError("expected a rank-1 array, got rank " +
                          std::to_string(a.dims.size()));
  return Eigen::Map<const Eigen::VectorXd>(a.data.data(),
                                           Eigen::Index(a.data.size()));
}

void write_table(const std::string& path,
                 const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << '\n';
  char buf[64];
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw ValidationError(path + ": row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      out << (i ? "," : "") << buf;
    }
    out << '\n';
  }
  write_text_file(path, out.str());
}

nlohmann::json read_json(const std::string& path) {
  const std::string text = read_text_file(path);
  nlohmann::json parsed = nlohmann::json::parse(text, nullptr, false);
  if (parsed.is_discarded()) throw IoError(path + ": invalid JSON");
  return parsed;
}

void write_json(const std::string& path, const nlohmann::json& value) {
  write_text_file(path, value.dump(2) + "\n");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(path + ": read failed");
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << content;
  if (!out) throw IoError(path + ": write failed");
}

}  // namespace chainspec::io
