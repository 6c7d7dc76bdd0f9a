#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "chainspec/io.hpp"

using namespace chainspec;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("chainspec_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

std::vector<char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::vector<char>(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), std::streamsize(bytes.size()));
}

template <typename T>
void append(std::vector<char>& bytes, T v) {
  const char* p = reinterpret_cast<const char*>(&v);
  bytes.insert(bytes.end(), p, p + sizeof(T));
}

}  // namespace

TEST_CASE("arrays survive a bit-exact round trip") {
  TempDir tmp;
  io::Array a;
  a.dims = {2, 3, 4};
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1e12);
  a.data.resize(24);
  for (auto& v : a.data) v = g(rng);
  a.data[0] = 0.0;
  a.data[1] = -0.0;
  a.data[2] = 1e-300;

  const std::string path = tmp.file("a.cspc");
  io::write_array(path, a);
  const io::Array b = io::read_array(path);
  REQUIRE(b.dims == a.dims);
  REQUIRE(b.data.size() == a.data.size());
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    std::uint64_t ba, bb;
    std::memcpy(&ba, &a.data[i], 8);
    std::memcpy(&bb, &b.data[i], 8);
    CHECK(ba == bb);
  }

  // a second write of the same array produces identical bytes
  const std::string path2 = tmp.file("a2.cspc");
  io::write_array(path2, a);
  CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("rank zero arrays hold a single scalar") {
  TempDir tmp;
  io::Array a;
  a.data = {42.5};
  const std::string path = tmp.file("scalar.cspc");
  io::write_array(path, a);
  const io::Array b = io::read_array(path);
  CHECK(b.dims.empty());
  REQUIRE(b.data.size() == 1);
  CHECK(b.data[0] == 42.5);
}

TEST_CASE("hand-written f32 files widen to doubles") {
  TempDir tmp;
  std::vector<char> bytes;
  bytes.insert(bytes.end(), {'C', 'S', 'P', 'C'});
  append<std::uint32_t>(bytes, 1);  // version
  append<std::uint32_t>(bytes, 1);  // f32 tag
  append<std::uint32_t>(bytes, 1);  // rank
  append<std::uint64_t>(bytes, 3);
  append<float>(bytes, 1.5f);
  append<float>(bytes, -2.25f);
  append<float>(bytes, 100.0f);
  const std::string path = tmp.file("f32.cspc");
  spit(path, bytes);
  const io::Array a = io::read_array(path);
  REQUIRE(a.dims == std::vector<std::uint64_t>{3});
  CHECK(a.data[0] == 1.5);
  CHECK(a.data[1] == -2.25);
  CHECK(a.data[2] == 100.0);
}

TEST_CASE("malformed array files fail with byte offsets") {
  TempDir tmp;
  io::Array a;
  a.dims = {4};
  a.data = {1.0, 2.0, 3.0, 4.0};
  const std::string good = tmp.file("good.cspc");
  io::write_array(good, a);
  const std::vector<char> bytes = slurp(good);

  {
    auto bad = bytes;
    bad[0] = 'X';
    const std::string p = tmp.file("magic.cspc");
    spit(p, bad);
    try {
      io::read_array(p);
      FAIL("bad magic accepted");
    } catch (const io::IoError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("at byte 0") != std::string::npos);
      CHECK(msg.find(p) != std::string::npos);
    }
  }
  {
    auto bad = bytes;
    bad.resize(bytes.size() - 3);  // payload cut short
    const std::string p = tmp.file("short.cspc");
    spit(p, bad);
    CHECK_THROWS_AS(io::read_array(p), io::IoError);
  }
  {
    auto bad = bytes;
    bad.resize(10);  // header cut short
    const std::string p = tmp.file("header.cspc");
    spit(p, bad);
    CHECK_THROWS_AS(io::read_array(p), io::IoError);
  }
  {
    auto bad = bytes;
    bad.push_back('\0');
    const std::string p = tmp.file("trailing.cspc");
    spit(p, bad);
    try {
      io::read_array(p);
      FAIL("trailing bytes accepted");
    } catch (const io::IoError& e) {
      CHECK(std::string(e.what()).find("trailing") != std::string::npos);
    }
  }
  {
    std::vector<char> bad;
    bad.insert(bad.end(), {'C', 'S', 'P', 'C'});
    append<std::uint32_t>(bad, 9);  // unknown version
    append<std::uint32_t>(bad, 2);
    append<std::uint32_t>(bad, 0);
    const std::string p = tmp.file("version.cspc");
    spit(p, bad);
    CHECK_THROWS_AS(io::read_array(p), io::IoError);
  }
  {
    std::vector<char> bad;
    bad.insert(bad.end(), {'C', 'S', 'P', 'C'});
    append<std::uint32_t>(bad, 1);
    append<std::uint32_t>(bad, 3);  // unknown dtype
    append<std::uint32_t>(bad, 0);
    const std::string p = tmp.file("dtype.cspc");
    spit(p, bad);
    CHECK_THROWS_AS(io::read_array(p), io::IoError);
  }
  {
    std::vector<char> bad;
    bad.insert(bad.end(), {'C', 'S', 'P', 'C'});
    append<std::uint32_t>(bad, 1);
    append<std::uint32_t>(bad, 2);
    append<std::uint32_t>(bad, 9);  // rank above the cap
    const std::string p = tmp.file("rank.cspc");
    spit(p, bad);
    CHECK_THROWS_AS(io::read_array(p), io::IoError);
  }
  CHECK_THROWS_AS(io::read_array(tmp.file("missing.cspc")), io::IoError);
}

TEST_CASE("writing an inconsistent array is refused") {
  TempDir tmp;
  io::Array a;
  a.dims = {2, 2};
  a.data = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(io::write_array(tmp.file("bad.cspc"), a),
                  io::ValidationError);
}

TEST_CASE("matrix and vector adapters round trip row-major") {
  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const io::Array a = io::from_matrix(m);
  REQUIRE(a.dims == std::vector<std::uint64_t>({2, 3}));
  CHECK(a.data == std::vector<double>({1, 2, 3, 4, 5, 6}));
  CHECK((io::to_matrix(a) - m).cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd v(4);
  v << 9, 8, 7, 6;
  const io::Array av = io::from_vector(v);
  REQUIRE(av.dims == std::vector<std::uint64_t>{4});
  CHECK((io::to_vector(av) - v).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(io::to_matrix(av), io::ValidationError);
  CHECK_THROWS_AS(io::to_vector(a), io::ValidationError);
}

TEST_CASE("tables carry full double precision") {
  TempDir tmp;
  const std::string path = tmp.file("t.csv");
  const double tricky = 0.1 + 0.2;  // not exactly 0.3
  io::write_table(path, {"alpha", "beta"}, {{tricky, 1.0}, {-2.5, 3e-17}});
  const std::string text = io::read_text_file(path);
  CHECK(text.find("alpha") != std::string::npos);

  std::istringstream in(text);
  std::string header, row1;
  std::getline(in, header);
  std::getline(in, row1);
  CHECK(header.find("beta") != std::string::npos);
  const std::string first = row1.substr(0, row1.find(','));
  CHECK(std::stod(first) == tricky);
}

TEST_CASE("json round trips and bad files carry the path") {
  TempDir tmp;
  nlohmann::json j = {{"name", "box"}, {"count", 3}, {"values", {1.0, 2.5}}};
  const std::string path = tmp.file("j.json");
  io::write_json(path, j);
  CHECK(io::read_json(path) == j);

  io::write_text_file(tmp.file("broken.json"), "{ not json");
  try {
    io::read_json(tmp.file("broken.json"));
    FAIL("parse error not raised");
  } catch (const io::IoError& e) {
    CHECK(std::string(e.what()).find("broken.json") != std::string::npos);
  }
  CHECK_THROWS_AS(io::read_json(tmp.file("absent.json")), io::IoError);
}

TEST_CASE("text files round trip and report missing paths") {
  TempDir tmp;
  const std::string body = "line one\nline two\n";
  io::write_text_file(tmp.file("t.txt"), body);
  CHECK(io::read_text_file(tmp.file("t.txt")) == body);
  CHECK_THROWS_AS(io::read_text_file(tmp.file("nope.txt")), io::IoError);
}
