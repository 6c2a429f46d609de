#include <catch2/catch.hpp>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "srop/grid.hpp"
#include "srop/io.hpp"
#include "srop/solver.hpp"

using namespace srop;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("srop_io_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

}  // namespace

TEST_CASE("field files round-trip bit-exactly") {
  TempDir dir;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);

  SECTION("complex 128x128") {
    ComplexField f(128);
    for (auto& v : f.values()) v = {dist(rng), dist(rng)};
    const fs::path p = dir.path / "c.fld";
    write_field(p, f);
    ComplexField g = read_complex_field(p);
    CHECK(f == g);
    // write again: identical bytes
    const fs::path q = dir.path / "c2.fld";
    write_field(q, g);
    CHECK(slurp(p) == slurp(q));
  }
  SECTION("real field with signed zero and subnormals") {
    RealField f(3);
    f(0, 0) = -0.0;
    f(0, 1) = 5e-324;
    f(2, 2) = dist(rng);
    const fs::path p = dir.path / "r.fld";
    write_field(p, f);
    RealField g = read_real_field(p);
    CHECK(std::memcmp(f.values().data(), g.values().data(), f.size() * 8) == 0);
  }
}

TEST_CASE("a 1x1 real field occupies exactly 25 bytes") {
  TempDir dir;
  const fs::path p = dir.path / "one.fld";
  write_field(p, RealField(1));
  CHECK(fs::file_size(p) == 25);
}

TEST_CASE("malformed field files raise distinct errors") {
  TempDir dir;
  const fs::path p = dir.path / "f.fld";
  RealField f(2);
  f(1, 1) = 3.25;
  write_field(p, f);

  SECTION("bad magic") {
    std::string bytes = slurp(p);
    bytes[0] = 'X';
    std::ofstream(p, std::ios::binary) << bytes;
    CHECK_THROWS_WITH(read_real_field(p), Catch::Contains("bad magic"));
  }
  SECTION("truncated payload") {
    std::string bytes = slurp(p);
    bytes.resize(bytes.size() - 5);
    std::ofstream(p, std::ios::binary) << bytes;
    CHECK_THROWS_WITH(read_real_field(p), Catch::Contains("truncated payload"));
  }
  SECTION("truncated header") {
    std::ofstream(p, std::ios::binary) << "SPRF";
    CHECK_THROWS_WITH(read_real_field(p), Catch::Contains("truncated header"));
  }
  SECTION("dimension overflow") {
    std::string bytes = slurp(p);
    bytes[9] = bytes[10] = bytes[11] = bytes[12] = static_cast<char>(0xff);
    bytes[13] = bytes[14] = bytes[15] = bytes[16] = static_cast<char>(0xff);
    std::ofstream(p, std::ios::binary) << bytes;
    CHECK_THROWS_WITH(read_real_field(p), Catch::Contains("dimension overflow"));
  }
  SECTION("dtype mismatch") {
    CHECK_THROWS_WITH(read_complex_field(p), Catch::Contains("dtype mismatch"));
  }
  SECTION("trailing data") {
    std::string bytes = slurp(p) + "zz";
    std::ofstream(p, std::ios::binary) << bytes;
    CHECK_THROWS_WITH(read_real_field(p), Catch::Contains("trailing data"));
  }
}

TEST_CASE("trace CSV round-trips its numeric columns") {
  TempDir dir;
  IterationTrace trace;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int k = 1; k <= 50; ++k) {
    IterationRecord rec;
    rec.k = k;
    rec.change = dist(rng) * std::pow(10.0, -static_cast<double>(k % 17));
    rec.rms_support = dist(rng);
    rec.rms_full = dist(rng);
    if (k % 2 == 0) {
      rec.dist_fourier = dist(rng);
      rec.dist_amplitude = dist(rng);
      rec.dist_sparse = dist(rng);
    }
    trace.records.push_back(rec);
  }
  const fs::path p = dir.path / "trace.csv";
  write_trace_csv(p, trace);

  // header + one row per iteration
  std::ifstream f(p);
  std::string line;
  int lines = 0;
  while (std::getline(f, line)) ++lines;
  CHECK(lines == 51);

  auto records = read_trace_records(p);
  REQUIRE(records.size() == trace.records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].k == trace.records[i].k);
    CHECK(records[i].change == trace.records[i].change);
    CHECK(records[i].rms_support == trace.records[i].rms_support);
    CHECK(records[i].dist_fourier == trace.records[i].dist_fourier);
  }
}

TEST_CASE("run records append with a single header and re-parse exactly") {
  TempDir dir;
  const fs::path p = dir.path / "results.csv";

  RunRecord rec;
  rec.run_id = "k001-srop";
  rec.algorithm = "srop";
  rec.n = 64;
  rec.aperture_diameter = 32;
  rec.true_sparsity = 12;
  rec.s_parameter = 13;
  rec.seed = 7;
  rec.iterations_used = 583;
  rec.termination_reason = "tolerance";
  rec.final_change = 9.8765432109876543e-9;
  rec.final_rms_support = 0.0123456789012345678;
  rec.final_rms_full = 0.003;
  rec.measured_sparsity = 12;
  rec.rate_estimate = 0.97;
  rec.rate_r2 = 0.991;
  rec.wall_time_ms = 1234.5;
  append_run_record(p, rec);

  RunRecord noisefree = rec;
  noisefree.run_id = "k001-gs";
  noisefree.algorithm = "gs";
  noisefree.photon_budget = 1e6;
  noisefree.rate_estimate = std::nullopt;
  noisefree.rate_r2 = std::nullopt;
  append_run_record(p, noisefree);

  auto rows = read_run_records(p);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].run_id == "k001-srop");
  CHECK_FALSE(rows[0].photon_budget.has_value());
  CHECK(rows[0].final_change == rec.final_change);
  CHECK(rows[0].final_rms_support == rec.final_rms_support);
  CHECK(rows[1].photon_budget == 1e6);
  CHECK_FALSE(rows[1].rate_estimate.has_value());

  // exactly one header line
  std::ifstream f(p);
  std::string line;
  int headers = 0;
  while (std::getline(f, line))
    if (line.rfind("run_id,", 0) == 0) ++headers;
  CHECK(headers == 1);
}
