#pragma once

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "srop/grid.hpp"
#include "srop/solver.hpp"

namespace srop {

// Field file layout (normative, little-endian):
//   bytes 0..7   magic "SPRFLD01"
//   byte  8      dtype: 0 = real64, 1 = complex64-pair
//   bytes 9..12  rows, u32
//   bytes 13..16 cols, u32
//   payload      rows*cols IEEE-754 doubles, row-major; complex entries are
//                interleaved (real, imaginary) pairs.
inline constexpr std::array<char, 8> kFieldMagic = {'S', 'P', 'R', 'F', 'L', 'D', '0', '1'};
inline constexpr std::size_t kFieldHeaderBytes = 17;

namespace detail {

inline void put_u32_le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_f64_le(std::string& out, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline double get_f64_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

inline std::string field_header(std::uint8_t dtype, std::uint32_t rows, std::uint32_t cols) {
  std::string out(kFieldMagic.begin(), kFieldMagic.end());
  out.push_back(static_cast<char>(dtype));
  put_u32_le(out, rows);
  put_u32_le(out, cols);
  return out;
}

inline void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

struct FieldHeader {
  std::uint8_t dtype;
  std::uint32_t rows;
  std::uint32_t cols;
};

inline FieldHeader read_field_header(std::ifstream& f, const std::string& name) {
  std::array<unsigned char, kFieldHeaderBytes> hdr;
  f.read(reinterpret_cast<char*>(hdr.data()), hdr.size());
  if (f.gcount() != static_cast<std::streamsize>(hdr.size()))
    throw std::runtime_error("truncated header: " + name);
  if (std::memcmp(hdr.data(), kFieldMagic.data(), kFieldMagic.size()) != 0)
    throw std::runtime_error("bad magic: " + name);
  FieldHeader out;
  out.dtype = hdr[8];
  if (out.dtype > 1) throw std::runtime_error("unknown dtype: " + name);
  out.rows = get_u32_le(hdr.data() + 9);
  out.cols = get_u32_le(hdr.data() + 13);
  if (out.rows == 0 || out.cols == 0) throw std::runtime_error("bad dimensions: " + name);
  if (out.rows != out.cols) throw std::runtime_error("non-square field: " + name);
  if (out.rows > 65536u) throw std::runtime_error("dimension overflow: " + name);
  return out;
}

inline std::vector<double> read_payload(std::ifstream& f, std::size_t count,
                                        const std::string& name) {
  std::vector<unsigned char> raw(count * 8);
  f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (f.gcount() != static_cast<std::streamsize>(raw.size()))
    throw std::runtime_error("truncated payload: " + name);
  char extra;
  f.read(&extra, 1);
  if (f.gcount() != 0) throw std::runtime_error("trailing data: " + name);
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) values[i] = get_f64_le(raw.data() + 8 * i);
  return values;
}

// 17 significant digits round-trips doubles exactly; to_chars is
// locale-independent, so the decimal separator is always '.'.
inline std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt_double(*v) : std::string();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

inline double parse_double(const std::string& s) {
  double value = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("bad numeric field: '" + s + "'");
  return value;
}

inline std::optional<double> parse_opt_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

}  // namespace detail

inline void write_field(const std::filesystem::path& path, const RealField& f) {
  std::string bytes = detail::field_header(0, static_cast<std::uint32_t>(f.n()),
                                           static_cast<std::uint32_t>(f.n()));
  bytes.reserve(bytes.size() + f.size() * 8);
  for (double v : f.values()) detail::put_f64_le(bytes, v);
  detail::write_bytes(path, bytes);
}

inline void write_field(const std::filesystem::path& path, const ComplexField& f) {
  std::string bytes = detail::field_header(1, static_cast<std::uint32_t>(f.n()),
                                           static_cast<std::uint32_t>(f.n()));
  bytes.reserve(bytes.size() + f.size() * 16);
  for (const auto& v : f.values()) {
    detail::put_f64_le(bytes, v.real());
    detail::put_f64_le(bytes, v.imag());
  }
  detail::write_bytes(path, bytes);
}

inline RealField read_real_field(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path.string());
  const auto hdr = detail::read_field_header(f, path.string());
  if (hdr.dtype != 0) throw std::runtime_error("dtype mismatch, expected real64: " + path.string());
  const std::size_t count = static_cast<std::size_t>(hdr.rows) * hdr.cols;
  return RealField(static_cast<int>(hdr.rows), detail::read_payload(f, count, path.string()));
}

inline ComplexField read_complex_field(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path.string());
  const auto hdr = detail::read_field_header(f, path.string());
  if (hdr.dtype != 1)
    throw std::runtime_error("dtype mismatch, expected complex64-pair: " + path.string());
  const std::size_t count = static_cast<std::size_t>(hdr.rows) * hdr.cols;
  const std::vector<double> flat = detail::read_payload(f, count * 2, path.string());
  std::vector<std::complex<double>> values(count);
  for (std::size_t i = 0; i < count; ++i) values[i] = {flat[2 * i], flat[2 * i + 1]};
  return ComplexField(static_cast<int>(hdr.rows), std::move(values));
}

inline constexpr const char* kTraceHeader = "k,change,rms_support,rms_full,dist1,dist2,dist3";

inline void write_trace_csv(const std::filesystem::path& path, const IterationTrace& trace) {
  std::ostringstream out;
  out << kTraceHeader << "\n";
  for (const IterationRecord& rec : trace.records) {
    out << rec.k << ',' << detail::fmt_double(rec.change) << ','
        << detail::fmt_opt(rec.rms_support) << ',' << detail::fmt_opt(rec.rms_full) << ','
        << detail::fmt_opt(rec.dist_fourier) << ',' << detail::fmt_opt(rec.dist_amplitude)
        << ',' << detail::fmt_opt(rec.dist_sparse) << "\n";
  }
  detail::write_bytes(path, out.str());
}

inline std::vector<IterationRecord> read_trace_records(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path.string());
  std::string line;
  if (!std::getline(f, line) || detail::split_csv_line(line).size() != 7)
    throw std::runtime_error("bad trace header: " + path.string());
  std::vector<IterationRecord> records;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 7) throw std::runtime_error("bad trace row: " + path.string());
    IterationRecord rec;
    rec.k = std::stoi(fields[0]);
    rec.change = detail::parse_double(fields[1]);
    rec.rms_support = detail::parse_opt_double(fields[2]);
    rec.rms_full = detail::parse_opt_double(fields[3]);
    rec.dist_fourier = detail::parse_opt_double(fields[4]);
    rec.dist_amplitude = detail::parse_opt_double(fields[5]);
    rec.dist_sparse = detail::parse_opt_double(fields[6]);
    records.push_back(rec);
  }
  return records;
}

/// One completed solver run, as a results-table row.
struct RunRecord {
  std::string run_id;
  std::string algorithm;  // "srop" | "gs"
  int n = 0;
  int aperture_diameter = 0;
  int true_sparsity = 0;
  int s_parameter = 0;
  std::optional<double> photon_budget;  // empty = noise-free
  std::uint64_t seed = 0;
  int iterations_used = 0;
  std::string termination_reason;
  double final_change = 0.0;
  std::optional<double> final_rms_support;
  std::optional<double> final_rms_full;
  int measured_sparsity = 0;
  std::optional<double> rate_estimate;
  std::optional<double> rate_r2;
  double wall_time_ms = 0.0;
};

inline constexpr const char* kRunRecordHeader =
    "run_id,algorithm,n,aperture_diameter,true_sparsity,s_parameter,photon_budget,seed,"
    "iterations_used,termination_reason,final_change,final_rms_support,final_rms_full,"
    "measured_sparsity,rate_estimate,rate_r2,wall_time_ms";

inline void append_run_record(const std::filesystem::path& path, const RunRecord& rec) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream f(path, std::ios::app);
  if (!f) throw std::runtime_error("cannot open for appending: " + path.string());
  if (fresh) f << kRunRecordHeader << "\n";
  f << rec.run_id << ',' << rec.algorithm << ',' << rec.n << ',' << rec.aperture_diameter
    << ',' << rec.true_sparsity << ',' << rec.s_parameter << ','
    << detail::fmt_opt(rec.photon_budget) << ',' << rec.seed << ',' << rec.iterations_used
    << ',' << rec.termination_reason << ',' << detail::fmt_double(rec.final_change) << ','
    << detail::fmt_opt(rec.final_rms_support) << ',' << detail::fmt_opt(rec.final_rms_full)
    << ',' << rec.measured_sparsity << ',' << detail::fmt_opt(rec.rate_estimate) << ','
    << detail::fmt_opt(rec.rate_r2) << ',' << detail::fmt_double(rec.wall_time_ms) << "\n";
  if (!f) throw std::runtime_error("append failed: " + path.string());
}

inline std::vector<RunRecord> read_run_records(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path.string());
  std::string line;
  if (!std::getline(f, line)) return {};
  if (detail::split_csv_line(line).size() != 17)
    throw std::runtime_error("bad results header: " + path.string());
  std::vector<RunRecord> records;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 17) throw std::runtime_error("bad results row: " + path.string());
    RunRecord rec;
    rec.run_id = fields[0];
    rec.algorithm = fields[1];
    rec.n = std::stoi(fields[2]);
    rec.aperture_diameter = std::stoi(fields[3]);
    rec.true_sparsity = std::stoi(fields[4]);
    rec.s_parameter = std::stoi(fields[5]);
    rec.photon_budget = detail::parse_opt_double(fields[6]);
    rec.seed = std::stoull(fields[7]);
    rec.iterations_used = std::stoi(fields[8]);
    rec.termination_reason = fields[9];
    rec.final_change = detail::parse_double(fields[10]);
    rec.final_rms_support = detail::parse_opt_double(fields[11]);
    rec.final_rms_full = detail::parse_opt_double(fields[12]);
    rec.measured_sparsity = std::stoi(fields[13]);
    rec.rate_estimate = detail::parse_opt_double(fields[14]);
    rec.rate_r2 = detail::parse_opt_double(fields[15]);
    rec.wall_time_ms = detail::parse_double(fields[16]);
    records.push_back(rec);
  }
  return records;
}

}  // namespace srop
