#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace srop {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// 0-based (row, col) position on an n x n grid. Ordering is row-major.
struct GridIndex {
  int row = 0;
  int col = 0;
  friend constexpr auto operator<=>(GridIndex, GridIndex) = default;
};

namespace detail {
inline int checked_side(int n) {
  if (n < 1) throw std::invalid_argument("grid side must be positive");
  return n;
}
}  // namespace detail

/// Dense n x n real-valued field, row-major storage.
class RealField {
 public:
  explicit RealField(int n, double fill = 0.0)
      : n_(detail::checked_side(n)),
        data_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), fill) {}

  RealField(int n, std::vector<double> data)
      : n_(detail::checked_side(n)), data_(std::move(data)) {
    if (data_.size() != size()) throw std::invalid_argument("data length must equal n^2");
  }

  int n() const { return n_; }
  std::size_t size() const {
    return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
  }

  double& operator()(int r, int c) { return data_[flat(r, c)]; }
  double operator()(int r, int c) const { return data_[flat(r, c)]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  friend bool operator==(const RealField&, const RealField&) = default;

 private:
  std::size_t flat(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(c);
  }
  int n_;
  std::vector<double> data_;
};

/// Dense n x n complex-valued field, row-major storage.
class ComplexField {
 public:
  explicit ComplexField(int n, std::complex<double> fill = {0.0, 0.0})
      : n_(detail::checked_side(n)),
        data_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), fill) {}

  ComplexField(int n, std::vector<std::complex<double>> data)
      : n_(detail::checked_side(n)), data_(std::move(data)) {
    if (data_.size() != size()) throw std::invalid_argument("data length must equal n^2");
  }

  int n() const { return n_; }
  std::size_t size() const {
    return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
  }

  std::complex<double>& operator()(int r, int c) { return data_[flat(r, c)]; }
  const std::complex<double>& operator()(int r, int c) const { return data_[flat(r, c)]; }
  std::complex<double>& operator[](std::size_t i) { return data_[i]; }
  const std::complex<double>& operator[](std::size_t i) const { return data_[i]; }

  std::vector<std::complex<double>>& values() { return data_; }
  const std::vector<std::complex<double>>& values() const { return data_; }

  friend bool operator==(const ComplexField&, const ComplexField&) = default;

 private:
  std::size_t flat(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(c);
  }
  int n_;
  std::vector<std::complex<double>> data_;
};

/// An ordered set of grid indices, strictly increasing in row-major order.
class SupportSet {
 public:
  SupportSet() = default;

  explicit SupportSet(std::vector<GridIndex> indices) : indices_(std::move(indices)) {
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      if (indices_[i].row < 0 || indices_[i].col < 0)
        throw std::invalid_argument("support index out of range");
      if (i > 0 && !(indices_[i - 1] < indices_[i]))
        throw std::invalid_argument("support indices must be strictly increasing row-major");
    }
  }

  static SupportSet full_grid(int n) {
    detail::checked_side(n);
    std::vector<GridIndex> idx;
    idx.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) idx.push_back({r, c});
    return SupportSet(std::move(idx));
  }

  /// Indices where the mask is strictly positive.
  static SupportSet from_mask(const RealField& mask) {
    std::vector<GridIndex> idx;
    for (int r = 0; r < mask.n(); ++r)
      for (int c = 0; c < mask.n(); ++c)
        if (mask(r, c) > 0.0) idx.push_back({r, c});
    return SupportSet(std::move(idx));
  }

  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  const std::vector<GridIndex>& indices() const { return indices_; }
  bool contains(GridIndex idx) const {
    return std::binary_search(indices_.begin(), indices_.end(), idx);
  }

  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  std::vector<GridIndex> indices_;
};

inline double frobenius_norm(const RealField& f) {
  double acc = 0.0;
  for (double v : f.values()) acc += v * v;
  return std::sqrt(acc);
}

inline double frobenius_norm(const ComplexField& f) {
  double acc = 0.0;
  for (const auto& v : f.values()) acc += std::norm(v);
  return std::sqrt(acc);
}

inline double frobenius_distance(const ComplexField& a, const ComplexField& b) {
  if (a.n() != b.n()) throw std::invalid_argument("field dimensions must match");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i] - b[i]);
  return std::sqrt(acc);
}

/// Count of entries in `domain` that are nonzero exactly. Sparse phases are
/// produced by explicit truncation, so zeros are exact and no threshold applies.
inline int zero_norm(const RealField& f, const SupportSet& domain) {
  int count = 0;
  for (GridIndex idx : domain) {
    if (idx.row >= f.n() || idx.col >= f.n())
      throw std::invalid_argument("domain index outside the grid");
    if (f(idx.row, idx.col) != 0.0) ++count;
  }
  return count;
}

/// Principal argument in (-pi, pi]; arg(0) := 0 by convention.
inline double principal_arg(const std::complex<double>& z) {
  if (z.real() == 0.0 && z.imag() == 0.0) return 0.0;
  double a = std::atan2(z.imag(), z.real());
  if (a <= -kPi) a = kPi;
  return a;
}

inline RealField principal_arg(const ComplexField& f) {
  RealField out(f.n());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = principal_arg(f[i]);
  return out;
}

inline RealField abs(const ComplexField& f) {
  RealField out(f.n());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::abs(f[i]);
  return out;
}

inline RealField sqrt(const RealField& f) {
  RealField out(f.n());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::sqrt(f[i]);
  return out;
}

/// exp(j*phase), element-wise.
inline ComplexField unit_phasor(const RealField& phase) {
  ComplexField out(phase.n());
  for (std::size_t i = 0; i < phase.size(); ++i) out[i] = std::polar(1.0, phase[i]);
  return out;
}

namespace detail {
inline void check_same_side(int a, int b) {
  if (a != b) throw std::invalid_argument("field dimensions must match");
}
}  // namespace detail

inline ComplexField hadamard(const ComplexField& a, const ComplexField& b) {
  detail::check_same_side(a.n(), b.n());
  ComplexField out(a.n());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

inline ComplexField hadamard(const RealField& a, const ComplexField& b) {
  detail::check_same_side(a.n(), b.n());
  ComplexField out(b.n());
  for (std::size_t i = 0; i < b.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

inline RealField hadamard(const RealField& a, const RealField& b) {
  detail::check_same_side(a.n(), b.n());
  RealField out(a.n());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

/// Element-wise quotient; entries divide with IEEE semantics (0/0 -> NaN).
inline ComplexField divide(const ComplexField& a, const RealField& b) {
  detail::check_same_side(a.n(), b.n());
  ComplexField out(a.n());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] / b[i];
  return out;
}

inline bool all_finite(const RealField& f) {
  for (double v : f.values())
    if (!std::isfinite(v)) return false;
  return true;
}

inline bool all_finite(const ComplexField& f) {
  for (const auto& v : f.values())
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

}  // namespace srop
