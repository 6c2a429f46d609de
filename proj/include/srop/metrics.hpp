#pragma once

#include <cmath>
#include <stdexcept>

#include "srop/grid.hpp"

namespace srop {

/// Map into the principal interval (-pi, pi].
inline double wrap_to_principal(double x) {
  return x - 2.0 * kPi * std::ceil((x - kPi) / (2.0 * kPi));
}

/// Frobenius norm of the raw difference, no wrapping. This is the quantity
/// the stopping criterion watches.
inline double change_norm(const RealField& a, const RealField& b) {
  detail::check_same_side(a.n(), b.n());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

/// Root-mean-square of the wrapped phase difference over `support`. Wrapping
/// makes the metric invariant under 2*pi shifts at any subset of pixels and
/// bounds it by pi.
inline double rms_phase_error(const RealField& estimate, const RealField& truth,
                              const SupportSet& support) {
  detail::check_same_side(estimate.n(), truth.n());
  if (support.empty()) throw std::invalid_argument("rms_phase_error: empty support");
  double acc = 0.0;
  for (GridIndex idx : support) {
    if (idx.row >= estimate.n() || idx.col >= estimate.n())
      throw std::invalid_argument("rms_phase_error: support index outside the grid");
    const double d = wrap_to_principal(estimate(idx.row, idx.col) - truth(idx.row, idx.col));
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(support.size()));
}

/// Unwrapped RMS of the raw difference over the full grid. Logged alongside
/// the wrapped support metric for transparency; not used as a quality gate.
inline double raw_rms(const RealField& estimate, const RealField& truth) {
  detail::check_same_side(estimate.n(), truth.n());
  double acc = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double d = estimate[i] - truth[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(estimate.size()));
}

/// Number of nonzero phase entries over `support` (reporting alias of zero_norm).
inline int measured_sparsity(const RealField& phi, const SupportSet& support) {
  return zero_norm(phi, support);
}

}  // namespace srop
