#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "srop/constraints.hpp"
#include "srop/grid.hpp"
#include "srop/metrics.hpp"
#include "srop/transform.hpp"

namespace srop {

enum class TerminationReason { tolerance, max_iterations };

inline const char* to_string(TerminationReason r) {
  return r == TerminationReason::tolerance ? "tolerance" : "max_iterations";
}

struct SolverConfig {
  double tolerance = 1e-8;
  int max_iterations = 1200;
  /// true runs the sparsity-regularized iteration; false is the plain
  /// Gerchberg-Saxton iteration (same code path, truncation disabled).
  bool sparsity_step_enabled = true;
  /// Record per-iteration distances to all three constraint sets (one extra
  /// transform pair per iteration).
  bool record_set_distances = false;
};

struct IterationRecord {
  int k = 0;
  double change = 0.0;
  std::optional<double> rms_support;
  std::optional<double> rms_full;
  std::optional<double> dist_fourier;
  std::optional<double> dist_amplitude;
  std::optional<double> dist_sparse;
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  TerminationReason reason = TerminationReason::max_iterations;
};

struct SolverResult {
  RealField estimate;
  IterationTrace trace;
  int iterations_used = 0;
};

/// Thrown when an iterate stops being finite; carries the iteration index and
/// whatever trace was recorded before the failure.
class NonFiniteIterateError : public std::runtime_error {
 public:
  NonFiniteIterateError(int iteration, IterationTrace partial)
      : std::runtime_error("non-finite iterate at iteration " + std::to_string(iteration)),
        iteration_(iteration),
        partial_trace_(std::move(partial)) {}

  int iteration() const { return iteration_; }
  const IterationTrace& partial_trace() const { return partial_trace_; }

 private:
  int iteration_;
  IterationTrace partial_trace_;
};

namespace detail {

inline void check_phase_input(const RealField& phi, const ProblemInstance& inst) {
  check_same_side(phi.n(), inst.n());
  for (double v : phi.values())
    if (!(std::fabs(v) <= kPi))
      throw std::invalid_argument("phase entries must lie in [-pi, pi]");
  auto it = inst.support().begin();
  const auto end = inst.support().end();
  for (int r = 0; r < phi.n(); ++r)
    for (int c = 0; c < phi.n(); ++c) {
      const bool on_support = (it != end && it->row == r && it->col == c);
      if (on_support)
        ++it;
      else if (phi(r, c) != 0.0)
        throw std::invalid_argument("phase must vanish outside the support");
    }
}

// One pass of steps (i)-(vi): modulate, transform with diversity, impose the
// measured modulus, transform back, impose the amplitude, read the phase, and
// (when enabled) keep only the s largest-magnitude phase entries.
inline RealField step_phase(const RealField& phi, const ProblemInstance& inst, bool truncate) {
  const ComplexField x = pupil_field(inst.chi(), phi);
  const ComplexField X = dft2(inst.diversity().apply(x));
  const ComplexField Y = project_modulus(X, inst.b());
  const ComplexField y = inst.diversity().apply_inverse(idft2(Y));
  const ComplexField z = project_amplitude(y, inst.chi());
  RealField next = principal_arg(z);
  if (truncate) {
    const SupportSet keep = select_support(next, inst.s(), inst.support());
    auto it = keep.begin();
    for (GridIndex idx : inst.support()) {
      if (it != keep.end() && *it == idx)
        ++it;
      else
        next(idx.row, idx.col) = 0.0;
    }
  }
  return next;
}

}  // namespace detail

/// One sparsity-regularized iteration applied to a phase estimate.
inline RealField srop_step(const RealField& phi, const ProblemInstance& inst) {
  detail::check_phase_input(phi, inst);
  return detail::step_phase(phi, inst, true);
}

/// One Gerchberg-Saxton iteration (no truncation).
inline RealField gs_step(const RealField& phi, const ProblemInstance& inst) {
  detail::check_phase_input(phi, inst);
  return detail::step_phase(phi, inst, false);
}

/// One application of the composed projector P_sparse . P_amplitude . P_fourier.
/// Agrees with srop_step through pupil_field/principal_arg.
inline ComplexField cyclic_step(const ComplexField& x, const ProblemInstance& inst) {
  return project_sparse_phase(
      project_amplitude(project_fourier_magnitude(x, inst), inst.chi()), inst);
}

/// Iterate until the phase change drops below the tolerance or the iteration
/// budget runs out. When `truth` is given, wrapped RMS errors against it are
/// recorded per iteration (over the support and over the full grid).
inline SolverResult run(const ProblemInstance& inst, const SolverConfig& config,
                        const RealField& initial_phase,
                        const std::optional<RealField>& truth = std::nullopt) {
  if (!(config.tolerance >= 0.0)) throw std::invalid_argument("tolerance must be >= 0");
  if (config.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  detail::check_phase_input(initial_phase, inst);
  if (truth) detail::check_same_side(truth->n(), inst.n());

  RealField phi = initial_phase;
  IterationTrace trace;
  trace.reason = TerminationReason::max_iterations;
  int used = 0;

  for (int k = 1; k <= config.max_iterations; ++k) {
    RealField next = detail::step_phase(phi, inst, config.sparsity_step_enabled);
    const double change = change_norm(phi, next);
    if (!std::isfinite(change) || !all_finite(next))
      throw NonFiniteIterateError(k, std::move(trace));

    IterationRecord rec;
    rec.k = k;
    rec.change = change;
    if (truth) {
      rec.rms_support = rms_phase_error(next, *truth, inst.support());
      rec.rms_full = raw_rms(next, *truth);
    }
    if (config.record_set_distances) {
      const ComplexField xk = pupil_field(inst.chi(), next);
      rec.dist_fourier = distance_to_set(xk, ConstraintSet::fourier_magnitude, inst);
      rec.dist_amplitude = distance_to_set(xk, ConstraintSet::amplitude, inst);
      rec.dist_sparse = distance_to_set(xk, ConstraintSet::sparse_phase, inst);
    }
    trace.records.push_back(rec);

    phi = std::move(next);
    used = k;
    if (change < config.tolerance) {
      trace.reason = TerminationReason::tolerance;
      break;
    }
  }
  return SolverResult{std::move(phi), std::move(trace), used};
}

struct RateEstimate {
  double rate = 1.0;
  double r_squared = 0.0;
};

/// Least-squares fit of log(change) against the iteration index over the
/// trailing `tail_fraction` of the trace; rate = exp(slope). Requires at
/// least 10 positive-change records in the window.
inline RateEstimate estimate_linear_rate(const IterationTrace& trace,
                                         double tail_fraction = 0.5) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw std::invalid_argument("tail_fraction must be in (0, 1]");
  const std::size_t total = trace.records.size();
  const std::size_t window =
      static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(total)));
  std::vector<std::pair<double, double>> pts;  // (k, log change)
  for (std::size_t i = total - window; i < total; ++i) {
    const IterationRecord& rec = trace.records[i];
    if (rec.change > 0.0)
      pts.emplace_back(static_cast<double>(rec.k), std::log(rec.change));
  }
  if (pts.size() < 10)
    throw std::runtime_error(
        "estimate_linear_rate: need at least 10 positive-change records in the tail");

  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  const double slope = sxy / sxx;
  double r2 = 1.0;
  if (syy > 0.0) {
    double ss_res = 0.0;
    for (const auto& [x, y] : pts) {
      const double fit = my + slope * (x - mx);
      ss_res += (y - fit) * (y - fit);
    }
    r2 = 1.0 - ss_res / syy;
  }
  return RateEstimate{std::exp(slope), r2};
}

}  // namespace srop
