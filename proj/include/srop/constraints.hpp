#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "srop/grid.hpp"
#include "srop/transform.hpp"

namespace srop {

/// The three constraint sets of the sparse-phase feasibility problem.
enum class ConstraintSet {
  fourier_magnitude,  // |F(x .* exp(j*diversity))|^2 = b
  amplitude,          // |x| = chi
  sparse_phase,       // |x| = chi and the phase has at most s nonzeros
};

/// Everything one retrieval problem needs: measured intensity b, amplitude
/// modulation chi (uniform on its positive support), diversity phase, and the
/// sparsity parameter s. The support is derived from chi at construction.
class ProblemInstance {
 public:
  ProblemInstance(RealField b, RealField chi, RealField diversity_phase, int s)
      : b_(std::move(b)),
        chi_(std::move(chi)),
        diversity_(std::move(diversity_phase)),
        s_(s),
        support_(SupportSet::from_mask(chi_)) {
    detail::check_same_side(b_.n(), chi_.n());
    detail::check_same_side(b_.n(), diversity_.n());
    for (double v : b_.values())
      if (!(v >= 0.0)) throw std::invalid_argument("intensity image must be nonnegative");
    for (double v : chi_.values())
      if (!(v >= 0.0)) throw std::invalid_argument("amplitude modulation must be nonnegative");
    if (!support_.empty()) {
      double lo = chi_(support_.indices().front().row, support_.indices().front().col);
      double hi = lo;
      for (GridIndex idx : support_) {
        lo = std::min(lo, chi_(idx.row, idx.col));
        hi = std::max(hi, chi_(idx.row, idx.col));
      }
      if (hi - lo > 1e-12 * hi)
        throw std::invalid_argument(
            "amplitude modulation must be uniform on its support");
      chi_value_ = hi;
    }
    if (s_ < 0 || static_cast<std::size_t>(s_) > support_.size())
      throw std::invalid_argument("sparsity parameter out of range [0, |support|]");
  }

  int n() const { return b_.n(); }
  const RealField& b() const { return b_; }
  const RealField& chi() const { return chi_; }
  const DiversityOperator& diversity() const { return diversity_; }
  int s() const { return s_; }
  const SupportSet& support() const { return support_; }
  /// The uniform value of chi on its support (0 for an empty support).
  double chi_support_value() const { return chi_value_; }

 private:
  RealField b_;
  RealField chi_;
  DiversityOperator diversity_;
  int s_;
  SupportSet support_;
  double chi_value_ = 0.0;
};

/// x = chi .* exp(j*phi), the generalized pupil field of a phase estimate.
inline ComplexField pupil_field(const RealField& chi, const RealField& phi) {
  detail::check_same_side(chi.n(), phi.n());
  ComplexField out(chi.n());
  for (std::size_t i = 0; i < chi.size(); ++i) out[i] = std::polar(chi[i], phi[i]);
  return out;
}

/// Nearest point with |out|^2 = b: out = sqrt(b) .* Y/|Y|. Zero entries of Y
/// take phase 0, the deterministic canonical pick.
inline ComplexField project_modulus(const ComplexField& Y, const RealField& b) {
  detail::check_same_side(Y.n(), b.n());
  ComplexField out(Y.n());
  for (std::size_t i = 0; i < Y.size(); ++i) {
    if (!(b[i] >= 0.0))
      throw std::invalid_argument("project_modulus: negative intensity entry");
    const double r = std::sqrt(b[i]);
    const std::complex<double>& y = Y[i];
    if (y.real() == 0.0 && y.imag() == 0.0) {
      out[i] = {r, 0.0};
    } else {
      out[i] = y * (r / std::abs(y));
    }
  }
  return out;
}

/// Projector onto the Fourier-magnitude set: conjugate project_modulus by the
/// unitary pair (diversity screen, centered DFT).
inline ComplexField project_fourier_magnitude(const ComplexField& x,
                                              const ProblemInstance& inst) {
  detail::check_same_side(x.n(), inst.n());
  const DiversityOperator& d = inst.diversity();
  return d.apply_inverse(idft2(project_modulus(dft2(d.apply(x)), inst.b())));
}

/// Projector onto {|x| = chi}: keep the phase, replace the modulus.
/// arg(0) := 0, so zero entries project to chi itself.
inline ComplexField project_amplitude(const ComplexField& y, const RealField& chi) {
  detail::check_same_side(y.n(), chi.n());
  ComplexField out(y.n());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(chi[i] >= 0.0))
      throw std::invalid_argument("project_amplitude: negative modulation entry");
    out[i] = std::polar(chi[i], principal_arg(y[i]));
  }
  return out;
}

/// The s indices of largest |phi| within `domain`; ties go to the smallest
/// row-major index so iterates are reproducible.
inline SupportSet select_support(const RealField& phi, int s, const SupportSet& domain) {
  if (s < 0 || static_cast<std::size_t>(s) > domain.size())
    throw std::invalid_argument("select_support: s out of range [0, |domain|]");
  if (static_cast<std::size_t>(s) == domain.size()) return domain;

  struct Entry {
    double mag;
    GridIndex idx;
  };
  std::vector<Entry> entries;
  entries.reserve(domain.size());
  for (GridIndex idx : domain) {
    if (idx.row >= phi.n() || idx.col >= phi.n())
      throw std::invalid_argument("select_support: domain index outside the grid");
    entries.push_back({std::fabs(phi(idx.row, idx.col)), idx});
  }
  auto before = [](const Entry& a, const Entry& b) {
    if (a.mag != b.mag) return a.mag > b.mag;
    return a.idx < b.idx;
  };
  std::nth_element(entries.begin(), entries.begin() + s, entries.end(), before);
  std::vector<GridIndex> chosen;
  chosen.reserve(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i) chosen.push_back(entries[i].idx);
  std::sort(chosen.begin(), chosen.end());
  return SupportSet(std::move(chosen));
}

namespace detail {

inline bool on_amplitude_set(const ComplexField& z, const ProblemInstance& inst) {
  const double tol = 1e-9 * std::max(1.0, inst.chi_support_value());
  for (std::size_t i = 0; i < z.size(); ++i)
    if (std::fabs(std::abs(z[i]) - inst.chi()[i]) > tol) return false;
  return true;
}

}  // namespace detail

/// Projector onto the sparse-phase set, in the closed form valid for inputs
/// on the amplitude set: keep the phase on the s largest-|phase| support
/// indices, zero it elsewhere. Inputs off the amplitude set (beyond a 1e-9
/// guard scaled by max(1, chi)) are rejected.
inline ComplexField project_sparse_phase(const ComplexField& z, const ProblemInstance& inst) {
  detail::check_same_side(z.n(), inst.n());
  if (!detail::on_amplitude_set(z, inst))
    throw std::invalid_argument("project_sparse_phase: input is not on the amplitude set");
  const RealField phi = principal_arg(z);
  const SupportSet keep = select_support(phi, inst.s(), inst.support());
  ComplexField out(z.n());
  const double r = inst.chi_support_value();
  auto it = keep.begin();
  for (GridIndex idx : inst.support()) {
    const bool kept = (it != keep.end() && *it == idx);
    if (kept) ++it;
    out(idx.row, idx.col) = std::polar(r, kept ? phi(idx.row, idx.col) : 0.0);
  }
  return out;
}

namespace detail {

inline bool combinations_exceed(std::size_t n, std::size_t k, double cap) {
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    c *= static_cast<double>(n - k + i) / static_cast<double>(i);
    if (c > cap) return true;
  }
  return false;
}

}  // namespace detail

/// Exhaustive metric projection onto the sparse-phase set: enumerate every
/// s-element support subset, form the candidate, keep the global minimizers
/// of the distance (ties resolved at 1e-12 resolution). Test oracle for the
/// closed-form projector; guarded to ~1e6 subsets.
inline std::vector<ComplexField> brute_force_sparse_phase_projection(
    const ComplexField& z, const ProblemInstance& inst) {
  detail::check_same_side(z.n(), inst.n());
  if (!detail::on_amplitude_set(z, inst))
    throw std::invalid_argument(
        "brute_force_sparse_phase_projection: input is not on the amplitude set");
  const std::size_t m = inst.support().size();
  const std::size_t s = static_cast<std::size_t>(inst.s());
  if (detail::combinations_exceed(m, s, 1e6))
    throw std::runtime_error(
        "brute_force_sparse_phase_projection: subset count exceeds the enumeration guard");

  const RealField phi = principal_arg(z);
  const double r = inst.chi_support_value();
  const auto& sup = inst.support().indices();

  auto candidate_for = [&](const std::vector<std::size_t>& picks) {
    ComplexField cand(z.n());
    std::size_t p = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const bool kept = (p < picks.size() && picks[p] == i);
      if (kept) ++p;
      const GridIndex idx = sup[i];
      cand(idx.row, idx.col) = std::polar(r, kept ? phi(idx.row, idx.col) : 0.0);
    }
    return cand;
  };

  constexpr double kTie = 1e-12;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, ComplexField>> minimizers;

  std::vector<std::size_t> picks(s);
  for (std::size_t i = 0; i < s; ++i) picks[i] = i;
  for (;;) {
    ComplexField cand = candidate_for(picks);
    const double dist = frobenius_distance(z, cand);
    if (dist < best - kTie) {
      best = dist;
      std::erase_if(minimizers, [&](const auto& mc) { return mc.first > best + kTie; });
      minimizers.emplace_back(dist, std::move(cand));
    } else if (dist <= best + kTie) {
      best = std::min(best, dist);
      minimizers.emplace_back(dist, std::move(cand));
    }
    // next combination in lexicographic order
    if (s == 0) break;
    std::size_t i = s;
    while (i > 0 && picks[i - 1] == m - s + i - 1) --i;
    if (i == 0) break;
    ++picks[i - 1];
    for (std::size_t j = i; j < s; ++j) picks[j] = picks[j - 1] + 1;
  }

  std::vector<ComplexField> out;
  out.reserve(minimizers.size());
  for (auto& mc : minimizers)
    if (mc.first <= best + kTie) out.push_back(std::move(mc.second));
  return out;
}

/// Frobenius distance to the chosen set, via its projector. For the
/// sparse-phase set the input is routed through the amplitude projector
/// first when it is not already on the amplitude set; that value is an
/// upper-bound diagnostic, exact for amplitude-set inputs.
inline double distance_to_set(const ComplexField& x, ConstraintSet which,
                              const ProblemInstance& inst) {
  switch (which) {
    case ConstraintSet::fourier_magnitude:
      return frobenius_distance(x, project_fourier_magnitude(x, inst));
    case ConstraintSet::amplitude:
      return frobenius_distance(x, project_amplitude(x, inst.chi()));
    case ConstraintSet::sparse_phase: {
      const ComplexField z =
          detail::on_amplitude_set(x, inst) ? x : project_amplitude(x, inst.chi());
      return frobenius_distance(x, project_sparse_phase(z, inst));
    }
  }
  throw std::invalid_argument("distance_to_set: unknown constraint set");
}

}  // namespace srop
