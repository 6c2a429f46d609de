#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "srop/constraints.hpp"
#include "srop/grid.hpp"
#include "srop/transform.hpp"

namespace srop {

/// Parameters of one synthetic retrieval scene. All randomness flows through
/// `seed`: the phase sampler consumes the seed directly, the photon-noise
/// stream uses seed ^ 0x9e3779b97f4a7c15 so the two streams are decorrelated.
struct SimulationSpec {
  int n = 128;
  int aperture_diameter = 64;
  double diversity_coefficient = 4.0;
  int sparsity_level = 0;
  double phase_min = -kPi;
  double phase_max = kPi;
  std::optional<double> photon_budget;  // nullopt = noise-free
  std::uint64_t seed = 0;
};

namespace detail {

// Deterministic bounded draw and uniform double; std:: distributions are
// implementation-defined, the engine itself is not.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % bound;
  }
}

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::uint64_t poisson_small(std::mt19937_64& rng, double mean) {
  const double limit = std::exp(-mean);
  std::uint64_t k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= uniform01(rng);
  } while (p > limit);
  return k - 1;
}

// Hoermann's transformed-rejection sampler (PTRS), exact for mean >= 10.
inline std::uint64_t poisson_ptrs(std::mt19937_64& rng, double mean) {
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);
  for (;;) {
    const double u = uniform01(rng) - 0.5;
    const double v = uniform01(rng);
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        k * log_mean - mean - std::lgamma(k + 1.0))
      return static_cast<std::uint64_t>(k);
  }
}

inline std::uint64_t poisson_draw(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0;
  if (mean < 10.0) return poisson_small(rng, mean);
  return poisson_ptrs(rng, mean);
}

inline std::pair<double, double> pixel_offset(int r, int c, int n) {
  const double center = static_cast<double>(n) / 2.0;
  return {static_cast<double>(r) + 0.5 - center, static_cast<double>(c) + 0.5 - center};
}

}  // namespace detail

/// Binary disk mask: pixel centers at (r+0.5, c+0.5), disk center (n/2, n/2),
/// included iff the center lies within diameter/2.
inline RealField circular_aperture(int n, int diameter) {
  if (diameter < 1 || diameter > n)
    throw std::invalid_argument("aperture diameter must be in [1, n]");
  RealField mask(n);
  const double radius2 = 0.25 * static_cast<double>(diameter) * static_cast<double>(diameter);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const auto [dr, dc] = detail::pixel_offset(r, c, n);
      if (dr * dr + dc * dc <= radius2) mask(r, c) = 1.0;
    }
  return mask;
}

/// Defocus screen 2*rho^2 - 1 on the aperture (rho = 1 at the rim), 0 outside.
inline RealField zernike_defocus(int n, int diameter) {
  if (diameter < 1 || diameter > n)
    throw std::invalid_argument("aperture diameter must be in [1, n]");
  RealField out(n);
  const double radius2 = 0.25 * static_cast<double>(diameter) * static_cast<double>(diameter);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const auto [dr, dc] = detail::pixel_offset(r, c, n);
      const double rho2 = (dr * dr + dc * dc) / radius2;
      if (rho2 <= 1.0) out(r, c) = 2.0 * rho2 - 1.0;
    }
  return out;
}

/// Exactly `sparsity` uniformly chosen support indices receive independent
/// uniform values in [phase_min, phase_max] (exact zeros are resampled); all
/// other entries are zero. Bit-reproducible for a given seed.
inline RealField random_sparse_phase(int n, const SupportSet& support, int sparsity,
                                     double phase_min, double phase_max,
                                     std::uint64_t seed) {
  if (sparsity < 0 || static_cast<std::size_t>(sparsity) > support.size())
    throw std::invalid_argument("sparsity out of range [0, |support|]");
  if (!(phase_min <= phase_max))
    throw std::invalid_argument("phase range must satisfy min <= max");
  if (sparsity > 0 && phase_min == 0.0 && phase_max == 0.0)
    throw std::invalid_argument("phase range {0} cannot produce nonzero entries");
  for (GridIndex idx : support)
    if (idx.row >= n || idx.col >= n)
      throw std::invalid_argument("support index outside the grid");
  RealField out(n);

  std::mt19937_64 rng(seed);
  std::vector<GridIndex> pool(support.indices());
  for (int i = 0; i < sparsity; ++i) {
    const std::size_t j =
        static_cast<std::size_t>(i) +
        detail::bounded_draw(rng, static_cast<std::uint64_t>(pool.size() - i));
    std::swap(pool[i], pool[j]);
    double value = 0.0;
    do {
      value = phase_min + detail::uniform01(rng) * (phase_max - phase_min);
    } while (value == 0.0);
    out(pool[i].row, pool[i].col) = value;
  }
  return out;
}

/// Intensity image of the modulated pupil: |dft2(ap .* exp(j(phase + diversity)))|^2.
/// The unitary transform conserves the photon sum: sum(b) = sum(ap^2).
inline RealField synthesize_psf(const RealField& phase, const SimulationSpec& spec) {
  detail::check_same_side(phase.n(), spec.n);
  const RealField aperture = circular_aperture(spec.n, spec.aperture_diameter);
  RealField defocus = zernike_defocus(spec.n, spec.aperture_diameter);
  for (auto& v : defocus.values()) v *= spec.diversity_coefficient;
  ComplexField pupil(spec.n);
  for (std::size_t i = 0; i < pupil.size(); ++i)
    pupil[i] = std::polar(aperture[i], phase[i] + defocus[i]);
  const ComplexField far = dft2(pupil);
  RealField b(spec.n);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::norm(far[i]);
  return b;
}

/// Photon-limited copy of b: with scale lambda = photon_budget / sum(b), each
/// entry becomes Poisson(lambda * b) / lambda. Zero entries stay exactly zero.
inline RealField poisson_noise(const RealField& b, double photon_budget, std::uint64_t seed) {
  if (!(photon_budget > 0.0)) throw std::invalid_argument("photon budget must be positive");
  double total = 0.0;
  for (double v : b.values()) {
    if (!(v >= 0.0)) throw std::invalid_argument("intensity image must be nonnegative");
    total += v;
  }
  if (total == 0.0)
    throw std::invalid_argument("poisson_noise: intensity image sums to zero");
  const double lambda = photon_budget / total;
  std::mt19937_64 rng(seed);
  RealField out(b.n());
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i] == 0.0) continue;
    out[i] = static_cast<double>(detail::poisson_draw(rng, lambda * b[i])) / lambda;
  }
  return out;
}

/// A fully materialized synthetic scene.
struct SyntheticInstance {
  RealField aperture;
  SupportSet support;
  RealField truth_phase;
  RealField diversity_phase;
  RealField psf;
  std::optional<RealField> noisy_psf;
};

inline SyntheticInstance synthesize(const SimulationSpec& spec) {
  RealField aperture = circular_aperture(spec.n, spec.aperture_diameter);
  SupportSet support = SupportSet::from_mask(aperture);
  if (static_cast<std::size_t>(spec.sparsity_level) > support.size())
    throw std::invalid_argument("sparsity level exceeds the aperture pixel count");
  RealField truth = random_sparse_phase(spec.n, support, spec.sparsity_level,
                                        spec.phase_min, spec.phase_max, spec.seed);
  RealField defocus = zernike_defocus(spec.n, spec.aperture_diameter);
  for (auto& v : defocus.values()) v *= spec.diversity_coefficient;
  RealField psf = synthesize_psf(truth, spec);
  std::optional<RealField> noisy;
  if (spec.photon_budget)
    noisy = poisson_noise(psf, *spec.photon_budget, spec.seed ^ 0x9e3779b97f4a7c15ull);
  return SyntheticInstance{std::move(aperture), std::move(support), std::move(truth),
                           std::move(defocus),  std::move(psf),     std::move(noisy)};
}

/// Assemble the retrieval problem from a synthetic scene.
inline ProblemInstance make_problem(const SyntheticInstance& scene, int s, bool use_noisy) {
  if (use_noisy && !scene.noisy_psf)
    throw std::invalid_argument("make_problem: scene has no noisy intensity image");
  return ProblemInstance(use_noisy ? *scene.noisy_psf : scene.psf, scene.aperture,
                         scene.diversity_phase, s);
}

}  // namespace srop
