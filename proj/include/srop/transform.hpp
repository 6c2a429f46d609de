#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "srop/grid.hpp"

namespace srop {

namespace detail {

struct FftPlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// Plan creation is not thread-safe in FFTW; executing a cached plan on fresh
// buffers via fftw_execute_dft is. Plans live for the process lifetime.
inline FftPlanPair fft_plans(int n) {
  static std::mutex mu;
  static std::map<int, FftPlanPair> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::vector<std::complex<double>> in(static_cast<std::size_t>(n) * n);
    std::vector<std::complex<double>> out(in.size());
    auto* pin = reinterpret_cast<fftw_complex*>(in.data());
    auto* pout = reinterpret_cast<fftw_complex*>(out.data());
    FftPlanPair plans;
    plans.forward =
        fftw_plan_dft_2d(n, n, pin, pout, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans.backward =
        fftw_plan_dft_2d(n, n, pin, pout, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    it = cache.emplace(n, plans).first;
  }
  return it->second;
}

inline ComplexField cyclic_shift(const ComplexField& f, int dr, int dc) {
  const int n = f.n();
  ComplexField out(n);
  for (int r = 0; r < n; ++r) {
    const int rr = (r + dr) % n;
    for (int c = 0; c < n; ++c) out(rr, (c + dc) % n) = f(r, c);
  }
  return out;
}

// Unitary centered transform: move grid center to index 0, run the raw FFT,
// move index 0 back to the center, scale by 1/n.
inline ComplexField centered_fft(const ComplexField& f, bool forward) {
  const int n = f.n();
  ComplexField pre = cyclic_shift(f, (n + 1) / 2, (n + 1) / 2);
  ComplexField raw(n);
  FftPlanPair plans = fft_plans(n);
  fftw_execute_dft(forward ? plans.forward : plans.backward,
                   reinterpret_cast<fftw_complex*>(pre.values().data()),
                   reinterpret_cast<fftw_complex*>(raw.values().data()));
  ComplexField out = cyclic_shift(raw, n / 2, n / 2);
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& v : out.values()) v *= scale;
  return out;
}

}  // namespace detail

/// Unitary 2-D DFT with the DC component at the array center. Preserves the
/// Frobenius norm; idft2 is its exact inverse.
inline ComplexField dft2(const ComplexField& f) { return detail::centered_fft(f, true); }

inline ComplexField idft2(const ComplexField& F) { return detail::centered_fft(F, false); }

/// Multiplication by a fixed unimodular phase screen: f -> f .* exp(j*phase).
/// Unitary; apply_inverse multiplies by the conjugate screen.
class DiversityOperator {
 public:
  explicit DiversityOperator(RealField phase)
      : phase_(std::move(phase)), phasor_(unit_phasor(phase_)) {}

  int n() const { return phase_.n(); }
  const RealField& phase() const { return phase_; }

  ComplexField apply(const ComplexField& f) const {
    detail::check_same_side(f.n(), phase_.n());
    return hadamard(f, phasor_);
  }

  ComplexField apply_inverse(const ComplexField& f) const {
    detail::check_same_side(f.n(), phase_.n());
    ComplexField out(f.n());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] * std::conj(phasor_[i]);
    return out;
  }

 private:
  RealField phase_;
  ComplexField phasor_;
};

inline ComplexField apply_diversity(const DiversityOperator& d, const ComplexField& f) {
  return d.apply(f);
}

inline ComplexField apply_inverse_diversity(const DiversityOperator& d, const ComplexField& f) {
  return d.apply_inverse(f);
}

}  // namespace srop
