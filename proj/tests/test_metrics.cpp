#include <catch2/catch.hpp>

#include <random>

#include "srop/grid.hpp"
#include "srop/metrics.hpp"

using namespace srop;

TEST_CASE("change_norm is the raw Frobenius difference") {
  RealField a(3), b(3);
  CHECK(change_norm(a, b) == 0.0);
  b(1, 1) = 2.0;
  CHECK(change_norm(a, b) == Approx(2.0));
  CHECK(change_norm(a, b) == change_norm(b, a));
  CHECK_THROWS_AS(change_norm(RealField(2), RealField(3)), std::invalid_argument);
}

TEST_CASE("rms_phase_error wraps before averaging") {
  const int n = 4;
  SupportSet full = SupportSet::full_grid(n);
  RealField truth(n, 0.3);

  CHECK(rms_phase_error(truth, truth, full) == 0.0);

  RealField shifted = truth;
  for (auto& v : shifted.values()) v += 2.0 * kPi;
  CHECK(rms_phase_error(shifted, truth, full) == Approx(0.0).margin(1e-12));

  RealField offset = truth;
  for (auto& v : offset.values()) v += kPi / 2.0;
  CHECK(rms_phase_error(offset, truth, full) == Approx(kPi / 2.0).epsilon(1e-12));

  CHECK_THROWS_AS(rms_phase_error(truth, truth, SupportSet()), std::invalid_argument);
}

TEST_CASE("rms_phase_error is invariant under 2*pi jumps at any pixel subset") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-kPi, kPi);
  const int n = 6;
  SupportSet full = SupportSet::full_grid(n);
  for (int trial = 0; trial < 50; ++trial) {
    RealField truth(n), est(n);
    for (auto& v : truth.values()) v = dist(rng);
    for (auto& v : est.values()) v = dist(rng);
    const double base = rms_phase_error(est, truth, full);
    CHECK(base <= kPi + 1e-12);

    RealField jumped = est;
    for (auto& v : jumped.values())
      if (dist(rng) > 0.0) v += 2.0 * kPi * static_cast<int>(1 + 2 * (dist(rng) > 0));
    CHECK(rms_phase_error(jumped, truth, full) == Approx(base).margin(1e-9));
  }
}

TEST_CASE("raw_rms is the unwrapped full-grid metric") {
  const int n = 3;
  RealField truth(n, 0.1);
  RealField shifted = truth;
  for (auto& v : shifted.values()) v += 2.0 * kPi;
  CHECK(raw_rms(truth, truth) == 0.0);
  CHECK(raw_rms(shifted, truth) == Approx(2.0 * kPi));  // no wrapping here
  CHECK(rms_phase_error(shifted, truth, SupportSet::full_grid(n)) ==
        Approx(0.0).margin(1e-12));
}

TEST_CASE("measured_sparsity mirrors zero_norm") {
  const int n = 4;
  SupportSet full = SupportSet::full_grid(n);
  CHECK(measured_sparsity(RealField(n), full) == 0);

  RealField f(n);
  f(0, 1) = 0.2;
  f(3, 3) = -0.7;
  f(2, 0) = 1e-300;
  CHECK(measured_sparsity(f, full) == 3);
}

TEST_CASE("wrap_to_principal lands in (-pi, pi]") {
  CHECK(wrap_to_principal(kPi) == Approx(kPi));
  CHECK(wrap_to_principal(-kPi) == Approx(kPi));
  CHECK(wrap_to_principal(2.0 * kPi) == Approx(0.0).margin(1e-15));
  CHECK(wrap_to_principal(3.0 * kPi) == Approx(kPi));
  CHECK(wrap_to_principal(0.0) == 0.0);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dist(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double w = wrap_to_principal(dist(rng));
    CHECK(w > -kPi - 1e-12);
    CHECK(w <= kPi + 1e-12);
  }
}
