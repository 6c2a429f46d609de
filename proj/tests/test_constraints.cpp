#include <catch2/catch.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "srop/constraints.hpp"
#include "srop/grid.hpp"
#include "srop/simulate.hpp"
#include "srop/transform.hpp"

using namespace srop;

namespace {

// Small instance with uniform chi on a chosen mask and a synthesized b.
ProblemInstance make_instance(int n, const RealField& chi, const RealField& diversity,
                              const RealField& truth_phase, int s) {
  ComplexField pupil(n);
  for (std::size_t i = 0; i < pupil.size(); ++i)
    pupil[i] = std::polar(chi[i], truth_phase[i] + diversity[i]);
  ComplexField far = dft2(pupil);
  RealField b(n);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::norm(far[i]);
  return ProblemInstance(b, chi, diversity, s);
}

RealField random_phase_on(const SupportSet& support, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-kPi, kPi);
  RealField phi(n);
  for (GridIndex idx : support) phi(idx.row, idx.col) = dist(rng);
  return phi;
}

}  // namespace

TEST_CASE("ProblemInstance validates its data") {
  const int n = 4;
  RealField chi(n, 1.0);
  RealField zero(n);

  SECTION("negative intensity is rejected") {
    RealField b(n);
    b(0, 0) = -1.0;
    CHECK_THROWS_AS(ProblemInstance(b, chi, zero, 1), std::invalid_argument);
  }
  SECTION("nonuniform modulation on the support is rejected") {
    RealField bad = chi;
    bad(1, 1) = 2.0;
    CHECK_THROWS_AS(ProblemInstance(zero, bad, zero, 1), std::invalid_argument);
  }
  SECTION("masked modulation is uniform on its support") {
    RealField masked(n);
    masked(0, 0) = 0.7;
    masked(2, 3) = 0.7;
    ProblemInstance inst(zero, masked, zero, 1);
    CHECK(inst.support().size() == 2);
    CHECK(inst.chi_support_value() == 0.7);
  }
  SECTION("s outside [0, |support|] is rejected") {
    CHECK_THROWS_AS(ProblemInstance(zero, chi, zero, -1), std::invalid_argument);
    CHECK_THROWS_AS(ProblemInstance(zero, chi, zero, n * n + 1), std::invalid_argument);
  }
}

TEST_CASE("project_modulus pointwise behavior") {
  RealField b(2);
  b(0, 0) = 100.0;
  b(0, 1) = 4.0;
  ComplexField Y(2);
  Y(0, 0) = {3.0, 4.0};
  Y(0, 1) = {0.0, 0.0};
  ComplexField out = project_modulus(Y, b);
  CHECK(out(0, 0).real() == Approx(6.0).epsilon(1e-14));
  CHECK(out(0, 0).imag() == Approx(8.0).epsilon(1e-14));
  CHECK(out(0, 1) == std::complex<double>{2.0, 0.0});
  CHECK(out(1, 0) == std::complex<double>{0.0, 0.0});

  SECTION("feasible input is a fixed point") {
    ComplexField again = project_modulus(out, b);
    CHECK(frobenius_distance(again, out) <= 1e-12);
  }
  SECTION("negative intensity entry throws") {
    b(1, 1) = -0.5;
    CHECK_THROWS_AS(project_modulus(Y, b), std::invalid_argument);
  }
  SECTION("feasibility: |out|^2 = b entry-wise") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(0.0, 5.0);
    RealField rb(4);
    for (auto& v : rb.values()) v = dist(rng);
    ComplexField ry(4);
    for (auto& v : ry.values()) v = {dist(rng) - 2.5, dist(rng) - 2.5};
    ComplexField p = project_modulus(ry, rb);
    double max_b = 0.0;
    for (double v : rb.values()) max_b = std::max(max_b, v);
    for (std::size_t i = 0; i < p.size(); ++i)
      CHECK(std::fabs(std::norm(p[i]) - rb[i]) <= 1e-12 * std::max(1.0, max_b));
  }
}

TEST_CASE("project_fourier_magnitude") {
  const int n = 8;
  std::mt19937_64 rng(21);
  RealField chi = circular_aperture(n, 6);
  SupportSet support = SupportSet::from_mask(chi);
  RealField diversity = zernike_defocus(n, 6);
  RealField truth = random_phase_on(support, n, rng);
  ProblemInstance inst = make_instance(n, chi, diversity, truth, static_cast<int>(support.size()));

  SECTION("a noise-free solution is its own projection") {
    ComplexField x = pupil_field(chi, truth);
    ComplexField proj = project_fourier_magnitude(x, inst);
    CHECK(frobenius_distance(proj, x) <= 1e-12 * frobenius_norm(x));
  }

  SECTION("zero diversity reduces to idft2 . project_modulus . dft2") {
    ProblemInstance plain = make_instance(n, chi, RealField(n), truth, 2);
    ComplexField x(n);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (auto& v : x.values()) v = {dist(rng), dist(rng)};
    ComplexField lhs = project_fourier_magnitude(x, plain);
    ComplexField rhs = idft2(project_modulus(dft2(x), plain.b()));
    CHECK(frobenius_distance(lhs, rhs) == 0.0);
  }

  SECTION("matches the explicit step-by-step composition") {
    ComplexField x(n);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (auto& v : x.values()) v = {dist(rng), dist(rng)};
    ComplexField X = dft2(inst.diversity().apply(x));
    ComplexField Y = project_modulus(X, inst.b());
    ComplexField y = inst.diversity().apply_inverse(idft2(Y));
    ComplexField lhs = project_fourier_magnitude(x, inst);
    CHECK(frobenius_distance(lhs, y) <= 1e-12 * frobenius_norm(y));
    // output lies on the Fourier-magnitude set
    ComplexField check = dft2(inst.diversity().apply(lhs));
    double gap = 0.0, bnorm = 0.0;
    for (std::size_t i = 0; i < check.size(); ++i) {
      const double d = std::norm(check[i]) - inst.b()[i];
      gap += d * d;
      bnorm += inst.b()[i] * inst.b()[i];
    }
    CHECK(std::sqrt(gap) <= 1e-9 * std::sqrt(bnorm));
  }
}

TEST_CASE("project_amplitude pointwise behavior") {
  RealField chi(2, 1.0);
  ComplexField y(2);
  y(0, 0) = {-2.0, 0.0};
  y(0, 1) = {0.0, 0.0};
  y(1, 0) = {0.5, 0.5};
  ComplexField out = project_amplitude(y, chi);
  CHECK(std::abs(out(0, 0) - std::complex<double>{-1.0, 0.0}) < 1e-12);
  CHECK(out(0, 1) == std::complex<double>{1.0, 0.0});
  CHECK(std::abs(out(1, 0)) == Approx(1.0).epsilon(1e-14));

  SECTION("a feasible point is unchanged") {
    ComplexField z = unit_phasor(RealField(2, 0.4));
    ComplexField proj = project_amplitude(z, chi);
    CHECK(frobenius_distance(proj, z) <= 1e-12);
  }
  SECTION("output modulus equals chi") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    ComplexField r(3);
    for (auto& v : r.values()) v = {dist(rng), dist(rng)};
    RealField c(3, 0.8);
    ComplexField p = project_amplitude(r, c);
    for (std::size_t i = 0; i < p.size(); ++i)
      CHECK(std::fabs(std::abs(p[i]) - 0.8) <= 1e-12);
  }
}

TEST_CASE("select_support picks the s largest magnitudes, row-major ties") {
  RealField phi(2, {0.5, -2.0, 1.0, 0.0});
  SupportSet full = SupportSet::full_grid(2);

  SupportSet j = select_support(phi, 2, full);
  REQUIRE(j.size() == 2);
  CHECK(j.contains({0, 1}));
  CHECK(j.contains({1, 0}));

  SECTION("all-equal magnitudes break ties row-major") {
    RealField flat(2, 1.0);
    SupportSet t = select_support(flat, 2, full);
    CHECK(t.contains({0, 0}));
    CHECK(t.contains({0, 1}));
  }
  SECTION("s = |domain| returns the domain") {
    CHECK(select_support(phi, 4, full) == full);
  }
  SECTION("s out of range throws") {
    CHECK_THROWS_AS(select_support(phi, 5, full), std::invalid_argument);
  }
  SECTION("cut property holds on random fields") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
      RealField f(4);
      for (auto& v : f.values()) v = dist(rng);
      SupportSet dom = SupportSet::full_grid(4);
      const int s = static_cast<int>(rng() % 17);
      SupportSet sel = select_support(f, s, dom);
      double min_in = 1e300, max_out = -1.0;
      for (GridIndex idx : dom) {
        const double m = std::fabs(f(idx.row, idx.col));
        if (sel.contains(idx))
          min_in = std::min(min_in, m);
        else
          max_out = std::max(max_out, m);
      }
      if (s > 0 && s < 16) CHECK(min_in >= max_out);
    }
  }
}

TEST_CASE("project_sparse_phase frozen 2x2 example") {
  const int n = 2;
  RealField chi(n, 1.0);
  RealField phi(n, {kPi / 2.0, kPi / 4.0, -kPi / 3.0, 0.1});
  ComplexField z = pupil_field(chi, phi);
  ProblemInstance inst(RealField(n), chi, RealField(n), 2);

  ComplexField out = project_sparse_phase(z, inst);
  RealField expected_phi(n, {kPi / 2.0, 0.0, -kPi / 3.0, 0.0});
  ComplexField expected = pupil_field(chi, expected_phi);
  CHECK(frobenius_distance(out, expected) <= 1e-12);

  // the closed form is the metric projection: cross-check via enumeration
  auto oracle = brute_force_sparse_phase_projection(z, inst);
  REQUIRE(oracle.size() == 1);
  CHECK(frobenius_distance(oracle[0], out) <= 1e-12);
}

TEST_CASE("project_sparse_phase degenerate sparsity levels") {
  const int n = 3;
  RealField chi(n, 1.0);
  std::mt19937_64 rng(8);
  RealField phi = random_phase_on(SupportSet::full_grid(n), n, rng);
  ComplexField z = pupil_field(chi, phi);

  SECTION("s = n^2 with full support leaves z unchanged") {
    ProblemInstance inst(RealField(n), chi, RealField(n), n * n);
    CHECK(frobenius_distance(project_sparse_phase(z, inst), z) <= 1e-12);
  }
  SECTION("s = 0 zeroes every phase") {
    ProblemInstance inst(RealField(n), chi, RealField(n), 0);
    ComplexField out = project_sparse_phase(z, inst);
    ComplexField expected(n, std::complex<double>{1.0, 0.0});
    CHECK(frobenius_distance(out, expected) <= 1e-12);
    auto oracle = brute_force_sparse_phase_projection(z, inst);
    REQUIRE(oracle.size() == 1);
    CHECK(frobenius_distance(oracle[0], expected) <= 1e-12);
  }
  SECTION("input off the amplitude set is rejected") {
    ComplexField bad = z;
    bad(0, 0) *= 2.0;
    ProblemInstance inst(RealField(n), chi, RealField(n), 1);
    CHECK_THROWS_AS(project_sparse_phase(bad, inst), std::invalid_argument);
  }
}

TEST_CASE("brute-force oracle reports ties at the cutoff") {
  const int n = 2;
  RealField chi(n, 1.0);
  RealField phi(n, {2.0, -2.0, 0.5, 0.0});  // |2.0| twice at the s=1 cutoff
  ComplexField z = pupil_field(chi, phi);
  ProblemInstance inst(RealField(n), chi, RealField(n), 1);
  auto oracle = brute_force_sparse_phase_projection(z, inst);
  CHECK(oracle.size() == 2);
  // the deterministic projector returns one of them
  ComplexField chosen = project_sparse_phase(z, inst);
  bool matched = false;
  for (const auto& cand : oracle)
    if (frobenius_distance(cand, chosen) <= 1e-12) matched = true;
  CHECK(matched);
}

TEST_CASE("oracle equivalence on randomized amplitude-set points") {
  std::mt19937_64 rng(123);
  int tested = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 3;
    RealField mask(n);
    // random support of size 4..9
    const int m = 4 + static_cast<int>(rng() % 6);
    std::vector<int> cells(n * n);
    for (int i = 0; i < n * n; ++i) cells[i] = i;
    for (int i = 0; i < m; ++i)
      std::swap(cells[i], cells[i + static_cast<int>(rng() % (n * n - i))]);
    const double r = 0.5 + 0.1 * static_cast<double>(rng() % 20);
    for (int i = 0; i < m; ++i) mask(cells[i] / n, cells[i] % n) = r;
    SupportSet support = SupportSet::from_mask(mask);
    RealField phi = random_phase_on(support, n, rng);
    ComplexField z = pupil_field(mask, phi);
    for (int s = 0; s <= m; ++s) {
      ProblemInstance inst(RealField(n), mask, RealField(n), s);
      ComplexField fast = project_sparse_phase(z, inst);
      auto oracle = brute_force_sparse_phase_projection(z, inst);
      REQUIRE_FALSE(oracle.empty());
      double best = 1e300;
      for (const auto& cand : oracle)
        best = std::min(best, frobenius_distance(cand, fast));
      CHECK(best <= 1e-12);
      // distance minimality, stated directly
      const double fast_dist = frobenius_distance(z, fast);
      const double oracle_dist = frobenius_distance(z, oracle[0]);
      CHECK(fast_dist <= oracle_dist + 1e-12);
      ++tested;
    }
  }
  CHECK(tested >= 300);
}

TEST_CASE("projectors are idempotent") {
  const int n = 6;
  std::mt19937_64 rng(77);
  RealField chi = circular_aperture(n, 4);
  SupportSet support = SupportSet::from_mask(chi);
  RealField diversity = zernike_defocus(n, 4);
  RealField truth = random_phase_on(support, n, rng);
  ProblemInstance inst = make_instance(n, chi, diversity, truth, 3);

  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    ComplexField x(n);
    for (auto& v : x.values()) v = {dist(rng), dist(rng)};

    ComplexField p1 = project_fourier_magnitude(x, inst);
    CHECK(frobenius_distance(project_fourier_magnitude(p1, inst), p1) <=
          1e-12 * std::max(1.0, frobenius_norm(p1)));

    ComplexField p2 = project_amplitude(x, inst.chi());
    CHECK(frobenius_distance(project_amplitude(p2, inst.chi()), p2) <= 1e-12);

    ComplexField p3 = project_sparse_phase(p2, inst);
    CHECK(frobenius_distance(project_sparse_phase(p3, inst), p3) <= 1e-12);
  }
}

TEST_CASE("sparse projection is never beaten by explicit feasible candidates") {
  const int n = 3;
  RealField chi(n, 1.3);
  std::mt19937_64 rng(15);
  RealField phi = random_phase_on(SupportSet::full_grid(n), n, rng);
  ComplexField z = pupil_field(chi, phi);
  ProblemInstance inst(RealField(n), chi, RealField(n), 3);
  ComplexField proj = project_sparse_phase(z, inst);
  const double d_proj = frobenius_distance(z, proj);

  std::uniform_real_distribution<double> dist(-kPi, kPi);
  for (int trial = 0; trial < 200; ++trial) {
    // random member of the sparse-phase set
    RealField w_phi(n);
    std::vector<int> cells(n * n);
    for (int i = 0; i < n * n; ++i) cells[i] = i;
    for (int i = 0; i < 3; ++i) {
      std::swap(cells[i], cells[i + static_cast<int>(rng() % (n * n - i))]);
      w_phi(cells[i] / n, cells[i] % n) = dist(rng);
    }
    ComplexField w = pupil_field(chi, w_phi);
    CHECK(d_proj <= frobenius_distance(z, w) + 1e-12);
  }
}

TEST_CASE("distance_to_set diagnostics") {
  const int n = 4;
  RealField chi(n, 1.0);
  std::mt19937_64 rng(9);
  RealField truth = random_phase_on(SupportSet::full_grid(n), n, rng);
  ProblemInstance inst = make_instance(n, chi, RealField(n), truth, n * n);

  SECTION("a point on the amplitude set has zero distance to it") {
    ComplexField z = pupil_field(chi, truth);
    CHECK(distance_to_set(z, ConstraintSet::amplitude, inst) <= 1e-12);
  }
  SECTION("a noise-free solution is within 1e-9 of all three sets") {
    ComplexField x = pupil_field(chi, truth);
    const double scale = frobenius_norm(x);
    CHECK(distance_to_set(x, ConstraintSet::fourier_magnitude, inst) <= 1e-9 * scale);
    CHECK(distance_to_set(x, ConstraintSet::amplitude, inst) <= 1e-9 * scale);
    CHECK(distance_to_set(x, ConstraintSet::sparse_phase, inst) <= 1e-9 * scale);
  }
  SECTION("the scaled point 2*chi sits at distance n from the amplitude set") {
    ComplexField x(n, std::complex<double>{2.0, 0.0});
    CHECK(distance_to_set(x, ConstraintSet::amplitude, inst) == Approx(n).epsilon(1e-12));
  }
}

TEST_CASE("local single-valuedness near exactly sparse solutions") {
  // Solutions with min nonzero |phase| = theta admit a perturbation ball of
  // Frobenius radius chi*sqrt(2-2cos(theta))/2 on the amplitude set inside
  // which the metric projection is a singleton given by the closed form.
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (double theta : {0.5, 1.0, 2.0}) {
    for (int trial = 0; trial < 30; ++trial) {
      const int n = 3;
      const double r = 0.5 + 2.0 * u01(rng);
      RealField chi(n, r);
      const int s = 1 + static_cast<int>(rng() % 4);
      RealField phi_star(n);
      std::vector<int> cells(n * n);
      for (int i = 0; i < n * n; ++i) cells[i] = i;
      for (int i = 0; i < s; ++i) {
        std::swap(cells[i], cells[i + static_cast<int>(rng() % (n * n - i))]);
        const double mag = theta + (kPi - theta) * u01(rng);
        phi_star(cells[i] / n, cells[i] % n) = u01(rng) < 0.5 ? mag : -mag;
      }
      // force the minimum to be exactly theta
      phi_star(cells[0] / n, cells[0] % n) = phi_star(cells[0] / n, cells[0] % n) < 0
                                                 ? -theta
                                                 : theta;
      ProblemInstance inst(RealField(n), chi, RealField(n), s);
      ComplexField x_star = pupil_field(chi, phi_star);

      const double radius = r * std::sqrt(2.0 - 2.0 * std::cos(theta)) / 2.0;
      RealField eta(n);
      for (auto& v : eta.values()) v = 0.2 * (2.0 * u01(rng) - 1.0);
      RealField phi_z(n);
      auto rebuild = [&] {
        for (std::size_t i = 0; i < eta.size(); ++i) phi_z[i] = phi_star[i] + eta[i];
        return pupil_field(chi, phi_z);
      };
      ComplexField z = rebuild();
      while (frobenius_distance(z, x_star) >= 0.99 * radius) {
        for (auto& v : eta.values()) v *= 0.7;
        z = rebuild();
      }

      auto oracle = brute_force_sparse_phase_projection(z, inst);
      REQUIRE(oracle.size() == 1);
      CHECK(frobenius_distance(oracle[0], project_sparse_phase(z, inst)) <= 1e-12);
    }
  }
}
