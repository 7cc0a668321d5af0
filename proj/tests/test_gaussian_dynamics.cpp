#include "netprobe/error.hpp"
#include "netprobe/gaussian_dynamics.hpp"
#include "netprobe/network_model.hpp"
#include "netprobe/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace netprobe;

namespace {

// x' = M x with x = (q, p), q' = p, p' = -2 A q. Classical RK4 on S(t).
Matrix rk4_symplectic(const Matrix& a_tot, double t, int steps) {
  const auto m = a_tot.rows();
  Matrix gen = Matrix::Zero(2 * m, 2 * m);
  gen.topRightCorner(m, m) = Matrix::Identity(m, m);
  gen.bottomLeftCorner(m, m) = -2.0 * a_tot;
  Matrix s = Matrix::Identity(2 * m, 2 * m);
  const double h = t / steps;
  for (int i = 0; i < steps; ++i) {
    Matrix k1 = gen * s;
    Matrix k2 = gen * (s + 0.5 * h * k1);
    Matrix k3 = gen * (s + 0.5 * h * k2);
    Matrix k4 = gen * (s + h * k3);
    s += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return s;
}

AdjacencyMatrix random_network(std::uint64_t seed, std::size_t n) {
  return to_adjacency(generate({recipe::ErdosRenyi{n, 0.05, 0.4}, seed}, 0.25));
}

}  // namespace

TEST_CASE("total system assembly") {
  auto a = to_adjacency(NetworkSpec{1, 0.25, {}});
  auto sys = assemble_total(a, 0.25, 0.01, {0});
  REQUIRE(sys.modes() == 2);
  CHECK(sys.a_tot(0, 0) == doctest::Approx(0.03125));
  CHECK(sys.a_tot(1, 1) == doctest::Approx(0.03125));
  CHECK(sys.a_tot(0, 1) == doctest::Approx(0.005));
  CHECK(sys.a_tot(1, 0) == doctest::Approx(0.005));

  auto decoupled = assemble_total(random_network(1, 5), 0.3, 0.0, {2});
  CHECK(decoupled.a_tot.row(0).tail(5).cwiseAbs().maxCoeff() == 0.0);

  auto pair = assemble_total(random_network(1, 5), 0.3, 0.02, {1, 3});
  CHECK(pair.a_tot(0, 2) == doctest::Approx(0.01));
  CHECK(pair.a_tot(0, 4) == doctest::Approx(0.01));
  CHECK(pair.a_tot(0, 1) == 0.0);

  CHECK_THROWS_AS(assemble_total(a, 0.25, 1.0, {0}), Error);
}

TEST_CASE("initial states") {
  auto eig = diagonalize(to_adjacency(NetworkSpec{1, 0.25, {}}));
  auto st = initial_state(probe::Vacuum{}, 0.25, eig, 0.0);
  REQUIRE(st.modes() == 2);
  CHECK(st.cov(0, 0) == doctest::Approx(2.0));
  CHECK(st.cov(2, 2) == doctest::Approx(0.125));
  CHECK(st.cov(1, 1) == doctest::Approx(1.0 / (2 * 0.25)));
  CHECK(mean_occupation(st, 0.25) == doctest::Approx(0.0).scale(1.0));

  auto sq = initial_state(probe::SqueezedVacuum{1.0, std::numbers::pi / 2}, 0.25, eig, 0.0);
  CHECK(mean_occupation(sq, 0.25) == doctest::Approx(std::sinh(1.0) * std::sinh(1.0)));
  CHECK(mean_occupation(sq, 0.25) == doctest::Approx(1.3811).epsilon(1e-4));
  CHECK(uncertainty_margin(sq) > -1e-12);

  auto th = initial_state(probe::Thermal{5.0}, 0.25, eig, 0.0);
  CHECK(mean_occupation(th, 0.25) == doctest::Approx(1.0 / std::expm1(0.25 / 5.0)));
  CHECK(mean_occupation(th, 0.25) == doctest::Approx(19.5042).epsilon(1e-5));

  // Network mode at T: <q^2> = (2 n + 1) / (2 Omega).
  auto hot = initial_state(probe::Vacuum{}, 0.25, eig, 5.0);
  CHECK(hot.cov(1, 1) == doctest::Approx((2.0 / std::expm1(0.05) + 1.0) / 0.5));
  CHECK(initial_occupation(probe::SqueezedVacuum{std::log(1 + std::sqrt(2.0)), 0.3}, 0.4) ==
        doctest::Approx(1.0));
}

TEST_CASE("thermal occupation") {
  CHECK(thermal_occupation(0.25, 5.0) == doctest::Approx(19.5042).epsilon(1e-5));
  CHECK(thermal_occupation(0.7, 0.0) == 0.0);
  CHECK(thermal_occupation(0.25, 5000.0) == doctest::Approx(5000.0 / 0.25 - 0.5).epsilon(1e-3));
}

TEST_CASE("decay law") {
  CHECK(predicted_occupation(100.0, 0.0, 0.25, 5.0, 3.0) == doctest::Approx(3.0));
  CHECK(predicted_occupation(1e7, 0.001, 0.25, 5.0, 0.0) == doctest::Approx(thermal_occupation(0.25, 5.0)));
  const double n_th = 1.0 / std::expm1(0.05);
  CHECK(predicted_occupation(500.0, 0.001, 0.25, 5.0, 0.0) ==
        doctest::Approx(n_th * (1 - std::exp(-0.001 / 0.25 * 500))));
  CHECK(predicted_occupation(500.0, 0.001, 0.25, 5.0, 0.0) == doctest::Approx(16.8645).epsilon(1e-5));
}

TEST_CASE("exact propagator agrees with direct integration") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    auto sys = assemble_total(random_network(seed, 6), 0.4, 0.02, {seed % 6});
    Propagator prop(sys);
    for (double t : {0.7, 13.0, 61.0}) {
      Matrix exact = prop.symplectic(t);
      Matrix rk = rk4_symplectic(sys.a_tot, t, static_cast<int>(t * 400) + 100);
      CHECK((exact - rk).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("evolution conserves energy, determinant and uncertainty") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    auto a = random_network(rng(), 8);
    auto eig = diagonalize(a);
    auto sys = assemble_total(a, 0.35, 0.015, {static_cast<std::size_t>(trial)});
    auto st = initial_state(probe::SqueezedVacuum{0.8, 1.1}, 0.35, eig, 2.0);
    const double e0 = total_energy(sys, st);
    const double d0 = st.cov.determinant();
    Propagator prop(sys);
    for (double t : {0.0, 5.0, 123.0, 977.0}) {
      auto s = prop.evolve(st, t);
      CHECK(total_energy(sys, s) == doctest::Approx(e0).epsilon(1e-10));
      CHECK(s.cov.determinant() == doctest::Approx(d0).epsilon(1e-8));
      CHECK(uncertainty_margin(s) > -1e-9);
      auto mom = prop.probe_moments(st, t);
      const auto m = static_cast<Eigen::Index>(s.modes());
      CHECK(mom.qq == doctest::Approx(s.cov(0, 0)).epsilon(1e-10));
      CHECK(mom.pp == doctest::Approx(s.cov(m, m)).epsilon(1e-10));
    }
    CHECK((prop.evolve(st, 0.0).cov - st.cov).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("decoupled probe and thermal network are stationary") {
  auto a = random_network(8, 7);
  auto eig = diagonalize(a);
  auto st = initial_state(probe::SqueezedVacuum{1.0, 0.5}, 0.3, eig, 3.0);
  auto sys = assemble_total(a, 0.3, 0.0, {0});
  for (double t : {1.0, 50.0, 1000.0}) {
    auto s = evolve(sys, st, t);
    // Network block is thermal, hence time invariant.
    const auto m = static_cast<Eigen::Index>(s.modes());
    const double scale = st.cov.cwiseAbs().maxCoeff();
    CHECK((s.cov.block(1, 1, m - 1, m - 1) - st.cov.block(1, 1, m - 1, m - 1)).cwiseAbs().maxCoeff() <
          1e-8 * scale);
    CHECK((s.cov.block(m + 1, m + 1, m - 1, m - 1) - st.cov.block(m + 1, m + 1, m - 1, m - 1))
              .cwiseAbs()
              .maxCoeff() < 1e-8 * scale);
    CHECK(mean_occupation(s, 0.3) == doctest::Approx(mean_occupation(st, 0.3)).epsilon(1e-10));
  }
  auto vac = initial_state(probe::Thermal{3.0}, 0.3, eig, 3.0);
  auto s = evolve(sys, vac, 321.0);
  CHECK((s.cov - vac.cov).cwiseAbs().maxCoeff() < 1e-8 * vac.cov.cwiseAbs().maxCoeff());
}

TEST_CASE("energy flows back after the recurrence time") {
  auto spec = generate({recipe::Chain{50, 0.1}, 0}, 0.25);
  auto a = to_adjacency(spec);
  auto eig = diagonalize(a);
  const double tau_f = recurrence_time(eig);
  const double omega_s = eig.omegas(20);
  auto sys = assemble_total(a, omega_s, 0.0025, {0});
  auto st = initial_state(probe::SqueezedVacuum{1.0, std::numbers::pi / 2}, omega_s, eig, 0.0);
  Propagator prop(sys);
  const double n0 = mean_occupation(st, omega_s);
  double lowest = n0, t_low = 0.0;
  bool rising_after_tau = false;
  double prev = n0;
  // Resonant exchange with a single mode is slow at this coupling.
  const double dt = tau_f / 10;
  for (int s = 1; s <= 10 * 40; ++s) {
    double t = s * dt;
    auto mom = prop.probe_moments(st, t);
    double n = (omega_s * mom.qq + mom.pp / omega_s) / 2 - 0.5;
    if (n < lowest) {
      lowest = n;
      t_low = t;
    }
    if (t > tau_f && n > prev + 1e-3 * n0) rising_after_tau = true;
    prev = n;
  }
  CHECK(lowest < 0.95 * n0);
  CHECK(t_low > tau_f);
  CHECK(rising_after_tau);
}

TEST_CASE("invalid dynamics arguments") {
  auto a = to_adjacency(NetworkSpec{2, 0.25, {{0, 1, 0.1}}});
  CHECK_THROWS_AS(assemble_total(a, -0.1, 0.01, {0}), Error);
  CHECK_THROWS_AS(assemble_total(a, 0.3, 0.01, {2}), Error);
  CHECK_THROWS_AS(assemble_total(a, 0.3, 0.01, {0, 0}), Error);
  CHECK_THROWS_AS(validate_probe_init(probe::SqueezedVacuum{NAN, 0.0}), Error);
  CHECK_THROWS_AS(validate_probe_init(probe::Thermal{-1.0}), Error);
  CHECK_THROWS_AS(thermal_occupation(0.0, 1.0), Error);
}
