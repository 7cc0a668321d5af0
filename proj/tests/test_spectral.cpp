#include "netprobe/error.hpp"
#include "netprobe/network_model.hpp"
#include "netprobe/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace netprobe;

namespace {

const double pi = std::numbers::pi;

EigenSystem two_node() { return diagonalize(to_adjacency(NetworkSpec{2, 0.25, {{0, 1, 0.1}}})); }

// Composite Simpson on omega * int_0^T gamma(t) cos(omega t) dt.
double quadrature_density(const EigenSystem& eig, const CouplingVector& g, double k, double omega,
                          double t_max, int panels) {
  const double h = t_max / panels;
  double sum = 0.0;
  for (int s = 0; s <= panels; ++s) {
    double t = s * h;
    double w = (s == 0 || s == panels) ? 1.0 : (s % 2 ? 4.0 : 2.0);
    sum += w * damping_kernel(eig, g, k, t) * std::cos(omega * t);
  }
  return omega * sum * h / 3.0;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return s;
}

}  // namespace

TEST_CASE("single oscillator") {
  auto eig = diagonalize(to_adjacency(NetworkSpec{1, 0.25, {}}));
  REQUIRE(eig.size() == 1);
  CHECK(std::abs(eig.k_matrix(0, 0)) == doctest::Approx(1.0));
  CHECK(eig.omegas(0) == doctest::Approx(0.25));

  auto g = probe_couplings(eig, {0});
  CHECK(std::abs(g.g(0)) == doctest::Approx(1.0));
  CHECK(damping_kernel(eig, g, 0.01, 0.0) == doctest::Approx(0.0016));

  auto comb = spectral_density_comb(eig, g, 0.01);
  REQUIRE(comb.lines.size() == 1);
  CHECK(comb.lines[0].omega == doctest::Approx(0.25));
  CHECK(comb.lines[0].weight == doctest::Approx(pi * 1e-4 / 0.5));
  CHECK(comb.lines[0].weight == doctest::Approx(6.2832e-4).epsilon(1e-4));

  CHECK(std::isinf(recurrence_time(eig)));
}

TEST_CASE("two coupled oscillators") {
  auto eig = two_node();
  const double hi = std::sqrt(0.0625 + 0.2);
  CHECK(eig.omegas(0) == doctest::Approx(hi).epsilon(1e-12));
  CHECK(eig.omegas(0) == doctest::Approx(0.512348).epsilon(1e-6));
  CHECK(eig.omegas(1) == doctest::Approx(0.25).epsilon(1e-12));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(eig.k_matrix(0, 0)) == doctest::Approx(r));
  CHECK(eig.k_matrix(0, 0) * eig.k_matrix(1, 0) == doctest::Approx(-0.5));
  CHECK(eig.k_matrix(0, 1) * eig.k_matrix(1, 1) == doctest::Approx(0.5));

  auto g0 = probe_couplings(eig, {0});
  CHECK(std::abs(g0.g(0)) == doctest::Approx(r));
  CHECK(std::abs(g0.g(1)) == doctest::Approx(r));

  auto pair = probe_couplings(eig, {0, 1});
  CHECK(std::abs(pair.g(0)) < 1e-12);
  CHECK(std::abs(pair.g(1)) == doctest::Approx(std::sqrt(2.0)));

  auto comb = spectral_density_comb(eig, g0, 0.01);
  REQUIRE(comb.lines.size() == 2);
  CHECK(comb.lines[0].omega == doctest::Approx(hi));
  CHECK(comb.lines[1].omega == doctest::Approx(0.25));
  CHECK(comb.lines[0].weight == doctest::Approx(pi / 2 * 1e-4 * 0.5 / hi));
  CHECK(comb.lines[1].weight == doctest::Approx(pi / 2 * 1e-4 * 0.5 / 0.25));
  CHECK(comb.lines[0].binned == doctest::Approx(comb.lines[0].weight / (hi - 0.25)));
  CHECK(comb.lines[1].binned == doctest::Approx(comb.lines[1].weight / (hi - 0.25)));
}

TEST_CASE("eigenvectors are orthonormal and reproduce A") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    auto spec = generate({recipe::ErdosRenyi{15, 0.05, 0.3}, rng()}, 0.25);
    auto a = to_adjacency(spec);
    auto eig = diagonalize(a);
    const auto n = eig.k_matrix.rows();
    CHECK((eig.k_matrix.transpose() * eig.k_matrix - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
    Matrix d = (eig.omegas.array().square() / 2).matrix().asDiagonal();
    CHECK((eig.k_matrix * d * eig.k_matrix.transpose() - a.values()).cwiseAbs().maxCoeff() < 1e-13);
    for (Eigen::Index i = 1; i < n; ++i) CHECK(eig.omegas(i - 1) >= eig.omegas(i));
    for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j)
      CHECK(probe_couplings(eig, {j}).g.norm() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("zero coupling gives a silent spectrum") {
  auto eig = two_node();
  auto g = probe_couplings(eig, {0});
  for (const auto& l : spectral_density_comb(eig, g, 0.0).lines) CHECK(l.weight == 0.0);
  std::vector<double> grid{0.1, 0.25, 0.4, 0.512348, 0.7};
  for (const auto& s : spectral_density_smooth(eig, g, 0.0, grid, 300.0).samples) CHECK(s.j == 0.0);
}

TEST_CASE("closed form agrees with direct quadrature") {
  auto spec = generate({recipe::SmallWorld{12, 0.2, 0.1, 3}, 4}, 0.25);
  auto eig = diagonalize(to_adjacency(spec));
  auto g = probe_couplings(eig, {2});
  const double k = 0.01;
  for (double t_max : {5.0, 80.0, 400.0}) {
    for (double w : {0.2, 0.31, 0.47, 0.66, 0.9}) {
      double closed = spectral_density_at(eig, g, k, w, t_max);
      double quad = quadrature_density(eig, g, k, w, t_max, 20000);
      CHECK(closed == doctest::Approx(quad).epsilon(1e-8).scale(1e-9));
    }
  }
  // The small-argument branch must join the closed form smoothly.
  double w = eig.omegas(3);
  double at = spectral_density_at(eig, g, k, w, 200.0);
  double near = spectral_density_at(eig, g, k, w * (1 + 1e-9), 200.0);
  CHECK(at == doctest::Approx(near).epsilon(1e-6));
}

TEST_CASE("running mean of the truncated density") {
  auto spec = generate({recipe::SmallWorld{12, 0.2, 0.1, 3}, 4}, 0.25);
  auto eig = diagonalize(to_adjacency(spec));
  auto g = probe_couplings(eig, {5});
  const double k = 0.01;
  for (double t : {3.0, 90.0, 700.0}) {
    for (double w : {0.22, 0.35, 0.5, eig.omegas(4), 0.8}) {
      // Simpson rule over the truncation time.
      const int panels = 4000;
      const double h = t / panels;
      double acc = 0.0;
      for (int m = 0; m <= panels; ++m) {
        double wt = (m == 0 || m == panels) ? 1.0 : (m % 2 ? 4.0 : 2.0);
        double s = m * h;
        acc += wt * (s > 0.0 ? spectral_density_at(eig, g, k, w, s) : 0.0);
      }
      double quad = acc * h / 3.0 / t;
      CHECK(spectral_density_running_mean(eig, g, k, w, t) == doctest::Approx(quad).epsilon(1e-7).scale(1e-9));
    }
  }
  CHECK_THROWS_AS(spectral_density_running_mean(eig, g, k, 0.3, 0.0), Error);
}

TEST_CASE("integrated smooth density matches comb weights") {
  std::mt19937_64 rng(17);
  int tested = 0;
  for (int trial = 0; trial < 40 && tested < 5; ++trial) {
    auto spec = generate({recipe::ErdosRenyi{20, 0.05, 0.25}, rng()}, 0.25, {true, 50});
    auto eig = diagonalize(to_adjacency(spec));
    auto gaps = mode_spacings(std::vector<double>(eig.omegas.begin(), eig.omegas.end()));
    double min_gap = *std::min_element(gaps.begin(), gaps.end());
    if (min_gap < 2e-3) continue;
    ++tested;
    auto g = probe_couplings(eig, {0});
    const double k = 0.01;
    const double t_max = 10.0 / min_gap;
    const double lo = eig.omegas(eig.size() - 1) - 200.0 / t_max;
    const double hi = eig.omegas(0) + 200.0 / t_max;
    const double step = 0.05 / t_max;
    std::vector<double> grid;
    for (double w = std::max(1e-3, lo); w <= hi; w += step) grid.push_back(w);
    auto sm = spectral_density_smooth(eig, g, k, grid, t_max);
    std::vector<double> j, jw;
    for (const auto& s : sm.samples) {
      j.push_back(s.j);
      jw.push_back(s.j * s.omega);
    }
    auto comb = spectral_density_comb(eig, g, k);
    double total = 0.0, moment = 0.0;
    for (const auto& l : comb.lines) {
      total += l.weight;
      moment += l.weight * l.omega;
    }
    CHECK(trapezoid(grid, j) == doctest::Approx(total).epsilon(0.02));

    // (2/pi) int J w dw = k^2 sum g^2, exact on the comb.
    CHECK(2.0 / pi * moment == doctest::Approx(k * k * g.g.squaredNorm()).epsilon(1e-12));
    CHECK(2.0 / pi * trapezoid(grid, jw) == doctest::Approx(k * k * g.g.squaredNorm()).epsilon(0.02));
  }
  CHECK(tested == 5);
}

TEST_CASE("smooth density ignores eigenvector signs") {
  auto spec = generate({recipe::SmallWorld{20, 0.2, 0.1, 4}, 8}, 0.25);
  auto eig = diagonalize(to_adjacency(spec));
  auto flipped = eig;
  std::mt19937_64 rng(1);
  for (Eigen::Index c = 0; c < flipped.k_matrix.cols(); ++c)
    if (rng() & 1) flipped.k_matrix.col(c) *= -1.0;
  std::vector<double> grid;
  for (int i = 0; i < 200; ++i) grid.push_back(0.2 + 0.004 * i);
  for (const NodeSet& nodes : {NodeSet{3}, NodeSet{3, 11}}) {
    auto a = spectral_density_smooth(eig, probe_couplings(eig, nodes), 0.01, grid, 300.0);
    auto b = spectral_density_smooth(flipped, probe_couplings(flipped, nodes), 0.01, grid, 300.0);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(a.samples[i].j == doctest::Approx(b.samples[i].j));
  }
}

TEST_CASE("mode spacings") {
  std::vector<double> w{1.0, 0.7, 0.6, 0.2};
  auto d = mode_spacings(w);
  REQUIRE(d.size() == 4);
  CHECK(d[0] == doctest::Approx(0.3));
  CHECK(d[1] == doctest::Approx(0.1));
  CHECK(d[2] == doctest::Approx(0.4));
  CHECK(d[3] == doctest::Approx(0.4));
  std::vector<double> one{0.5};
  CHECK(std::isnan(mode_spacings(one)[0]));
}

TEST_CASE("chain recurrence time from the group velocity") {
  // Open chain modes sample Omega(q)^2 = w0^2 + 2h(1 - cos q); the fastest
  // group velocity h sin q / Omega(q) bounds the round trip 2N / v.
  const double w0 = 0.25, h = 0.1;
  double v_max = 0.0;
  for (int s = 0; s <= 200000; ++s) {
    double q = pi * s / 200000.0;
    v_max = std::max(v_max, h * std::sin(q) / std::sqrt(w0 * w0 + 2 * h * (1 - std::cos(q))));
  }
  CHECK(v_max == doctest::Approx(0.215).epsilon(0.01));
  auto spec = generate({recipe::Chain{50, h}, 0}, w0);
  double tau = recurrence_time(spec);
  CHECK(tau == doctest::Approx(2 * 50 / v_max).epsilon(0.03));
  CHECK(tau == doctest::Approx(470).epsilon(0.03));
}

TEST_CASE("discrete regime is flagged") {
  auto eig = diagonalize(to_adjacency(generate({recipe::Chain{20, 0.1}, 0}, 0.25)));
  auto g = probe_couplings(eig, {0});
  std::vector<double> grid{0.3, 0.4};
  CHECK(spectral_density_smooth(eig, g, 0.01, grid, 0.5 * recurrence_time(eig)).warnings.empty());
  CHECK_FALSE(spectral_density_smooth(eig, g, 0.01, grid, 2.0 * recurrence_time(eig)).warnings.empty());
  CHECK_THROWS_AS(spectral_density_smooth(eig, g, 0.01, grid, -1.0), Error);
  std::vector<double> bad{0.4, 0.3};
  CHECK_THROWS_AS(spectral_density_smooth(eig, g, 0.01, bad, 10.0), Error);
}
