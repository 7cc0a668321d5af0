#include "netprobe/error.hpp"
#include "netprobe/network_model.hpp"
#include "netprobe/probing.hpp"
#include "netprobe/reconstruction.hpp"
#include "netprobe/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace netprobe;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

std::vector<double> omega_list(const EigenSystem& eig) {
  return {eig.omegas.data(), eig.omegas.data() + eig.omegas.size()};
}

// Binned line height for a probe whose coupling to mode i is g.
double binned(double g, double omega, double spacing, double k) {
  return std::numbers::pi / 2 * k * k * g * g / (omega * spacing);
}

// Exact density tables written out from the true eigenvectors, with pair
// values for whichever reference each column uses.
DensityTables exact_tables(const EigenSystem& eig, double k, const SignOptions& options = {}) {
  const auto n = static_cast<Eigen::Index>(eig.size());
  auto w = omega_list(eig);
  auto d = mode_spacings(w);
  DensityTables t;
  t.single.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      t.single(j, i) = binned(eig.k_matrix(j, i), w[i], d[i], k);
    }
  }
  Matrix mags = eig.k_matrix.cwiseAbs();
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t ref = sign_reference(mags, static_cast<std::size_t>(i), options);
    const auto r = static_cast<Eigen::Index>(ref);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == r) continue;
      double g = eig.k_matrix(r, i) + eig.k_matrix(j, i);
      t.pairs.push_back({ref, static_cast<std::size_t>(j), static_cast<std::size_t>(i),
                         binned(g, w[i], d[i], k)});
    }
  }
  return t;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("magnitude from a binned density value") {
  std::vector<double> w{0.774696, 0.512348, 0.25};
  std::vector<double> j{0.0, 5.8447e-4, 0.0};
  auto m = magnitudes_from_density(j, w, 0.01);
  CHECK(m(1) == doctest::Approx(0.70711).epsilon(2e-4));
  CHECK(m(0) == 0.0);
  CHECK(m(2) == 0.0);

  // Negative readings from noise clip to zero.
  std::vector<double> neg{-1e-6, 1e-4, 1e-4};
  CHECK(magnitudes_from_density(neg, w, 0.01)(0) == 0.0);

  auto d = mode_spacings(w);
  std::vector<double> exact;
  for (std::size_t i = 0; i < w.size(); ++i) exact.push_back(binned(0.3 + 0.2 * i, w[i], d[i], 0.02));
  auto back = magnitudes_from_density(exact, w, 0.02);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(back(i) == doctest::Approx(0.3 + 0.2 * i).epsilon(1e-14));
}

TEST_CASE("magnitude errors") {
  std::vector<double> j{1e-4, 1e-4};
  std::vector<double> same{0.5, 0.5};
  CHECK(code_of([&] { magnitudes_from_density(j, same, 0.01); }) == ErrorCode::DegenerateSpacing);
  std::vector<double> one{1e-4};
  std::vector<double> w1{0.5};
  CHECK(code_of([&] { magnitudes_from_density(one, w1, 0.01); }) == ErrorCode::DegenerateSpacing);
  std::vector<double> w{0.6, 0.5};
  CHECK(code_of([&] { magnitudes_from_density(j, w, 0.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { magnitudes_from_density(one, w, 0.01); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("sign decision between sum and difference") {
  Matrix m(2, 2);
  m << 0.6, 0.6, 0.3, 0.3;
  std::vector<PairMeasurement> pairs{{0, 1, 0, 0.9}, {0, 1, 1, 0.3}};
  auto s = resolve_signs(m, pairs);
  CHECK(s.k_est(1, 0) == doctest::Approx(0.3));
  CHECK(s.k_est(1, 1) == doctest::Approx(-0.3));
  CHECK(s.k_est(0, 0) == doctest::Approx(0.6));
  CHECK(s.ambiguous.empty());
  CHECK(s.fallback_modes.empty());

  // Two-node pair: symmetric mode sums, antisymmetric mode cancels.
  const double r = 1 / std::sqrt(2.0);
  Matrix m2(2, 2);
  m2 << r, r, r, r;
  std::vector<PairMeasurement> p2{{0, 1, 0, std::sqrt(2.0)}, {0, 1, 1, 0.0}};
  auto s2 = resolve_signs(m2, p2);
  CHECK(s2.k_est(1, 0) > 0);
  CHECK(s2.k_est(1, 1) < 0);
  CHECK(std::abs(s2.k_est.col(0).dot(s2.k_est.col(1))) < 1e-15);

  CHECK(code_of([&] { resolve_signs(m2, std::vector<PairMeasurement>{}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("pair sums everywhere give all positive signs") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Matrix m(4, 4);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) m(i, j) = u(rng);
  std::vector<PairMeasurement> pairs;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 1; j < 4; ++j)
      pairs.push_back({0, j, i, m(0, Eigen::Index(i)) + m(Eigen::Index(j), Eigen::Index(i))});
  auto s = resolve_signs(m, pairs);
  CHECK((s.k_est - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("vanishing reference entry hands the column to another node") {
  // Open three-chain: the middle mode has a node at site 1.
  auto eig = diagonalize(to_adjacency(generate({recipe::Chain{3, 0.1}, 0}, 0.25)));
  SignOptions opt;
  opt.reference = 1;
  Matrix mags = eig.k_matrix.cwiseAbs();
  std::size_t middle = 3;
  for (std::size_t i = 0; i < 3; ++i)
    if (mags(1, Eigen::Index(i)) < 1e-12) middle = i;
  REQUIRE(middle == 1);
  CHECK(sign_reference(mags, middle, opt) != 1);
  CHECK(sign_reference(mags, 0, opt) == 1);

  DensityTables t = exact_tables(eig, 0.01, opt);
  auto w = omega_list(eig);
  auto res = reconstruct_from_densities(t, w, 0.01, opt);
  REQUIRE(res.signed_k.fallback_modes.size() == 1);
  CHECK(res.signed_k.fallback_modes[0] == middle);
  CHECK(max_abs(res.a_est.values() - to_adjacency(generate({recipe::Chain{3, 0.1}, 0}, 0.25)).values()) <
        1e-12);
}

TEST_CASE("nearest orthonormal matrix") {
  Matrix q = Eigen::HouseholderQR<Matrix>(Matrix::Random(5, 5)).householderQ();
  CHECK(max_abs(nearest_orthonormal(q) - q) < 1e-13);
  CHECK(max_abs(nearest_orthonormal(3.0 * q) - q) < 1e-13);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 0.5;
  CHECK(max_abs(nearest_orthonormal(d) - Matrix::Identity(2, 2)) < 1e-15);

  Matrix rot(2, 2);
  const double c = std::cos(0.7), s = std::sin(0.7);
  rot << c, -s, s, c;
  CHECK(max_abs(nearest_orthonormal(3.0 * rot) - rot) < 1e-15);

  Matrix singular(2, 2);
  singular << 1, 2, 2, 4;
  CHECK(code_of([&] { nearest_orthonormal(singular); }) == ErrorCode::RankDeficient);
  CHECK(code_of([&] { nearest_orthonormal(Matrix(2, 3)); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("adjacency assembly") {
  std::vector<double> w1{0.25};
  CHECK(assemble_adjacency(Matrix::Identity(1, 1), w1)(0, 0) == doctest::Approx(0.03125));

  auto a = to_adjacency(NetworkSpec{2, 0.25, {{0, 1, 0.1}}});
  auto eig = diagonalize(a);
  auto w = omega_list(eig);
  CHECK(max_abs(assemble_adjacency(eig.k_matrix, w).values() - a.values()) < 1e-15);

  // Column signs are a gauge.
  auto big = to_adjacency(generate({recipe::SmallWorld{12, 0.2, 0.1, 3}, 4}, 0.25));
  auto e12 = diagonalize(big);
  Matrix flipped = e12.k_matrix;
  flipped.col(2) *= -1;
  flipped.col(7) *= -1;
  auto w12 = omega_list(e12);
  CHECK(max_abs(assemble_adjacency(flipped, w12).values() - assemble_adjacency(e12.k_matrix, w12).values()) <
        1e-14);
  CHECK(max_abs(assemble_adjacency(e12.k_matrix, w12).values() - big.values()) < 1e-12);
}

TEST_CASE("exact densities reproduce the adjacency") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    TopologyRecipe r{recipe::ErdosRenyi{10, 0.05, 0.4}, rng()};
    auto a = to_adjacency(generate(r, 0.25, {true, 100}));
    auto eig = diagonalize(a);
    if (eig.has_degeneracy()) continue;
    auto res = reconstruct_from_densities(exact_tables(eig, 0.01), omega_list(eig), 0.01);
    CHECK(max_abs(res.a_est.values() - a.values()) < 1e-8);
    CHECK(res.orthogonality_residual < 1e-8);
  }
}

TEST_CASE("projection reduces the error of a noisy eigenvector estimate") {
  std::mt19937_64 rng(123);
  std::normal_distribution<double> noise(0.0, 1e-2);
  int helped = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto a = to_adjacency(generate({recipe::SmallWorld{10, 0.2, 0.1, 2}, rng()}, 0.25));
    auto eig = diagonalize(a);
    auto w = omega_list(eig);
    Matrix k = eig.k_matrix;
    for (Eigen::Index i = 0; i < k.size(); ++i) k.data()[i] += noise(rng);
    double raw = (assemble_adjacency(k, w).values() - a.values()).norm();
    double proj = (assemble_adjacency(nearest_orthonormal(k), w).values() - a.values()).norm();
    helped += proj < raw;
  }
  CHECK(helped >= 95);
}

TEST_CASE("two-node reconstruction from a simulated network") {
  NetworkSpec spec{2, 0.25, {{0, 1, 0.1}}};
  SimulatedOracle oracle(spec, 0.0);
  CountingOracle counted(oracle);
  auto report = reconstruct(counted, 2);
  CHECK(max_abs(report.a_est.values() - to_adjacency(spec).values()) < 1e-3);
  CHECK(report.diagnostics.measurement_count == counted.calls());
  REQUIRE(report.omegas_est.size() == 2);
  CHECK(report.omegas_est[0] > report.omegas_est[1]);
}

TEST_CASE("single node reconstruction") {
  NetworkSpec spec{1, 0.25, {}};
  SimulatedOracle oracle(spec, 0.0);
  auto report = reconstruct(oracle, 1);
  REQUIRE(report.a_est.values().rows() == 1);
  CHECK(report.a_est(0, 0) == doctest::Approx(0.03125).epsilon(1e-3));
}

TEST_CASE("reconstruction configuration errors") {
  SimulatedOracle oracle(NetworkSpec{2, 0.25, {{0, 1, 0.1}}}, 0.0);
  CHECK(code_of([&] { reconstruct(oracle, 3); }) == ErrorCode::InvalidArgument);
  ReconstructionConfig bad;
  bad.omega_max = 0.01;
  CHECK(code_of([&] { reconstruct(oracle, 2, bad); }) == ErrorCode::InvalidArgument);
  ReconstructionConfig badk;
  badk.k = -1.0;
  CHECK(code_of([&] { reconstruct(oracle, 2, badk); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("adjacency comparison") {
  auto a = to_adjacency(generate({recipe::SmallWorld{16, 0.2, 0.1, 3}, 9}, 0.25)).values();
  auto same = compare_adjacency(a, a);
  CHECK(same.relative_frobenius == 0.0);
  CHECK(same.precision == 1.0);
  CHECK(same.recall == 1.0);
  CHECK(same.true_links == 18);

  Matrix shifted = a + 0.01 * Matrix::Identity(16, 16);
  auto sh = compare_adjacency(shifted, a);
  CHECK(sh.relative_frobenius == doctest::Approx(0.01 * 4.0 / a.norm()).epsilon(1e-12));
  CHECK(sh.recall == 1.0);
  CHECK(sh.max_abs_diagonal_error == doctest::Approx(0.01));

  auto zero = compare_adjacency(Matrix::Zero(16, 16), a);
  CHECK(zero.recall == 0.0);
  CHECK(zero.relative_frobenius == doctest::Approx(1.0));

  // Threshold is 10% of the largest off-diagonal estimate by default.
  Matrix est = a;
  est(0, 5) = est(5, 0) = 0.02;
  auto extra = compare_adjacency(est, a);
  CHECK(extra.threshold == doctest::Approx(0.01));
  CHECK(extra.predicted_links == 19);
  CHECK(extra.precision == doctest::Approx(18.0 / 19.0));
  auto strict = compare_adjacency(est, a, 0.03);
  CHECK(strict.predicted_links == 18);

  CHECK(code_of([&] { compare_adjacency(Matrix::Zero(3, 3), a); }) == ErrorCode::InvalidArgument);
}
