#include "netprobe/error.hpp"
#include "netprobe/network_model.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

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

std::size_t count_weight(const NetworkSpec& s, double h) {
  return static_cast<std::size_t>(
      std::count_if(s.edges.begin(), s.edges.end(), [&](const Edge& e) { return e.h == h; }));
}

}  // namespace

TEST_CASE("chain of three nodes") {
  auto spec = generate({recipe::Chain{3, 0.1}, 0}, 0.25);
  REQUIRE(spec.edges.size() == 2);
  CHECK(spec.edges[0].i == 0);
  CHECK(spec.edges[0].j == 1);
  CHECK(spec.edges[1].i == 1);
  CHECK(spec.edges[1].j == 2);
  CHECK(spec.edges[0].h == 0.1);
  CHECK(spec.n_nodes == 3);
  CHECK(spec.omega0 == 0.25);
}

TEST_CASE("small world keeps the chain and adds distinct shortcuts") {
  auto spec = generate({recipe::SmallWorld{60, 0.2, 0.1, 7}, 3}, 0.25);
  CHECK(spec.edges.size() == 66);
  CHECK(count_weight(spec, 0.2) == 59);
  CHECK(count_weight(spec, 0.1) == 7);
  for (const auto& e : spec.edges) {
    if (e.h == 0.1) CHECK(e.j > e.i + 1);
    if (e.h == 0.2) CHECK(e.j == e.i + 1);
  }
  CHECK_NOTHROW(spec.validate());
}

TEST_CASE("Erdos-Renyi with p = 1 is complete") {
  auto spec = generate({recipe::ErdosRenyi{4, 0.05, 1.0}, 11}, 0.25);
  CHECK(spec.edges.size() == 6);
  CHECK(count_weight(spec, 0.05) == 6);
}

TEST_CASE("periodic and shortcut chains") {
  auto trimer = generate({recipe::PeriodicChain{9, 0.1, 0.06, 3}, 0}, 0.25);
  REQUIRE(trimer.edges.size() == 8);
  CHECK(count_weight(trimer, 0.06) == 2);
  CHECK(count_weight(trimer, 0.1) == 6);

  auto sc = generate({recipe::ShortcutChain{10, 0.1, 3, 9, 0.1}, 0}, 0.25);
  CHECK(sc.edges.size() == 10);
  CHECK(std::any_of(sc.edges.begin(), sc.edges.end(), [](const Edge& e) { return e.i == 3 && e.j == 9; }));
}

TEST_CASE("generation is reproducible and seed dependent") {
  TopologyRecipe r{recipe::SmallWorld{40, 0.2, 0.1, 6}, 42};
  CHECK(generate(r, 0.25) == generate(r, 0.25));
  TopologyRecipe other{recipe::SmallWorld{40, 0.2, 0.1, 6}, 43};
  CHECK_FALSE(generate(r, 0.25) == generate(other, 0.25));

  TopologyRecipe er{recipe::ErdosRenyi{30, 0.05, 0.1}, 5};
  CHECK(generate(er, 0.25) == generate(er, 0.25));
}

TEST_CASE("connected resampling") {
  TopologyRecipe sparse{recipe::ErdosRenyi{30, 0.05, 0.02}, 1};
  CHECK_FALSE(generate(sparse, 0.25).is_connected());
  CHECK(code_of([&] { generate(sparse, 0.25, {true, 5}); }) == ErrorCode::Disconnected);

  TopologyRecipe dense{recipe::ErdosRenyi{30, 0.05, 0.15}, 1};
  auto spec = generate(dense, 0.25, {true, 200});
  CHECK(spec.is_connected());
}

TEST_CASE("invalid recipes and specs") {
  CHECK(code_of([] { generate({recipe::Chain{0, 0.1}, 0}, 0.25); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { generate({recipe::Chain{3, -0.1}, 0}, 0.25); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { generate({recipe::Chain{3, 0.1}, 0}, 0.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { generate({recipe::SmallWorld{4, 0.2, 0.1, 10}, 0}, 0.25); }) ==
        ErrorCode::InvalidArgument);

  NetworkSpec s{3, 0.25, {{0, 0, 0.1}}};
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::InvalidArgument);
  s.edges = {{0, 1, 0.1}, {1, 0, 0.2}};
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::InvalidArgument);
  s.edges = {{0, 5, 0.1}};
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("adjacency of small systems") {
  auto one = to_adjacency(NetworkSpec{1, 0.25, {}});
  CHECK(one(0, 0) == doctest::Approx(0.25 * 0.25 / 2).epsilon(1e-15));

  auto two = to_adjacency(NetworkSpec{2, 0.25, {{0, 1, 0.1}}});
  CHECK(two(0, 0) == doctest::Approx((0.0625 + 0.1) / 2));
  CHECK(two(1, 1) == doctest::Approx(0.08125));
  CHECK(two(0, 1) == doctest::Approx(-0.05));
  CHECK(two(1, 0) == doctest::Approx(-0.05));
}

TEST_CASE("stability eigenvalues") {
  auto ev = validate_stability(to_adjacency(NetworkSpec{1, 0.25, {}}));
  REQUIRE(ev.size() == 1);
  CHECK(ev[0] == doctest::Approx(0.03125));

  // Omega^2 / 2 = (w0^2 + 2h) / 2 and w0^2 / 2.
  auto ev2 = validate_stability(to_adjacency(NetworkSpec{2, 0.25, {{0, 1, 0.1}}}));
  REQUIRE(ev2.size() == 2);
  CHECK(ev2[0] == doctest::Approx((0.0625 + 0.2) / 2).epsilon(1e-12));
  CHECK(ev2[1] == doctest::Approx(0.0625 / 2).epsilon(1e-12));

  Matrix bad(2, 2);
  bad << 0.01, -0.05, -0.05, 0.01;
  CHECK(code_of([&] { validate_stability(bad); }) == ErrorCode::NotPositiveDefinite);
}

TEST_CASE("chain eigenvalues follow the open-chain Laplacian") {
  const double w0 = 0.25, h = 0.1;
  for (std::size_t n : {10u, 50u, 200u}) {
    auto ev = validate_stability(to_adjacency(generate({recipe::Chain{n, h}, 0}, w0)));
    std::vector<double> expect;
    for (std::size_t m = 0; m < n; ++m)
      expect.push_back((w0 * w0 + h * (2.0 - 2.0 * std::cos(std::numbers::pi * double(m) / double(n)))) / 2);
    std::sort(expect.rbegin(), expect.rend());
    for (std::size_t m = 0; m < n; ++m) CHECK(ev[m] == doctest::Approx(expect[m]).epsilon(1e-10));
    CHECK(ev.back() >= w0 * w0 / 2 * (1 - 1e-10));
    CHECK(ev.front() <= (w0 * w0 + 4 * h) / 2);
  }
}

TEST_CASE("springlike shift keeps every recipe above the bare frequency") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    TopologyShape shape;
    switch (seed % 4) {
      case 0: shape = recipe::ErdosRenyi{20, 0.05, 0.2}; break;
      case 1: shape = recipe::SmallWorld{25, 0.2, 0.1, 5}; break;
      case 2: shape = recipe::PeriodicChain{21, 0.1, 0.06, 3}; break;
      default: shape = recipe::ShortcutChain{20, 0.1, seed % 7, 19, 0.1}; break;
    }
    auto a = to_adjacency(generate({shape, seed}, 0.25));
    CHECK((a.values() - a.values().transpose()).cwiseAbs().maxCoeff() == 0.0);
    auto ev = validate_stability(a);
    CHECK(ev.back() >= 0.25 * 0.25 / 2 * (1 - 1e-10));
  }
}

TEST_CASE("normalize orders edges") {
  NetworkSpec s{4, 0.25, {{3, 2, 0.1}, {1, 0, 0.2}, {0, 3, 0.3}}};
  s.normalize();
  CHECK(s.edges[0].i == 0);
  CHECK(s.edges[0].j == 1);
  CHECK(s.edges[1].j == 3);
  CHECK(s.edges[2].i == 2);
  CHECK(s.edges[2].j == 3);
}
