#include "netprobe/network_model.hpp"

#include "netprobe/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>

namespace netprobe {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); }

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

// Uniform integer in [0, n) by rejection, independent of the standard
// library's distribution implementation.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  for (;;) {
    std::uint64_t x = rng();
    if (x < limit) return x % n;
  }
}

double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void add_chain(NetworkSpec& spec, std::size_t n, double h) {
  for (std::size_t c = 0; c + 1 < n; ++c) spec.edges.push_back({c, c + 1, h});
}

struct Sampler {
  double omega0;
  std::mt19937_64& rng;

  NetworkSpec base(std::size_t n) const {
    NetworkSpec spec;
    spec.n_nodes = n;
    spec.omega0 = omega0;
    return spec;
  }

  NetworkSpec operator()(const recipe::Chain& r) const {
    if (r.n == 0 || !positive_finite(r.h)) invalid("chain needs n > 0 and h > 0");
    auto spec = base(r.n);
    add_chain(spec, r.n, r.h);
    return spec;
  }

  NetworkSpec operator()(const recipe::PeriodicChain& r) const {
    if (r.n == 0 || r.period == 0 || !positive_finite(r.h_strong) || !positive_finite(r.h_weak)) {
      invalid("periodic chain needs n > 0, period > 0 and positive couplings");
    }
    auto spec = base(r.n);
    for (std::size_t c = 0; c + 1 < r.n; ++c) {
      spec.edges.push_back({c, c + 1, (c + 1) % r.period == 0 ? r.h_weak : r.h_strong});
    }
    return spec;
  }

  NetworkSpec operator()(const recipe::ShortcutChain& r) const {
    if (r.n == 0 || !positive_finite(r.h) || !positive_finite(r.h_shortcut)) {
      invalid("shortcut chain needs n > 0 and positive couplings");
    }
    auto [a, b] = std::minmax(r.shortcut_a, r.shortcut_b);
    if (b >= r.n) invalid("shortcut endpoint out of range");
    if (a == b) invalid("shortcut endpoints must be distinct");
    if (b == a + 1) invalid("shortcut endpoints are adjacent in the chain");
    auto spec = base(r.n);
    add_chain(spec, r.n, r.h);
    spec.edges.push_back({a, b, r.h_shortcut});
    return spec;
  }

  NetworkSpec operator()(const recipe::SmallWorld& r) const {
    if (r.n == 0 || !positive_finite(r.h_chain) || !positive_finite(r.h_shortcut) ||
        r.n_shortcuts == 0) {
      invalid("small world needs n > 0, positive couplings and n_shortcuts > 0");
    }
    std::vector<std::pair<std::size_t, std::size_t>> pool;
    for (std::size_t i = 0; i < r.n; ++i) {
      for (std::size_t j = i + 2; j < r.n; ++j) pool.emplace_back(i, j);
    }
    if (r.n_shortcuts > pool.size()) {
      invalid("n_shortcuts exceeds the " + std::to_string(pool.size()) + " available non-chain pairs");
    }
    auto spec = base(r.n);
    add_chain(spec, r.n, r.h_chain);
    for (std::size_t s = 0; s < r.n_shortcuts; ++s) {
      auto pick = s + uniform_index(rng, pool.size() - s);
      std::swap(pool[s], pool[pick]);
      spec.edges.push_back({pool[s].first, pool[s].second, r.h_shortcut});
    }
    return spec;
  }

  NetworkSpec operator()(const recipe::ErdosRenyi& r) const {
    if (r.n == 0 || !positive_finite(r.h) || !(r.p_edge > 0.0 && r.p_edge <= 1.0)) {
      invalid("Erdos-Renyi needs n > 0, h > 0 and p_edge in (0, 1]");
    }
    auto spec = base(r.n);
    for (std::size_t i = 0; i < r.n; ++i) {
      for (std::size_t j = i + 1; j < r.n; ++j) {
        if (uniform_unit(rng) < r.p_edge) spec.edges.push_back({i, j, r.h});
      }
    }
    return spec;
  }
};

std::string format_value(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void NetworkSpec::validate() const {
  if (n_nodes == 0) invalid("n must be positive");
  if (!positive_finite(omega0)) invalid("omega0 must be positive and finite");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : edges) {
    if (e.i >= n_nodes || e.j >= n_nodes) {
      invalid("edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) + ") out of range");
    }
    if (e.i == e.j) invalid("self-edge at node " + std::to_string(e.i));
    if (!positive_finite(e.h)) {
      invalid("edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
              ") has non-positive weight " + format_value(e.h));
    }
    if (!seen.insert(std::minmax(e.i, e.j)).second) {
      invalid("duplicate edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) + ")");
    }
  }
}

void NetworkSpec::normalize() {
  for (auto& e : edges) {
    if (e.i > e.j) std::swap(e.i, e.j);
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
}

bool NetworkSpec::is_connected() const {
  if (n_nodes <= 1) return true;
  std::vector<std::vector<std::size_t>> adj(n_nodes);
  for (const auto& e : edges) {
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  std::vector<bool> seen(n_nodes, false);
  std::queue<std::size_t> todo;
  todo.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!todo.empty()) {
    auto v = todo.front();
    todo.pop();
    for (auto w : adj[v]) {
      if (!seen[w]) {
        seen[w] = true;
        ++count;
        todo.push(w);
      }
    }
  }
  return count == n_nodes;
}

AdjacencyMatrix::AdjacencyMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() == 0 || values_.rows() != values_.cols()) {
    invalid("adjacency matrix must be square and non-empty");
  }
  if (!values_.allFinite()) invalid("adjacency matrix has non-finite entries");
  double scale = std::max(1.0, values_.cwiseAbs().maxCoeff());
  double asym = (values_ - values_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) invalid("adjacency matrix is not symmetric");
}

NetworkSpec generate(const TopologyRecipe& recipe, double omega0, const GenerateOptions& options) {
  if (!positive_finite(omega0)) invalid("omega0 must be positive and finite");
  std::mt19937_64 rng(recipe.seed);
  std::size_t attempts = std::max<std::size_t>(1, options.max_attempts);
  for (std::size_t a = 0; a < attempts; ++a) {
    NetworkSpec spec = std::visit(Sampler{omega0, rng}, recipe.shape);
    spec.normalize();
    if (!options.require_connected || spec.is_connected()) return spec;
  }
  throw Error(ErrorCode::Disconnected,
              "no connected sample in " + std::to_string(attempts) + " attempts");
}

AdjacencyMatrix to_adjacency(const NetworkSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.n_nodes);
  Matrix a = Matrix::Zero(n, n);
  Vector w2 = Vector::Constant(n, spec.omega0 * spec.omega0);
  for (const auto& e : spec.edges) {
    const auto i = static_cast<Eigen::Index>(e.i);
    const auto j = static_cast<Eigen::Index>(e.j);
    a(i, j) = a(j, i) = -e.h / 2.0;
    w2(i) += e.h;
    w2(j) += e.h;
  }
  a.diagonal() = w2 / 2.0;
  return AdjacencyMatrix(std::move(a));
}

std::vector<double> validate_stability(const Matrix& a) {
  if (a.rows() == 0 || a.rows() != a.cols()) invalid("matrix must be square and non-empty");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "eigenvalue computation failed");
  }
  const Vector& ev = solver.eigenvalues();  // ascending
  double lo = ev(0);
  double hi = ev(ev.size() - 1);
  if (!(hi > 0.0) || !(lo > 1e-12 * hi)) {
    throw Error(ErrorCode::NotPositiveDefinite,
                "matrix is not positive definite: smallest eigenvalue " + format_value(lo));
  }
  std::vector<double> out(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) out[static_cast<std::size_t>(i)] = ev(ev.size() - 1 - i);
  return out;
}

std::vector<double> validate_stability(const AdjacencyMatrix& a) {
  return validate_stability(a.values());
}

}  // namespace netprobe
