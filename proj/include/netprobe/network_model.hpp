#pragma once

#include "netprobe/types.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace netprobe {

// Springlike coupling of strength h (frequency^2 units) between nodes i < j.
struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  double h = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Ground-truth description of an oscillator network: every node has the same
// bare frequency omega0, edges are undirected and carry positive weights.
struct NetworkSpec {
  std::size_t n_nodes = 0;
  double omega0 = 0.0;
  std::vector<Edge> edges;

  // Throws InvalidArgument on self-edges, duplicates, out-of-range indices,
  // non-positive weights or a non-positive bare frequency.
  void validate() const;

  // Orders every edge as (min, max) and sorts the list by (i, j).
  void normalize();

  bool is_connected() const;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// Quadratic-form matrix of the network Hamiltonian H = p.p/2 + q.A.q.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  // Throws InvalidArgument if `values` is not square and symmetric.
  explicit AdjacencyMatrix(Matrix values);

  const Matrix& values() const noexcept { return values_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  double operator()(std::size_t r, std::size_t c) const { return values_(r, c); }

 private:
  Matrix values_;
};

namespace recipe {

struct Chain {
  std::size_t n = 0;
  double h = 0.0;
};

// Every `period`-th chain coupling is replaced by h_weak (period 3 gives trimers).
struct PeriodicChain {
  std::size_t n = 0;
  double h_strong = 0.0;
  double h_weak = 0.0;
  std::size_t period = 0;
};

struct ShortcutChain {
  std::size_t n = 0;
  double h = 0.0;
  std::size_t shortcut_a = 0;
  std::size_t shortcut_b = 0;
  double h_shortcut = 0.0;
};

struct SmallWorld {
  std::size_t n = 0;
  double h_chain = 0.0;
  double h_shortcut = 0.0;
  std::size_t n_shortcuts = 0;
};

struct ErdosRenyi {
  std::size_t n = 0;
  double h = 0.0;
  double p_edge = 0.0;
};

}  // namespace recipe

using TopologyShape = std::variant<recipe::Chain, recipe::PeriodicChain, recipe::ShortcutChain,
                                   recipe::SmallWorld, recipe::ErdosRenyi>;

struct TopologyRecipe {
  TopologyShape shape;
  std::uint64_t seed = 0;
};

struct GenerateOptions {
  bool require_connected = false;
  std::size_t max_attempts = 100;
};

// Throws InvalidArgument for invalid recipes and Disconnected when a connected
// sample was required but none was drawn within max_attempts.
NetworkSpec generate(const TopologyRecipe& recipe, double omega0,
                     const GenerateOptions& options = {});

// A_ii = (omega0^2 + sum_j h_ij) / 2, A_ij = -h_ij / 2.
AdjacencyMatrix to_adjacency(const NetworkSpec& spec);

// Eigenvalues of `a` in descending order (each equals Omega^2 / 2). Throws
// NotPositiveDefinite naming the most negative eigenvalue when any eigenvalue
// is at or below 1e-12 times the largest.
std::vector<double> validate_stability(const AdjacencyMatrix& a);
std::vector<double> validate_stability(const Matrix& a);

}  // namespace netprobe
