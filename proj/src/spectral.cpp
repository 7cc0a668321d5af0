#include "netprobe/spectral.hpp"

#include "netprobe/error.hpp"
#include "netprobe/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace netprobe {

namespace {

// sin(x t) / (2 x), continuous through x = 0.
double half_sinc(double x, double t) {
  double xt = x * t;
  if (std::abs(xt) < 1e-4) return 0.5 * t * (1.0 - xt * xt / 6.0);
  return std::sin(xt) / (2.0 * x);
}

// (1/t) int_0^t half_sinc(x, s) ds.
double half_fejer(double x, double t) {
  double xt = x * t;
  if (std::abs(xt) < 1e-4) return 0.25 * t * (1.0 - xt * xt / 12.0);
  double s = std::sin(xt / 2.0);
  return s * s / (x * x * t);
}

void fix_sign(Eigen::Ref<Vector> v) {
  Eigen::Index arg = 0;
  double best = -1.0;
  for (Eigen::Index r = 0; r < v.size(); ++r) {
    double m = std::abs(v(r));
    if (m > best * (1.0 + 1e-12)) {
      best = m;
      arg = r;
    }
  }
  if (v(arg) < 0.0) v = -v;
}

bool lex_greater(const Vector& a, const Vector& b) {
  for (Eigen::Index r = 0; r < a.size(); ++r) {
    if (a(r) != b(r)) return a(r) > b(r);
  }
  return false;
}

}  // namespace

bool EigenSystem::has_degeneracy() const {
  return std::any_of(degenerate.begin(), degenerate.end(), [](bool d) { return d; });
}

EigenSystem diagonalize(const AdjacencyMatrix& a) {
  validate_stability(a);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.values());
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "eigendecomposition failed");
  }
  const auto n = static_cast<Eigen::Index>(a.dim());
  EigenSystem eig;
  eig.k_matrix.resize(n, n);
  eig.omegas.resize(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index src = n - 1 - c;
    eig.omegas(c) = std::sqrt(2.0 * solver.eigenvalues()(src));
    eig.k_matrix.col(c) = solver.eigenvectors().col(src);
    fix_sign(eig.k_matrix.col(c));
  }

  eig.degenerate.assign(static_cast<std::size_t>(n), false);
  const double tol = 1e-10 * eig.omegas(0);
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && eig.omegas(end - 1) - eig.omegas(end) <= tol) ++end;
    if (end - start > 1) {
      std::vector<Vector> cols;
      for (Eigen::Index c = start; c < end; ++c) {
        cols.emplace_back(eig.k_matrix.col(c));
        eig.degenerate[static_cast<std::size_t>(c)] = true;
      }
      std::stable_sort(cols.begin(), cols.end(), lex_greater);
      for (Eigen::Index c = start; c < end; ++c) {
        eig.k_matrix.col(c) = cols[static_cast<std::size_t>(c - start)];
      }
    }
    start = end;
  }
  return eig;
}

CouplingVector probe_couplings(const EigenSystem& eig, const NodeSet& nodes) {
  validate_node_set(nodes, eig.size());
  CouplingVector out;
  out.nodes = nodes;
  out.g = Vector::Zero(static_cast<Eigen::Index>(eig.size()));
  for (auto j : nodes) out.g += eig.k_matrix.row(static_cast<Eigen::Index>(j)).transpose();
  return out;
}

double damping_kernel(const EigenSystem& eig, const CouplingVector& g, double k, double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "t must be non-negative");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eig.omegas.size(); ++i) {
    double w = eig.omegas(i);
    sum += k * k * g.g(i) * g.g(i) / (w * w) * std::cos(w * t);
  }
  return sum;
}

std::vector<double> mode_spacings(std::span<const double> omegas_desc) {
  const auto n = omegas_desc.size();
  if (n == 0) return {};
  if (n == 1) return {std::numeric_limits<double>::quiet_NaN()};
  std::vector<double> d(n);
  for (std::size_t i = 0; i + 1 < n; ++i) d[i] = omegas_desc[i] - omegas_desc[i + 1];
  d[n - 1] = d[n - 2];
  return d;
}

SpectralComb spectral_density_comb(const EigenSystem& eig, const CouplingVector& g, double k) {
  std::span<const double> omegas(eig.omegas.data(), eig.size());
  auto d = mode_spacings(omegas);
  SpectralComb comb;
  comb.lines.reserve(eig.size());
  for (std::size_t i = 0; i < eig.size(); ++i) {
    double gi = g.g(static_cast<Eigen::Index>(i));
    double w = (std::numbers::pi / 2.0) * k * k * gi * gi / omegas[i];
    comb.lines.push_back({omegas[i], w, w / d[i]});
  }
  return comb;
}

double spectral_density_at(const EigenSystem& eig, const CouplingVector& g, double k, double omega,
                           double t_max) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eig.omegas.size(); ++i) {
    double w = eig.omegas(i);
    double c = k * k * g.g(i) * g.g(i) / (w * w);
    if (c == 0.0) continue;
    sum += c * (half_sinc(omega - w, t_max) + half_sinc(omega + w, t_max));
  }
  return omega * sum;
}

double spectral_density_running_mean(const EigenSystem& eig, const CouplingVector& g, double k,
                                     double omega, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "t must be positive and finite");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eig.omegas.size(); ++i) {
    double w = eig.omegas(i);
    double c = k * k * g.g(i) * g.g(i) / (w * w);
    if (c == 0.0) continue;
    sum += c * (half_fejer(omega - w, t) + half_fejer(omega + w, t));
  }
  return omega * sum;
}

SampledSpectrum spectral_density_smooth(const EigenSystem& eig, const CouplingVector& g, double k,
                                        std::span<const double> omega_grid, double t_max) {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) {
    throw Error(ErrorCode::InvalidArgument, "t_max must be positive and finite");
  }
  for (std::size_t s = 0; s < omega_grid.size(); ++s) {
    if (!std::isfinite(omega_grid[s]) || omega_grid[s] < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "grid frequencies must be finite and non-negative");
    }
    if (s > 0 && !(omega_grid[s] > omega_grid[s - 1])) {
      throw Error(ErrorCode::InvalidArgument, "grid must be strictly increasing");
    }
  }
  SampledSpectrum out;
  out.t_max = t_max;
  out.samples.resize(omega_grid.size());
  parallel_for(omega_grid.size(), [&](std::size_t s) {
    out.samples[s] = {omega_grid[s], spectral_density_at(eig, g, k, omega_grid[s], t_max)};
  });
  double tau = recurrence_time(eig);
  if (t_max > tau) {
    std::ostringstream os;
    os.precision(6);
    os << "t_max " << t_max << " exceeds the recurrence time estimate " << tau
       << "; the spectrum is in the discrete regime";
    out.warnings.push_back(os.str());
  }
  return out;
}

double recurrence_time(std::span<const double> omegas_desc) {
  const auto n = omegas_desc.size();
  if (n < 2) return std::numeric_limits<double>::infinity();
  double gap = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    gap = std::max(gap, std::abs(omegas_desc[i] - omegas_desc[i + 1]));
  }
  double v_max = gap / (std::numbers::pi / static_cast<double>(n));
  if (!(v_max > 0.0)) return std::numeric_limits<double>::infinity();
  return 2.0 * static_cast<double>(n) / v_max;
}

double recurrence_time(const EigenSystem& eig) {
  return recurrence_time(std::span<const double>(eig.omegas.data(), eig.size()));
}

double recurrence_time(const NetworkSpec& spec) { return recurrence_time(diagonalize(to_adjacency(spec))); }

}  // namespace netprobe
