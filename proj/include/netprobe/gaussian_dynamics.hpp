#pragma once

#include "netprobe/network_model.hpp"
#include "netprobe/spectral.hpp"
#include "netprobe/types.hpp"

#include <variant>

namespace netprobe {

// Probe (index 0) plus network as one quadratic Hamiltonian
// H = p.p/2 + x.A_tot.x with A_tot[0][0] = omega_s^2/2 and A_tot[0][j] = k/2
// for each probed node j.
struct TotalSystem {
  Matrix a_tot;
  double omega_s = 0.0;
  double k = 0.0;
  NodeSet nodes;

  std::size_t modes() const noexcept { return static_cast<std::size_t>(a_tot.rows()); }
};

// Throws NotPositiveDefinite when k is too strong for the network.
TotalSystem assemble_total(const AdjacencyMatrix& a, double omega_s, double k, const NodeSet& nodes);

namespace probe {
struct Vacuum {};
struct SqueezedVacuum {
  double r = 0.0;
  double phi = 0.0;
};
struct Thermal {
  double temperature = 0.0;
};
}  // namespace probe

using ProbeInit = std::variant<probe::Vacuum, probe::SqueezedVacuum, probe::Thermal>;

void validate_probe_init(const ProbeInit& init);

// <n(0)> of the probe for a given preparation.
double initial_occupation(const ProbeInit& init, double omega_s);

// Zero-mean Gaussian state over M = N + 1 modes. Ordering is (q_0..q_{M-1},
// p_0..p_{M-1}); cov holds symmetrized second moments <{x_a, x_b}>/2.
struct GaussianState {
  Vector mean;
  Matrix cov;

  std::size_t modes() const noexcept { return static_cast<std::size_t>(mean.size() / 2); }
};

// Probe prepared in `init`, network thermal at temperature T in its own
// eigenbasis, no probe-network correlations.
GaussianState initial_state(const ProbeInit& init, double omega_s, const EigenSystem& eig,
                            double temperature);

// Exact symplectic propagation, computed from one diagonalization of A_tot.
class Propagator {
 public:
  explicit Propagator(const TotalSystem& sys);

  // 2M x 2M matrix S(t) with x(t) = S(t) x(0).
  Matrix symplectic(double t) const;

  GaussianState evolve(const GaussianState& state, double t) const;

  // Probe second moments <q_0^2>, <p_0^2> at time t in O(M^2), without
  // forming the full evolved covariance.
  struct ProbeMoments {
    double qq = 0.0;
    double pp = 0.0;
  };
  ProbeMoments probe_moments(const GaussianState& state, double t) const;

  const Vector& mode_frequencies() const noexcept { return nu_; }

 private:
  Matrix u_;   // eigenvectors of A_tot
  Vector nu_;  // sqrt(2 * eigenvalues)
};

GaussianState evolve(const TotalSystem& sys, const GaussianState& state, double t);

// <n> = (omega_s <q^2> + <p^2> / omega_s) / 2 - 1/2 for the probe (index 0).
double mean_occupation(const GaussianState& state, double omega_s);

// <H> = tr(cov_pp)/2 + tr(A_tot cov_qq) for zero-mean states.
double total_energy(const TotalSystem& sys, const GaussianState& state);

// Smallest eigenvalue of cov + (i/2) sigma; non-negative for physical states.
double uncertainty_margin(const GaussianState& state);

// Planck occupation (e^{w/T} - 1)^{-1}; exactly 0 at T = 0.
double thermal_occupation(double omega, double temperature);

// Weak-coupling decay law: e^{-G t} n0 + N(w_S)(1 - e^{-G t}) with G = J / w_S.
double predicted_occupation(double t, double j_at_omega_s, double omega_s, double temperature,
                            double n0);

}  // namespace netprobe
