#pragma once

#include "netprobe/network_model.hpp"
#include "netprobe/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace netprobe {

// Normal modes of a network: columns of k_matrix are the eigenvectors of A,
// omegas the eigenfrequencies sorted in descending order.
struct EigenSystem {
  Matrix k_matrix;
  Vector omegas;
  // degenerate[i] is set when mode i shares its frequency with a neighbour
  // (to within 1e-10 relative); the spacing weight is then ill-defined.
  std::vector<bool> degenerate;

  std::size_t size() const noexcept { return static_cast<std::size_t>(omegas.size()); }
  bool has_degeneracy() const;
};

// Orthogonal diagonalization K^T A K = diag(Omega^2 / 2). Each eigenvector is
// signed so that its largest-magnitude entry is positive.
EigenSystem diagonalize(const AdjacencyMatrix& a);

struct CouplingVector {
  Vector g;
  NodeSet nodes;
};

// g_i = sum over probed nodes j of K_ji.
CouplingVector probe_couplings(const EigenSystem& eig, const NodeSet& nodes);

// gamma(t) = sum_i k^2 g_i^2 / Omega_i^2 cos(Omega_i t).
double damping_kernel(const EigenSystem& eig, const CouplingVector& g, double k, double t);

// Sampling intervals dOmega_i = Omega_i - Omega_{i+1} for a descending list;
// the last interval repeats the previous one. A single mode has no interval
// and gets NaN.
std::vector<double> mode_spacings(std::span<const double> omegas_desc);

struct SpectralLine {
  double omega = 0.0;
  double weight = 0.0;  // (pi/2) k^2 g^2 / Omega
  double binned = 0.0;  // weight / dOmega
};

struct SpectralComb {
  std::vector<SpectralLine> lines;
};

SpectralComb spectral_density_comb(const EigenSystem& eig, const CouplingVector& g, double k);

struct SpectrumSample {
  double omega = 0.0;
  double j = 0.0;
};

struct SampledSpectrum {
  std::vector<SpectrumSample> samples;
  double t_max = 0.0;
  std::vector<std::string> warnings;
};

// J(w) = w * int_0^t_max gamma(t) cos(w t) dt, evaluated in closed form per
// mode. Values are not clipped: truncation ringing may go slightly negative.
// A warning is attached when t_max exceeds recurrence_time(eig).
SampledSpectrum spectral_density_smooth(const EigenSystem& eig, const CouplingVector& g, double k,
                                        std::span<const double> omega_grid, double t_max);

// Single-point evaluation of the same closed form.
double spectral_density_at(const EigenSystem& eig, const CouplingVector& g, double k,
                           double omega, double t_max);

// (1/t) int_0^t J(omega; s) ds. The decay exponent of a weakly coupled probe is
// t J / omega with this J, and the log-ratio estimator converges to it as k -> 0.
double spectral_density_running_mean(const EigenSystem& eig, const CouplingVector& g, double k,
                                     double omega, double t);

// Recurrence-time estimate 2N / v_max with v_max = max_i |Omega_i - Omega_{i+1}| / (pi / N).
// A single mode never recurs: +infinity.
double recurrence_time(std::span<const double> omegas_desc);
double recurrence_time(const EigenSystem& eig);
double recurrence_time(const NetworkSpec& spec);

}  // namespace netprobe
