#pragma once

#include "netprobe/gaussian_dynamics.hpp"
#include "netprobe/network_model.hpp"
#include "netprobe/probing.hpp"
#include "netprobe/types.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace netprobe {

// |g_i| = sqrt(2 J(Omega_i) Omega_i dOmega_i / (pi k^2)) for a descending,
// distinct frequency list. Throws DegenerateSpacing when dOmega_i falls below
// 1e-12 times the largest frequency.
Vector magnitudes_from_density(std::span<const double> j_values,
                               std::span<const double> omegas_desc, double k);

// |K_ref,i + K_j,i| measured by probing {ref, j} at Omega_i.
struct PairMeasurement {
  std::size_t ref = 0;
  std::size_t node = 0;
  std::size_t mode = 0;
  double value = 0.0;
};

struct SignOptions {
  std::size_t reference = 0;
  // Reference entries below eps_ref times the column maximum hand the column to
  // the node with the largest magnitude.
  double eps_ref = 1e-3;
  // Decisions closer than this (relative to a + b) to the midpoint are ambiguous.
  double ambiguity_tol = 1e-6;
};

// Reference node used for column `mode` under `options`.
std::size_t sign_reference(const Matrix& magnitudes, std::size_t mode, const SignOptions& options);

struct SignedK {
  Matrix k_est;
  std::vector<std::size_t> fallback_modes;                       // columns using another reference
  std::vector<std::pair<std::size_t, std::size_t>> ambiguous;    // (node, mode)
};

// Same sign when s > (a + b + |a - b|) / 2, opposite otherwise. Each column's
// reference entry is taken positive (columns carry a free sign).
SignedK resolve_signs(const Matrix& magnitudes, std::span<const PairMeasurement> pairs,
                      const SignOptions& options = {});

// Orthogonal polar factor W V^T of M = W S V^T. Throws RankDeficient when the
// smallest singular value is below 1e-12 times the largest.
Matrix nearest_orthonormal(const Matrix& m);

// A = K diag(Omega^2 / 2) K^T, symmetrized.
AdjacencyMatrix assemble_adjacency(const Matrix& k_est, std::span<const double> omegas);

struct ReconstructionConfig {
  // Pilot continuum scans used to locate the band.
  double omega_min = 0.05;
  double omega_max = 2.0;
  std::size_t pilot_steps = 100;
  double pilot_time = 200.0;
  double pilot_k = 0.01;

  double temperature = 0.0;  // known network temperature
  ProbeInit init = probe::SqueezedVacuum{1.0, std::numbers::pi / 2};

  // Coupling for discrete-regime measurements. Unset: chosen so that a probe
  // resonant with a fully coupled mode accumulates at most `rabi_phase` of
  // exchange phase over the detection time.
  std::optional<double> k;
  double rabi_phase = 0.5;

  // Detection time = detection_multiplier x blind recurrence estimate.
  double detection_multiplier = 16.0;
  // Grid points per resolution width 2 pi / t.
  double grid_oversampling = 2.0;
  std::size_t max_detection_nodes = 8;

  std::size_t golden_iterations = 10;
  // <n(t)> at the strongest line is sampled on thermal_points times spanning
  // thermal_span x detection time.
  std::size_t thermal_points = 200;
  double thermal_span = 25.0;

  SignOptions signs;

  void validate(std::size_t n) const;
};

struct ReconstructionDiagnostics {
  std::size_t measurement_count = 0;
  std::size_t detection_measurements = 0;
  double orthogonality_residual = 0.0;  // max |K^T K - I| before projection
  double band_lo = 0.0;
  double band_hi = 0.0;
  double k = 0.0;
  double detection_time = 0.0;
  double measurement_time = 0.0;
  double recurrence_estimate = 0.0;
  double thermal_time = 0.0;
  bool thermal_reversal_found = false;
  std::vector<std::size_t> detection_nodes;
  std::size_t lines_found = 0;
  std::vector<std::size_t> row_norm_flags;  // rows with sum m^2 outside [0.8, 1.2]
  std::vector<std::size_t> fallback_modes;
  std::vector<std::pair<std::size_t, std::size_t>> ambiguous_signs;
  std::vector<bool> degenerate_modes;
};

struct ReconstructionReport {
  std::vector<double> omegas_est;  // descending
  Matrix k_est;                    // after projection
  Matrix magnitudes;
  AdjacencyMatrix a_est;
  ReconstructionDiagnostics diagnostics;
};

// Detect eigenfrequencies, measure magnitudes and pair sums at each of them,
// resolve signs, project onto the orthogonal group and assemble A. Throws
// InsufficientEigenfrequencies when fewer than n lines are found.
ReconstructionReport reconstruct(const NetworkOracle& oracle, std::size_t n,
                                 const ReconstructionConfig& config = {});

// Pipeline algebra after detection, given J at each (node, mode) and at each
// pair. Shared by reconstruct and by tests that feed exact values.
struct DensityTables {
  Matrix single;                       // single(j, i) = J measured at node j, mode i
  std::vector<PairMeasurement> pairs;  // value holds J for the pair, not |g|
};

struct AlgebraResult {
  Matrix magnitudes;
  SignedK signed_k;
  Matrix k_projected;
  AdjacencyMatrix a_est;
  double orthogonality_residual = 0.0;
};

AlgebraResult reconstruct_from_densities(const DensityTables& tables,
                                         std::span<const double> omegas_desc, double k,
                                         const SignOptions& options = {});

struct Comparison {
  double relative_frobenius = 0.0;
  double precision = 1.0;
  double recall = 1.0;
  double max_abs_diagonal_error = 0.0;
  double threshold = 0.0;
  std::size_t true_links = 0;
  std::size_t predicted_links = 0;
  std::size_t true_positives = 0;
};

// Links are off-diagonal entries with |a| > threshold in the estimate and
// nonzero entries in the truth. Default threshold: 10% of the largest
// off-diagonal magnitude of a_est.
Comparison compare_adjacency(const Matrix& a_est, const Matrix& a_true,
                             std::optional<double> link_threshold = std::nullopt);

}  // namespace netprobe
