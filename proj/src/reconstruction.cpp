#include "netprobe/reconstruction.hpp"

#include "netprobe/error.hpp"
#include "netprobe/io.hpp"
#include "netprobe/parallel.hpp"
#include "netprobe/spectral.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <tuple>

namespace netprobe {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); }

std::vector<double> checked_spacings(std::span<const double> omegas_desc) {
  if (omegas_desc.size() < 2) {
    throw Error(ErrorCode::DegenerateSpacing, "a single mode has no sampling interval");
  }
  for (double w : omegas_desc) {
    if (!(w > 0.0) || !std::isfinite(w)) invalid("eigenfrequencies must be positive");
  }
  auto d = mode_spacings(omegas_desc);
  const double tol = 1e-12 * omegas_desc[0];
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(d[i] > tol)) {
      throw Error(ErrorCode::DegenerateSpacing,
                  "frequencies " + std::to_string(i) + " and " + std::to_string(i + 1) +
                      " are not distinct and descending");
    }
  }
  return d;
}

double magnitude(double j, double omega, double spacing, double k) {
  return std::sqrt(std::max(0.0, 2.0 * j * omega * spacing / (std::numbers::pi * k * k)));
}

double max_orthogonality_residual(const Matrix& k) {
  const auto n = k.cols();
  return (k.transpose() * k - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

double golden_max(const std::function<double(double)>& f, double a, double b, std::size_t iters) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (std::size_t it = 0; it < iters; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / 2.0;
}

// Bisection order 0, n/2, n/4, 3n/4, ... starting from the reference node.
std::vector<std::size_t> detection_order(std::size_t n, std::size_t reference, std::size_t cap) {
  std::vector<std::size_t> order{reference};
  for (std::size_t den = 2; order.size() < std::min(n, cap) && den <= 2 * n; den *= 2) {
    for (std::size_t num = 1; num < den && order.size() < std::min(n, cap); num += 2) {
      std::size_t node = (reference + num * n / den) % n;
      if (std::find(order.begin(), order.end(), node) == order.end()) order.push_back(node);
    }
  }
  for (std::size_t node = 0; node < n && order.size() < std::min(n, cap); ++node) {
    if (std::find(order.begin(), order.end(), node) == order.end()) order.push_back(node);
  }
  return order;
}

struct FoundLine {
  double omega;
  double height;
  std::size_t node;
};

}  // namespace

Vector magnitudes_from_density(std::span<const double> j_values, std::span<const double> omegas_desc,
                               double k) {
  if (j_values.size() != omegas_desc.size()) invalid("one density value per frequency is required");
  if (!(k > 0.0) || !std::isfinite(k)) invalid("coupling k must be positive");
  auto d = checked_spacings(omegas_desc);
  Vector out(static_cast<Eigen::Index>(j_values.size()));
  for (std::size_t i = 0; i < j_values.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = magnitude(j_values[i], omegas_desc[i], d[i], k);
  }
  return out;
}

std::size_t sign_reference(const Matrix& magnitudes, std::size_t mode, const SignOptions& options) {
  const auto col = magnitudes.col(static_cast<Eigen::Index>(mode));
  Eigen::Index arg = 0;
  double colmax = col.cwiseAbs().maxCoeff(&arg);
  double ref = std::abs(col(static_cast<Eigen::Index>(options.reference)));
  if (colmax > 0.0 && ref < options.eps_ref * colmax) return static_cast<std::size_t>(arg);
  return options.reference;
}

SignedK resolve_signs(const Matrix& magnitudes, std::span<const PairMeasurement> pairs,
                      const SignOptions& options) {
  const auto n = static_cast<std::size_t>(magnitudes.rows());
  if (magnitudes.cols() != magnitudes.rows()) invalid("magnitude table must be square");
  if (options.reference >= n) invalid("reference node out of range");

  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> lookup;
  for (const auto& p : pairs) {
    lookup[{std::min(p.ref, p.node), std::max(p.ref, p.node), p.mode}] = p.value;
  }

  SignedK out;
  out.k_est = magnitudes.cwiseAbs();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = sign_reference(magnitudes, i, options);
    if (r != options.reference) out.fallback_modes.push_back(i);
    const auto ci = static_cast<Eigen::Index>(i);
    const double a = std::abs(magnitudes(static_cast<Eigen::Index>(r), ci));
    for (std::size_t j = 0; j < n; ++j) {
      if (j == r) continue;
      auto it = lookup.find({std::min(r, j), std::max(r, j), i});
      if (it == lookup.end()) {
        invalid("missing pair measurement for nodes " + std::to_string(r) + ", " +
                std::to_string(j) + " at mode " + std::to_string(i));
      }
      const double b = std::abs(magnitudes(static_cast<Eigen::Index>(j), ci));
      const double s = it->second;
      const double mid = (a + b + std::abs(a - b)) / 2.0;
      if (std::abs(s - mid) <= options.ambiguity_tol * (a + b)) {
        out.ambiguous.emplace_back(j, i);
      } else if (s < mid) {
        out.k_est(static_cast<Eigen::Index>(j), ci) = -b;
      }
    }
  }
  return out;
}

Matrix nearest_orthonormal(const Matrix& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) invalid("matrix must be square and non-empty");
  if (!m.allFinite()) invalid("matrix has non-finite entries");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(s.size() - 1) < 1e-12 * s(0)) {
    throw Error(ErrorCode::RankDeficient, "matrix is rank deficient: singular value ratio " +
                                              io::format_double(s(0) > 0.0 ? s(s.size() - 1) / s(0) : 0.0));
  }
  return svd.matrixU() * svd.matrixV().transpose();
}

AdjacencyMatrix assemble_adjacency(const Matrix& k_est, std::span<const double> omegas) {
  if (k_est.rows() != k_est.cols() || static_cast<std::size_t>(k_est.cols()) != omegas.size()) {
    invalid("K must be square with one frequency per column");
  }
  Vector d(static_cast<Eigen::Index>(omegas.size()));
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (!(omegas[i] > 0.0)) invalid("frequencies must be positive");
    d(static_cast<Eigen::Index>(i)) = omegas[i] * omegas[i] / 2.0;
  }
  Matrix a = k_est * d.asDiagonal() * k_est.transpose();
  return AdjacencyMatrix((a + a.transpose()) / 2.0);
}

void ReconstructionConfig::validate(std::size_t n) const {
  if (n == 0) invalid("N must be positive");
  if (!(omega_min > 0.0) || !(omega_max > omega_min)) invalid("need 0 < omega_min < omega_max");
  if (pilot_steps < 3) invalid("pilot scan needs at least three points");
  if (!(pilot_time > 0.0)) invalid("pilot time must be positive");
  if (!(pilot_k > 0.0)) invalid("pilot coupling must be positive");
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) invalid("temperature must be non-negative");
  validate_probe_init(init);
  if (k && (!(*k > 0.0) || !std::isfinite(*k))) invalid("coupling k must be positive");
  if (!(rabi_phase > 0.0)) invalid("rabi phase must be positive");
  if (!(detection_multiplier > 0.0)) invalid("detection multiplier must be positive");
  if (!(grid_oversampling > 0.0)) invalid("grid oversampling must be positive");
  if (max_detection_nodes == 0) invalid("at least one detection node is required");
  if (golden_iterations == 0) invalid("golden iterations must be positive");
  if (thermal_points < 3) invalid("thermal grid needs at least three points");
  if (!(thermal_span > 0.0)) invalid("thermal span must be positive");
  if (signs.reference >= n) invalid("reference node out of range");
  if (!(signs.eps_ref >= 0.0 && signs.eps_ref < 1.0)) invalid("eps_ref must lie in [0, 1)");
  if (!(signs.ambiguity_tol >= 0.0)) invalid("ambiguity tolerance must be non-negative");
}

AlgebraResult reconstruct_from_densities(const DensityTables& tables,
                                         std::span<const double> omegas_desc, double k,
                                         const SignOptions& options) {
  const auto n = static_cast<Eigen::Index>(omegas_desc.size());
  if (tables.single.rows() != n || tables.single.cols() != n) {
    invalid("density table must be N x N");
  }
  if (!(k > 0.0)) invalid("coupling k must be positive");
  auto d = checked_spacings(omegas_desc);

  AlgebraResult out;
  out.magnitudes.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      auto ui = static_cast<std::size_t>(i);
      out.magnitudes(j, i) = magnitude(tables.single(j, i), omegas_desc[ui], d[ui], k);
    }
  }
  std::vector<PairMeasurement> pair_mags = tables.pairs;
  for (auto& p : pair_mags) {
    if (p.mode >= omegas_desc.size()) invalid("pair measurement mode out of range");
    p.value = magnitude(p.value, omegas_desc[p.mode], d[p.mode], k);
  }
  out.signed_k = resolve_signs(out.magnitudes, pair_mags, options);
  out.orthogonality_residual = max_orthogonality_residual(out.signed_k.k_est);
  out.k_projected = nearest_orthonormal(out.signed_k.k_est);
  out.a_est = assemble_adjacency(out.k_projected, omegas_desc);
  return out;
}

ReconstructionReport reconstruct(const NetworkOracle& oracle, std::size_t n,
                                 const ReconstructionConfig& config) {
  config.validate(n);
  if (oracle.size() != n) {
    invalid("oracle network has " + std::to_string(oracle.size()) + " nodes, expected " +
            std::to_string(n));
  }
  CountingOracle counter(oracle);
  ReconstructionReport report;
  auto& diag = report.diagnostics;
  const double temp = config.temperature;
  const std::size_t ref = config.signs.reference;

  auto j_est = [&](const NodeSet& nodes, double w, double k, double t) {
    double nt = counter.measure(nodes, w, k, config.init, t);
    try {
      return estimate_density_point(nt, initial_occupation(config.init, w), w, t, temp);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SignFlip || e.code() == ErrorCode::DegenerateContrast) return 0.0;
      throw;
    }
  };

  // Pilot scans in the continuum regime locate the band. An end node can be
  // nearly blind to localized modes, so the band is the union over two nodes.
  ProbeSchedule pilot;
  pilot.grid = linear_grid(config.omega_min, config.omega_max, config.pilot_steps);
  pilot.t = config.pilot_time;
  pilot.k = config.pilot_k;
  pilot.init = config.init;
  pilot.temperature = temp;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  NodeSet pilot_nodes{ref};
  if (n > 1) pilot_nodes.push_back((ref + n / 2) % n);
  for (auto node : pilot_nodes) {
    pilot.nodes = {node};
    ScanResult pilot_scan = scan_density(counter, pilot);
    double jmax = 0.0;
    for (const auto& p : pilot_scan.points) jmax = std::max(jmax, p.j);
    if (!(jmax > 0.0)) continue;
    // Isolated off-resonant readings are not band: a point counts only
    // together with a neighbour.
    const auto& pts = pilot_scan.points;
    for (std::size_t s = 0; s < pts.size(); ++s) {
      auto above = [&](std::size_t q) { return pts[q].j >= 0.01 * jmax; };
      bool with_neighbour = (s > 0 && above(s - 1)) || (s + 1 < pts.size() && above(s + 1));
      if (above(s) && with_neighbour) {
        lo = std::min(lo, pts[s].omega);
        hi = std::max(hi, pts[s].omega);
      }
    }
  }
  if (!(hi > 0.0)) {
    throw Error(ErrorCode::InsufficientEigenfrequencies, "pilot scan found no spectral weight");
  }
  const double margin = 4.0 * std::numbers::pi / config.pilot_time;
  lo = std::max(config.omega_min, lo - margin);
  hi = std::min(config.omega_max, hi + margin);
  diag.band_lo = lo;
  diag.band_hi = hi;

  const double tau_blind = 2.0 * std::numbers::pi * static_cast<double>(n) / (hi - lo);
  const double t_d = config.detection_multiplier * tau_blind;
  const double k = config.k.value_or(2.0 * lo * config.rabi_phase / t_d);
  diag.detection_time = t_d;
  diag.k = k;

  const double step = 2.0 * std::numbers::pi / t_d / config.grid_oversampling;
  const auto steps = static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1;
  ProbeSchedule det;
  det.grid = linear_grid(lo, hi, std::max<std::size_t>(steps, 3));
  det.t = t_d;
  det.k = k;
  det.init = config.init;
  det.temperature = temp;

  std::vector<FoundLine> found;
  for (auto node : detection_order(n, ref, config.max_detection_nodes)) {
    det.nodes = {node};
    diag.detection_nodes.push_back(node);
    auto result = detect_eigenfrequencies(counter, det, n);
    for (const auto& line : result.lines) {
      bool known = std::any_of(found.begin(), found.end(), [&](const FoundLine& f) {
        return std::abs(f.omega - line.omega) <= step;
      });
      if (!known) found.push_back({line.omega, line.height, node});
    }
    if (found.size() >= n) break;
  }
  diag.lines_found = found.size();
  if (found.size() < n) {
    throw Error(ErrorCode::InsufficientEigenfrequencies,
                "found " + std::to_string(found.size()) + " of " + std::to_string(n) +
                    " eigenfrequencies");
  }
  std::sort(found.begin(), found.end(),
            [](const FoundLine& a, const FoundLine& b) { return a.height > b.height; });
  found.resize(n);

  // Thermalization time at the strongest line, after centring on it.
  const FoundLine strongest = found.front();
  const NodeSet strong_node{strongest.node};
  const double w_strong = golden_max(
      [&](double w) { return j_est(strong_node, w, k, t_d); }, strongest.omega - 2.0 * step,
      strongest.omega + 2.0 * step, 8);
  auto t_grid = linear_grid(0.0, config.thermal_span * t_d, config.thermal_points);
  auto thermal = measure_thermal_time(counter, strong_node, w_strong, k, config.init, t_grid);
  diag.thermal_time = thermal.tau;
  diag.thermal_reversal_found = thermal.reversal_found;
  diag.detection_measurements = counter.calls();

  std::sort(found.begin(), found.end(),
            [](const FoundLine& a, const FoundLine& b) { return a.omega > b.omega; });
  std::vector<double> omegas(n);
  for (std::size_t i = 0; i < n; ++i) omegas[i] = found[i].omega;

  if (n == 1) {
    omegas[0] = w_strong;
    report.omegas_est = omegas;
    report.k_est = Matrix::Identity(1, 1);
    report.magnitudes = Matrix::Identity(1, 1);
    report.a_est = assemble_adjacency(report.k_est, omegas);
    diag.recurrence_estimate = std::numeric_limits<double>::infinity();
    diag.measurement_time = t_d;
    diag.degenerate_modes = {false};
    diag.measurement_count = counter.calls();
    return report;
  }

  const double tau_f = recurrence_time(omegas);
  const double t_m = (tau_f + thermal.tau) / 2.0;
  diag.recurrence_estimate = tau_f;
  diag.measurement_time = t_m;

  // Refine each line at the measurement time, probing the node that revealed it.
  const double bracket = 2.0 * (2.0 * std::numbers::pi / t_m);
  parallel_for(n, [&](std::size_t i) {
    const NodeSet nodes{found[i].node};
    omegas[i] = golden_max([&](double w) { return j_est(nodes, w, k, t_m); }, omegas[i] - bracket,
                           omegas[i] + bracket, config.golden_iterations);
  });
  std::sort(omegas.begin(), omegas.end(), std::greater<>());

  DensityTables tables;
  tables.single.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  parallel_for(n * n, [&](std::size_t idx) {
    std::size_t j = idx / n;
    std::size_t i = idx % n;
    tables.single(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
        j_est({j}, omegas[i], k, t_m);
  });

  // Pair measurements against each column's reference node.
  auto spacings = checked_spacings(omegas);
  Matrix mags(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      auto ej = static_cast<Eigen::Index>(j);
      auto ei = static_cast<Eigen::Index>(i);
      mags(ej, ei) = magnitude(tables.single(ej, ei), omegas[i], spacings[i], k);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = sign_reference(mags, i, config.signs);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != r) tables.pairs.push_back({r, j, i, 0.0});
    }
  }
  parallel_for(tables.pairs.size(), [&](std::size_t p) {
    auto& pm = tables.pairs[p];
    pm.value = j_est({pm.ref, pm.node}, omegas[pm.mode], k, t_m);
  });

  auto algebra = reconstruct_from_densities(tables, omegas, k, config.signs);

  report.omegas_est = omegas;
  report.magnitudes = algebra.magnitudes;
  report.k_est = algebra.k_projected;
  report.a_est = algebra.a_est;
  diag.orthogonality_residual = algebra.orthogonality_residual;
  diag.fallback_modes = algebra.signed_k.fallback_modes;
  diag.ambiguous_signs = algebra.signed_k.ambiguous;
  for (Eigen::Index j = 0; j < algebra.magnitudes.rows(); ++j) {
    double norm2 = algebra.magnitudes.row(j).squaredNorm();
    if (norm2 < 0.8 || norm2 > 1.2) diag.row_norm_flags.push_back(static_cast<std::size_t>(j));
  }
  diag.degenerate_modes.assign(n, false);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (omegas[i] - omegas[i + 1] <= 1e-10 * omegas[0]) {
      diag.degenerate_modes[i] = diag.degenerate_modes[i + 1] = true;
    }
  }
  diag.measurement_count = counter.calls();
  return report;
}

Comparison compare_adjacency(const Matrix& a_est, const Matrix& a_true,
                             std::optional<double> link_threshold) {
  if (a_est.rows() != a_true.rows() || a_est.cols() != a_true.cols() || a_est.rows() != a_est.cols()) {
    invalid("matrices must be square with equal dimensions");
  }
  const auto n = a_est.rows();
  Comparison c;
  double norm = a_true.norm();
  c.relative_frobenius = norm > 0.0 ? (a_est - a_true).norm() / norm : (a_est - a_true).norm();
  c.max_abs_diagonal_error = n > 0 ? (a_est.diagonal() - a_true.diagonal()).cwiseAbs().maxCoeff() : 0.0;

  double off_max = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) off_max = std::max(off_max, std::abs(a_est(i, j)));
    }
  }
  c.threshold = link_threshold.value_or(0.1 * off_max);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      bool truth = a_true(i, j) != 0.0;
      bool pred = std::abs(a_est(i, j)) > c.threshold;
      c.true_links += truth;
      c.predicted_links += pred;
      c.true_positives += truth && pred;
    }
  }
  c.precision = c.predicted_links > 0
                    ? static_cast<double>(c.true_positives) / static_cast<double>(c.predicted_links)
                    : 1.0;
  c.recall = c.true_links > 0
                 ? static_cast<double>(c.true_positives) / static_cast<double>(c.true_links)
                 : 1.0;
  return c;
}

}  // namespace netprobe
