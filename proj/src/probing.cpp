#include "netprobe/probing.hpp"

#include "netprobe/error.hpp"
#include "netprobe/io.hpp"
#include "netprobe/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>

namespace netprobe {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); }

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t h, double v) { return splitmix(h ^ std::bit_cast<std::uint64_t>(v)); }

std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return splitmix(h ^ v); }

std::uint64_t hash_init(std::uint64_t h, const ProbeInit& init) {
  h = mix(h, static_cast<std::uint64_t>(init.index()));
  if (const auto* sq = std::get_if<probe::SqueezedVacuum>(&init)) {
    h = mix(mix(h, sq->r), sq->phi);
  } else if (const auto* th = std::get_if<probe::Thermal>(&init)) {
    h = mix(h, th->temperature);
  }
  return h;
}

double standard_normal(std::mt19937_64& rng) {
  auto unit = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
  double u1 = unit();
  double u2 = unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double hi = *mid;
  if (v.size() % 2 == 1) return hi;
  double lo = *std::max_element(v.begin(), mid);
  return (lo + hi) / 2.0;
}

}  // namespace

SimulatedOracle::SimulatedOracle(NetworkSpec hidden, double temperature) {
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    invalid("temperature must be non-negative and finite");
  }
  hidden.validate();
  n_ = hidden.n_nodes;
  adjacency_ = to_adjacency(hidden);
  EigenSystem eig = diagonalize(adjacency_);
  const auto n = static_cast<Eigen::Index>(n_);
  Vector dq(n);
  Vector dp(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double w = eig.omegas(i);
    double f = 2.0 * thermal_occupation(w, temperature) + 1.0;
    dq(i) = f / (2.0 * w);
    dp(i) = f * w / 2.0;
  }
  net_cov_qq_ = eig.k_matrix * dq.asDiagonal() * eig.k_matrix.transpose();
  net_cov_pp_ = eig.k_matrix * dp.asDiagonal() * eig.k_matrix.transpose();
}

std::unique_ptr<SimulatedOracle> SimulatedOracle::from_file(const std::filesystem::path& path,
                                                            double temperature) {
  return std::make_unique<SimulatedOracle>(io::load_network(path), temperature);
}

double SimulatedOracle::measure(const NodeSet& nodes, double omega_s, double k,
                                const ProbeInit& init, double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) invalid("interaction time must be non-negative and finite");
  validate_probe_init(init);
  TotalSystem sys = assemble_total(adjacency_, omega_s, k, nodes);
  const auto n = static_cast<Eigen::Index>(n_);
  const Eigen::Index m = n + 1;

  GaussianState st;
  st.mean = Vector::Zero(2 * m);
  st.cov = Matrix::Zero(2 * m, 2 * m);
  st.cov.block(1, 1, n, n) = net_cov_qq_;
  st.cov.block(m + 1, m + 1, n, n) = net_cov_pp_;
  // Probe block from a one-mode state with the same preparation.
  EigenSystem single;
  single.k_matrix = Matrix::Identity(1, 1);
  single.omegas = Vector::Constant(1, omega_s);
  single.degenerate = {false};
  GaussianState probe_only = initial_state(init, omega_s, single, 0.0);
  st.cov(0, 0) = probe_only.cov(0, 0);
  st.cov(m, m) = probe_only.cov(2, 2);
  st.cov(0, m) = st.cov(m, 0) = probe_only.cov(0, 2);

  auto mom = Propagator(sys).probe_moments(st, t);
  return (omega_s * mom.qq + mom.pp / omega_s) / 2.0 - 0.5;
}

NoisyOracle::NoisyOracle(const NetworkOracle& inner, double sigma, std::uint64_t seed)
    : inner_(inner), sigma_(sigma), seed_(seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) invalid("noise sigma must be non-negative and finite");
}

double NoisyOracle::measure(const NodeSet& nodes, double omega_s, double k, const ProbeInit& init,
                            double t) const {
  double value = inner_.measure(nodes, omega_s, k, init, t);
  if (sigma_ == 0.0) return value;
  std::uint64_t h = splitmix(seed_);
  for (auto j : nodes) h = mix(h, static_cast<std::uint64_t>(j));
  h = mix(mix(mix(h, omega_s), k), t);
  h = hash_init(h, init);
  std::mt19937_64 rng(h);
  return value + sigma_ * standard_normal(rng);
}

double CountingOracle::measure(const NodeSet& nodes, double omega_s, double k,
                               const ProbeInit& init, double t) const {
  calls_.fetch_add(1);
  return inner_.measure(nodes, omega_s, k, init, t);
}

void ProbeSchedule::validate() const {
  if (!(t > 0.0) || !std::isfinite(t)) invalid("interaction time t must be positive");
  if (!(k > 0.0) || !std::isfinite(k)) invalid("coupling k must be positive");
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) invalid("temperature must be non-negative");
  if (grid.empty()) invalid("frequency grid is empty");
  for (std::size_t s = 0; s < grid.size(); ++s) {
    if (!(grid[s] > 0.0) || !std::isfinite(grid[s])) invalid("grid frequencies must be positive");
    if (s > 0 && !(grid[s] > grid[s - 1])) invalid("frequency grid must be strictly increasing");
  }
  if (nodes.empty() || nodes.size() > 2) invalid("node set must hold one or two nodes");
  validate_probe_init(init);
}

bool ProbeSchedule::past_transient() const { return !grid.empty() && t >= 10.0 / grid.back(); }

std::vector<double> linear_grid(double lo, double hi, std::size_t steps) {
  if (steps == 0) invalid("grid needs at least one point");
  if (!std::isfinite(lo) || !std::isfinite(hi)) invalid("grid bounds must be finite");
  if (steps == 1) return {lo};
  if (!(hi > lo)) invalid("grid upper bound must exceed the lower bound");
  std::vector<double> g(steps);
  double h = (hi - lo) / static_cast<double>(steps - 1);
  for (std::size_t s = 0; s < steps; ++s) g[s] = lo + h * static_cast<double>(s);
  g.back() = hi;
  return g;
}

double estimate_density_point(double n_t, double n_0, double omega_s, double t, double temperature) {
  if (!(omega_s > 0.0)) invalid("probe frequency must be positive");
  if (!(t > 0.0)) invalid("interaction time must be positive");
  double n_eq = thermal_occupation(omega_s, temperature);
  double dn0 = n_eq - n_0;
  double dnt = n_eq - n_t;
  if (std::abs(dn0) < 1e-9 * std::max(1.0, n_eq)) {
    throw Error(ErrorCode::DegenerateContrast, "probe starts at the thermal fixed point");
  }
  if (!(dnt * dn0 > 0.0)) {
    throw Error(ErrorCode::SignFlip, "occupation crossed the thermal value");
  }
  return std::max(0.0, omega_s / t * std::log(dn0 / dnt));
}

std::string_view to_string(PointStatus status) noexcept {
  switch (status) {
    case PointStatus::Ok: return "ok";
    case PointStatus::DegenerateContrast: return "degenerate_contrast";
    case PointStatus::SignFlip: return "sign_flip";
  }
  return "unknown";
}

SampledSpectrum ScanResult::spectrum() const {
  SampledSpectrum out;
  out.t_max = t;
  for (const auto& p : points) {
    if (p.status == PointStatus::Ok) out.samples.push_back({p.omega, p.j});
  }
  return out;
}

ScanResult scan_density(const NetworkOracle& oracle, const ProbeSchedule& schedule) {
  schedule.validate();
  validate_node_set(schedule.nodes, oracle.size());
  ScanResult out;
  out.t = schedule.t;
  out.points.resize(schedule.grid.size());
  parallel_for(schedule.grid.size(), [&](std::size_t s) {
    double w = schedule.grid[s];
    double n0 = initial_occupation(schedule.init, w);
    double nt = oracle.measure(schedule.nodes, w, schedule.k, schedule.init, schedule.t);
    ScanPoint p{w, 0.0, PointStatus::Ok};
    try {
      p.j = estimate_density_point(nt, n0, w, schedule.t, schedule.temperature);
    } catch (const Error& e) {
      p.status = e.code() == ErrorCode::SignFlip ? PointStatus::SignFlip
                                                 : PointStatus::DegenerateContrast;
    }
    out.points[s] = p;
  });
  return out;
}

DetectionResult find_lines(const ScanResult& scan, std::size_t expected_count) {
  DetectionResult out;
  out.expected_count = expected_count;
  out.scan = scan;
  const auto& pts = scan.points;
  const std::size_t n = pts.size();
  std::vector<double> j(n);
  for (std::size_t s = 0; s < n; ++s) j[s] = pts[s].j;
  out.threshold = 3.0 * median(j);

  std::vector<std::size_t> peaks;
  for (std::size_t s = 1; s + 1 < n; ++s) {
    if (j[s] > j[s - 1] && j[s] >= j[s + 1] && j[s] > out.threshold) peaks.push_back(s);
  }

  // A line at distance d leaves sidelobes of relative height at most
  // 4 / (d t)^2; peaks below three times the summed envelope of the stronger
  // peaks are not lines.
  const double t = scan.t;
  for (auto s : peaks) {
    double envelope = 0.0;
    for (auto r : peaks) {
      if (j[r] <= j[s]) continue;
      double dt = std::max(std::abs(pts[r].omega - pts[s].omega) * t, 1e-9);
      envelope += j[r] * 4.0 / (dt * dt);
    }
    if (j[s] < 3.0 * envelope) continue;

    double y0 = j[s - 1], y1 = j[s], y2 = j[s + 1];
    double den = y0 - 2.0 * y1 + y2;
    double off = den != 0.0 ? std::clamp(0.5 * (y0 - y2) / den, -0.5, 0.5) : 0.0;
    double h = off >= 0.0 ? pts[s + 1].omega - pts[s].omega : pts[s].omega - pts[s - 1].omega;
    DetectedLine line;
    line.omega = pts[s].omega + off * h;
    line.height = y1 - 0.25 * (y0 - y2) * off;

    double left = y1;
    for (std::size_t q = s; q-- > 0;) {
      if (j[q] > y1) break;
      left = std::min(left, j[q]);
    }
    double right = y1;
    for (std::size_t q = s + 1; q < n; ++q) {
      if (j[q] > y1) break;
      right = std::min(right, j[q]);
    }
    line.prominence = y1 - std::max(left, right);
    out.lines.push_back(line);
  }
  std::sort(out.lines.begin(), out.lines.end(),
            [](const DetectedLine& a, const DetectedLine& b) { return a.omega > b.omega; });
  out.partial = out.lines.size() < expected_count;
  return out;
}

DetectionResult detect_eigenfrequencies(const NetworkOracle& oracle, const ProbeSchedule& schedule,
                                        std::size_t expected_count) {
  schedule.validate();
  if (schedule.grid.size() < 3) invalid("detection needs at least three grid points");
  double widest = 0.0;
  for (std::size_t s = 1; s < schedule.grid.size(); ++s) {
    widest = std::max(widest, schedule.grid[s] - schedule.grid[s - 1]);
  }
  double limit = std::numbers::pi / schedule.t;
  if (widest > limit * (1.0 + 1e-9)) {
    throw Error(ErrorCode::GridTooCoarse,
                "grid step " + io::format_double(widest) + " exceeds pi/t = " +
                    io::format_double(limit) + "; neighbouring lines would merge");
  }
  return find_lines(scan_density(oracle, schedule), expected_count);
}

ThermalTime measure_thermal_time(const NetworkOracle& oracle, const NodeSet& nodes, double omega_s,
                                 double k, const ProbeInit& init, std::span<const double> t_grid) {
  if (!(omega_s > 0.0)) invalid("probe frequency must be positive");
  if (!(k >= 0.0)) invalid("coupling must be non-negative");
  validate_probe_init(init);
  validate_node_set(nodes, oracle.size());
  if (t_grid.size() < 3) invalid("time grid needs at least three points");
  for (std::size_t s = 1; s < t_grid.size(); ++s) {
    if (!(t_grid[s] > t_grid[s - 1])) invalid("time grid must be strictly increasing");
  }
  if (!(t_grid[0] >= 0.0)) invalid("time grid must start at t >= 0");

  ThermalTime out;
  out.occupation.resize(t_grid.size());
  parallel_for(t_grid.size(), [&](std::size_t s) {
    out.occupation[s] = oracle.measure(nodes, omega_s, k, init, t_grid[s]);
  });

  const double floor = 10.0 / omega_s;
  double scale = 0.0;
  for (double v : out.occupation) scale = std::max(scale, std::abs(v));
  const double tiny = 1e-12 * std::max(1.0, scale);
  int last_sign = 0;
  for (std::size_t s = 1; s < t_grid.size(); ++s) {
    if (t_grid[s - 1] < floor) continue;
    double d = out.occupation[s] - out.occupation[s - 1];
    if (std::abs(d) <= tiny) continue;
    int sign = d > 0.0 ? 1 : -1;
    if (last_sign != 0 && sign != last_sign) {
      out.tau = t_grid[s - 1];
      out.reversal_found = true;
      return out;
    }
    last_sign = sign;
  }
  out.tau = t_grid.back();
  return out;
}

}  // namespace netprobe
