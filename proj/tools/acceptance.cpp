// Acceptance run: one PASS/FAIL line per criterion.
// usage: netprobe_acceptance [criterion ...]   (default: all)

#include "netprobe/error.hpp"
#include "netprobe/gaussian_dynamics.hpp"
#include "netprobe/network_model.hpp"
#include "netprobe/probing.hpp"
#include "netprobe/reconstruction.hpp"
#include "netprobe/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace netprobe;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> omega_list(const EigenSystem& eig) {
  return {eig.omegas.data(), eig.omegas.data() + eig.omegas.size()};
}

std::size_t max_degree_node(const NetworkSpec& spec) {
  std::vector<std::size_t> deg(spec.n_nodes, 0);
  for (const auto& e : spec.edges) {
    ++deg[e.i];
    ++deg[e.j];
  }
  return static_cast<std::size_t>(std::max_element(deg.begin(), deg.end()) - deg.begin());
}

// Height above the higher of the two flanking minima, scanning out to the next
// higher sample or the grid end.
double prominence(const std::vector<double>& y, std::size_t p) {
  double left = y[p], right = y[p];
  for (std::size_t i = p; i-- > 0;) {
    if (y[i] > y[p]) break;
    left = std::min(left, y[i]);
  }
  for (std::size_t i = p + 1; i < y.size(); ++i) {
    if (y[i] > y[p]) break;
    right = std::min(right, y[i]);
  }
  return y[p] - std::max(left, right);
}

std::vector<std::size_t> local_maxima(const std::vector<double>& y) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (y[i] > y[i - 1] && y[i] >= y[i + 1]) out.push_back(i);
  }
  return out;
}

// Regions above 5% of the maximum; neighbouring regions are separate bands only
// when the curve between them drops below 1% of the maximum.
std::size_t count_bands(const std::vector<double>& y) {
  const double peak = *std::max_element(y.begin(), y.end());
  std::size_t bands = 0;
  bool in_band = false;
  double dip = inf;
  for (double v : y) {
    if (v > 0.05 * peak) {
      if (!in_band && (bands == 0 || dip < 0.01 * peak)) ++bands;
      in_band = true;
      dip = inf;
    } else {
      in_band = false;
      dip = std::min(dip, v);
    }
  }
  return bands;
}

// ---------------------------------------------------------------------------

struct Fig2Config {
  const char* label;
  TopologyRecipe recipe;
  bool connected;
  bool hub;  // probe the highest-degree node
  std::size_t node;
};

std::vector<Fig2Config> fig2_configs() {
  return {
      {"A trimer chain", {recipe::PeriodicChain{200, 0.1, 0.06, 3}, 0}, false, false, 0},
      {"B shortcut chain", {recipe::ShortcutChain{200, 0.1, 3, 199, 0.1}, 0}, false, false, 0},
      {"C small world", {recipe::SmallWorld{200, 0.1, 0.003, 10}, 0}, false, false, 100},
      {"D Erdos-Renyi", {recipe::ErdosRenyi{200, 0.05, 0.03}, 0}, true, true, 0},
  };
}

Verdict probing_accuracy() {
  const double k = 0.01, t = 500.0, temp = 5.0;
  bool all = true;
  std::string detail;
  for (const auto& c : fig2_configs()) {
    auto spec = generate(c.recipe, 0.25, {c.connected, 200});
    const std::size_t node = c.hub ? max_degree_node(spec) : c.node;
    auto eig = diagonalize(to_adjacency(spec));
    auto g = probe_couplings(eig, {node});
    auto grid = linear_grid(0.2, std::max(0.75, eig.omegas(0) + 0.05), 200);

    SimulatedOracle oracle(spec, temp);
    ProbeSchedule s;
    s.grid = grid;
    s.t = t;
    s.k = k;
    s.temperature = temp;
    s.nodes = {node};
    auto scan = scan_density(oracle, s);
    auto smooth = spectral_density_smooth(eig, g, k, grid, t);

    double peak = 0.0;
    for (const auto& p : smooth.samples) peak = std::max(peak, p.j);
    std::size_t checked = 0, within = 0, flips = 0;
    double worst = 0.0, worst_mean = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double ref = smooth.samples[i].j;
      if (ref < 0.1 * peak) continue;
      ++checked;
      const auto& p = scan.points[i];
      double dev = inf;
      if (p.status == PointStatus::Ok) {
        dev = std::abs(p.j - ref) / ref;
        double mean = spectral_density_running_mean(eig, g, k, grid[i], t);
        worst_mean = std::max(worst_mean, std::abs(p.j - mean) / mean);
      } else {
        ++flips;
      }
      within += dev <= 0.10;
      worst = std::max(worst, dev);
    }
    all = all && within == checked;
    detail += fmt("%s node %zu: %zu/%zu within 10%%, max dev %.3g, %zu invalid points, valid points vs running mean max dev %.3g; ",
                  c.label, node, within, checked, worst, flips, worst_mean);
  }
  detail.resize(detail.size() - 2);
  return {all, detail};
}

Verdict band_structure() {
  const double k = 0.01, t = 500.0;
  auto grid = linear_grid(0.2, 0.75, 2201);

  auto trimer = generate({recipe::PeriodicChain{200, 0.1, 0.06, 3}, 0}, 0.25);
  auto et = diagonalize(to_adjacency(trimer));
  auto sm = spectral_density_smooth(et, probe_couplings(et, {0}), k, grid, t);
  // Truncation lobes outside the eigenfrequency range carry no spectral weight.
  const double lo = et.omegas(et.size() - 1), hi = et.omegas(0);
  std::vector<double> j;
  for (const auto& p : sm.samples) j.push_back(p.omega >= lo && p.omega <= hi ? p.j : 0.0);
  const std::size_t bands = count_bands(j);

  auto shortcut = generate({recipe::ShortcutChain{200, 0.1, 3, 199, 0.1}, 0}, 0.25);
  auto es = diagonalize(to_adjacency(shortcut));
  auto gs = probe_couplings(es, {0});
  std::vector<double> js;
  for (double w : grid) js.push_back(spectral_density_running_mean(es, gs, k, w, t));
  const double peak = *std::max_element(js.begin(), js.end());
  std::vector<double> spikes;
  for (auto p : local_maxima(js)) {
    if (js[p] >= 0.05 * peak && prominence(js, p) >= 0.5 * js[p]) spikes.push_back(grid[p]);
  }
  std::string where;
  for (double w : spikes) where += fmt("%s%.3f", where.empty() ? "" : " ", w);
  return {bands == 3 && spikes.size() == 3,
          fmt("trimer chain node 0: %zu bands; shortcut (3, 199) node 0: %zu spikes at [%s]", bands,
              spikes.size(), where.c_str())};
}

Verdict band_edges() {
  const double t = 500.0, step = pi / t;
  auto spec = generate({recipe::Chain{200, 0.1}, 0}, 0.25);
  auto eig = diagonalize(to_adjacency(spec));
  std::vector<double> grid;
  for (double w = 0.2; w <= 0.75 + 1e-12; w += step) grid.push_back(w);
  auto sm = spectral_density_smooth(eig, probe_couplings(eig, {100}), 0.01, grid, t);
  double peak = 0.0;
  for (const auto& p : sm.samples) peak = std::max(peak, p.j);
  double lo = inf, hi = -inf;
  for (const auto& p : sm.samples) {
    if (p.j >= 0.1 * peak) {
      lo = std::min(lo, p.omega);
      hi = std::max(hi, p.omega);
    }
  }
  const bool pass = std::abs(lo - 0.25) <= step && std::abs(hi - 0.6801) <= step;
  return {pass, fmt("support [%.4f, %.4f] vs [0.25, 0.6801], grid step %.4f", lo, hi, step)};
}

Verdict decay_law() {
  const double k = 0.01, temp = 5.0, w = 0.465;
  auto spec = generate({recipe::Chain{200, 0.1}, 0}, 0.25);
  auto eig = diagonalize(to_adjacency(spec));
  auto g = probe_couplings(eig, {100});
  SimulatedOracle oracle(spec, temp);
  const double j_fixed = spectral_density_at(eig, g, k, w, 500.0);
  double worst = 0.0, worst_fixed = 0.0;
  for (double t = 50.0; t <= 500.0 + 1e-9; t += 5.0) {
    const double exact = oracle.measure({100}, w, k, probe::Vacuum{}, t);
    const double pred = predicted_occupation(t, spectral_density_running_mean(eig, g, k, w, t), w, temp, 0.0);
    const double fixed = predicted_occupation(t, j_fixed, w, temp, 0.0);
    worst = std::max(worst, std::abs(exact - pred) / exact);
    worst_fixed = std::max(worst_fixed, std::abs(exact - fixed) / exact);
  }
  return {worst < 0.05, fmt("max rel. deviation %.4f over t in [50, 500] (rate from J(w; s), s <= t); "
                            "with J(w; 500) held fixed: %.4f",
                            worst, worst_fixed)};
}

Verdict eigenfrequency_detection() {
  auto spec = generate({recipe::Chain{50, 0.1}, 0}, 0.25);
  auto eig = diagonalize(to_adjacency(spec));
  const double tau = recurrence_time(eig);
  SimulatedOracle oracle(spec, 0.0);
  ProbeSchedule s;
  s.k = 0.0025;
  s.init = probe::SqueezedVacuum{1.0, pi / 2};
  s.nodes = {0};

  // Discrete regime.
  s.t = 3.0 * tau;
  const double step = pi / s.t;
  const auto steps = static_cast<std::size_t>((0.75 - 0.2) / step) + 1;
  s.grid = linear_grid(0.2, 0.2 + step * static_cast<double>(steps - 1), steps);
  auto det = detect_eigenfrequencies(oracle, s, eig.size());
  const double res = 2.0 * pi / s.t;
  std::size_t found = 0, resolvable = 0, resolvable_found = 0, genuine = 0;
  for (Eigen::Index i = 0; i < eig.omegas.size(); ++i) {
    double best = inf;
    for (const auto& l : det.lines) best = std::min(best, std::abs(l.omega - eig.omegas(i)));
    double gap = inf;
    if (i > 0) gap = std::min(gap, eig.omegas(i - 1) - eig.omegas(i));
    if (i + 1 < eig.omegas.size()) gap = std::min(gap, eig.omegas(i) - eig.omegas(i + 1));
    found += best <= step;
    if (gap >= 2.0 * res) {
      ++resolvable;
      resolvable_found += best <= step;
    }
  }
  for (const auto& l : det.lines) {
    double best = inf;
    for (Eigen::Index i = 0; i < eig.omegas.size(); ++i) best = std::min(best, std::abs(l.omega - eig.omegas(i)));
    genuine += best <= step;
  }

  // Continuum regime.
  ProbeSchedule c = s;
  c.t = 0.9 * tau;
  c.grid = linear_grid(0.2, 0.75, 300);
  auto cont = scan_density(oracle, c);
  std::vector<double> j;
  for (const auto& p : cont.points) j.push_back(p.j);
  const double peak = *std::max_element(j.begin(), j.end());
  std::size_t features = 0;
  for (auto p : local_maxima(j)) features += prominence(j, p) >= 0.05 * peak;

  const bool pass = found == eig.size() && features <= 1;
  return {pass, fmt("t = 3 tau_f = %.0f: %zu/%zu eigenfrequencies within one grid step (%.5f), "
                    "%zu/%zu lines genuine, %zu/%zu modes with gaps >= 2 x 2pi/t found; "
                    "t = 0.9 tau_f: %zu maxima above 5%% prominence (single band allows 1)",
                    s.t, found, eig.size(), step, genuine, det.lines.size(), resolvable_found, resolvable,
                    features)};
}

Verdict full_reconstruction() {
  auto spec = generate({recipe::SmallWorld{60, 0.2, 0.1, 7}, 0}, 0.25);
  SimulatedOracle oracle(spec, 0.0);
  CountingOracle counted(oracle);
  auto report = reconstruct(counted, 60);
  auto cmp = compare_adjacency(report.a_est.values(), to_adjacency(spec).values());
  const double c = static_cast<double>(counted.calls()) / (60.0 * 60.0);
  const bool pass = cmp.true_links == 66 && cmp.recall == 1.0 && cmp.relative_frobenius < 0.15 && c <= 4.0;
  return {pass, fmt("recall %.3f (%zu/%zu links), precision %.3f, rel. Frobenius %.4g, "
                    "%zu measurements = %.2f N^2, k = %.3g, t_m = %.0f",
                    cmp.recall, cmp.true_positives, cmp.true_links, cmp.precision, cmp.relative_frobenius,
                    counted.calls(), c, report.diagnostics.k, report.diagnostics.measurement_time)};
}

Verdict lossless_algebra() {
  const double k = 0.01;
  std::size_t networks = 0, skipped = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; networks < 20 && seed < 1000; ++seed) {
    auto spec = generate({recipe::ErdosRenyi{10, 0.05, 0.4}, seed}, 0.25, {true, 100});
    auto a = to_adjacency(spec);
    auto eig = diagonalize(a);
    if (eig.has_degeneracy()) {
      ++skipped;
      continue;
    }
    ++networks;
    auto w = omega_list(eig);
    const auto n = static_cast<Eigen::Index>(eig.size());
    DensityTables tables;
    tables.single.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      auto comb = spectral_density_comb(eig, probe_couplings(eig, {static_cast<std::size_t>(j)}), k);
      for (Eigen::Index i = 0; i < n; ++i) tables.single(j, i) = comb.lines[static_cast<std::size_t>(i)].binned;
    }
    Matrix mags(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      std::vector<double> row(tables.single.row(j).begin(), tables.single.row(j).end());
      mags.row(j) = magnitudes_from_density(row, w, k).transpose();
    }
    SignOptions opt;
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::size_t r = sign_reference(mags, static_cast<std::size_t>(i), opt);
      for (std::size_t j = 0; j < eig.size(); ++j) {
        if (j == r) continue;
        auto comb = spectral_density_comb(eig, probe_couplings(eig, {r, j}), k);
        tables.pairs.push_back({r, j, static_cast<std::size_t>(i), comb.lines[static_cast<std::size_t>(i)].binned});
      }
    }
    auto res = reconstruct_from_densities(tables, w, k, opt);
    worst = std::max(worst, compare_adjacency(res.a_est.values(), a.values()).relative_frobenius);
  }
  return {networks == 20 && worst < 1e-8,
          fmt("%zu connected 10-node networks (%zu degenerate skipped), max rel. Frobenius %.3g", networks,
              skipped, worst)};
}

Verdict invariants() {
  std::vector<std::string> failed;
  std::mt19937_64 rng(2024);

  // Orthogonality and round trip.
  double orth = 0.0, round = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    auto a = to_adjacency(generate({recipe::ErdosRenyi{30, 0.05, 0.2}, rng()}, 0.25));
    auto eig = diagonalize(a);
    const auto n = static_cast<Eigen::Index>(eig.size());
    orth = std::max(orth, (eig.k_matrix.transpose() * eig.k_matrix - Matrix::Identity(n, n)).cwiseAbs().maxCoeff());
    round = std::max(round, (assemble_adjacency(eig.k_matrix, omega_list(eig)).values() - a.values()).cwiseAbs().maxCoeff());
  }
  if (!(orth < 1e-12 && round < 1e-12)) failed.push_back("orthogonality");

  // Energy and uncertainty under exact evolution.
  double energy = 0.0, margin = inf;
  for (int trial = 0; trial < 5; ++trial) {
    auto a = to_adjacency(generate({recipe::SmallWorld{20, 0.2, 0.1, 3}, rng()}, 0.25));
    auto eig = diagonalize(a);
    auto sys = assemble_total(a, 0.4, 0.01, {static_cast<std::size_t>(trial)});
    auto st = initial_state(probe::SqueezedVacuum{1.0, pi / 2}, 0.4, eig, 1.0);
    Propagator prop(sys);
    const double e0 = total_energy(sys, st);
    for (double t : {10.0, 400.0, 3000.0}) {
      auto s = prop.evolve(st, t);
      energy = std::max(energy, std::abs(total_energy(sys, s) - e0) / e0);
      margin = std::min(margin, uncertainty_margin(s));
    }
  }
  if (!(energy < 1e-10 && margin > -1e-9)) failed.push_back("energy/uncertainty");

  // Sum rule: smooth density integrates to the comb weights.
  double sum_rule = 0.0;
  int tested = 0;
  for (int trial = 0; trial < 40 && tested < 5; ++trial) {
    auto spec = generate({recipe::ErdosRenyi{20, 0.05, 0.25}, rng()}, 0.25, {true, 50});
    auto eig = diagonalize(to_adjacency(spec));
    auto gaps = mode_spacings(omega_list(eig));
    const double min_gap = *std::min_element(gaps.begin(), gaps.end());
    if (min_gap < 2e-3) continue;
    ++tested;
    auto g = probe_couplings(eig, {0});
    const double k = 0.01, t_max = 10.0 / min_gap, step = 0.05 / t_max;
    std::vector<double> grid;
    for (double w = std::max(1e-3, eig.omegas(eig.size() - 1) - 200.0 / t_max); w <= eig.omegas(0) + 200.0 / t_max; w += step)
      grid.push_back(w);
    auto sm = spectral_density_smooth(eig, g, k, grid, t_max);
    double moment = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      moment += 0.5 * (sm.samples[i].j * grid[i] + sm.samples[i - 1].j * grid[i - 1]) * (grid[i] - grid[i - 1]);
    }
    double comb_moment = 0.0;
    for (const auto& l : spectral_density_comb(eig, g, k).lines) comb_moment += l.weight * l.omega;
    sum_rule = std::max(sum_rule, std::abs(moment - comb_moment) / comb_moment);
  }
  if (!(tested == 5 && sum_rule < 0.02)) failed.push_back("sum rule");

  // Gauge: column sign flips of K leave A unchanged.
  double gauge = 0.0;
  {
    auto a = to_adjacency(generate({recipe::SmallWorld{60, 0.2, 0.1, 7}, 0}, 0.25));
    auto eig = diagonalize(a);
    auto w = omega_list(eig);
    Matrix flipped = eig.k_matrix;
    std::bernoulli_distribution coin(0.5);
    for (Eigen::Index i = 0; i < flipped.cols(); ++i)
      if (coin(rng)) flipped.col(i) *= -1.0;
    gauge = (assemble_adjacency(flipped, w).values() - assemble_adjacency(eig.k_matrix, w).values()).cwiseAbs().maxCoeff();
  }
  if (!(gauge < 1e-14)) failed.push_back("gauge");

  // Same initial energy, same density: squeezed with sinh^2 r = 1 against thermal with one quantum.
  double prep = 0.0;
  {
    auto spec = generate({recipe::Chain{80, 0.1}, 0}, 0.25);
    auto eig = diagonalize(to_adjacency(spec));
    SimulatedOracle sim(spec, 0.0);
    ProbeSchedule s;
    s.grid = linear_grid(0.3, 0.6, 12);
    s.t = 0.5 * recurrence_time(eig);
    s.k = 0.01;
    s.init = probe::SqueezedVacuum{std::log(1.0 + std::sqrt(2.0)), pi / 2};
    auto squeezed = scan_density(sim, s);
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
      ProbeSchedule one = s;
      one.grid = {s.grid[i]};
      one.init = probe::Thermal{s.grid[i] / std::log(2.0)};
      const double jt = scan_density(sim, one).points[0].j;
      const double js = squeezed.points[i].j;
      prep = std::max(prep, squeezed.points[i].status == PointStatus::Ok ? std::abs(js - jt) / jt : inf);
    }
  }
  if (!(prep < 0.02)) failed.push_back("initial-state independence");

  std::string list;
  for (const auto& f : failed) list += (list.empty() ? "" : ", ") + f;
  return {failed.empty(),
          fmt("orthogonality %.2g, round trip %.2g, energy drift %.2g, uncertainty margin %.2g, sum rule %.4f, "
              "gauge %.2g, squeezed vs thermal %.4f%s%s",
              orth, round, energy, margin, sum_rule, gauge, prep, failed.empty() ? "" : "; failed: ", list.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Verdict()>>> criteria{
      {1, {"probing accuracy", probing_accuracy}},
      {2, {"band structure", band_structure}},
      {3, {"band edges", band_edges}},
      {4, {"decay law", decay_law}},
      {5, {"eigenfrequency detection", eigenfrequency_detection}},
      {6, {"full reconstruction", full_reconstruction}},
      {7, {"lossless algebra", lossless_algebra}},
      {8, {"invariant suites", invariants}},
  };
  std::vector<int> selected;
  for (int a = 1; a < argc; ++a) {
    int id = std::atoi(argv[a]);
    if (!criteria.count(id)) {
      std::fprintf(stderr, "unknown criterion %s\n", argv[a]);
      return 2;
    }
    selected.push_back(id);
  }
  if (selected.empty())
    for (const auto& [id, _] : criteria) selected.push_back(id);

  bool all = true;
  for (int id : selected) {
    const auto& [name, run] = criteria.at(id);
    auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d %s %s: %s [%.1f s]\n", id, v.pass ? "PASS" : "FAIL", name, v.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
