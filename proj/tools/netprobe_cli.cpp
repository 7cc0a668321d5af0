#include "netprobe/netprobe.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct Failure {
  np_status status;
  std::string message;
};

void check(np_status s) {
  if (s != NP_OK) throw Failure{s, np_last_error_message()};
}

int report_failure(const std::string& reason, const std::string& message, int code) {
  ordered_json j;
  j["error"] = reason;
  j["message"] = message;
  std::cerr << j.dump() << std::endl;
  return code;
}

const CLI::Validator OutputPath(
    [](std::string& p) {
      fs::path parent = fs::path(p).parent_path();
      if (!parent.empty() && !fs::is_directory(parent)) return "directory does not exist: " + parent.string();
      return std::string();
    },
    "PATH(out)");

struct ProbeOptions {
  std::string kind = "vacuum";
  double r = 1.0;
  double phi = std::numbers::pi / 2;
  double temperature = 0.0;

  void add(CLI::App* app) {
    app->add_option("--probe", kind, "Probe preparation")
        ->check(CLI::IsMember({"vacuum", "squeezed", "thermal"}))
        ->capture_default_str();
    app->add_option("--r", r, "Squeezing parameter")->check(CLI::NonNegativeNumber)->capture_default_str();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", phi);
    app->add_option("--phi", phi, "Squeezing angle")->default_str(buf);
    app->add_option("--probe-T", temperature, "Probe temperature (thermal preparation)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
  }

  np_probe_init get() const {
    np_probe_init p{NP_PROBE_VACUUM, r, phi, temperature};
    if (kind == "squeezed") p.kind = NP_PROBE_SQUEEZED;
    if (kind == "thermal") p.kind = NP_PROBE_THERMAL;
    return p;
  }
};

struct Noise {
  double sigma = 0.0;
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("--noise-sigma", sigma, "Gaussian noise on every reading")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app->add_option("--noise-seed", seed, "Seed for the measurement noise")->capture_default_str();
  }
};

ordered_json typed(const std::string& s) {
  if (s.empty()) return nullptr;
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) {
      if (s.find_first_of(".eE") == std::string::npos) {
        if (s[0] == '-') return std::stoll(s);
        return std::stoull(s);
      }
      return v;
    }
  } catch (const std::exception&) {
  }
  return s;
}

ordered_json effective_config(const CLI::App& app, const CLI::App& sub) {
  ordered_json cfg;
  cfg["command"] = sub.get_name();
  for (const CLI::App* scope : {&app, &sub}) {
    for (const CLI::Option* opt : scope->get_options()) {
      if (opt->get_lnames().empty()) continue;
      const std::string& name = opt->get_lnames().front();
      if (name == "help") continue;
      if (opt->get_type_size() == 0) {
        cfg[name] = opt->count() > 0;
        continue;
      }
      std::vector<std::string> vals;
      if (opt->count() > 0) {
        vals = opt->results();
      } else if (!opt->get_default_str().empty()) {
        vals = {opt->get_default_str()};
        if (vals[0].size() > 1 && vals[0].front() == '[') {
          std::string inner = vals[0].substr(1, vals[0].size() - 2);
          vals.clear();
          std::size_t pos = 0;
          while (pos <= inner.size()) {
            std::size_t next = inner.find(',', pos);
            if (next == std::string::npos) next = inner.size();
            vals.push_back(inner.substr(pos, next - pos));
            pos = next + 1;
          }
        }
      } else {
        continue;
      }
      if (opt->get_expected_max() > 1) {
        ordered_json arr = ordered_json::array();
        for (const auto& v : vals) arr.push_back(typed(v));
        cfg[name] = arr;
      } else {
        cfg[name] = typed(vals.back());
      }
    }
  }
  return cfg;
}

std::vector<double> linspace(double lo, double hi, std::size_t steps) {
  std::vector<double> g(steps);
  for (std::size_t i = 0; i < steps; ++i)
    g[i] = steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
  return g;
}

struct NetworkHandle {
  np_network* p = nullptr;
  ~NetworkHandle() { np_network_free(p); }
};
struct OracleHandle {
  np_oracle* p = nullptr;
  ~OracleHandle() { np_oracle_free(p); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probe-based spectroscopy and reconstruction of harmonic oscillator networks"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (default: NETPROBE_THREADS or all cores)");

  // generate
  auto* gen = app.add_subcommand("generate", "Sample a network and write it as JSON");
  std::string recipe = "chain";
  np_recipe rec{};
  rec.h = 0.1;
  double omega0 = 0.25;
  std::vector<std::size_t> shortcut{0, 1};
  bool require_connected = false;
  std::string gen_out, gen_csv;
  gen->add_option("--recipe", recipe, "Topology recipe")
      ->check(CLI::IsMember({"chain", "periodic-chain", "shortcut-chain", "small-world", "erdos-renyi"}))
      ->capture_default_str();
  gen->add_option("--n", rec.n, "Number of nodes")->required()->check(CLI::PositiveNumber);
  gen->add_option("--h", rec.h, "Coupling (strong or chain coupling)")->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--h-weak", rec.h_weak, "Weak coupling of a periodic chain")->capture_default_str();
  gen->add_option("--period", rec.period, "Period of the weak bonds")->capture_default_str();
  gen->add_option("--shortcut", shortcut, "Endpoints of the shortcut")->expected(2)->delimiter(',')->capture_default_str();
  gen->add_option("--h-shortcut", rec.h_shortcut, "Shortcut coupling")->capture_default_str();
  gen->add_option("--n-shortcuts", rec.n_shortcuts, "Number of random shortcuts")->capture_default_str();
  gen->add_option("--p-edge", rec.p_edge, "Edge probability")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  gen->add_option("--omega0", omega0, "Bare frequency")->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--seed", rec.seed, "Random seed")->capture_default_str();
  gen->add_flag("--require-connected", require_connected, "Resample until connected");
  gen->add_option("--out", gen_out, "Network JSON")->required()->check(OutputPath);
  gen->add_option("--adjacency-csv", gen_csv, "Also write A as CSV")->check(OutputPath);

  // spectrum
  auto* spec = app.add_subcommand("spectrum", "Exact spectral density of a known network");
  std::string spec_net, spec_out, spec_comb;
  std::vector<std::size_t> spec_nodes{0};
  double spec_k = 0.01, spec_tmax = 500.0, spec_lo = 0.2, spec_hi = 0.75;
  std::size_t spec_steps = 200;
  spec->add_option("--network", spec_net, "Network JSON")->required()->check(CLI::ExistingFile);
  spec->add_option("--nodes", spec_nodes, "Probed node(s)")->expected(1, 2)->delimiter(',')->capture_default_str();
  spec->add_option("--k", spec_k, "Probe coupling")->check(CLI::PositiveNumber)->capture_default_str();
  spec->add_option("--t-max", spec_tmax, "Truncation time")->check(CLI::PositiveNumber)->capture_default_str();
  spec->add_option("--omega-min", spec_lo, "Lowest frequency")->check(CLI::PositiveNumber)->capture_default_str();
  spec->add_option("--omega-max", spec_hi, "Highest frequency")->check(CLI::PositiveNumber)->capture_default_str();
  spec->add_option("--steps", spec_steps, "Grid points")->check(CLI::PositiveNumber)->capture_default_str();
  spec->add_option("--out", spec_out, "Smooth spectrum CSV")->required()->check(OutputPath);
  spec->add_option("--comb", spec_comb, "Line spectrum CSV")->check(OutputPath);

  // dynamics
  auto* dyn = app.add_subcommand("dynamics", "Exact probe occupation over time");
  std::string dyn_net, dyn_out;
  std::vector<std::size_t> dyn_nodes{0};
  double dyn_ws = 0.465, dyn_k = 0.01, dyn_T = 0.0, dyn_tmax = 500.0;
  std::size_t dyn_steps = 501;
  ProbeOptions dyn_probe;
  dyn->add_option("--network", dyn_net, "Network JSON")->required()->check(CLI::ExistingFile);
  dyn->add_option("--nodes", dyn_nodes, "Probed node(s)")->expected(1, 2)->delimiter(',')->capture_default_str();
  dyn->add_option("--omega-s", dyn_ws, "Probe frequency")->check(CLI::PositiveNumber)->capture_default_str();
  dyn->add_option("--k", dyn_k, "Probe coupling")->check(CLI::PositiveNumber)->capture_default_str();
  dyn->add_option("--T", dyn_T, "Network temperature")->check(CLI::NonNegativeNumber)->capture_default_str();
  dyn->add_option("--t-max", dyn_tmax, "Final time")->check(CLI::PositiveNumber)->capture_default_str();
  dyn->add_option("--steps", dyn_steps, "Time points")->check(CLI::PositiveNumber)->capture_default_str();
  dyn_probe.add(dyn);
  dyn->add_option("--out", dyn_out, "Series CSV")->required()->check(OutputPath);

  // scan and eigenfreqs share their measurement options
  struct ScanOptions {
    std::string network, out, scan_csv;
    std::vector<std::size_t> nodes{0};
    double k = 0.01, t = 500.0, T = 0.0, lo = 0.2, hi = 0.75;
    std::size_t steps = 200, expected = 0;
    ProbeOptions probe;
    Noise noise;
  };
  ScanOptions sc, ef;
  auto add_scan = [](CLI::App* a, ScanOptions& o) {
    a->add_option("--network", o.network, "Hidden network JSON")->required()->check(CLI::ExistingFile);
    a->add_option("--nodes", o.nodes, "Probed node(s)")->expected(1, 2)->delimiter(',')->capture_default_str();
    a->add_option("--k", o.k, "Probe coupling")->check(CLI::PositiveNumber)->capture_default_str();
    a->add_option("--t", o.t, "Interaction time")->check(CLI::PositiveNumber)->capture_default_str();
    a->add_option("--T", o.T, "Network temperature")->check(CLI::NonNegativeNumber)->capture_default_str();
    a->add_option("--omega-min", o.lo, "Lowest probe frequency")->check(CLI::PositiveNumber)->capture_default_str();
    a->add_option("--omega-max", o.hi, "Highest probe frequency")->check(CLI::PositiveNumber)->capture_default_str();
    a->add_option("--steps", o.steps, "Grid points")->check(CLI::PositiveNumber)->capture_default_str();
    o.probe.add(a);
    o.noise.add(a);
  };
  auto* scan = app.add_subcommand("scan", "Estimate J by probing a hidden network");
  add_scan(scan, sc);
  scan->add_option("--out", sc.out, "Scan CSV")->required()->check(OutputPath);

  auto* eig = app.add_subcommand("eigenfreqs", "Detect eigenfrequencies from a discrete-regime scan");
  ef.probe.kind = "squeezed";
  add_scan(eig, ef);
  eig->add_option("--expected", ef.expected, "Expected number of lines")->capture_default_str();
  eig->add_option("--out", ef.out, "Detection JSON")->required()->check(OutputPath);
  eig->add_option("--scan-csv", ef.scan_csv, "Also write the underlying scan")->check(OutputPath);

  // reconstruct
  auto* recon = app.add_subcommand("reconstruct", "Reconstruct A from probe measurements only");
  np_reconstruct_config rc;
  np_reconstruct_config_defaults(&rc);
  std::string rc_hidden, rc_out, rc_csv;
  std::size_t rc_n = 0;
  ProbeOptions rc_probe;
  rc_probe.kind = "squeezed";
  rc_probe.r = rc.init.r;
  rc_probe.phi = rc.init.phi;
  Noise rc_noise;
  recon->add_option("--hidden", rc_hidden, "Hidden network JSON (read by the oracle only)")
      ->required()
      ->check(CLI::ExistingFile);
  recon->add_option("--N", rc_n, "Number of nodes")->required()->check(CLI::PositiveNumber);
  recon->add_option("--k", rc.k, "Probe coupling (0: automatic)")->check(CLI::NonNegativeNumber)->capture_default_str();
  recon->add_option("--T", rc.temperature, "Network temperature")->check(CLI::NonNegativeNumber)->capture_default_str();
  recon->add_option("--omega-min", rc.omega_min, "Pilot scan lower end")->check(CLI::PositiveNumber)->capture_default_str();
  recon->add_option("--omega-max", rc.omega_max, "Pilot scan upper end")->check(CLI::PositiveNumber)->capture_default_str();
  recon->add_option("--reference", rc.reference, "Sign reference node")->capture_default_str();
  rc_probe.add(recon);
  rc_noise.add(recon);
  recon->add_option("--out", rc_out, "Report JSON")->required()->check(OutputPath);
  recon->add_option("--adjacency-csv", rc_csv, "Also write the estimate as CSV")->check(OutputPath);

  // compare
  auto* cmp = app.add_subcommand("compare", "Compare an estimate with the true network");
  std::string cmp_est, cmp_truth, cmp_out, cmp_diff;
  double cmp_threshold = -1.0;
  cmp->add_option("--estimate", cmp_est, "Report JSON or adjacency CSV")->required()->check(CLI::ExistingFile);
  cmp->add_option("--truth", cmp_truth, "True network JSON")->required()->check(CLI::ExistingFile);
  cmp->add_option("--threshold", cmp_threshold, "Link threshold (negative: default)")->capture_default_str();
  cmp->add_option("--out", cmp_out, "Metrics JSON")->required()->check(OutputPath);
  cmp->add_option("--diff", cmp_diff, "Entrywise difference CSV")->check(OutputPath);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_failure("usage", e.what(), 1);
  }

  const CLI::App* active = app.get_subcommands().front();
  std::cout << effective_config(app, *active).dump() << std::endl;

  if (threads > 0) np_set_thread_count(threads);

  try {
    if (active == gen) {
      if (recipe == "chain") rec.kind = NP_RECIPE_CHAIN;
      if (recipe == "periodic-chain") rec.kind = NP_RECIPE_PERIODIC_CHAIN;
      if (recipe == "shortcut-chain") rec.kind = NP_RECIPE_SHORTCUT_CHAIN;
      if (recipe == "small-world") rec.kind = NP_RECIPE_SMALL_WORLD;
      if (recipe == "erdos-renyi") rec.kind = NP_RECIPE_ERDOS_RENYI;
      rec.shortcut_a = shortcut[0];
      rec.shortcut_b = shortcut[1];
      NetworkHandle net;
      check(np_network_generate(&rec, omega0, require_connected ? 1 : 0, &net.p));
      check(np_network_save(net.p, gen_out.c_str()));
      if (!gen_csv.empty()) check(np_network_write_adjacency_csv(net.p, gen_csv.c_str()));
    } else if (active == spec) {
      if (!(spec_lo < spec_hi)) return report_failure("invalid_argument", "--omega-min must be below --omega-max", 1);
      NetworkHandle net;
      check(np_network_load(spec_net.c_str(), &net.p));
      auto grid = linspace(spec_lo, spec_hi, spec_steps);
      std::vector<double> j(grid.size());
      int warned = 0;
      check(np_spectrum_smooth(net.p, spec_nodes.data(), spec_nodes.size(), spec_k, grid.data(), grid.size(),
                               spec_tmax, j.data(), &warned));
      if (warned)
        std::cerr << "warning: t_max exceeds the recurrence time; the spectrum resolves individual lines"
                  << std::endl;
      check(np_write_spectrum_csv(grid.data(), j.data(), grid.size(), spec_out.c_str()));
      if (!spec_comb.empty()) {
        std::size_t n = np_network_node_count(net.p);
        std::vector<double> w(n), weight(n), binned(n);
        check(np_spectrum_comb(net.p, spec_nodes.data(), spec_nodes.size(), spec_k, w.data(), weight.data(),
                               binned.data()));
        check(np_write_comb_csv(w.data(), weight.data(), binned.data(), n, spec_comb.c_str()));
      }
    } else if (active == dyn) {
      NetworkHandle net;
      check(np_network_load(dyn_net.c_str(), &net.p));
      auto times = linspace(0.0, dyn_tmax, dyn_steps);
      std::vector<double> n(times.size());
      np_probe_init init = dyn_probe.get();
      check(np_dynamics_occupation(net.p, dyn_nodes.data(), dyn_nodes.size(), dyn_ws, dyn_k, &init, dyn_T,
                                   times.data(), times.size(), n.data()));
      check(np_write_series_csv(times.data(), n.data(), times.size(), dyn_out.c_str()));
    } else if (active == scan || active == eig) {
      ScanOptions& o = active == scan ? sc : ef;
      if (!(o.lo < o.hi)) return report_failure("invalid_argument", "--omega-min must be below --omega-max", 1);
      OracleHandle oracle;
      check(np_oracle_open(o.network.c_str(), o.T, &oracle.p));
      check(np_oracle_set_noise(oracle.p, o.noise.sigma, o.noise.seed));
      auto grid = linspace(o.lo, o.hi, o.steps);
      np_schedule s{grid.data(), grid.size(), o.t, o.k, o.probe.get(), o.T, o.nodes.data(), o.nodes.size()};
      if (active == scan) {
        std::vector<double> j(grid.size());
        std::vector<np_point_status> st(grid.size());
        check(np_scan(oracle.p, &s, j.data(), st.data()));
        check(np_write_scan_csv(grid.data(), j.data(), st.data(), grid.size(), o.out.c_str()));
      } else {
        std::size_t expected = o.expected > 0 ? o.expected : np_oracle_node_count(oracle.p);
        np_detection* det = nullptr;
        check(np_detect_eigenfrequencies(oracle.p, &s, expected, &det));
        np_status w = np_detection_write_json(det, o.out.c_str());
        np_detection_free(det);
        check(w);
        if (!o.scan_csv.empty()) {
          std::vector<double> j(grid.size());
          std::vector<np_point_status> st(grid.size());
          check(np_scan(oracle.p, &s, j.data(), st.data()));
          check(np_write_scan_csv(grid.data(), j.data(), st.data(), grid.size(), o.scan_csv.c_str()));
        }
      }
    } else if (active == recon) {
      rc.init = rc_probe.get();
      OracleHandle oracle;
      check(np_oracle_open(rc_hidden.c_str(), rc.temperature, &oracle.p));
      check(np_oracle_set_noise(oracle.p, rc_noise.sigma, rc_noise.seed));
      np_report* report = nullptr;
      check(np_reconstruct(oracle.p, rc_n, &rc, &report));
      np_status w = np_report_write_json(report, rc_out.c_str());
      if (w == NP_OK && !rc_csv.empty()) w = np_report_write_adjacency_csv(report, rc_csv.c_str());
      std::cerr << "measurements: " << np_report_measurement_count(report) << std::endl;
      np_report_free(report);
      check(w);
    } else if (active == cmp) {
      std::size_t n = 0;
      check(np_read_matrix(cmp_est.c_str(), nullptr, 0, &n));
      std::vector<double> est(n * n);
      check(np_read_matrix(cmp_est.c_str(), est.data(), est.size(), &n));
      NetworkHandle truth;
      check(np_network_load(cmp_truth.c_str(), &truth.p));
      if (np_network_node_count(truth.p) != n)
        return report_failure("invalid_argument", "estimate and truth differ in size", 1);
      std::vector<double> a(n * n);
      check(np_network_adjacency(truth.p, a.data()));
      np_comparison c{};
      check(np_compare_adjacency(est.data(), a.data(), n, cmp_threshold, &c));
      check(np_write_comparison_json(&c, cmp_out.c_str()));
      if (!cmp_diff.empty()) check(np_write_difference_csv(est.data(), a.data(), n, cmp_diff.c_str()));
    }
  } catch (const Failure& f) {
    return report_failure(np_status_name(f.status), f.message, np_status_is_numerical(f.status) ? 2 : 1);
  }
  return 0;
}
