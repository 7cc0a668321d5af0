#include "netprobe/netprobe.h"

#include "netprobe/error.hpp"
#include "netprobe/gaussian_dynamics.hpp"
#include "netprobe/io.hpp"
#include "netprobe/network_model.hpp"
#include "netprobe/parallel.hpp"
#include "netprobe/probing.hpp"
#include "netprobe/reconstruction.hpp"
#include "netprobe/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <variant>
#include <vector>

using namespace netprobe;

struct np_network {
  NetworkSpec spec;
};

struct np_oracle {
  std::unique_ptr<SimulatedOracle> sim;
  std::unique_ptr<NoisyOracle> noisy;
  std::unique_ptr<CountingOracle> counting;
  std::size_t earlier_calls = 0;

  void rewire() {
    if (counting) earlier_calls += counting->calls();
    const NetworkOracle& base = noisy ? static_cast<const NetworkOracle&>(*noisy) : *sim;
    counting = std::make_unique<CountingOracle>(base);
  }
  const NetworkOracle& top() const { return *counting; }
};

struct np_detection {
  DetectionResult result;
};

struct np_report {
  ReconstructionReport report;
};

namespace {

thread_local std::string last_error;

np_status map_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return NP_INVALID_ARGUMENT;
    case ErrorCode::Schema: return NP_SCHEMA_ERROR;
    case ErrorCode::Io: return NP_IO_ERROR;
    case ErrorCode::Disconnected: return NP_DISCONNECTED;
    case ErrorCode::NotPositiveDefinite: return NP_NOT_POSITIVE_DEFINITE;
    case ErrorCode::RankDeficient: return NP_RANK_DEFICIENT;
    case ErrorCode::DegenerateSpacing: return NP_DEGENERATE_SPACING;
    case ErrorCode::DegenerateContrast: return NP_DEGENERATE_CONTRAST;
    case ErrorCode::SignFlip: return NP_SIGN_FLIP;
    case ErrorCode::GridTooCoarse: return NP_GRID_TOO_COARSE;
    case ErrorCode::InsufficientEigenfrequencies: return NP_INSUFFICIENT_EIGENFREQUENCIES;
  }
  return NP_INTERNAL_ERROR;
}

template <class F>
np_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return NP_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return map_code(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return NP_INTERNAL_ERROR;
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, std::string("null or empty argument: ") + what);
}

NodeSet node_set(const size_t* nodes, size_t n_nodes) {
  require(nodes != nullptr && n_nodes > 0, "nodes");
  return NodeSet(nodes, nodes + n_nodes);
}

ProbeInit to_init(const np_probe_init* init) {
  if (!init) return probe::Vacuum{};
  switch (init->kind) {
    case NP_PROBE_VACUUM: return probe::Vacuum{};
    case NP_PROBE_SQUEEZED: return probe::SqueezedVacuum{init->r, init->phi};
    case NP_PROBE_THERMAL: return probe::Thermal{init->temperature};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown probe preparation");
}

ProbeSchedule to_schedule(const np_schedule* s) {
  require(s != nullptr, "schedule");
  require(s->grid != nullptr && s->n_grid > 0, "schedule grid");
  ProbeSchedule out;
  out.grid.assign(s->grid, s->grid + s->n_grid);
  out.t = s->t;
  out.k = s->k;
  out.init = to_init(&s->init);
  out.temperature = s->temperature;
  out.nodes = node_set(s->nodes, s->n_nodes);
  return out;
}

Matrix from_row_major(const double* data, size_t n) {
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (size_t r = 0; r < n; ++r)
    for (size_t c = 0; c < n; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = data[r * n + c];
  return m;
}

void to_row_major(const Matrix& m, double* out) {
  const auto n = m.rows();
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[r * m.cols() + c] = m(r, c);
}

Comparison from_c(const np_comparison& c) {
  Comparison out;
  out.relative_frobenius = c.relative_frobenius;
  out.precision = c.precision;
  out.recall = c.recall;
  out.max_abs_diagonal_error = c.max_abs_diagonal_error;
  out.threshold = c.threshold;
  out.true_links = c.true_links;
  out.predicted_links = c.predicted_links;
  out.true_positives = c.true_positives;
  return out;
}

TopologyShape to_shape(const np_recipe& r) {
  switch (r.kind) {
    case NP_RECIPE_CHAIN: return recipe::Chain{r.n, r.h};
    case NP_RECIPE_PERIODIC_CHAIN: return recipe::PeriodicChain{r.n, r.h, r.h_weak, r.period};
    case NP_RECIPE_SHORTCUT_CHAIN:
      return recipe::ShortcutChain{r.n, r.h, r.shortcut_a, r.shortcut_b, r.h_shortcut};
    case NP_RECIPE_SMALL_WORLD: return recipe::SmallWorld{r.n, r.h, r.h_shortcut, r.n_shortcuts};
    case NP_RECIPE_ERDOS_RENYI: return recipe::ErdosRenyi{r.n, r.h, r.p_edge};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown recipe kind");
}

}  // namespace

extern "C" {

const char* np_status_name(np_status status) {
  switch (status) {
    case NP_OK: return "ok";
    case NP_INVALID_ARGUMENT: return "invalid_argument";
    case NP_SCHEMA_ERROR: return "schema_error";
    case NP_IO_ERROR: return "io_error";
    case NP_DISCONNECTED: return "disconnected";
    case NP_NOT_POSITIVE_DEFINITE: return "not_positive_definite";
    case NP_RANK_DEFICIENT: return "rank_deficient";
    case NP_DEGENERATE_SPACING: return "degenerate_spacing";
    case NP_DEGENERATE_CONTRAST: return "degenerate_contrast";
    case NP_SIGN_FLIP: return "sign_flip";
    case NP_GRID_TOO_COARSE: return "grid_too_coarse";
    case NP_INSUFFICIENT_EIGENFREQUENCIES: return "insufficient_eigenfrequencies";
    case NP_INTERNAL_ERROR: return "internal_error";
  }
  return "unknown";
}

int np_status_is_numerical(np_status status) {
  switch (status) {
    case NP_NOT_POSITIVE_DEFINITE:
    case NP_RANK_DEFICIENT:
    case NP_DEGENERATE_SPACING:
    case NP_DEGENERATE_CONTRAST:
    case NP_SIGN_FLIP:
    case NP_GRID_TOO_COARSE:
    case NP_INSUFFICIENT_EIGENFREQUENCIES:
    case NP_INTERNAL_ERROR:
      return 1;
    default:
      return 0;
  }
}

const char* np_last_error_message(void) { return last_error.c_str(); }

void np_set_thread_count(unsigned count) { set_thread_count(count); }

np_status np_network_generate(const np_recipe* recipe, double omega0, int require_connected,
                              np_network** out) {
  return guarded([&] {
    require(recipe != nullptr && out != nullptr, "recipe/out");
    GenerateOptions opts;
    opts.require_connected = require_connected != 0;
    auto net = std::make_unique<np_network>();
    net->spec = generate(TopologyRecipe{to_shape(*recipe), recipe->seed}, omega0, opts);
    *out = net.release();
  });
}

np_status np_network_create(size_t n_nodes, double omega0, const size_t* edge_i, const size_t* edge_j,
                            const double* edge_h, size_t n_edges, np_network** out) {
  return guarded([&] {
    require(out != nullptr, "out");
    require(n_edges == 0 || (edge_i && edge_j && edge_h), "edges");
    auto net = std::make_unique<np_network>();
    net->spec.n_nodes = n_nodes;
    net->spec.omega0 = omega0;
    for (size_t e = 0; e < n_edges; ++e) net->spec.edges.push_back(Edge{edge_i[e], edge_j[e], edge_h[e]});
    net->spec.validate();
    net->spec.normalize();
    *out = net.release();
  });
}

np_status np_network_load(const char* path, np_network** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path/out");
    auto net = std::make_unique<np_network>();
    net->spec = io::load_network(path);
    *out = net.release();
  });
}

np_status np_network_save(const np_network* net, const char* path) {
  return guarded([&] {
    require(net != nullptr && path != nullptr, "network/path");
    io::save_network(net->spec, path);
  });
}

void np_network_free(np_network* net) { delete net; }

size_t np_network_node_count(const np_network* net) { return net ? net->spec.n_nodes : 0; }
size_t np_network_edge_count(const np_network* net) { return net ? net->spec.edges.size() : 0; }
double np_network_omega0(const np_network* net) { return net ? net->spec.omega0 : 0.0; }

np_status np_network_edge(const np_network* net, size_t index, size_t* i, size_t* j, double* h) {
  return guarded([&] {
    require(net != nullptr, "network");
    if (index >= net->spec.edges.size()) throw Error(ErrorCode::InvalidArgument, "edge index out of range");
    const Edge& e = net->spec.edges[index];
    if (i) *i = e.i;
    if (j) *j = e.j;
    if (h) *h = e.h;
  });
}

np_status np_network_adjacency(const np_network* net, double* out) {
  return guarded([&] {
    require(net != nullptr && out != nullptr, "network/out");
    to_row_major(to_adjacency(net->spec).values(), out);
  });
}

np_status np_network_write_adjacency_csv(const np_network* net, const char* path) {
  return guarded([&] {
    require(net != nullptr && path != nullptr, "network/path");
    io::write_atomic(path, io::matrix_csv(to_adjacency(net->spec).values()));
  });
}

np_status np_network_eigenfrequencies(const np_network* net, double* out) {
  return guarded([&] {
    require(net != nullptr && out != nullptr, "network/out");
    EigenSystem eig = diagonalize(to_adjacency(net->spec));
    std::copy(eig.omegas.begin(), eig.omegas.end(), out);
  });
}

np_status np_network_recurrence_time(const np_network* net, double* out) {
  return guarded([&] {
    require(net != nullptr && out != nullptr, "network/out");
    *out = recurrence_time(net->spec);
  });
}

np_status np_spectrum_smooth(const np_network* net, const size_t* nodes, size_t n_nodes, double k,
                             const double* grid, size_t n_grid, double t_max, double* j_out,
                             int* warned) {
  return guarded([&] {
    require(net != nullptr && grid != nullptr && j_out != nullptr && n_grid > 0, "network/grid/out");
    NodeSet ns = node_set(nodes, n_nodes);
    validate_node_set(ns, net->spec.n_nodes);
    EigenSystem eig = diagonalize(to_adjacency(net->spec));
    auto spec = spectral_density_smooth(eig, probe_couplings(eig, ns), k,
                                        std::span<const double>(grid, n_grid), t_max);
    for (size_t i = 0; i < n_grid; ++i) j_out[i] = spec.samples[i].j;
    if (warned) *warned = spec.warnings.empty() ? 0 : 1;
  });
}

np_status np_spectrum_comb(const np_network* net, const size_t* nodes, size_t n_nodes, double k,
                           double* omega_out, double* weight_out, double* binned_out) {
  return guarded([&] {
    require(net != nullptr, "network");
    NodeSet ns = node_set(nodes, n_nodes);
    validate_node_set(ns, net->spec.n_nodes);
    EigenSystem eig = diagonalize(to_adjacency(net->spec));
    SpectralComb comb = spectral_density_comb(eig, probe_couplings(eig, ns), k);
    for (size_t i = 0; i < comb.lines.size(); ++i) {
      if (omega_out) omega_out[i] = comb.lines[i].omega;
      if (weight_out) weight_out[i] = comb.lines[i].weight;
      if (binned_out) binned_out[i] = comb.lines[i].binned;
    }
  });
}

np_status np_write_spectrum_csv(const double* omega, const double* j, size_t n, const char* path) {
  return guarded([&] {
    require(omega != nullptr && j != nullptr && path != nullptr, "omega/j/path");
    SampledSpectrum s;
    for (size_t i = 0; i < n; ++i) s.samples.push_back({omega[i], j[i]});
    io::write_atomic(path, io::spectrum_csv(s));
  });
}

np_status np_write_comb_csv(const double* omega, const double* weight, const double* binned, size_t n,
                            const char* path) {
  return guarded([&] {
    require(omega && weight && binned && path, "omega/weight/binned/path");
    SpectralComb c;
    for (size_t i = 0; i < n; ++i) c.lines.push_back({omega[i], weight[i], binned[i]});
    io::write_atomic(path, io::comb_csv(c));
  });
}

np_status np_dynamics_occupation(const np_network* net, const size_t* nodes, size_t n_nodes,
                                 double omega_s, double k, const np_probe_init* init,
                                 double temperature, const double* times, size_t n_times,
                                 double* mean_n) {
  return guarded([&] {
    require(net != nullptr && times != nullptr && mean_n != nullptr, "network/times/out");
    NodeSet ns = node_set(nodes, n_nodes);
    validate_node_set(ns, net->spec.n_nodes);
    if (!(temperature >= 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be non-negative");
    ProbeInit pi = to_init(init);
    validate_probe_init(pi);
    AdjacencyMatrix a = to_adjacency(net->spec);
    EigenSystem eig = diagonalize(a);
    GaussianState st = initial_state(pi, omega_s, eig, temperature);
    Propagator prop(assemble_total(a, omega_s, k, ns));
    for (size_t i = 0; i < n_times; ++i)
      if (!(times[i] >= 0.0) || !std::isfinite(times[i]))
        throw Error(ErrorCode::InvalidArgument, "times must be non-negative and finite");
    parallel_for(n_times, [&](std::size_t i) {
      auto m = prop.probe_moments(st, times[i]);
      mean_n[i] = (omega_s * m.qq + m.pp / omega_s) / 2.0 - 0.5;
    });
  });
}

np_status np_write_series_csv(const double* times, const double* mean_n, size_t n, const char* path) {
  return guarded([&] {
    require(times && mean_n && path, "times/mean_n/path");
    io::write_atomic(path, io::series_csv(std::span<const double>(times, n),
                                          std::span<const double>(mean_n, n)));
  });
}

np_status np_oracle_open(const char* hidden_path, double temperature, np_oracle** out) {
  return guarded([&] {
    require(hidden_path != nullptr && out != nullptr, "path/out");
    auto o = std::make_unique<np_oracle>();
    o->sim = SimulatedOracle::from_file(hidden_path, temperature);
    o->rewire();
    *out = o.release();
  });
}

np_status np_oracle_create(const np_network* hidden, double temperature, np_oracle** out) {
  return guarded([&] {
    require(hidden != nullptr && out != nullptr, "network/out");
    auto o = std::make_unique<np_oracle>();
    o->sim = std::make_unique<SimulatedOracle>(hidden->spec, temperature);
    o->rewire();
    *out = o.release();
  });
}

np_status np_oracle_set_noise(np_oracle* oracle, double sigma, uint64_t seed) {
  return guarded([&] {
    require(oracle != nullptr, "oracle");
    auto noisy = sigma == 0.0 ? nullptr : std::make_unique<NoisyOracle>(*oracle->sim, sigma, seed);
    oracle->noisy = std::move(noisy);
    oracle->rewire();
  });
}

size_t np_oracle_node_count(const np_oracle* oracle) { return oracle ? oracle->sim->size() : 0; }

np_status np_oracle_measure(const np_oracle* oracle, const size_t* nodes, size_t n_nodes,
                            double omega_s, double k, const np_probe_init* init, double t,
                            double* out) {
  return guarded([&] {
    require(oracle != nullptr && out != nullptr, "oracle/out");
    *out = oracle->top().measure(node_set(nodes, n_nodes), omega_s, k, to_init(init), t);
  });
}

size_t np_oracle_call_count(const np_oracle* oracle) {
  return oracle ? oracle->earlier_calls + oracle->counting->calls() : 0;
}

void np_oracle_free(np_oracle* oracle) { delete oracle; }

np_status np_estimate_density_point(double n_t, double n_0, double omega_s, double t,
                                    double temperature, double* out) {
  return guarded([&] {
    require(out != nullptr, "out");
    *out = estimate_density_point(n_t, n_0, omega_s, t, temperature);
  });
}

np_status np_scan(const np_oracle* oracle, const np_schedule* schedule, double* j_out,
                  np_point_status* status_out) {
  return guarded([&] {
    require(oracle != nullptr && j_out != nullptr, "oracle/out");
    ScanResult r = scan_density(oracle->top(), to_schedule(schedule));
    for (size_t i = 0; i < r.points.size(); ++i) {
      j_out[i] = r.points[i].j;
      if (status_out) status_out[i] = static_cast<np_point_status>(r.points[i].status);
    }
  });
}

np_status np_write_scan_csv(const double* omega, const double* j, const np_point_status* status,
                            size_t n, const char* path) {
  return guarded([&] {
    require(omega && j && path, "omega/j/path");
    ScanResult r;
    for (size_t i = 0; i < n; ++i)
      r.points.push_back({omega[i], j[i], status ? static_cast<PointStatus>(status[i]) : PointStatus::Ok});
    io::write_atomic(path, io::scan_csv(r));
  });
}

np_status np_detect_eigenfrequencies(const np_oracle* oracle, const np_schedule* schedule,
                                     size_t expected_count, np_detection** out) {
  return guarded([&] {
    require(oracle != nullptr && out != nullptr, "oracle/out");
    auto d = std::make_unique<np_detection>();
    d->result = detect_eigenfrequencies(oracle->top(), to_schedule(schedule), expected_count);
    *out = d.release();
  });
}

size_t np_detection_count(const np_detection* det) { return det ? det->result.lines.size() : 0; }

np_status np_detection_frequencies(const np_detection* det, double* out) {
  return guarded([&] {
    require(det != nullptr && out != nullptr, "detection/out");
    for (size_t i = 0; i < det->result.lines.size(); ++i) out[i] = det->result.lines[i].omega;
  });
}

int np_detection_partial(const np_detection* det) { return det && det->result.partial ? 1 : 0; }

np_status np_detection_write_json(const np_detection* det, const char* path) {
  return guarded([&] {
    require(det != nullptr && path != nullptr, "detection/path");
    io::write_atomic(path, io::detection_json(det->result));
  });
}

void np_detection_free(np_detection* det) { delete det; }

void np_reconstruct_config_defaults(np_reconstruct_config* config) {
  if (!config) return;
  ReconstructionConfig d;
  config->omega_min = d.omega_min;
  config->omega_max = d.omega_max;
  config->pilot_steps = d.pilot_steps;
  config->pilot_time = d.pilot_time;
  config->pilot_k = d.pilot_k;
  config->temperature = d.temperature;
  const auto& sq = std::get<probe::SqueezedVacuum>(d.init);
  config->init = np_probe_init{NP_PROBE_SQUEEZED, sq.r, sq.phi, 0.0};
  config->k = 0.0;
  config->rabi_phase = d.rabi_phase;
  config->detection_multiplier = d.detection_multiplier;
  config->grid_oversampling = d.grid_oversampling;
  config->max_detection_nodes = d.max_detection_nodes;
  config->golden_iterations = d.golden_iterations;
  config->thermal_points = d.thermal_points;
  config->thermal_span = d.thermal_span;
  config->reference = d.signs.reference;
  config->eps_ref = d.signs.eps_ref;
  config->ambiguity_tol = d.signs.ambiguity_tol;
}

np_status np_reconstruct(const np_oracle* oracle, size_t n, const np_reconstruct_config* config,
                         np_report** out) {
  return guarded([&] {
    require(oracle != nullptr && out != nullptr, "oracle/out");
    ReconstructionConfig c;
    if (config) {
      c.omega_min = config->omega_min;
      c.omega_max = config->omega_max;
      c.pilot_steps = config->pilot_steps;
      c.pilot_time = config->pilot_time;
      c.pilot_k = config->pilot_k;
      c.temperature = config->temperature;
      c.init = to_init(&config->init);
      if (config->k > 0.0) c.k = config->k;
      c.rabi_phase = config->rabi_phase;
      c.detection_multiplier = config->detection_multiplier;
      c.grid_oversampling = config->grid_oversampling;
      c.max_detection_nodes = config->max_detection_nodes;
      c.golden_iterations = config->golden_iterations;
      c.thermal_points = config->thermal_points;
      c.thermal_span = config->thermal_span;
      c.signs.reference = config->reference;
      c.signs.eps_ref = config->eps_ref;
      c.signs.ambiguity_tol = config->ambiguity_tol;
    }
    auto r = std::make_unique<np_report>();
    r->report = reconstruct(oracle->top(), n, c);
    *out = r.release();
  });
}

size_t np_report_size(const np_report* report) { return report ? report->report.omegas_est.size() : 0; }

np_status np_report_omegas(const np_report* report, double* out) {
  return guarded([&] {
    require(report != nullptr && out != nullptr, "report/out");
    std::copy(report->report.omegas_est.begin(), report->report.omegas_est.end(), out);
  });
}

np_status np_report_adjacency(const np_report* report, double* out) {
  return guarded([&] {
    require(report != nullptr && out != nullptr, "report/out");
    to_row_major(report->report.a_est.values(), out);
  });
}

size_t np_report_measurement_count(const np_report* report) {
  return report ? report->report.diagnostics.measurement_count : 0;
}

double np_report_orthogonality_residual(const np_report* report) {
  return report ? report->report.diagnostics.orthogonality_residual : 0.0;
}

np_status np_report_write_json(const np_report* report, const char* path) {
  return guarded([&] {
    require(report != nullptr && path != nullptr, "report/path");
    io::write_atomic(path, io::report_json(report->report));
  });
}

np_status np_report_write_adjacency_csv(const np_report* report, const char* path) {
  return guarded([&] {
    require(report != nullptr && path != nullptr, "report/path");
    io::write_atomic(path, io::matrix_csv(report->report.a_est.values()));
  });
}

void np_report_free(np_report* report) { delete report; }

np_status np_compare_adjacency(const double* a_est, const double* a_true, size_t n, double threshold,
                               np_comparison* out) {
  return guarded([&] {
    require(a_est && a_true && out && n > 0, "matrices/out");
    std::optional<double> th;
    if (threshold >= 0.0) th = threshold;
    Comparison c = compare_adjacency(from_row_major(a_est, n), from_row_major(a_true, n), th);
    *out = np_comparison{c.relative_frobenius, c.precision, c.recall, c.max_abs_diagonal_error,
                         c.threshold, c.true_links, c.predicted_links, c.true_positives};
  });
}

np_status np_write_comparison_json(const np_comparison* cmp, const char* path) {
  return guarded([&] {
    require(cmp && path, "comparison/path");
    io::write_atomic(path, io::comparison_json(from_c(*cmp)));
  });
}

np_status np_write_difference_csv(const double* a_est, const double* a_true, size_t n, const char* path) {
  return guarded([&] {
    require(a_est && a_true && path && n > 0, "matrices/path");
    io::write_atomic(path, io::difference_csv(from_row_major(a_est, n), from_row_major(a_true, n)));
  });
}

np_status np_read_matrix(const char* path, double* out, size_t capacity, size_t* n) {
  return guarded([&] {
    require(path != nullptr && n != nullptr, "path/n");
    std::string p(path);
    std::string text = io::read_file(p);
    bool json = p.size() >= 5 && p.compare(p.size() - 5, 5, ".json") == 0;
    Matrix m = json ? io::adjacency_from_report_json(text) : io::matrix_from_csv(text);
    if (m.rows() != m.cols()) throw Error(ErrorCode::Schema, "matrix in " + p + " is not square");
    *n = static_cast<size_t>(m.rows());
    if (out) {
      if (capacity < *n * *n) throw Error(ErrorCode::InvalidArgument, "buffer too small for matrix");
      to_row_major(m, out);
    }
  });
}

}  // extern "C"
