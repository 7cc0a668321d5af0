#ifndef NETPROBE_NETPROBE_H
#define NETPROBE_NETPROBE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(NETPROBE_BUILDING)
#    define NP_API __declspec(dllexport)
#  else
#    define NP_API __declspec(dllimport)
#  endif
#else
#  define NP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status; on failure a description is
   available from np_last_error_message() on the same thread. */
typedef enum np_status {
  NP_OK = 0,
  NP_INVALID_ARGUMENT,
  NP_SCHEMA_ERROR,
  NP_IO_ERROR,
  NP_DISCONNECTED,
  NP_NOT_POSITIVE_DEFINITE,
  NP_RANK_DEFICIENT,
  NP_DEGENERATE_SPACING,
  NP_DEGENERATE_CONTRAST,
  NP_SIGN_FLIP,
  NP_GRID_TOO_COARSE,
  NP_INSUFFICIENT_EIGENFREQUENCIES,
  NP_INTERNAL_ERROR
} np_status;

NP_API const char* np_status_name(np_status status);
/* Nonzero for failures of the numerics rather than of the input. */
NP_API int np_status_is_numerical(np_status status);
NP_API const char* np_last_error_message(void);

/* 0 restores the default (NETPROBE_THREADS, else hardware concurrency). */
NP_API void np_set_thread_count(unsigned count);

/* ---- networks ---------------------------------------------------------- */

typedef struct np_network np_network;

typedef enum np_recipe_kind {
  NP_RECIPE_CHAIN = 0,
  NP_RECIPE_PERIODIC_CHAIN,
  NP_RECIPE_SHORTCUT_CHAIN,
  NP_RECIPE_SMALL_WORLD,
  NP_RECIPE_ERDOS_RENYI
} np_recipe_kind;

/* Fields used per kind:
   chain:          n, h
   periodic chain: n, h (strong), h_weak, period
   shortcut chain: n, h, shortcut_a, shortcut_b, h_shortcut
   small world:    n, h (chain), h_shortcut, n_shortcuts
   Erdos-Renyi:    n, h, p_edge */
typedef struct np_recipe {
  np_recipe_kind kind;
  size_t n;
  double h;
  double h_weak;
  size_t period;
  size_t shortcut_a;
  size_t shortcut_b;
  double h_shortcut;
  size_t n_shortcuts;
  double p_edge;
  uint64_t seed;
} np_recipe;

NP_API np_status np_network_generate(const np_recipe* recipe, double omega0, int require_connected,
                                     np_network** out);
NP_API np_status np_network_create(size_t n_nodes, double omega0, const size_t* edge_i,
                                   const size_t* edge_j, const double* edge_h, size_t n_edges,
                                   np_network** out);
NP_API np_status np_network_load(const char* path, np_network** out);
NP_API np_status np_network_save(const np_network* net, const char* path);
NP_API void np_network_free(np_network* net);

NP_API size_t np_network_node_count(const np_network* net);
NP_API size_t np_network_edge_count(const np_network* net);
NP_API double np_network_omega0(const np_network* net);
NP_API np_status np_network_edge(const np_network* net, size_t index, size_t* i, size_t* j, double* h);

/* Row-major n x n. */
NP_API np_status np_network_adjacency(const np_network* net, double* out);
NP_API np_status np_network_write_adjacency_csv(const np_network* net, const char* path);
/* n values, descending. */
NP_API np_status np_network_eigenfrequencies(const np_network* net, double* out);
NP_API np_status np_network_recurrence_time(const np_network* net, double* out);

/* ---- spectra ----------------------------------------------------------- */

/* Smooth J on a grid for a probe attached to `nodes` (one or two indices).
   *warned is set when t_max lies in the discrete regime. */
NP_API np_status np_spectrum_smooth(const np_network* net, const size_t* nodes, size_t n_nodes,
                                    double k, const double* grid, size_t n_grid, double t_max,
                                    double* j_out, int* warned);
/* One line per mode, descending frequency; each output holds n values. */
NP_API np_status np_spectrum_comb(const np_network* net, const size_t* nodes, size_t n_nodes,
                                  double k, double* omega_out, double* weight_out,
                                  double* binned_out);
NP_API np_status np_write_spectrum_csv(const double* omega, const double* j, size_t n,
                                       const char* path);
NP_API np_status np_write_comb_csv(const double* omega, const double* weight, const double* binned,
                                   size_t n, const char* path);

/* ---- dynamics ---------------------------------------------------------- */

typedef enum np_probe_kind { NP_PROBE_VACUUM = 0, NP_PROBE_SQUEEZED, NP_PROBE_THERMAL } np_probe_kind;

typedef struct np_probe_init {
  np_probe_kind kind;
  double r;           /* squeezed */
  double phi;         /* squeezed */
  double temperature; /* thermal */
} np_probe_init;

/* Exact <n(t)> of the probe at each time; network thermal at `temperature`. */
NP_API np_status np_dynamics_occupation(const np_network* net, const size_t* nodes, size_t n_nodes,
                                        double omega_s, double k, const np_probe_init* init,
                                        double temperature, const double* times, size_t n_times,
                                        double* mean_n);
NP_API np_status np_write_series_csv(const double* times, const double* mean_n, size_t n,
                                     const char* path);

/* ---- measurement oracle ------------------------------------------------ */

typedef struct np_oracle np_oracle;

/* Reads the hidden network file; nothing else in the library does. */
NP_API np_status np_oracle_open(const char* hidden_path, double temperature, np_oracle** out);
NP_API np_status np_oracle_create(const np_network* hidden, double temperature, np_oracle** out);
/* Additive Gaussian noise on every reading; sigma 0 disables it. */
NP_API np_status np_oracle_set_noise(np_oracle* oracle, double sigma, uint64_t seed);
NP_API size_t np_oracle_node_count(const np_oracle* oracle);
NP_API np_status np_oracle_measure(const np_oracle* oracle, const size_t* nodes, size_t n_nodes,
                                   double omega_s, double k, const np_probe_init* init, double t,
                                   double* out);
NP_API size_t np_oracle_call_count(const np_oracle* oracle);
NP_API void np_oracle_free(np_oracle* oracle);

/* ---- probing ----------------------------------------------------------- */

typedef struct np_schedule {
  const double* grid;
  size_t n_grid;
  double t;
  double k;
  np_probe_init init;
  double temperature;
  const size_t* nodes;
  size_t n_nodes;
} np_schedule;

typedef enum np_point_status {
  NP_POINT_OK = 0,
  NP_POINT_DEGENERATE_CONTRAST,
  NP_POINT_SIGN_FLIP
} np_point_status;

NP_API np_status np_estimate_density_point(double n_t, double n_0, double omega_s, double t,
                                           double temperature, double* out);
/* j_out and status_out hold n_grid values each. */
NP_API np_status np_scan(const np_oracle* oracle, const np_schedule* schedule, double* j_out,
                         np_point_status* status_out);
NP_API np_status np_write_scan_csv(const double* omega, const double* j,
                                   const np_point_status* status, size_t n, const char* path);

typedef struct np_detection np_detection;

NP_API np_status np_detect_eigenfrequencies(const np_oracle* oracle, const np_schedule* schedule,
                                            size_t expected_count, np_detection** out);
NP_API size_t np_detection_count(const np_detection* det);
/* Descending frequencies, np_detection_count values. */
NP_API np_status np_detection_frequencies(const np_detection* det, double* out);
NP_API int np_detection_partial(const np_detection* det);
NP_API np_status np_detection_write_json(const np_detection* det, const char* path);
NP_API void np_detection_free(np_detection* det);

/* ---- reconstruction ---------------------------------------------------- */

typedef struct np_reconstruct_config {
  double omega_min;
  double omega_max;
  size_t pilot_steps;
  double pilot_time;
  double pilot_k;
  double temperature;
  np_probe_init init;
  double k; /* <= 0 selects the coupling automatically */
  double rabi_phase;
  double detection_multiplier;
  double grid_oversampling;
  size_t max_detection_nodes;
  size_t golden_iterations;
  size_t thermal_points;
  double thermal_span;
  size_t reference;
  double eps_ref;
  double ambiguity_tol;
} np_reconstruct_config;

NP_API void np_reconstruct_config_defaults(np_reconstruct_config* config);

typedef struct np_report np_report;

NP_API np_status np_reconstruct(const np_oracle* oracle, size_t n, const np_reconstruct_config* config,
                                np_report** out);
NP_API size_t np_report_size(const np_report* report);
NP_API np_status np_report_omegas(const np_report* report, double* out);
/* Row-major n x n. */
NP_API np_status np_report_adjacency(const np_report* report, double* out);
NP_API size_t np_report_measurement_count(const np_report* report);
NP_API double np_report_orthogonality_residual(const np_report* report);
NP_API np_status np_report_write_json(const np_report* report, const char* path);
NP_API np_status np_report_write_adjacency_csv(const np_report* report, const char* path);
NP_API void np_report_free(np_report* report);

/* ---- comparison -------------------------------------------------------- */

typedef struct np_comparison {
  double relative_frobenius;
  double precision;
  double recall;
  double max_abs_diagonal_error;
  double threshold;
  size_t true_links;
  size_t predicted_links;
  size_t true_positives;
} np_comparison;

/* threshold < 0 selects the default (10% of the largest off-diagonal
   magnitude of the estimate). Matrices are row-major n x n. */
NP_API np_status np_compare_adjacency(const double* a_est, const double* a_true, size_t n,
                                      double threshold, np_comparison* out);
NP_API np_status np_write_comparison_json(const np_comparison* cmp, const char* path);
NP_API np_status np_write_difference_csv(const double* a_est, const double* a_true, size_t n,
                                         const char* path);

/* Square matrix from a CSV file or from the "A" field of a report JSON.
   Call with out == NULL to learn n; then pass a buffer of n * n values. */
NP_API np_status np_read_matrix(const char* path, double* out, size_t capacity, size_t* n);

#ifdef __cplusplus
}
#endif

#endif
