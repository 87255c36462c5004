/*
 * semvt — packet-loss-resistant semantic video transport: C API.
 *
 * Shared-library surface over the C++ core. All functions return a
 * semvt_status; outputs are written through pointers. On failure,
 * semvt_last_error() returns a thread-local description of what went wrong.
 * Opaque handles (semvt_curve) are created and released through the
 * corresponding _free function.
 */
#ifndef SEMVT_H
#define SEMVT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32) || defined(_WIN64)
#define SEMVT_API __declspec(dllexport)
#else
#define SEMVT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum semvt_status {
    SEMVT_OK = 0,
    SEMVT_ERR_RUNTIME = 1,    /* unexpected failure */
    SEMVT_ERR_CONFIG = 2,     /* configuration file or validation failure */
    SEMVT_ERR_INFEASIBLE = 3, /* plan threshold unreachable */
    SEMVT_ERR_INVALID = 4,    /* bad argument */
    SEMVT_ERR_IO = 5,         /* file read/write failure */
    SEMVT_ERR_OVERFLOW = 6    /* integer overflow detected */
} semvt_status;

SEMVT_API const char* semvt_version(void);
SEMVT_API const char* semvt_last_error(void);

/* ---- link analytics -------------------------------------------------- */

typedef struct semvt_link_params {
    double p_s;        /* symbol error rate, [0,1] */
    uint32_t m_bits;   /* bits per modulation symbol, >= 1 */
    uint64_t l_head;   /* header+trailer bytes per packet */
    uint64_t l_origin; /* semantic payload bytes per GOP */
    uint64_t n_p;      /* packet count */
} semvt_link_params;

SEMVT_API semvt_status semvt_symbols_per_packet(uint64_t packet_length_bytes, uint32_t m_bits,
                                                uint64_t* out);
SEMVT_API semvt_status semvt_packet_loss_rate(const semvt_link_params* params, double* out);
SEMVT_API semvt_status semvt_total_bytes(const semvt_link_params* params, uint64_t* out);
SEMVT_API semvt_status semvt_min_loss_rate(double p_s, uint32_t m_bits, uint64_t l_head,
                                           double* out);
/* -1 (strictly decreasing in n_p) or 0 in the degenerate p_s cases */
SEMVT_API semvt_status semvt_loss_rate_derivative_sign(const semvt_link_params* params, int* out);

/* ---- fitted performance curves --------------------------------------- */

typedef struct semvt_curve semvt_curve;

SEMVT_API semvt_status semvt_curve_fit(const double* loss_rates, const double* metrics,
                                       size_t count, double noise_tol, semvt_curve** out);
SEMVT_API semvt_status semvt_curve_load(const char* csv_path, semvt_curve** out);
SEMVT_API semvt_status semvt_curve_save(const semvt_curve* curve, const char* csv_path);
SEMVT_API semvt_status semvt_curve_eval(const semvt_curve* curve, double loss_rate, double* out);
SEMVT_API semvt_status semvt_curve_max_performance(const semvt_curve* curve, double p_s,
                                                   uint32_t m_bits, uint64_t l_head, double* out);
SEMVT_API void semvt_curve_free(semvt_curve* curve);

/* ---- minimum-redundancy planning -------------------------------------- */

typedef struct semvt_plan_result {
    uint64_t n_p_min;
    double p_l;
    uint64_t l_total;
    uint64_t packet_length;
    double predicted_metric;
} semvt_plan_result;

SEMVT_API semvt_status semvt_optimize_packets(double p_s, uint32_t m_bits, uint64_t l_head,
                                              uint64_t l_origin, const semvt_curve* curve,
                                              double threshold, uint64_t n_p_cap,
                                              semvt_plan_result* out);

/* ---- surface sweep ------------------------------------------------------ */

typedef struct semvt_sweep_spec {
    const double* p_s_values;
    size_t p_s_count;
    const uint64_t* n_p_values;
    size_t n_p_count;
    uint32_t m_bits;
    uint64_t l_head;
    uint64_t l_origin;
    const semvt_curve* curve; /* optional: adds the metric column */
    int has_threshold;
    double threshold; /* metric floor with a curve, else P_L ceiling */
    uint64_t n_p_cap;
} semvt_sweep_spec;

/* Writes the grid CSV; frontier_csv_path may be NULL (or no threshold set). */
SEMVT_API semvt_status semvt_surface_sweep(const semvt_sweep_spec* spec, const char* grid_csv_path,
                                           const char* frontier_csv_path);

/* ---- transport wire format --------------------------------------------- */

SEMVT_API semvt_status semvt_encode_header(uint8_t gop_number, uint16_t segment_label,
                                           uint8_t out[3]);
SEMVT_API semvt_status semvt_decode_header(const uint8_t* bytes, size_t len, uint8_t* gop_number,
                                           uint16_t* segment_label);
/* Fisher-Yates permutation of 0..length-1 (xoshiro256**, splitmix64-seeded) */
SEMVT_API semvt_status semvt_gen_permutation(uint64_t seed, uint32_t length, uint32_t* out);

/* ---- batch runs ----------------------------------------------------------- */

typedef struct semvt_run_options {
    int has_seed;
    uint64_t seed;
    const char* out_dir; /* NULL keeps the config value */
    int has_threshold;
    double threshold;
    int no_recovery;
    int no_interleave;
    int no_feature_split;
} semvt_run_options;

/* opts may be NULL. Config files are TOML; see the project README. */
SEMVT_API semvt_status semvt_run_simulate(const char* config_path,
                                          const semvt_run_options* opts);
SEMVT_API semvt_status semvt_run_analyze(const char* config_path, const semvt_run_options* opts);
/* On success writes the fitted curve's path into path_out (truncated to cap). */
SEMVT_API semvt_status semvt_run_curve(const char* config_path, const semvt_run_options* opts,
                                       char* path_out, size_t path_cap);

SEMVT_API semvt_status semvt_plan_file(double p_s, uint32_t m_bits, uint64_t l_head,
                                       uint64_t l_origin, const char* curve_csv_path,
                                       double threshold, uint64_t n_p_cap,
                                       semvt_plan_result* out);

/* Deterministic synthetic PPM corpus (gop_count * gop_size frames). */
SEMVT_API semvt_status semvt_write_synthetic_corpus(const char* dir, uint32_t gop_count,
                                                    uint32_t gop_size, uint32_t height,
                                                    uint32_t width, uint64_t seed);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SEMVT_H */
