#include "semvt.h"

#include <cstring>
#include <string>

#include "semvt/analytics.hpp"
#include "semvt/config.hpp"
#include "semvt/error.hpp"
#include "semvt/io.hpp"
#include "semvt/pipeline.hpp"
#include "semvt/transport.hpp"

namespace {

thread_local std::string g_last_error;

semvt_status to_status(semvt::ErrorCode code) {
    switch (code) {
        case semvt::ErrorCode::invalid_argument: return SEMVT_ERR_INVALID;
        case semvt::ErrorCode::config: return SEMVT_ERR_CONFIG;
        case semvt::ErrorCode::infeasible: return SEMVT_ERR_INFEASIBLE;
        case semvt::ErrorCode::io: return SEMVT_ERR_IO;
        case semvt::ErrorCode::overflow: return SEMVT_ERR_OVERFLOW;
    }
    return SEMVT_ERR_RUNTIME;
}

template <typename Fn>
semvt_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return SEMVT_OK;
    } catch (const semvt::Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SEMVT_ERR_RUNTIME;
    } catch (...) {
        g_last_error = "unknown error";
        return SEMVT_ERR_RUNTIME;
    }
}

semvt_status require_arg(bool ok, const char* msg) {
    if (ok) return SEMVT_OK;
    g_last_error = msg;
    return SEMVT_ERR_INVALID;
}

semvt::RunOverrides to_overrides(const semvt_run_options* opts) {
    semvt::RunOverrides ov;
    if (!opts) return ov;
    if (opts->has_seed) ov.seed = opts->seed;
    if (opts->out_dir) ov.out_dir = std::string(opts->out_dir);
    if (opts->has_threshold) ov.threshold = opts->threshold;
    ov.no_recovery = opts->no_recovery != 0;
    ov.no_interleave = opts->no_interleave != 0;
    ov.no_feature_split = opts->no_feature_split != 0;
    return ov;
}

semvt::LinkParams to_link(const semvt_link_params& p) {
    return semvt::LinkParams{p.p_s, p.m_bits, p.l_head, p.l_origin, p.n_p};
}

} // namespace

struct semvt_curve {
    semvt::PerfCurve curve;
};

extern "C" {

const char* semvt_version(void) { return "semvt 1.0.0"; }

const char* semvt_last_error(void) { return g_last_error.c_str(); }

semvt_status semvt_symbols_per_packet(uint64_t packet_length_bytes, uint32_t m_bits,
                                      uint64_t* out) {
    if (auto s = require_arg(out != nullptr, "out is NULL")) return s;
    return guarded([&] { *out = semvt::symbols_per_packet(packet_length_bytes, m_bits); });
}

semvt_status semvt_packet_loss_rate(const semvt_link_params* params, double* out) {
    if (auto s = require_arg(params && out, "params/out is NULL")) return s;
    return guarded([&] { *out = semvt::packet_loss_rate(to_link(*params)); });
}

semvt_status semvt_total_bytes(const semvt_link_params* params, uint64_t* out) {
    if (auto s = require_arg(params && out, "params/out is NULL")) return s;
    return guarded([&] { *out = semvt::total_bytes(to_link(*params)); });
}

semvt_status semvt_min_loss_rate(double p_s, uint32_t m_bits, uint64_t l_head, double* out) {
    if (auto s = require_arg(out != nullptr, "out is NULL")) return s;
    return guarded([&] { *out = semvt::min_loss_rate(p_s, m_bits, l_head); });
}

semvt_status semvt_loss_rate_derivative_sign(const semvt_link_params* params, int* out) {
    if (auto s = require_arg(params && out, "params/out is NULL")) return s;
    return guarded([&] { *out = semvt::loss_rate_derivative_sign(to_link(*params)); });
}

semvt_status semvt_curve_fit(const double* loss_rates, const double* metrics, size_t count,
                             double noise_tol, semvt_curve** out) {
    if (auto s = require_arg(loss_rates && metrics && out, "array/out is NULL")) return s;
    return guarded([&] {
        std::vector<double> xs(loss_rates, loss_rates + count);
        std::vector<double> ys(metrics, metrics + count);
        *out = new semvt_curve{semvt::PerfCurve::fit(std::move(xs), std::move(ys), noise_tol)};
    });
}

semvt_status semvt_curve_load(const char* csv_path, semvt_curve** out) {
    if (auto s = require_arg(csv_path && out, "path/out is NULL")) return s;
    return guarded([&] { *out = new semvt_curve{semvt::load_curve_csv(csv_path)}; });
}

semvt_status semvt_curve_save(const semvt_curve* curve, const char* csv_path) {
    if (auto s = require_arg(curve && csv_path, "curve/path is NULL")) return s;
    return guarded([&] { semvt::save_curve_csv(curve->curve, csv_path); });
}

semvt_status semvt_curve_eval(const semvt_curve* curve, double loss_rate, double* out) {
    if (auto s = require_arg(curve && out, "curve/out is NULL")) return s;
    return guarded([&] { *out = curve->curve.eval(loss_rate); });
}

semvt_status semvt_curve_max_performance(const semvt_curve* curve, double p_s, uint32_t m_bits,
                                         uint64_t l_head, double* out) {
    if (auto s = require_arg(curve && out, "curve/out is NULL")) return s;
    return guarded([&] { *out = curve->curve.max_performance(p_s, m_bits, l_head); });
}

void semvt_curve_free(semvt_curve* curve) { delete curve; }

semvt_status semvt_optimize_packets(double p_s, uint32_t m_bits, uint64_t l_head,
                                    uint64_t l_origin, const semvt_curve* curve, double threshold,
                                    uint64_t n_p_cap, semvt_plan_result* out) {
    if (auto s = require_arg(curve && out, "curve/out is NULL")) return s;
    return guarded([&] {
        const auto plan = semvt::optimize_packets(p_s, m_bits, l_head, l_origin, curve->curve,
                                                  threshold, n_p_cap ? n_p_cap : 1'000'000);
        *out = semvt_plan_result{plan.n_p_min, plan.p_l, plan.l_total, plan.packet_length,
                                 plan.predicted_metric};
    });
}

semvt_status semvt_surface_sweep(const semvt_sweep_spec* spec, const char* grid_csv_path,
                                 const char* frontier_csv_path) {
    if (auto s = require_arg(spec && grid_csv_path, "spec/path is NULL")) return s;
    return guarded([&] {
        semvt::SweepSpec ss;
        ss.p_s_values.assign(spec->p_s_values, spec->p_s_values + spec->p_s_count);
        ss.n_p_values.assign(spec->n_p_values, spec->n_p_values + spec->n_p_count);
        ss.m_bits = spec->m_bits;
        ss.l_head = spec->l_head;
        ss.l_origin = spec->l_origin;
        if (spec->curve) ss.curve = &spec->curve->curve;
        if (spec->has_threshold) ss.threshold = spec->threshold;
        if (spec->n_p_cap) ss.n_p_cap = spec->n_p_cap;
        const auto result = semvt::surface_sweep(ss);
        semvt::save_sweep_csv(result.grid, ss.curve != nullptr, grid_csv_path);
        if (frontier_csv_path && spec->has_threshold)
            semvt::save_sweep_csv(result.frontier, ss.curve != nullptr, frontier_csv_path);
    });
}

semvt_status semvt_encode_header(uint8_t gop_number, uint16_t segment_label, uint8_t out[3]) {
    if (auto s = require_arg(out != nullptr, "out is NULL")) return s;
    return guarded([&] {
        const auto bytes = semvt::encode_header(semvt::AppHeader{gop_number, segment_label});
        std::memcpy(out, bytes.data(), 3);
    });
}

semvt_status semvt_decode_header(const uint8_t* bytes, size_t len, uint8_t* gop_number,
                                 uint16_t* segment_label) {
    if (auto s = require_arg(bytes && gop_number && segment_label, "argument is NULL")) return s;
    return guarded([&] {
        const auto h = semvt::decode_header(bytes, len);
        *gop_number = h.gop_number;
        *segment_label = h.segment_label;
    });
}

semvt_status semvt_gen_permutation(uint64_t seed, uint32_t length, uint32_t* out) {
    if (auto s = require_arg(out != nullptr, "out is NULL")) return s;
    return guarded([&] {
        const auto perm = semvt::gen_permutation(semvt::InterleaveKey{seed}, length);
        std::memcpy(out, perm.data(), perm.size() * sizeof(uint32_t));
    });
}

semvt_status semvt_run_simulate(const char* config_path, const semvt_run_options* opts) {
    if (auto s = require_arg(config_path != nullptr, "config_path is NULL")) return s;
    return guarded([&] {
        auto cfg = semvt::ExperimentConfig::load(config_path);
        semvt::apply_overrides(cfg, to_overrides(opts));
        semvt::run_simulate(cfg);
    });
}

semvt_status semvt_run_analyze(const char* config_path, const semvt_run_options* opts) {
    if (auto s = require_arg(config_path != nullptr, "config_path is NULL")) return s;
    return guarded([&] {
        auto cfg = semvt::ExperimentConfig::load(config_path);
        semvt::apply_overrides(cfg, to_overrides(opts));
        semvt::run_analyze(cfg);
    });
}

semvt_status semvt_run_curve(const char* config_path, const semvt_run_options* opts,
                             char* path_out, size_t path_cap) {
    if (auto s = require_arg(config_path != nullptr, "config_path is NULL")) return s;
    return guarded([&] {
        auto cfg = semvt::ExperimentConfig::load(config_path);
        semvt::apply_overrides(cfg, to_overrides(opts));
        const std::string path = semvt::run_curve(cfg);
        if (path_out && path_cap > 0) {
            std::strncpy(path_out, path.c_str(), path_cap - 1);
            path_out[path_cap - 1] = '\0';
        }
    });
}

semvt_status semvt_plan_file(double p_s, uint32_t m_bits, uint64_t l_head, uint64_t l_origin,
                             const char* curve_csv_path, double threshold, uint64_t n_p_cap,
                             semvt_plan_result* out) {
    if (auto s = require_arg(curve_csv_path && out, "path/out is NULL")) return s;
    return guarded([&] {
        semvt::PlanRequest req{p_s,      m_bits,    l_head, l_origin,
                               curve_csv_path, threshold, n_p_cap ? n_p_cap : 1'000'000};
        const auto plan = semvt::run_plan(req);
        *out = semvt_plan_result{plan.n_p_min, plan.p_l, plan.l_total, plan.packet_length,
                                 plan.predicted_metric};
    });
}

semvt_status semvt_write_synthetic_corpus(const char* dir, uint32_t gop_count, uint32_t gop_size,
                                          uint32_t height, uint32_t width, uint64_t seed) {
    if (auto s = require_arg(dir != nullptr, "dir is NULL")) return s;
    return guarded([&] {
        semvt::write_synthetic_corpus(dir, gop_count, gop_size, height, width, seed);
    });
}

} // extern "C"
