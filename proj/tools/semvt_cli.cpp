// semvt command-line front end. Links only the C API (semvt.h); all the
// actual work happens inside the shared library.

#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "semvt.h"

namespace {

int exit_code(semvt_status status) {
    switch (status) {
        case SEMVT_OK: return 0;
        case SEMVT_ERR_CONFIG: return 2;
        case SEMVT_ERR_INFEASIBLE: return 3;
        default: return 1;
    }
}

int report(semvt_status status) {
    if (status != SEMVT_OK) std::fprintf(stderr, "error: %s\n", semvt_last_error());
    return exit_code(status);
}

struct CommonOpts {
    std::string config;
    std::uint64_t seed = 0;
    bool has_seed = false;
    std::string out_dir;
    double threshold = 0.0;
    bool has_threshold = false;
    bool no_recovery = false;
    bool no_interleave = false;
    bool no_feature_split = false;

    semvt_run_options to_c() const {
        semvt_run_options o{};
        o.has_seed = has_seed ? 1 : 0;
        o.seed = seed;
        o.out_dir = out_dir.empty() ? nullptr : out_dir.c_str();
        o.has_threshold = has_threshold ? 1 : 0;
        o.threshold = threshold;
        o.no_recovery = no_recovery ? 1 : 0;
        o.no_interleave = no_interleave ? 1 : 0;
        o.no_feature_split = no_feature_split ? 1 : 0;
        return o;
    }
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config, "experiment config (TOML)")->required();
    cmd->add_option("--seed", opts.seed, "master seed override")
        ->each([&opts](const std::string&) { opts.has_seed = true; });
    cmd->add_option("--out", opts.out_dir, "output directory override");
    cmd->add_option("--threshold", opts.threshold, "quality / loss-rate threshold")
        ->each([&opts](const std::string&) { opts.has_threshold = true; });
    cmd->add_flag("--no-recovery", opts.no_recovery, "disable loss recovery at the decoder");
    cmd->add_flag("--no-interleave", opts.no_interleave, "disable semantic interleaving");
    cmd->add_flag("--no-feature-split", opts.no_feature_split,
                  "disable the common/individual decomposition");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"semvt — packet-loss-resistant semantic video transport simulator/planner"};
    app.require_subcommand(1);

    CommonOpts sim_opts, ana_opts, curve_opts;
    auto* sim = app.add_subcommand("simulate", "end-to-end loss-grid simulation");
    add_common(sim, sim_opts);
    auto* ana = app.add_subcommand("analyze", "analytic loss-rate surface and frontier");
    add_common(ana, ana_opts);
    auto* crv = app.add_subcommand("curve", "measure and fit the loss-rate/quality curve");
    add_common(crv, curve_opts);

    auto* plan = app.add_subcommand("plan", "minimum-redundancy packet-count planning");
    double plan_ps = 0.0, plan_threshold = 0.0;
    std::uint32_t plan_m = 1;
    std::uint64_t plan_lhead = 49, plan_lorigin = 155520, plan_cap = 1000000;
    std::string plan_curve, plan_json;
    plan->add_option("--ps", plan_ps, "symbol error rate")->required();
    plan->add_option("--m-bits", plan_m, "bits per modulation symbol")->capture_default_str();
    plan->add_option("--l-head", plan_lhead, "header+trailer bytes per packet")
        ->capture_default_str();
    plan->add_option("--l-origin", plan_lorigin, "payload bytes per GOP")->capture_default_str();
    plan->add_option("--curve", plan_curve, "performance curve CSV")->required();
    plan->add_option("--threshold", plan_threshold, "required metric value")->required();
    plan->add_option("--cap", plan_cap, "packet count search cap")->capture_default_str();
    plan->add_option("--json", plan_json, "also write the plan as JSON to this path");

    auto* corpus = app.add_subcommand("corpus", "write a deterministic synthetic PPM corpus");
    std::string corpus_dir;
    std::uint32_t corpus_gops = 10, corpus_gop_size = 4, corpus_h = 64, corpus_w = 64;
    std::uint64_t corpus_seed = 1;
    corpus->add_option("--dir", corpus_dir, "output directory")->required();
    corpus->add_option("--gops", corpus_gops, "GOP count")->capture_default_str();
    corpus->add_option("--gop-size", corpus_gop_size, "frames per GOP")->capture_default_str();
    corpus->add_option("--height", corpus_h, "frame height")->capture_default_str();
    corpus->add_option("--width", corpus_w, "frame width")->capture_default_str();
    corpus->add_option("--seed", corpus_seed, "generator seed")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed()) {
        const auto o = sim_opts.to_c();
        return report(semvt_run_simulate(sim_opts.config.c_str(), &o));
    }
    if (ana->parsed()) {
        const auto o = ana_opts.to_c();
        return report(semvt_run_analyze(ana_opts.config.c_str(), &o));
    }
    if (crv->parsed()) {
        const auto o = curve_opts.to_c();
        char path[4096] = {0};
        const auto status = semvt_run_curve(curve_opts.config.c_str(), &o, path, sizeof(path));
        if (status == SEMVT_OK) std::printf("curve written to %s\n", path);
        return report(status);
    }
    if (plan->parsed()) {
        semvt_plan_result result{};
        const auto status = semvt_plan_file(plan_ps, plan_m, plan_lhead, plan_lorigin,
                                            plan_curve.c_str(), plan_threshold, plan_cap, &result);
        if (status == SEMVT_ERR_INFEASIBLE) {
            std::fprintf(stderr, "infeasible: %s\n", semvt_last_error());
            semvt_curve* curve = nullptr;
            if (semvt_curve_load(plan_curve.c_str(), &curve) == SEMVT_OK) {
                double gamma_max = 0.0;
                if (semvt_curve_max_performance(curve, plan_ps, plan_m, plan_lhead, &gamma_max) ==
                    SEMVT_OK)
                    std::fprintf(stderr, "maximum attainable performance: %.6f\n", gamma_max);
                semvt_curve_free(curve);
            }
            return 3;
        }
        if (status != SEMVT_OK) return report(status);

        std::printf("n_p_min          %llu\n", static_cast<unsigned long long>(result.n_p_min));
        std::printf("packet_length    %llu bytes\n",
                    static_cast<unsigned long long>(result.packet_length));
        std::printf("p_l              %.9g\n", result.p_l);
        std::printf("l_total          %llu bytes\n",
                    static_cast<unsigned long long>(result.l_total));
        std::printf("predicted_metric %.9g\n", result.predicted_metric);

        const nlohmann::json j = {{"n_p_min", result.n_p_min},
                                  {"packet_length", result.packet_length},
                                  {"p_l", result.p_l},
                                  {"l_total", result.l_total},
                                  {"predicted_metric", result.predicted_metric}};
        if (!plan_json.empty()) {
            FILE* f = std::fopen(plan_json.c_str(), "wb");
            if (!f) {
                std::fprintf(stderr, "error: cannot open %s\n", plan_json.c_str());
                return 1;
            }
            const std::string text = j.dump(2);
            std::fwrite(text.data(), 1, text.size(), f);
            std::fputc('\n', f);
            std::fclose(f);
        } else {
            std::printf("%s\n", j.dump(2).c_str());
        }
        return 0;
    }
    if (corpus->parsed()) {
        return report(semvt_write_synthetic_corpus(corpus_dir.c_str(), corpus_gops,
                                                   corpus_gop_size, corpus_h, corpus_w,
                                                   corpus_seed));
    }
    return 0;
}
