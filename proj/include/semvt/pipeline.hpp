#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semvt/analytics.hpp"
#include "semvt/config.hpp"

namespace semvt {

struct PointStats {
    double p_l = 0.0;        // grid loss rate (rate mode) or analytic P_L (SER mode)
    double psnr_db = 0.0;    // mean over GOPs and trials (capped at 100 dB)
    double ms_ssim = 0.0;
    double drop_rate = 0.0;  // empirical packet drop rate
};

struct SimulateResult {
    std::vector<PointStats> points;
    double cbr = 0.0;
    std::uint64_t total_packets = 0;
    std::uint64_t dropped_packets = 0;
};

// End-to-end simulation over the configured loss grid: encode -> quantize ->
// interleave -> segment -> frame -> channel -> reassemble -> de-interleave ->
// recover -> decode -> metrics. Writes report.csv, mean.csv, per-point packet
// traces and (optionally) reconstructed frames under cfg.out_dir.
// Deterministic for a given config and seed.
SimulateResult run_simulate(const ExperimentConfig& cfg);

// Analytic surface sweep (and threshold frontier) to sweep.csv/frontier.csv.
SweepResult run_analyze(const ExperimentConfig& cfg);

struct PlanRequest {
    double p_s = 0.0;
    unsigned m_bits = 1;
    std::uint64_t l_head = 49;
    std::uint64_t l_origin = 155520;
    std::string curve_file;
    double threshold = 0.0;
    std::uint64_t n_p_cap = 1'000'000;
};

PlanResult run_plan(const PlanRequest& req);

// Measures the loss-rate -> metric curve on the configured corpus, fits it,
// and writes the curve CSV consumable by run_plan. Returns the output path.
std::string run_curve(const ExperimentConfig& cfg);

// PerfCurve CSV ("p_l,metric" header, rows sorted by p_l).
PerfCurve load_curve_csv(const std::string& path);
void save_curve_csv(const PerfCurve& curve, const std::string& path);
void save_sweep_csv(const std::vector<SweepRow>& rows, bool with_metric,
                    const std::string& path);

} // namespace semvt
