#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace semvt {

// Link-budget symbols for one GOP transmission: symbol error rate, bits per
// modulation symbol, per-packet header+trailer bytes, semantic payload bytes,
// and the packet count the payload is split into.
struct LinkParams {
    double p_s = 0.0;            // symbol error rate, [0,1]
    unsigned m_bits = 1;         // bits per symbol (modulation order 2^m_bits)
    std::uint64_t l_head = 0;    // combined header+trailer bytes per packet
    std::uint64_t l_origin = 1;  // semantic payload bytes for one GOP
    std::uint64_t n_p = 1;       // number of packets

    void validate() const;
};

// Monotone-decreasing map from packet loss rate to a quality metric, fitted
// from measured samples. Exact at the sample knots, clamped outside them.
class PerfCurve {
public:
    // Builds the interpolant. Loss rates must be strictly increasing in [0,1].
    // Metric values may contain measurement noise up to `noise_tol`; they are
    // repaired by isotonic regression first. Values that remain non-monotone
    // beyond the tolerance are rejected.
    static PerfCurve fit(std::vector<double> loss_rates, std::vector<double> metrics,
                         double noise_tol = 0.05);

    double eval(double loss_rate) const;

    // Metric value at the minimum attainable loss rate for the given link
    // (an infimum: approached but never reached at finite packet counts).
    double max_performance(double p_s, unsigned m_bits, std::uint64_t l_head) const;

    std::size_t sample_count() const { return x_.size(); }
    const std::vector<double>& knots_x() const { return x_; }
    const std::vector<double>& knots_y() const { return y_; }

private:
    PerfCurve() = default;
    std::vector<double> x_, y_, slope_; // slope_ = Hermite tangents (empty when linear)
};

struct PlanResult {
    std::uint64_t n_p_min = 0;       // minimal packet count meeting the threshold
    double p_l = 0.0;                // packet loss rate at n_p_min
    std::uint64_t l_total = 0;       // total transmitted bytes at n_p_min
    std::uint64_t packet_length = 0; // bytes per packet (header + ceil payload share)
    double predicted_metric = 0.0;   // curve value at p_l
};

struct SweepRow {
    double p_s = 0.0;
    std::uint64_t n_p = 0;
    std::uint64_t packet_length = 0;
    double p_l = 0.0;
    std::optional<double> metric;
};

struct SweepResult {
    std::vector<SweepRow> grid;
    std::vector<SweepRow> frontier; // minimal n_p per p_s meeting the threshold
};

// Symbols needed to send one packet of the given length; whole symbols on
// the wire, hence the ceiling. The closed-form rate expressions below keep
// the exact real-valued exponent instead.
std::uint64_t symbols_per_packet(std::uint64_t packet_length_bytes, unsigned m_bits);

// P_L = 1 - (1 - p_s)^(8 (l_head + l_origin/n_p) / m_bits), evaluated in
// log space so large exponents do not underflow.
double packet_loss_rate(const LinkParams& params);

// n_p * l_head + l_origin, overflow-checked.
std::uint64_t total_bytes(const LinkParams& params);

// Infimum of the packet loss rate over all packet counts:
// 1 - (1 - p_s)^(8 l_head / m_bits). Strict lower bound at every finite n_p.
double min_loss_rate(double p_s, unsigned m_bits, std::uint64_t l_head);

// Sign of dP_L/dn_p: -1 for 0 < p_s < 1 (loss rate strictly decreases with
// the packet count), 0 in the degenerate p_s in {0,1} cases.
int loss_rate_derivative_sign(const LinkParams& params);

// Minimal integer n_p whose predicted metric meets `threshold`; this also
// minimizes total transmitted bytes since l_total grows with n_p while the
// loss rate falls. Throws Error{infeasible} (message carries the attainable
// maximum) when no n_p <= cap satisfies the threshold.
PlanResult optimize_packets(double p_s, unsigned m_bits, std::uint64_t l_head,
                            std::uint64_t l_origin, const PerfCurve& curve, double threshold,
                            std::uint64_t n_p_cap = 1'000'000);

struct SweepSpec {
    std::vector<double> p_s_values;
    std::vector<std::uint64_t> n_p_values;
    unsigned m_bits = 1;
    std::uint64_t l_head = 49;
    std::uint64_t l_origin = 155520;
    const PerfCurve* curve = nullptr;  // optional; adds the metric column
    std::optional<double> threshold;   // on metric if curve given, else on P_L
    std::uint64_t n_p_cap = 1'000'000; // frontier search cap
};

// Dense (p_s, n_p) grid of loss rates plus, when a threshold is supplied,
// the minimal-redundancy frontier row per p_s.
SweepResult surface_sweep(const SweepSpec& spec);

} // namespace semvt
