#include "semvt/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semvt/error.hpp"

namespace semvt {

void LinkParams::validate() const {
    require(p_s >= 0.0 && p_s <= 1.0, ErrorCode::invalid_argument, "p_s must be in [0,1]");
    require(m_bits >= 1, ErrorCode::invalid_argument, "m_bits must be >= 1");
    require(l_origin >= 1, ErrorCode::invalid_argument, "l_origin must be >= 1");
    require(n_p >= 1, ErrorCode::invalid_argument, "n_p must be >= 1");
}

std::uint64_t symbols_per_packet(std::uint64_t packet_length_bytes, unsigned m_bits) {
    require(m_bits >= 1, ErrorCode::invalid_argument, "m_bits must be >= 1");
    require(packet_length_bytes >= 1, ErrorCode::invalid_argument, "packet length must be >= 1");
    return (8 * packet_length_bytes + m_bits - 1) / m_bits;
}

// Survival probability (1-p_s)^exponent via exponent*log1p(-p_s); exponents
// reach ~1e6, far past where pow() underflows intermediate terms.
static double survival(double p_s, double exponent) {
    if (p_s <= 0.0) return 1.0;
    if (p_s >= 1.0) return exponent == 0.0 ? 1.0 : 0.0;
    return std::exp(exponent * std::log1p(-p_s));
}

double packet_loss_rate(const LinkParams& params) {
    params.validate();
    const double plen = static_cast<double>(params.l_head) +
                        static_cast<double>(params.l_origin) / static_cast<double>(params.n_p);
    const double exponent = 8.0 * plen / static_cast<double>(params.m_bits);
    return 1.0 - survival(params.p_s, exponent);
}

std::uint64_t total_bytes(const LinkParams& params) {
    params.validate();
    std::uint64_t overhead = 0, total = 0;
    if (__builtin_mul_overflow(params.n_p, params.l_head, &overhead) ||
        __builtin_add_overflow(overhead, params.l_origin, &total))
        fail(ErrorCode::overflow, "total_bytes: 64-bit overflow");
    return total;
}

double min_loss_rate(double p_s, unsigned m_bits, std::uint64_t l_head) {
    require(p_s >= 0.0 && p_s <= 1.0, ErrorCode::invalid_argument, "p_s must be in [0,1]");
    require(m_bits >= 1, ErrorCode::invalid_argument, "m_bits must be >= 1");
    const double exponent = 8.0 * static_cast<double>(l_head) / static_cast<double>(m_bits);
    return 1.0 - survival(p_s, exponent);
}

int loss_rate_derivative_sign(const LinkParams& params) {
    params.validate();
    require(params.l_origin > 0, ErrorCode::invalid_argument, "l_origin must be > 0");
    if (params.p_s <= 0.0 || params.p_s >= 1.0) return 0; // P_L constant at 0 or 1
    // dP_L/dn_p = 8 l_origin ln(1-p_s) / (M n_p^2) * (1-p_s)^exponent:
    // every factor is positive except ln(1-p_s).
    return -1;
}

// Pool-adjacent-violators for a non-increasing sequence (weights all 1).
static std::vector<double> isotonic_decreasing(const std::vector<double>& y) {
    struct Block {
        double sum;
        std::size_t count;
    };
    std::vector<Block> blocks;
    blocks.reserve(y.size());
    for (double v : y) {
        blocks.push_back({v, 1});
        while (blocks.size() >= 2) {
            auto& prev = blocks[blocks.size() - 2];
            auto& last = blocks.back();
            if (prev.sum / prev.count >= last.sum / last.count) break;
            prev.sum += last.sum;
            prev.count += last.count;
            blocks.pop_back();
        }
    }
    std::vector<double> out;
    out.reserve(y.size());
    for (const auto& b : blocks) out.insert(out.end(), b.count, b.sum / b.count);
    return out;
}

PerfCurve PerfCurve::fit(std::vector<double> loss_rates, std::vector<double> metrics,
                         double noise_tol) {
    require(loss_rates.size() == metrics.size(), ErrorCode::invalid_argument,
            "curve fit: sample size mismatch");
    require(loss_rates.size() >= 2, ErrorCode::invalid_argument,
            "curve fit: need at least 2 samples");
    for (std::size_t i = 0; i < loss_rates.size(); ++i) {
        require(loss_rates[i] >= 0.0 && loss_rates[i] <= 1.0, ErrorCode::invalid_argument,
                "curve fit: loss rates must lie in [0,1]");
        require(i == 0 || loss_rates[i] > loss_rates[i - 1], ErrorCode::invalid_argument,
                "curve fit: loss rates must be strictly increasing");
        require(std::isfinite(metrics[i]), ErrorCode::invalid_argument,
                "curve fit: metric values must be finite");
    }

    auto repaired = isotonic_decreasing(metrics);
    for (std::size_t i = 0; i < metrics.size(); ++i)
        require(std::abs(repaired[i] - metrics[i]) <= noise_tol, ErrorCode::invalid_argument,
                "curve fit: samples non-monotone beyond noise tolerance");

    PerfCurve curve;
    curve.x_ = std::move(loss_rates);
    curve.y_ = std::move(repaired);
    const std::size_t n = curve.x_.size();
    if (n == 2) return curve; // linear between the two knots

    // Fritsch-Carlson tangents: monotone piecewise-cubic Hermite. Secants are
    // all <= 0 here, so the limiter keeps every cubic segment non-increasing.
    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        d[i] = (curve.y_[i + 1] - curve.y_[i]) / (curve.x_[i + 1] - curve.x_[i]);
    std::vector<double> m(n);
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i)
        m[i] = (d[i - 1] * d[i] <= 0.0) ? 0.0 : 0.5 * (d[i - 1] + d[i]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (d[i] == 0.0) {
            m[i] = m[i + 1] = 0.0;
            continue;
        }
        const double a = m[i] / d[i];
        const double b = m[i + 1] / d[i];
        const double s = a * a + b * b;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            m[i] = tau * a * d[i];
            m[i + 1] = tau * b * d[i];
        }
    }
    curve.slope_ = std::move(m);
    return curve;
}

double PerfCurve::eval(double loss_rate) const {
    if (loss_rate <= x_.front()) return y_.front();
    if (loss_rate >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), loss_rate);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double hx = x_[i + 1] - x_[i];
    const double t = (loss_rate - x_[i]) / hx;
    if (slope_.empty()) return y_[i] + t * (y_[i + 1] - y_[i]);
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[i] + h10 * hx * slope_[i] + h01 * y_[i + 1] + h11 * hx * slope_[i + 1];
}

double PerfCurve::max_performance(double p_s, unsigned m_bits, std::uint64_t l_head) const {
    return eval(min_loss_rate(p_s, m_bits, l_head));
}

static SweepRow make_row(double p_s, unsigned m_bits, std::uint64_t l_head,
                         std::uint64_t l_origin, std::uint64_t n_p, const PerfCurve* curve) {
    LinkParams lp{p_s, m_bits, l_head, l_origin, n_p};
    SweepRow row;
    row.p_s = p_s;
    row.n_p = n_p;
    row.packet_length = l_head + (l_origin + n_p - 1) / n_p;
    row.p_l = packet_loss_rate(lp);
    if (curve) row.metric = curve->eval(row.p_l);
    return row;
}

PlanResult optimize_packets(double p_s, unsigned m_bits, std::uint64_t l_head,
                            std::uint64_t l_origin, const PerfCurve& curve, double threshold,
                            std::uint64_t n_p_cap) {
    require(n_p_cap >= 1, ErrorCode::invalid_argument, "n_p cap must be >= 1");
    auto metric_at = [&](std::uint64_t n_p) {
        return curve.eval(packet_loss_rate(LinkParams{p_s, m_bits, l_head, l_origin, n_p}));
    };
    // The metric is non-decreasing in n_p (P_L decreases, curve decreases in
    // P_L), so the feasible set is an up-set: exponential probe, then binary
    // search for its least element.
    if (metric_at(n_p_cap) < threshold) {
        const double gamma_max = curve.max_performance(p_s, m_bits, l_head);
        fail(ErrorCode::infeasible,
             "threshold unreachable: maximum attainable performance is " +
                 std::to_string(gamma_max));
    }
    std::uint64_t hi = 1;
    while (hi < n_p_cap && metric_at(hi) < threshold) hi = std::min(hi * 2, n_p_cap);
    std::uint64_t lo = hi / 2 + 1; // metric_at(hi/2) < threshold (or hi == 1)
    if (hi == 1) lo = 1;
    while (lo < hi) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (metric_at(mid) >= threshold)
            hi = mid;
        else
            lo = mid + 1;
    }
    LinkParams lp{p_s, m_bits, l_head, l_origin, lo};
    PlanResult res;
    res.n_p_min = lo;
    res.p_l = packet_loss_rate(lp);
    res.l_total = total_bytes(lp);
    res.packet_length = l_head + (l_origin + lo - 1) / lo;
    res.predicted_metric = curve.eval(res.p_l);
    return res;
}

SweepResult surface_sweep(const SweepSpec& spec) {
    require(!spec.p_s_values.empty() && !spec.n_p_values.empty(), ErrorCode::invalid_argument,
            "sweep: ranges must be non-empty");
    SweepResult out;
    out.grid.reserve(spec.p_s_values.size() * spec.n_p_values.size());
    for (double p_s : spec.p_s_values)
        for (std::uint64_t n_p : spec.n_p_values)
            out.grid.push_back(make_row(p_s, spec.m_bits, spec.l_head, spec.l_origin, n_p,
                                        spec.curve));

    if (spec.threshold) {
        // Without a measured curve the threshold is a loss-rate ceiling;
        // f_p(x) = 1-x turns "P_L <= T" into "metric >= 1-T".
        PerfCurve identity = PerfCurve::fit({0.0, 1.0}, {1.0, 0.0});
        const PerfCurve& curve = spec.curve ? *spec.curve : identity;
        const double gamma = spec.curve ? *spec.threshold : 1.0 - *spec.threshold;
        for (double p_s : spec.p_s_values) {
            PlanResult plan;
            try {
                plan = optimize_packets(p_s, spec.m_bits, spec.l_head, spec.l_origin, curve,
                                        gamma, spec.n_p_cap);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::infeasible) continue; // no frontier row at this p_s
                throw;
            }
            SweepRow row = make_row(p_s, spec.m_bits, spec.l_head, spec.l_origin, plan.n_p_min,
                                    spec.curve);
            out.frontier.push_back(row);
        }
    }
    return out;
}

} // namespace semvt
