#include <doctest.h>

#include <cmath>
#include <vector>

#include "semvt/analytics.hpp"
#include "semvt/error.hpp"
#include "semvt/rng.hpp"

using namespace semvt;

namespace {

// Independent evaluation route for the oracle checks: direct pow() instead
// of the library's log-space path.
double pl_direct(double p_s, unsigned m, double plen_bytes) {
    return 1.0 - std::pow(1.0 - p_s, 8.0 * plen_bytes / m);
}

// Brute-force linear scan for the minimal feasible packet count.
std::uint64_t scan_min_np(double p_s, unsigned m, std::uint64_t lh, std::uint64_t lo,
                          const PerfCurve& curve, double gamma, std::uint64_t cap) {
    for (std::uint64_t np = 1; np <= cap; ++np) {
        const double pl = pl_direct(p_s, m, static_cast<double>(lh) + static_cast<double>(lo) / np);
        if (curve.eval(pl) >= gamma) return np;
    }
    return 0; // infeasible within cap
}

} // namespace

TEST_CASE("symbols_per_packet ceiling") {
    CHECK(symbols_per_packet(100, 2) == 400);
    CHECK(symbols_per_packet(1, 8) == 1);
    CHECK(symbols_per_packet(49, 1) == 392);
    CHECK(symbols_per_packet(1, 3) == 3); // ceil(8/3)
    CHECK_THROWS_AS(symbols_per_packet(100, 0), Error);
}

TEST_CASE("packet_loss_rate closed form") {
    CHECK(packet_loss_rate({0.0, 2, 49, 1000, 10}) == 0.0);
    CHECK(packet_loss_rate({1.0, 2, 49, 1000, 10}) == 1.0);

    // l_head + l_origin/n_p = 100 bytes, M=2
    const double pl = packet_loss_rate({0.001, 2, 40, 600, 10});
    CHECK(pl == doctest::Approx(0.32981409399325964).epsilon(1e-14));

    // survives exponents that would underflow naive pow chains
    const double big = packet_loss_rate({1e-8, 1, 49, 100'000'000, 1});
    CHECK(big > 0.999);
    CHECK(big <= 1.0);
}

TEST_CASE("total_bytes exact and overflow-checked") {
    CHECK(total_bytes({0.1, 1, 49, 155520, 100}) == 160420);
    CHECK(total_bytes({0.1, 1, 49, 155520, 1}) == 155569);
    CHECK(total_bytes({0.1, 1, 49, 155520, 1080}) == 208440);
    CHECK_THROWS_AS(total_bytes({0.1, 1, UINT64_MAX / 2, 1, 3}), Error);
}

TEST_CASE("total_bytes strictly increases with n_p when l_head > 0") {
    Xoshiro256ss rng(7);
    for (int i = 0; i < 200; ++i) {
        LinkParams p{0.5, 1, 1 + rng.next_below(64), 1 + rng.next_below(1 << 20),
                     1 + rng.next_below(4096)};
        LinkParams q = p;
        q.n_p += 1;
        CHECK(total_bytes(q) > total_bytes(p));
    }
}

TEST_CASE("min_loss_rate infimum") {
    CHECK(min_loss_rate(0.0, 1, 49) == 0.0);
    CHECK(min_loss_rate(0.37, 4, 0) == 0.0);

    // golden from a 50-digit evaluation of 1-(1-1e-5)^392
    const double v = min_loss_rate(1e-5, 1, 49);
    CHECK(v == doctest::Approx(0.0039123463529988072894).epsilon(1e-13));

    // independent extended-precision route
    const long double ref = 1.0L - std::pow(1.0L - 1e-5L, 392.0L);
    CHECK(std::abs(v - static_cast<double>(ref)) < 1e-15);
}

TEST_CASE("min_loss_rate is a strict lower bound at any finite n_p") {
    Xoshiro256ss rng(11);
    for (int i = 0; i < 300; ++i) {
        const double p_s = 1e-6 * std::pow(10.0, 3.0 * rng.next_unit()); // 1e-6..1e-3
        const unsigned m = 1 + static_cast<unsigned>(rng.next_below(8));
        const std::uint64_t lh = 1 + rng.next_below(64);
        const std::uint64_t np = 1 + rng.next_below(4096);
        const std::uint64_t lo = (1 + rng.next_below(1500)) * np;
        CHECK(min_loss_rate(p_s, m, lh) < packet_loss_rate({p_s, m, lh, lo, np}));
    }
}

TEST_CASE("max_performance evaluates the curve at the loss-rate infimum") {
    auto lin = PerfCurve::fit({0.0, 1.0}, {1.0, 0.0});
    CHECK(lin.max_performance(0.0, 1, 49) == doctest::Approx(1.0));
    CHECK(lin.max_performance(1e-5, 1, 49) ==
          doctest::Approx(0.99608765364700119271).epsilon(1e-13));
}

TEST_CASE("loss_rate_derivative_sign") {
    CHECK(loss_rate_derivative_sign({0.5, 2, 49, 1000, 10}) == -1);
    CHECK(loss_rate_derivative_sign({0.0, 2, 49, 1000, 10}) == 0);
    CHECK(loss_rate_derivative_sign({1.0, 2, 49, 1000, 10}) == 0);

    // finite differences over a 10x10 (p_s, n_p) grid
    for (int i = 0; i < 10; ++i) {
        const double p_s = 5e-5 * (i + 1);
        for (int j = 0; j < 10; ++j) {
            LinkParams p{p_s, 2, 49, 155520, 100 + static_cast<std::uint64_t>(j) * 100};
            LinkParams q = p;
            q.n_p += 1;
            CHECK(packet_loss_rate(q) < packet_loss_rate(p));
        }
    }
}

TEST_CASE("fit_perf_curve: two-point linear fallback") {
    auto c = PerfCurve::fit({0.0, 1.0}, {1.0, 0.0});
    CHECK(c.eval(0.5) == doctest::Approx(0.5));
    CHECK(c.eval(0.0) == doctest::Approx(1.0));
    CHECK(c.eval(1.0) == doctest::Approx(0.0));
    CHECK(c.eval(-0.5) == doctest::Approx(1.0)); // clamped
    CHECK(c.eval(1.5) == doctest::Approx(0.0));
}

TEST_CASE("fit_perf_curve: exact at sample knots") {
    auto c = PerfCurve::fit({0.0, 0.5, 1.0}, {0.95, 0.9, 0.1});
    CHECK(c.eval(0.0) == doctest::Approx(0.95).epsilon(1e-15));
    CHECK(c.eval(0.5) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(c.eval(1.0) == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("fit_perf_curve: monotone everywhere for random sample sets") {
    Xoshiro256ss rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.next_below(9);
        std::vector<double> xs, ys;
        double x = rng.next_unit() * 0.05;
        double y = 0.5 + 0.5 * rng.next_unit();
        for (std::size_t i = 0; i < n; ++i) {
            xs.push_back(x);
            ys.push_back(y);
            x += 0.01 + rng.next_unit() * (1.0 - x - 0.01) / static_cast<double>(n);
            y -= rng.next_unit() * y / static_cast<double>(n);
        }
        auto c = PerfCurve::fit(xs, ys);
        double prev = c.eval(0.0);
        for (int k = 1; k <= 1000; ++k) {
            const double v = c.eval(k / 1000.0);
            CHECK(v <= prev + 1e-12);
            prev = v;
        }
    }
}

TEST_CASE("fit_perf_curve: isotonic repair and rejection") {
    // small wobble within tolerance is repaired
    auto c = PerfCurve::fit({0.0, 0.3, 0.6, 1.0}, {0.9, 0.88, 0.89, 0.2}, 0.05);
    CHECK(c.eval(0.3) >= c.eval(0.6));

    // genuinely increasing data is rejected
    CHECK_THROWS_AS(PerfCurve::fit({0.0, 0.5, 1.0}, {0.2, 0.8, 0.1}, 0.05), Error);
    // non-increasing loss rates are rejected
    CHECK_THROWS_AS(PerfCurve::fit({0.5, 0.5}, {1.0, 0.5}), Error);
    CHECK_THROWS_AS(PerfCurve::fit({0.0}, {1.0}), Error);
}

TEST_CASE("optimize_packets: no loss needs no redundancy") {
    auto lin = PerfCurve::fit({0.0, 1.0}, {1.0, 0.0});
    const auto plan = optimize_packets(0.0, 1, 49, 155520, lin, 0.95);
    CHECK(plan.n_p_min == 1);
    CHECK(plan.p_l == 0.0);
    CHECK(plan.l_total == 155569);
}

TEST_CASE("optimize_packets: scan-oracle instance (n_p = 123)") {
    auto lin = PerfCurve::fit({0.0, 1.0}, {1.0, 0.0});
    const std::uint64_t oracle = scan_min_np(1e-5, 1, 49, 155520, lin, 0.9, 10000);
    CHECK(oracle == 123);

    const auto plan = optimize_packets(1e-5, 1, 49, 155520, lin, 0.9);
    CHECK(plan.n_p_min == oracle);
    CHECK(plan.predicted_metric >= 0.9);
    // one packet fewer must violate the threshold
    CHECK(lin.eval(packet_loss_rate({1e-5, 1, 49, 155520, 122})) < 0.9);
    CHECK(plan.packet_length == 49 + (155520 + 122) / 123);
    CHECK(plan.l_total == 123 * 49 + 155520);
}

TEST_CASE("optimize_packets: infeasible threshold reports the attainable maximum") {
    auto lin = PerfCurve::fit({0.0, 1.0}, {1.0, 0.0});
    const double gamma_max = lin.max_performance(1e-3, 1, 49);
    try {
        optimize_packets(1e-3, 1, 49, 155520, lin, gamma_max + 1e-3);
        FAIL("expected infeasible");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::infeasible);
        CHECK(std::string(e.what()).find("maximum attainable") != std::string::npos);
    }
}

TEST_CASE("optimize_packets equals exhaustive scan on randomized instances") {
    Xoshiro256ss rng(31);
    auto lin = PerfCurve::fit({0.0, 1.0}, {1.0, 0.0});
    int feasible = 0, infeasible = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const double p_s = 1e-6 * std::pow(10.0, 3.0 * rng.next_unit());
        const unsigned m = 1 + static_cast<unsigned>(rng.next_below(4));
        const std::uint64_t lh = 8 + rng.next_below(64);
        const std::uint64_t lo = 1000 + rng.next_below(200000);
        const double gamma = 0.5 + 0.49 * rng.next_unit();
        const std::uint64_t cap = 10000;
        const std::uint64_t oracle = scan_min_np(p_s, m, lh, lo, lin, gamma, cap);
        if (oracle == 0) {
            CHECK_THROWS_AS(optimize_packets(p_s, m, lh, lo, lin, gamma, cap), Error);
            ++infeasible;
        } else {
            CHECK(optimize_packets(p_s, m, lh, lo, lin, gamma, cap).n_p_min == oracle);
            ++feasible;
        }
    }
    CHECK(feasible > 0); // the sampler must exercise the interesting side
}

TEST_CASE("surface_sweep: single point matches packet_loss_rate") {
    SweepSpec spec;
    spec.p_s_values = {1e-4};
    spec.n_p_values = {100};
    spec.m_bits = 2;
    spec.l_head = 49;
    spec.l_origin = 155520;
    const auto result = surface_sweep(spec);
    REQUIRE(result.grid.size() == 1);
    CHECK(result.grid[0].p_l ==
          doctest::Approx(packet_loss_rate({1e-4, 2, 49, 155520, 100})).epsilon(1e-15));
    CHECK(result.grid[0].packet_length == 49 + (155520 + 99) / 100);
    CHECK(result.frontier.empty());
}

TEST_CASE("surface_sweep: loss-rate threshold frontier equals optimize_packets") {
    SweepSpec spec;
    spec.p_s_values = {1e-5, 1e-4, 3e-4};
    spec.n_p_values = {1, 10, 100};
    spec.m_bits = 1;
    spec.l_head = 49;
    spec.l_origin = 155520;
    spec.threshold = 0.15; // P_L ceiling without a curve
    const auto result = surface_sweep(spec);
    auto lin = PerfCurve::fit({0.0, 1.0}, {1.0, 0.0});
    REQUIRE(result.frontier.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto plan = optimize_packets(spec.p_s_values[i], 1, 49, 155520, lin, 0.85);
        CHECK(result.frontier[i].n_p == plan.n_p_min);
        CHECK(result.frontier[i].p_l <= 0.15);
    }

    // a p_s whose loss-rate floor exceeds the ceiling contributes no row
    spec.p_s_values = {1e-3};
    CHECK(min_loss_rate(1e-3, 1, 49) > 0.15);
    CHECK(surface_sweep(spec).frontier.empty());
}

TEST_CASE("surface_sweep: 50x50 grid stays in range") {
    SweepSpec spec;
    for (int i = 0; i < 50; ++i) spec.p_s_values.push_back(1e-5 * std::pow(10.0, 3.0 * i / 49.0));
    for (int j = 0; j < 50; ++j) spec.n_p_values.push_back(1 + static_cast<std::uint64_t>(j) * 40);
    const auto result = surface_sweep(spec);
    CHECK(result.grid.size() == 2500);
    for (const auto& row : result.grid) {
        CHECK(row.p_l >= 0.0);
        CHECK(row.p_l <= 1.0);
    }
}

TEST_CASE("packet_loss_rate strictly decreases with n_p (randomized)") {
    Xoshiro256ss rng(47);
    for (int i = 0; i < 300; ++i) {
        const double p_s = 1e-6 * std::pow(10.0, 3.0 * rng.next_unit());
        const unsigned m = 1 + static_cast<unsigned>(rng.next_below(8));
        const std::uint64_t lh = rng.next_below(50);
        const std::uint64_t np = 1 + rng.next_below(4096);
        const std::uint64_t lo = (1 + rng.next_below(1500)) * np;
        LinkParams p{p_s, m, lh, lo, np};
        LinkParams q = p;
        q.n_p += 1;
        CHECK(packet_loss_rate(q) < packet_loss_rate(p));
    }
}
