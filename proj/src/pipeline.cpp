#include "semvt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "semvt/channel.hpp"
#include "semvt/error.hpp"
#include "semvt/io.hpp"
#include "semvt/metrics.hpp"
#include "semvt/rng.hpp"

namespace fs = std::filesystem;

namespace semvt {

namespace {

// Seed derivation tags; all substreams hang off the one master seed.
enum : std::uint64_t { kTagInterleave = 1, kTagChannel = 2 };

std::uint64_t chan_seed(std::uint64_t master, std::size_t point, int trial, std::size_t gop) {
    std::uint64_t s = substream_seed(master, kTagChannel);
    s = substream_seed(s, point);
    s = substream_seed(s, static_cast<std::uint64_t>(trial));
    return substream_seed(s, gop);
}

struct EncodedGop {
    QuantizedSemantics q;
    std::vector<std::uint8_t> wire_codes;   // after (optional) interleaving
    std::vector<std::uint8_t> payload;      // packed bytes on the wire
    SegmentGeometry geometry;
    InterleaveKey key;
    std::vector<FramedPacket> packets;      // frame records, drop flag filled per trial
    std::vector<std::uint64_t> packet_bytes;
    std::vector<double> drop_prob_ser;      // per-packet drop prob in SER mode
};

std::vector<Gop> load_gops(const ExperimentConfig& cfg) {
    cfg.validate_frames();
    auto frames = read_ppm_dir(cfg.frames_dir);
    const std::size_t n = static_cast<std::size_t>(cfg.model.gop_size);
    std::size_t gop_count = frames.size() / n;
    require(gop_count >= 1, ErrorCode::config, "not enough frames for one GOP");
    if (cfg.gop_limit > 0) gop_count = std::min(gop_count, cfg.gop_limit);
    std::vector<Gop> gops;
    gops.reserve(gop_count);
    const auto& fshape = frames.front().shape();
    for (std::size_t g = 0; g < gop_count; ++g) {
        Gop gop(Shape4{n, fshape.h, fshape.w, 3});
        for (std::size_t t = 0; t < n; ++t) {
            const Tensor& fr = frames[g * n + t];
            for (std::size_t i = 0; i < fr.size(); ++i)
                gop[t * fr.size() + i] = fr[i];
        }
        gops.push_back(std::move(gop));
    }
    return gops;
}

EncodedGop encode_for_wire(const Gop& gop, const ExperimentConfig& cfg, std::size_t gop_index) {
    CodecOptions copts{cfg.feature_split, cfg.recovery};
    EncodedGop e;
    e.q = encode_gop(gop, cfg.model, copts);
    e.key.seed = substream_seed(substream_seed(cfg.seed, kTagInterleave), gop_index);
    e.wire_codes = cfg.interleave_enabled ? interleave(e.q.codes, e.key) : e.q.codes;
    e.payload = pack_elements(e.wire_codes);
    e.geometry = SegmentGeometry{cfg.n_p, e.payload.size(), e.q.codes.size()};

    auto segments = segment(e.payload, cfg.n_p, static_cast<std::uint8_t>(gop_index & 0xFF));
    e.packets.reserve(segments.size());
    for (const auto& seg : segments) {
        e.packets.push_back(frame_packet(seg, cfg.stack));
        e.packet_bytes.push_back(e.packets.back().packet_bytes);
    }
    return e;
}

// Drop probability the per-symbol channel actually samples (whole symbols).
double packet_drop_prob(double p_s, unsigned m_bits, std::uint64_t bytes) {
    if (p_s <= 0.0) return 0.0;
    if (p_s >= 1.0) return 1.0;
    const std::uint64_t n_sym = (8 * bytes + m_bits - 1) / m_bits;
    return 1.0 - std::exp(static_cast<double>(n_sym) * std::log1p(-p_s));
}

} // namespace

PerfCurve load_curve_csv(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::io, path + ": empty curve file");
    require(line == "p_l,metric" || line == "p_l,metric\r", ErrorCode::io,
            path + ": expected header 'p_l,metric'");
    std::vector<double> xs, ys;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        require(comma != std::string::npos, ErrorCode::io, path + ": bad row '" + line + "'");
        xs.push_back(std::strtod(line.substr(0, comma).c_str(), nullptr));
        ys.push_back(std::strtod(line.substr(comma + 1).c_str(), nullptr));
    }
    return PerfCurve::fit(std::move(xs), std::move(ys));
}

void save_curve_csv(const PerfCurve& curve, const std::string& path) {
    std::string out = "p_l,metric\n";
    for (std::size_t i = 0; i < curve.sample_count(); ++i)
        out += format_double(curve.knots_x()[i]) + "," + format_double(curve.knots_y()[i]) + "\n";
    write_text_file(path, out);
}

void save_sweep_csv(const std::vector<SweepRow>& rows, bool with_metric,
                    const std::string& path) {
    std::string out = with_metric ? "p_s,n_p,packet_length_bytes,p_l,metric\n"
                                  : "p_s,n_p,packet_length_bytes,p_l\n";
    char buf[64];
    for (const auto& r : rows) {
        out += format_double(r.p_s);
        std::snprintf(buf, sizeof(buf), ",%llu,%llu,",
                      static_cast<unsigned long long>(r.n_p),
                      static_cast<unsigned long long>(r.packet_length));
        out += buf;
        out += format_double(r.p_l);
        if (with_metric) {
            out += ",";
            out += format_double(r.metric.value_or(0.0));
        }
        out += "\n";
    }
    write_text_file(path, out);
}

SimulateResult run_simulate(const ExperimentConfig& cfg) {
    const auto gops = load_gops(cfg);
    const std::size_t frame_h = gops.front().shape().h, frame_w = gops.front().shape().w;

    std::vector<EncodedGop> encoded;
    encoded.reserve(gops.size());
    for (std::size_t g = 0; g < gops.size(); ++g)
        encoded.push_back(encode_for_wire(gops[g], cfg, g));

    const std::vector<double>& grid = cfg.mode == ChannelMode::rate ? cfg.loss_grid : cfg.ser_grid;
    const std::uint64_t m_src = static_cast<std::uint64_t>(cfg.model.gop_size) * frame_h *
                                frame_w * 3;
    const double run_cbr = cbr(encoded.front().q.codes.size(), m_src);

    if (cfg.mode == ChannelMode::ser) {
        for (auto& e : encoded) {
            e.drop_prob_ser.reserve(e.packet_bytes.size());
            for (auto bytes : e.packet_bytes)
                e.drop_prob_ser.push_back(packet_drop_prob(grid.front(), cfg.m_bits, bytes));
        }
    }

    fs::create_directories(cfg.out_dir);
    if (cfg.dump_frames) fs::create_directories(fs::path(cfg.out_dir) / "frames");

    CodecOptions copts{cfg.feature_split, cfg.recovery};
    SimulateResult result;
    result.cbr = run_cbr;

    std::string report = "gop,p_l,psnr_db,ms_ssim,cbr\n";
    std::string mean_csv = "p_l,psnr_db,ms_ssim\n";

    for (std::size_t pt = 0; pt < grid.size(); ++pt) {
        double point_psnr = 0.0, point_ssim = 0.0;
        std::uint64_t point_packets = 0, point_drops = 0;
        double expected_drops = 0.0, drop_var = 0.0;
        std::vector<double> gop_psnr(gops.size(), 0.0), gop_ssim(gops.size(), 0.0);
        std::string trace = "gop,label,packet_bytes,dropped\n";

        for (int trial = 0; trial < cfg.trials; ++trial) {
            for (std::size_t g = 0; g < gops.size(); ++g) {
                const auto& e = encoded[g];
                const std::uint64_t seed = chan_seed(cfg.seed, pt, trial, g);

                std::vector<std::uint8_t> drops;
                if (cfg.mode == ChannelMode::rate) {
                    drops = drop_packets_at_rate(e.packet_bytes.size(), grid[pt], seed);
                    for (std::size_t i = 0; i < drops.size(); ++i) {
                        expected_drops += grid[pt];
                        drop_var += grid[pt] * (1.0 - grid[pt]);
                    }
                } else {
                    ChannelParams cp{grid[pt], cfg.m_bits, seed};
                    drops = transmit_packets(e.packet_bytes, cp);
                    for (std::size_t i = 0; i < e.packet_bytes.size(); ++i) {
                        const double p = packet_drop_prob(grid[pt], cfg.m_bits, e.packet_bytes[i]);
                        expected_drops += p;
                        drop_var += p * (1.0 - p);
                    }
                }
                point_packets += drops.size();
                for (auto d : drops) point_drops += d;

                // Receiver: deliver surviving segments, reassemble, decode.
                auto segments = segment(e.payload, cfg.n_p,
                                        static_cast<std::uint8_t>(g & 0xFF));
                std::vector<Segment> received;
                for (std::size_t i = 0; i < segments.size(); ++i)
                    if (!drops[i]) received.push_back(segments[i]);

                ReassemblyResult rx;
                if (!received.empty()) {
                    rx = reassemble(received, e.geometry, e.key);
                } else {
                    rx.data.assign(e.geometry.byte_length, 0);
                    rx.byte_mask.assign(e.geometry.byte_length, 1);
                    rx.element_mask.assign(e.geometry.element_count, 1);
                }

                auto wire_codes = unpack_elements(rx.data, e.geometry.element_count);
                std::vector<std::uint8_t> codes_rx;
                std::vector<std::uint8_t> element_mask;
                if (cfg.interleave_enabled) {
                    codes_rx = deinterleave(wire_codes, e.key);
                    element_mask = rx.element_mask;
                } else {
                    codes_rx = std::move(wire_codes);
                    element_mask = element_mask_from_bytes(rx.byte_mask,
                                                           e.geometry.element_count);
                }

                Gop recon = decode_gop(e.q, codes_rx, element_mask, cfg.model, copts);

                // Per-frame quality against the source GOP.
                double psnr_sum = 0.0, ssim_sum = 0.0;
                const std::size_t n = static_cast<std::size_t>(cfg.model.gop_size);
                for (std::size_t t = 0; t < n; ++t) {
                    Tensor fx(Shape4{1, frame_h, frame_w, 3}), fy(Shape4{1, frame_h, frame_w, 3});
                    const std::size_t stride = frame_h * frame_w * 3;
                    for (std::size_t i = 0; i < stride; ++i) {
                        fx[i] = gops[g][t * stride + i];
                        fy[i] = recon[t * stride + i];
                    }
                    const double p = psnr(fx, fy);
                    psnr_sum += std::min(p, 100.0);
                    ssim_sum += ms_ssim(fx, fy);
                }
                gop_psnr[g] += psnr_sum / cfg.model.gop_size;
                gop_ssim[g] += ssim_sum / cfg.model.gop_size;

                if (trial == 0) {
                    char row[96];
                    for (std::size_t i = 0; i < e.packets.size(); ++i) {
                        std::snprintf(row, sizeof(row), "%zu,%u,%llu,%d\n", g,
                                      e.packets[i].label,
                                      static_cast<unsigned long long>(e.packets[i].packet_bytes),
                                      drops[i] ? 1 : 0);
                        trace += row;
                    }
                    if (cfg.dump_frames) {
                        const fs::path dir = fs::path(cfg.out_dir) / "frames" /
                                             ("pt" + std::to_string(pt));
                        fs::create_directories(dir);
                        const std::size_t stride = frame_h * frame_w * 3;
                        for (std::size_t t = 0; t < n; ++t) {
                            Tensor fr(Shape4{1, frame_h, frame_w, 3});
                            for (std::size_t i = 0; i < stride; ++i)
                                fr[i] = recon[t * stride + i];
                            char name[48];
                            std::snprintf(name, sizeof(name), "gop%03zu_frame%zu.ppm", g, t);
                            write_ppm(fr, (dir / name).string());
                        }
                    }
                }
            }
        }

        // Internal consistency: empirical drop count vs the channel's own
        // expected probability, 6-sigma binomial bound.
        const double sigma = std::sqrt(std::max(drop_var, 1e-12));
        const double z = (static_cast<double>(point_drops) - expected_drops) / sigma;
        require(std::abs(z) <= 6.0, ErrorCode::invalid_argument,
                "simulate: drop rate disagrees with the analytic rate (z=" + std::to_string(z) +
                    ")");

        const double p_l_col =
            cfg.mode == ChannelMode::rate
                ? grid[pt]
                : packet_loss_rate(LinkParams{grid[pt], cfg.m_bits, cfg.stack.total_overhead(),
                                              encoded.front().payload.size(), cfg.n_p});

        const double denom = static_cast<double>(cfg.trials);
        for (std::size_t g = 0; g < gops.size(); ++g) {
            report += std::to_string(g) + "," + format_double(p_l_col) + "," +
                      format_metric(gop_psnr[g] / denom) + "," +
                      format_metric(gop_ssim[g] / denom) + "," + format_double(run_cbr) + "\n";
            point_psnr += gop_psnr[g] / denom;
            point_ssim += gop_ssim[g] / denom;
        }
        point_psnr /= static_cast<double>(gops.size());
        point_ssim /= static_cast<double>(gops.size());
        mean_csv += format_double(p_l_col) + "," + format_metric(point_psnr) + "," +
                    format_metric(point_ssim) + "\n";

        write_text_file((fs::path(cfg.out_dir) / ("trace_pt" + std::to_string(pt) + ".csv"))
                            .string(),
                        trace);

        PointStats ps;
        ps.p_l = p_l_col;
        ps.psnr_db = point_psnr;
        ps.ms_ssim = point_ssim;
        ps.drop_rate = static_cast<double>(point_drops) / static_cast<double>(point_packets);
        result.points.push_back(ps);
        result.total_packets += point_packets;
        result.dropped_packets += point_drops;
    }

    write_text_file((fs::path(cfg.out_dir) / "report.csv").string(), report);
    write_text_file((fs::path(cfg.out_dir) / "mean.csv").string(), mean_csv);
    return result;
}

SweepResult run_analyze(const ExperimentConfig& cfg) {
    SweepSpec spec;
    spec.m_bits = cfg.m_bits;
    spec.l_head = cfg.stack.total_overhead();
    spec.l_origin = cfg.sweep_l_origin;
    spec.threshold = cfg.threshold;

    spec.p_s_values.reserve(static_cast<std::size_t>(cfg.ps_steps));
    if (cfg.ps_steps == 1) {
        spec.p_s_values.push_back(cfg.ps_min);
    } else if (cfg.ps_log) {
        const double step = (std::log(cfg.ps_max) - std::log(cfg.ps_min)) / (cfg.ps_steps - 1);
        for (int i = 0; i < cfg.ps_steps; ++i)
            spec.p_s_values.push_back(std::exp(std::log(cfg.ps_min) + step * i));
    } else {
        const double step = (cfg.ps_max - cfg.ps_min) / (cfg.ps_steps - 1);
        for (int i = 0; i < cfg.ps_steps; ++i) spec.p_s_values.push_back(cfg.ps_min + step * i);
    }

    if (cfg.np_steps == 1) {
        spec.n_p_values.push_back(cfg.np_min);
    } else {
        const double step = static_cast<double>(cfg.np_max - cfg.np_min) / (cfg.np_steps - 1);
        std::uint64_t prev = 0;
        for (int i = 0; i < cfg.np_steps; ++i) {
            const std::uint64_t v =
                cfg.np_min + static_cast<std::uint64_t>(std::llround(step * i));
            if (v != prev) spec.n_p_values.push_back(v); // dedupe rounded steps
            prev = v;
        }
    }

    PerfCurve curve = PerfCurve::fit({0.0, 1.0}, {1.0, 0.0});
    if (!cfg.curve_file.empty()) {
        curve = load_curve_csv(cfg.curve_file);
        spec.curve = &curve;
    }

    SweepResult sweep = surface_sweep(spec);
    fs::create_directories(cfg.out_dir);
    save_sweep_csv(sweep.grid, spec.curve != nullptr,
                   (fs::path(cfg.out_dir) / "sweep.csv").string());
    if (cfg.threshold)
        save_sweep_csv(sweep.frontier, spec.curve != nullptr,
                       (fs::path(cfg.out_dir) / "frontier.csv").string());
    return sweep;
}

PlanResult run_plan(const PlanRequest& req) {
    PerfCurve curve = load_curve_csv(req.curve_file);
    return optimize_packets(req.p_s, req.m_bits, req.l_head, req.l_origin, curve, req.threshold,
                            req.n_p_cap);
}

std::string run_curve(const ExperimentConfig& cfg) {
    require(cfg.mode == ChannelMode::rate, ErrorCode::config,
            "curve measurement runs over a loss-rate grid ([channel] mode = \"rate\")");
    for (std::size_t i = 1; i < cfg.loss_grid.size(); ++i)
        require(cfg.loss_grid[i] > cfg.loss_grid[i - 1], ErrorCode::config,
                "curve measurement needs a strictly increasing loss grid");
    require(cfg.loss_grid.size() >= 2, ErrorCode::config,
            "curve measurement needs at least 2 grid points");

    SimulateResult sim = run_simulate(cfg);
    std::vector<double> xs, ys;
    for (const auto& p : sim.points) {
        xs.push_back(p.p_l);
        ys.push_back(p.ms_ssim);
    }
    PerfCurve curve = PerfCurve::fit(std::move(xs), std::move(ys));

    fs::path out = cfg.curve_out;
    if (out.is_relative()) out = fs::path(cfg.out_dir) / out;
    save_curve_csv(curve, out.string());
    return out.string();
}

} // namespace semvt
