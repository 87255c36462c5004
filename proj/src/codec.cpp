#include "semvt/codec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semvt/error.hpp"
#include "semvt/rng.hpp"

namespace semvt {

ModelConfig ModelConfig::preset(std::string_view name) {
    ModelConfig cfg;
    if (name == "small") {
        cfg.depths = {1, 1, 1, 1, 1, 1};
        cfg.widths = {24, 48, 72, 96, 120, 144};
    } else if (name == "mid") {
        cfg.depths = {2, 2, 2, 2, 2, 2};
        cfg.widths = {24, 48, 72, 96, 120, 144};
    } else if (name == "large") {
        cfg.depths = {2, 2, 2, 2, 2, 2};
        cfg.widths = {48, 96, 144, 192, 240, 288};
    } else {
        fail(ErrorCode::config, "unknown model preset: " + std::string(name));
    }
    cfg.out_channels = 96;
    cfg.gop_size = 4;
    cfg.individual_factor = 2;
    return cfg;
}

void ModelConfig::validate() const {
    for (int d : depths) require(d >= 1, ErrorCode::config, "stage depths must be positive");
    for (int w : widths) require(w >= 1, ErrorCode::config, "stage widths must be positive");
    require(gop_size >= 1, ErrorCode::config, "gop_size must be >= 1");
    require(individual_factor >= 1, ErrorCode::config, "individual_factor must be >= 1");
    require(out_channels >= 1, ErrorCode::config, "out_channels must be >= 1");
    require(widths[2] == 3 * widths[0], ErrorCode::config,
            "C3 must equal 3*C1 (three color planes at spatial retention C1)");
    require(widths[0] <= kPatch * kPatch, ErrorCode::config,
            "C1 exceeds the 8x8 patch coefficient count");
    require(widths[5] % widths[2] == 0, ErrorCode::config, "C6 must be a multiple of C3");
    require(st_keep() <= kStBlock * kStBlock, ErrorCode::config,
            "C6/C3 exceeds the 4x4 block coefficient count");
    require(out_channels <= widths[5], ErrorCode::config, "C must not exceed C6");
    require(common_range > 0 && individual_range > 0 && st_range > 0, ErrorCode::config,
            "quantizer ranges must be positive");
}

// ---- orthonormal DCT helpers ----

namespace {

// Orthonormal DCT-II basis: B[k][i] = a_k cos(pi (2i+1) k / (2N)).
std::vector<double> dct_basis(int n) {
    static const double pi = std::acos(-1.0);
    std::vector<double> b(static_cast<std::size_t>(n) * n);
    const double a0 = std::sqrt(1.0 / n), ak = std::sqrt(2.0 / n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            b[static_cast<std::size_t>(k) * n + i] =
                (k == 0 ? a0 : ak) * std::cos(pi * (2 * i + 1) * k / (2.0 * n));
    return b;
}

// Forward (or inverse, via the transposed basis) 1D transform of each column
// of an n x m buffer laid out row-major.
void transform_axis(std::vector<double>& buf, const std::vector<double>& basis, int n, int m,
                    bool inverse) {
    std::vector<double> tmp(static_cast<std::size_t>(n));
    for (int col = 0; col < m; ++col) {
        for (int k = 0; k < n; ++k) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                const double w = inverse ? basis[static_cast<std::size_t>(i) * n + k]
                                         : basis[static_cast<std::size_t>(k) * n + i];
                acc += w * buf[static_cast<std::size_t>(i) * m + col];
            }
            tmp[static_cast<std::size_t>(k)] = acc;
        }
        for (int k = 0; k < n; ++k) buf[static_cast<std::size_t>(k) * m + col] = tmp[k];
    }
}

// Diagonal zigzag scan of an n x n grid, (row, col) pairs.
std::vector<std::pair<int, int>> zigzag(int n) {
    std::vector<std::pair<int, int>> order;
    order.reserve(static_cast<std::size_t>(n) * n);
    for (int d = 0; d <= 2 * (n - 1); ++d) {
        if (d % 2 == 0) {
            for (int r = std::min(d, n - 1); r >= std::max(0, d - n + 1); --r)
                order.emplace_back(r, d - r);
        } else {
            for (int r = std::max(0, d - n + 1); r <= std::min(d, n - 1); ++r)
                order.emplace_back(r, d - r);
        }
    }
    return order;
}

constexpr double kPixelCenter = 0.5; // [0,1] pixels are centered before transforms

} // namespace

Tensor spatial_encode(const Tensor& frame, const ModelConfig& cfg) {
    cfg.validate();
    const auto& s = frame.shape();
    require(s.t == 1 && s.c == 3, ErrorCode::invalid_argument,
            "spatial_encode expects a (1,H,W,3) frame");
    constexpr int P = ModelConfig::kPatch;
    require(s.h % P == 0 && s.w % P == 0, ErrorCode::invalid_argument,
            "frame dims must be divisible by the 8-pixel patch");
    const std::size_t gh = s.h / P, gw = s.w / P;
    const int keep = cfg.spatial_keep();
    static const auto zz8 = zigzag(P);
    static const auto b8 = dct_basis(P);

    Tensor out(Shape4{1, gh, gw, static_cast<std::size_t>(3 * keep)});
    std::vector<double> block(P * P);
    for (std::size_t by = 0; by < gh; ++by) {
        for (std::size_t bx = 0; bx < gw; ++bx) {
            for (std::size_t color = 0; color < 3; ++color) {
                for (int y = 0; y < P; ++y)
                    for (int x = 0; x < P; ++x)
                        block[static_cast<std::size_t>(y) * P + x] =
                            frame.at(0, by * P + y, bx * P + x, color) - kPixelCenter;
                transform_axis(block, b8, P, P, false);
                // columns: treat as P x P, transform the other axis
                std::vector<double> tr(P * P);
                for (int y = 0; y < P; ++y)
                    for (int x = 0; x < P; ++x) tr[static_cast<std::size_t>(x) * P + y] = block[static_cast<std::size_t>(y) * P + x];
                transform_axis(tr, b8, P, P, false);
                for (int k = 0; k < keep; ++k) {
                    const auto [fy, fx] = zz8[static_cast<std::size_t>(k)];
                    out.at(0, by, bx, static_cast<std::size_t>(k) * 3 + color) =
                        tr[static_cast<std::size_t>(fx) * P + fy];
                }
            }
        }
    }
    return out;
}

Tensor spatial_decode(const Tensor& features, const ModelConfig& cfg) {
    cfg.validate();
    const auto& s = features.shape();
    const int keep = cfg.spatial_keep();
    require(s.t == 1 && s.c == static_cast<std::size_t>(3 * keep), ErrorCode::invalid_argument,
            "spatial_decode: feature channel count mismatch");
    constexpr int P = ModelConfig::kPatch;
    static const auto zz8 = zigzag(P);
    static const auto b8 = dct_basis(P);

    Tensor frame(Shape4{1, s.h * P, s.w * P, 3});
    std::vector<double> block(P * P);
    for (std::size_t by = 0; by < s.h; ++by) {
        for (std::size_t bx = 0; bx < s.w; ++bx) {
            for (std::size_t color = 0; color < 3; ++color) {
                std::fill(block.begin(), block.end(), 0.0);
                for (int k = 0; k < keep; ++k) {
                    const auto [fy, fx] = zz8[static_cast<std::size_t>(k)];
                    block[static_cast<std::size_t>(fy) * P + fx] =
                        features.at(0, by, bx, static_cast<std::size_t>(k) * 3 + color);
                }
                transform_axis(block, b8, P, P, true);
                std::vector<double> tr(P * P);
                for (int y = 0; y < P; ++y)
                    for (int x = 0; x < P; ++x) tr[static_cast<std::size_t>(x) * P + y] = block[static_cast<std::size_t>(y) * P + x];
                transform_axis(tr, b8, P, P, true);
                // tr is laid out [x][y] after the two passes
                for (int y = 0; y < P; ++y)
                    for (int x = 0; x < P; ++x)
                        frame.at(0, by * P + y, bx * P + x, color) =
                            tr[static_cast<std::size_t>(x) * P + y] + kPixelCenter;
            }
        }
    }
    return frame;
}

Tensor spatiotemporal_encode(const Tensor& x, const ModelConfig& cfg) {
    cfg.validate();
    const auto& s = x.shape();
    const std::size_t n = static_cast<std::size_t>(cfg.gop_size);
    const std::size_t c3 = static_cast<std::size_t>(cfg.widths[2]);
    require(s.t == n, ErrorCode::invalid_argument, "spatiotemporal_encode: t must equal GOP size");
    require(s.c == c3, ErrorCode::invalid_argument,
            "spatiotemporal_encode: channel count must equal C3");
    constexpr int B = ModelConfig::kStBlock;
    require(s.h % B == 0 && s.w % B == 0, ErrorCode::invalid_argument,
            "spatiotemporal_encode: spatial dims must be divisible by 4");
    const std::size_t gh = s.h / B, gw = s.w / B;
    const int keep = cfg.st_keep();
    const std::size_t c6 = c3 * static_cast<std::size_t>(keep);
    const std::size_t c_out = static_cast<std::size_t>(cfg.out_channels);
    static const auto zz4 = zigzag(B);
    const auto bt = dct_basis(static_cast<int>(n));
    static const auto b4 = dct_basis(B);

    // Full C6-wide coefficient tensor first, then the channel projection.
    Tensor coeffs(Shape4{n, gh, gw, c6});
    std::vector<double> block(n * B * B);
    for (std::size_t by = 0; by < gh; ++by) {
        for (std::size_t bx = 0; bx < gw; ++bx) {
            for (std::size_t ch = 0; ch < c3; ++ch) {
                for (std::size_t t = 0; t < n; ++t)
                    for (int y = 0; y < B; ++y)
                        for (int x2 = 0; x2 < B; ++x2)
                            block[(t * B + y) * B + x2] =
                                x.at(t, by * B + y, bx * B + x2, ch);
                // separable 3D DCT: t axis, then y, then x
                transform_axis(block, bt, static_cast<int>(n), B * B, false);
                for (std::size_t t = 0; t < n; ++t) {
                    std::vector<double> plane(B * B);
                    for (int y = 0; y < B; ++y)
                        for (int x2 = 0; x2 < B; ++x2) plane[static_cast<std::size_t>(y) * B + x2] = block[(t * B + y) * B + x2];
                    transform_axis(plane, b4, B, B, false);
                    std::vector<double> tr(B * B);
                    for (int y = 0; y < B; ++y)
                        for (int x2 = 0; x2 < B; ++x2) tr[static_cast<std::size_t>(x2) * B + y] = plane[static_cast<std::size_t>(y) * B + x2];
                    transform_axis(tr, b4, B, B, false);
                    for (int k = 0; k < keep; ++k) {
                        const auto [fy, fx] = zz4[static_cast<std::size_t>(k)];
                        coeffs.at(t, by, bx, static_cast<std::size_t>(k) * c3 + ch) =
                            tr[static_cast<std::size_t>(fx) * B + fy];
                    }
                }
            }
        }
    }
    if (c_out == c6) return coeffs;
    Tensor out(Shape4{n, gh, gw, c_out});
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t hh = 0; hh < gh; ++hh)
            for (std::size_t ww = 0; ww < gw; ++ww)
                for (std::size_t c = 0; c < c_out; ++c) out.at(t, hh, ww, c) = coeffs.at(t, hh, ww, c);
    return out;
}

Tensor spatiotemporal_decode(const Tensor& st, const ModelConfig& cfg) {
    cfg.validate();
    const auto& s = st.shape();
    const std::size_t n = static_cast<std::size_t>(cfg.gop_size);
    const std::size_t c3 = static_cast<std::size_t>(cfg.widths[2]);
    const int keep = cfg.st_keep();
    const std::size_t c6 = c3 * static_cast<std::size_t>(keep);
    require(s.t == n && s.c == static_cast<std::size_t>(cfg.out_channels),
            ErrorCode::invalid_argument, "spatiotemporal_decode: shape mismatch");
    constexpr int B = ModelConfig::kStBlock;
    static const auto zz4 = zigzag(B);
    const auto bt = dct_basis(static_cast<int>(n));
    static const auto b4 = dct_basis(B);

    Tensor out(Shape4{n, s.h * B, s.w * B, c3});
    std::vector<double> block(n * B * B);
    for (std::size_t by = 0; by < s.h; ++by) {
        for (std::size_t bx = 0; bx < s.w; ++bx) {
            for (std::size_t ch = 0; ch < c3; ++ch) {
                std::fill(block.begin(), block.end(), 0.0);
                for (std::size_t t = 0; t < n; ++t) {
                    std::vector<double> tr(B * B, 0.0);
                    for (int k = 0; k < keep; ++k) {
                        const std::size_t c = static_cast<std::size_t>(k) * c3 + ch;
                        if (c >= s.c) continue; // discarded by the channel projection
                        const auto [fy, fx] = zz4[static_cast<std::size_t>(k)];
                        tr[static_cast<std::size_t>(fx) * B + fy] = st.at(t, by, bx, c);
                    }
                    transform_axis(tr, b4, B, B, true);
                    std::vector<double> plane(B * B);
                    for (int x2 = 0; x2 < B; ++x2)
                        for (int y = 0; y < B; ++y) plane[static_cast<std::size_t>(y) * B + x2] = tr[static_cast<std::size_t>(x2) * B + y];
                    transform_axis(plane, b4, B, B, true);
                    for (int y = 0; y < B; ++y)
                        for (int x2 = 0; x2 < B; ++x2) block[(t * B + y) * B + x2] = plane[static_cast<std::size_t>(y) * B + x2];
                }
                transform_axis(block, bt, static_cast<int>(n), B * B, true);
                for (std::size_t t = 0; t < n; ++t)
                    for (int y = 0; y < B; ++y)
                        for (int x2 = 0; x2 < B; ++x2)
                            out.at(t, by * B + y, bx * B + x2, ch) = block[(t * B + y) * B + x2];
            }
        }
    }
    (void)c6;
    return out;
}

Tensor extract_common(const Tensor& x_st) {
    const auto& s = x_st.shape();
    require(s.t >= 1, ErrorCode::invalid_argument, "extract_common: empty tensor");
    Tensor x_c(Shape4{1, s.h, s.w, s.c});
    const double inv = 1.0 / static_cast<double>(s.t);
    for (std::size_t t = 0; t < s.t; ++t)
        for (std::size_t h = 0; h < s.h; ++h)
            for (std::size_t w = 0; w < s.w; ++w)
                for (std::size_t c = 0; c < s.c; ++c) x_c.at(0, h, w, c) += x_st.at(t, h, w, c) * inv;
    return x_c;
}

Tensor extract_individual(const Tensor& x_st, const Tensor& x_c, int factor) {
    const auto& s = x_st.shape();
    require(x_c.shape() == Shape4{1, s.h, s.w, s.c}, ErrorCode::invalid_argument,
            "extract_individual: common shape mismatch");
    require(factor >= 1, ErrorCode::invalid_argument, "extract_individual: bad factor");
    const std::size_t f = static_cast<std::size_t>(factor);
    require(s.h % f == 0 && s.w % f == 0, ErrorCode::invalid_argument,
            "extract_individual: factor must divide spatial dims");
    Tensor x_i(Shape4{s.t, s.h / f, s.w / f, s.c});
    const double inv = 1.0 / static_cast<double>(f * f);
    for (std::size_t t = 0; t < s.t; ++t)
        for (std::size_t h = 0; h < s.h; ++h)
            for (std::size_t w = 0; w < s.w; ++w)
                for (std::size_t c = 0; c < s.c; ++c)
                    x_i.at(t, h / f, w / f, c) +=
                        (x_st.at(t, h, w, c) - x_c.at(0, h, w, c)) * inv;
    return x_i;
}

Tensor upsample_individual(const Tensor& x_i, int factor) {
    require(factor >= 1, ErrorCode::invalid_argument, "upsample_individual: bad factor");
    const auto& s = x_i.shape();
    const std::size_t f = static_cast<std::size_t>(factor);
    Tensor out(Shape4{s.t, s.h * f, s.w * f, s.c});
    for (std::size_t t = 0; t < s.t; ++t)
        for (std::size_t h = 0; h < s.h * f; ++h)
            for (std::size_t w = 0; w < s.w * f; ++w)
                for (std::size_t c = 0; c < s.c; ++c) out.at(t, h, w, c) = x_i.at(t, h / f, w / f, c);
    return out;
}

std::uint8_t quantize_value(double x, double range) {
    const double xc = std::clamp(x, -range, range);
    const double u = (xc + range) * 4.0 / range;
    double k = std::floor(u);
    if (u == k && k > 0.0 && k < 8.0 && x < 0.0) k -= 1.0; // boundary: round away from zero
    return static_cast<std::uint8_t>(std::clamp(k, 0.0, 7.0));
}

double dequantize_value(std::uint8_t code, double range) {
    return -range + (2.0 * code + 1.0) * range / 8.0;
}

std::vector<std::uint8_t> quantize(const Tensor& t, double range, std::uint64_t* clipped) {
    require(range > 0, ErrorCode::invalid_argument, "quantize: range must be positive");
    std::vector<std::uint8_t> codes(t.size());
    std::uint64_t clips = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double x = t[i];
        require(std::isfinite(x), ErrorCode::invalid_argument, "quantize: non-finite value");
        if (x > range || x < -range) ++clips;
        codes[i] = quantize_value(x, range);
    }
    if (clipped) *clipped += clips;
    return codes;
}

Tensor dequantize(const std::vector<std::uint8_t>& codes, Shape4 shape, double range) {
    require(codes.size() == shape.size(), ErrorCode::invalid_argument,
            "dequantize: code count does not match shape");
    Tensor t(shape);
    for (std::size_t i = 0; i < codes.size(); ++i) {
        require(codes[i] <= 7, ErrorCode::invalid_argument, "dequantize: code out of range");
        t[i] = dequantize_value(codes[i], range);
    }
    return t;
}

Tensor soft_quantize(const Tensor& t, double step, std::uint64_t seed) {
    require(step > 0, ErrorCode::invalid_argument, "soft_quantize: step must be positive");
    Tensor out = t;
    for (std::size_t i = 0; i < t.size(); ++i)
        out[i] += step * (counter_uniform(seed, i) - 0.5);
    return out;
}

Tensor moe_route(const Tensor& input, const std::vector<Expert>& experts,
                 const std::vector<double>& gate_logits, int k_r) {
    require(!experts.empty(), ErrorCode::invalid_argument, "moe_route: no experts");
    require(gate_logits.size() == experts.size(), ErrorCode::invalid_argument,
            "moe_route: one gate logit per expert required");
    require(k_r >= 1 && static_cast<std::size_t>(k_r) <= experts.size(),
            ErrorCode::invalid_argument, "moe_route: k_r out of range");
    for (double g : gate_logits)
        require(std::isfinite(g), ErrorCode::invalid_argument, "moe_route: non-finite logit");

    const double zmax = *std::max_element(gate_logits.begin(), gate_logits.end());
    std::vector<double> w(gate_logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) sum += w[i] = std::exp(gate_logits[i] - zmax);
    for (auto& v : w) v /= sum;

    std::vector<std::size_t> order(w.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return w[a] != w[b] ? w[a] > w[b] : a < b;
    });
    order.resize(static_cast<std::size_t>(k_r));

    double kept = 0.0;
    for (auto i : order) kept += w[i];
    Tensor out;
    bool first = true;
    for (auto i : order) {
        Tensor y = experts[i](input);
        if (first) {
            out = Tensor(y.shape());
            first = false;
        }
        require_same_shape(out.shape(), y.shape(), "moe_route expert outputs");
        const double weight = w[i] / kept;
        for (std::size_t j = 0; j < y.size(); ++j) out[j] += weight * y[j];
    }
    return out;
}

Tensor recover(const Tensor& received, const LossMask& mask, bool window_3d) {
    require_same_shape(received.shape(), mask.shape, "recover");
    const auto& s = received.shape();
    Tensor cur = received;
    std::vector<std::uint8_t> avail(received.size());
    for (std::size_t i = 0; i < received.size(); ++i) {
        avail[i] = mask.values[i] ? 0 : 1;
        if (mask.values[i]) cur[i] = 0.0; // erased positions carry no information
    }
    const std::ptrdiff_t t_span = window_3d ? 1 : 0;

    bool progressed = true;
    while (progressed) {
        progressed = false;
        Tensor next = cur;
        auto next_avail = avail;
        for (std::size_t t = 0; t < s.t; ++t)
            for (std::size_t h = 0; h < s.h; ++h)
                for (std::size_t w = 0; w < s.w; ++w)
                    for (std::size_t c = 0; c < s.c; ++c) {
                        const std::size_t idx = received.index(t, h, w, c);
                        if (avail[idx] || !mask.values[idx]) continue;
                        double acc = 0.0;
                        int count = 0;
                        for (std::ptrdiff_t dt = -t_span; dt <= t_span; ++dt)
                            for (std::ptrdiff_t dh = -1; dh <= 1; ++dh)
                                for (std::ptrdiff_t dw = -1; dw <= 1; ++dw) {
                                    if (dt == 0 && dh == 0 && dw == 0) continue;
                                    const std::ptrdiff_t tt = static_cast<std::ptrdiff_t>(t) + dt;
                                    const std::ptrdiff_t hh = static_cast<std::ptrdiff_t>(h) + dh;
                                    const std::ptrdiff_t ww = static_cast<std::ptrdiff_t>(w) + dw;
                                    if (tt < 0 || hh < 0 || ww < 0 ||
                                        tt >= static_cast<std::ptrdiff_t>(s.t) ||
                                        hh >= static_cast<std::ptrdiff_t>(s.h) ||
                                        ww >= static_cast<std::ptrdiff_t>(s.w))
                                        continue;
                                    const std::size_t nidx = received.index(
                                        static_cast<std::size_t>(tt), static_cast<std::size_t>(hh),
                                        static_cast<std::size_t>(ww), c);
                                    if (!avail[nidx]) continue;
                                    acc += cur[nidx];
                                    ++count;
                                }
                        if (count > 0) {
                            next[idx] = acc / count;
                            next_avail[idx] = 1;
                            progressed = true;
                        }
                    }
        cur = std::move(next);
        avail = std::move(next_avail);
    }
    return cur;
}

// ---- whole-GOP pipeline ----

QuantizedSemantics semantic_layout(const ModelConfig& cfg, std::size_t frame_h,
                                   std::size_t frame_w, const CodecOptions& opts) {
    cfg.validate();
    constexpr std::size_t down = static_cast<std::size_t>(ModelConfig::kPatch) *
                                 ModelConfig::kStBlock;
    require(frame_h % down == 0 && frame_w % down == 0, ErrorCode::invalid_argument,
            "frame dims must be divisible by 32");
    const std::size_t n = static_cast<std::size_t>(cfg.gop_size);
    const std::size_t h2 = frame_h / down, w2 = frame_w / down;
    const std::size_t c = static_cast<std::size_t>(cfg.out_channels);
    QuantizedSemantics q;
    if (opts.feature_split) {
        const std::size_t f = static_cast<std::size_t>(cfg.individual_factor);
        require(h2 % f == 0 && w2 % f == 0, ErrorCode::invalid_argument,
                "individual_factor must divide the feature grid");
        q.common_shape = Shape4{1, h2, w2, c};
        q.individual_shape = Shape4{n, h2 / f, w2 / f, c};
        q.common_range = cfg.common_range;
        q.individual_range = cfg.individual_range;
    } else {
        q.common_shape = Shape4{};
        q.individual_shape = Shape4{n, h2, w2, c};
        q.individual_range = cfg.st_range;
    }
    return q;
}

QuantizedSemantics encode_gop(const Gop& gop, const ModelConfig& cfg, const CodecOptions& opts) {
    cfg.validate();
    const auto& s = gop.shape();
    require(s.t == static_cast<std::size_t>(cfg.gop_size), ErrorCode::invalid_argument,
            "encode_gop: frame count must equal the configured GOP size");
    require(s.c == 3, ErrorCode::invalid_argument, "encode_gop: expected RGB frames");

    QuantizedSemantics q = semantic_layout(cfg, s.h, s.w, opts);

    // Per-frame spatial stage, stacked along t.
    Tensor stacked;
    for (std::size_t t = 0; t < s.t; ++t) {
        Tensor frame(Shape4{1, s.h, s.w, 3});
        for (std::size_t h = 0; h < s.h; ++h)
            for (std::size_t w = 0; w < s.w; ++w)
                for (std::size_t c = 0; c < 3; ++c) frame.at(0, h, w, c) = gop.at(t, h, w, c);
        Tensor feat = spatial_encode(frame, cfg);
        if (t == 0)
            stacked = Tensor(Shape4{s.t, feat.shape().h, feat.shape().w, feat.shape().c});
        for (std::size_t h = 0; h < feat.shape().h; ++h)
            for (std::size_t w = 0; w < feat.shape().w; ++w)
                for (std::size_t c = 0; c < feat.shape().c; ++c)
                    stacked.at(t, h, w, c) = feat.at(0, h, w, c);
    }

    Tensor x_st = spatiotemporal_encode(stacked, cfg);

    if (opts.feature_split) {
        Tensor x_c = extract_common(x_st);
        Tensor x_i = extract_individual(x_st, x_c, cfg.individual_factor);
        q.codes = quantize(x_c, q.common_range, &q.clipped_count);
        auto indiv = quantize(x_i, q.individual_range, &q.clipped_count);
        q.codes.insert(q.codes.end(), indiv.begin(), indiv.end());
    } else {
        q.codes = quantize(x_st, q.individual_range, &q.clipped_count);
    }
    return q;
}

Gop decode_gop(const QuantizedSemantics& layout, const std::vector<std::uint8_t>& codes,
               const std::vector<std::uint8_t>& element_mask, const ModelConfig& cfg,
               const CodecOptions& opts) {
    cfg.validate();
    const std::size_t n_common = layout.common_count();
    const std::size_t n_total = n_common + layout.individual_shape.size();
    require(codes.size() == n_total, ErrorCode::invalid_argument,
            "decode_gop: code count does not match the configured layout");
    require(element_mask.size() == n_total, ErrorCode::invalid_argument,
            "decode_gop: mask length does not match the code count");

    auto decode_stream = [&](std::size_t offset, Shape4 shape, double range,
                             bool window_3d) -> Tensor {
        std::vector<std::uint8_t> stream_codes(codes.begin() + static_cast<std::ptrdiff_t>(offset),
                                               codes.begin() +
                                                   static_cast<std::ptrdiff_t>(offset + shape.size()));
        Tensor t = dequantize(stream_codes, shape, range);
        LossMask mask(shape);
        for (std::size_t i = 0; i < shape.size(); ++i) {
            mask.values[i] = element_mask[offset + i];
            if (mask.values[i]) t[i] = 0.0; // erased codes decode to the centered zero
        }
        if (opts.recovery) return recover(t, mask, window_3d);
        return t;
    };

    Tensor x_st;
    if (n_common > 0) {
        Tensor y_c = decode_stream(0, layout.common_shape, layout.common_range, false);
        Tensor y_i = decode_stream(n_common, layout.individual_shape, layout.individual_range,
                                   true);
        Tensor y_iu = upsample_individual(y_i, cfg.individual_factor);
        x_st = Tensor(Shape4{y_iu.shape().t, y_iu.shape().h, y_iu.shape().w, y_iu.shape().c});
        for (std::size_t t = 0; t < x_st.shape().t; ++t)
            for (std::size_t h = 0; h < x_st.shape().h; ++h)
                for (std::size_t w = 0; w < x_st.shape().w; ++w)
                    for (std::size_t c = 0; c < x_st.shape().c; ++c)
                        x_st.at(t, h, w, c) = y_iu.at(t, h, w, c) + y_c.at(0, h, w, c);
    } else {
        x_st = decode_stream(0, layout.individual_shape, layout.individual_range, true);
    }

    Tensor features = spatiotemporal_decode(x_st, cfg);
    const auto& fs = features.shape();
    Gop gop(Shape4{fs.t, fs.h * ModelConfig::kPatch, fs.w * ModelConfig::kPatch, 3});
    for (std::size_t t = 0; t < fs.t; ++t) {
        Tensor feat(Shape4{1, fs.h, fs.w, fs.c});
        for (std::size_t h = 0; h < fs.h; ++h)
            for (std::size_t w = 0; w < fs.w; ++w)
                for (std::size_t c = 0; c < fs.c; ++c) feat.at(0, h, w, c) = features.at(t, h, w, c);
        Tensor frame = spatial_decode(feat, cfg);
        for (std::size_t h = 0; h < frame.shape().h; ++h)
            for (std::size_t w = 0; w < frame.shape().w; ++w)
                for (std::size_t c = 0; c < 3; ++c)
                    gop.at(t, h, w, c) = std::clamp(frame.at(0, h, w, c), 0.0, 1.0);
    }
    return gop;
}

} // namespace semvt
