#include "semvt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semvt/error.hpp"

namespace semvt {

double mse(const Tensor& x, const Tensor& y) {
    require_same_shape(x.shape(), y.shape(), "mse");
    require(x.size() > 0, ErrorCode::invalid_argument, "mse: empty tensors");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        acc += d * d;
    }
    return acc / static_cast<double>(x.size());
}

double psnr(const Tensor& x, const Tensor& y) {
    const double e = mse(x, y);
    if (e == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / e);
}

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;
constexpr double kAlphas[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

std::vector<double> gaussian_window() {
    std::vector<double> w(kWindow);
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - (kWindow - 1) / 2.0;
        w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kSigma * kSigma));
        sum += w[static_cast<std::size_t>(i)];
    }
    for (auto& v : w) v /= sum;
    return w;
}

struct Plane {
    std::size_t h = 0, w = 0;
    std::vector<double> v;
    double& at(std::size_t y, std::size_t x) { return v[y * w + x]; }
    double at(std::size_t y, std::size_t x) const { return v[y * w + x]; }
};

// Separable Gaussian filter, valid region only (no padding).
Plane filter_valid(const Plane& p, const std::vector<double>& win) {
    const std::size_t k = win.size();
    Plane rows{p.h, p.w - k + 1, {}};
    rows.v.assign(rows.h * rows.w, 0.0);
    for (std::size_t y = 0; y < rows.h; ++y)
        for (std::size_t x = 0; x < rows.w; ++x) {
            double acc = 0.0;
            for (std::size_t i = 0; i < k; ++i) acc += win[i] * p.at(y, x + i);
            rows.at(y, x) = acc;
        }
    Plane out{p.h - k + 1, rows.w, {}};
    out.v.assign(out.h * out.w, 0.0);
    for (std::size_t y = 0; y < out.h; ++y)
        for (std::size_t x = 0; x < out.w; ++x) {
            double acc = 0.0;
            for (std::size_t i = 0; i < k; ++i) acc += win[i] * rows.at(y + i, x);
            out.at(y, x) = acc;
        }
    return out;
}

Plane downsample2(const Plane& p) {
    Plane out{p.h / 2, p.w / 2, {}};
    out.v.assign(out.h * out.w, 0.0);
    for (std::size_t y = 0; y < out.h; ++y)
        for (std::size_t x = 0; x < out.w; ++x)
            out.at(y, x) = 0.25 * (p.at(2 * y, 2 * x) + p.at(2 * y, 2 * x + 1) +
                                   p.at(2 * y + 1, 2 * x) + p.at(2 * y + 1, 2 * x + 1));
    return out;
}

// Mean luminance*cs and mean cs over the valid window positions.
void ssim_pass(const Plane& a, const Plane& b, double& mean_lcs, double& mean_cs) {
    static const auto win = gaussian_window();
    Plane mu_a = filter_valid(a, win);
    Plane mu_b = filter_valid(b, win);
    Plane a2 = a, b2 = b, ab = a;
    for (std::size_t i = 0; i < a.v.size(); ++i) {
        a2.v[i] = a.v[i] * a.v[i];
        b2.v[i] = b.v[i] * b.v[i];
        ab.v[i] = a.v[i] * b.v[i];
    }
    Plane e_a2 = filter_valid(a2, win);
    Plane e_b2 = filter_valid(b2, win);
    Plane e_ab = filter_valid(ab, win);

    double acc_lcs = 0.0, acc_cs = 0.0;
    for (std::size_t i = 0; i < mu_a.v.size(); ++i) {
        const double ma = mu_a.v[i], mb = mu_b.v[i];
        const double va = e_a2.v[i] - ma * ma;
        const double vb = e_b2.v[i] - mb * mb;
        const double cov = e_ab.v[i] - ma * mb;
        const double cs = (2.0 * cov + kC2) / (va + vb + kC2);
        const double lum = (2.0 * ma * mb + kC1) / (ma * ma + mb * mb + kC1);
        acc_lcs += lum * cs;
        acc_cs += cs;
    }
    mean_lcs = acc_lcs / static_cast<double>(mu_a.v.size());
    mean_cs = acc_cs / static_cast<double>(mu_a.v.size());
}

} // namespace

double ms_ssim(const Tensor& x, const Tensor& y) {
    require_same_shape(x.shape(), y.shape(), "ms_ssim");
    const auto& s = x.shape();
    require(s.t == 1, ErrorCode::invalid_argument, "ms_ssim operates on single frames");

    // Largest scale count (max 5) such that the coarsest scale still fits
    // the 11-tap window; 176 pixels buy the full 5 scales.
    int scales = 0;
    std::size_t dim = std::min(s.h, s.w);
    while (scales < 5 && dim >= kWindow) {
        ++scales;
        dim /= 2;
    }
    require(scales >= 1, ErrorCode::invalid_argument, "ms_ssim: image smaller than the window");

    double result_sum = 0.0;
    for (std::size_t c = 0; c < s.c; ++c) {
        Plane a{s.h, s.w, {}}, b{s.h, s.w, {}};
        a.v.resize(s.h * s.w);
        b.v.resize(s.h * s.w);
        for (std::size_t yy = 0; yy < s.h; ++yy)
            for (std::size_t xx = 0; xx < s.w; ++xx) {
                a.at(yy, xx) = x.at(0, yy, xx, c);
                b.at(yy, xx) = y.at(0, yy, xx, c);
            }
        double value = 1.0;
        for (int level = 0; level < scales; ++level) {
            double mean_lcs = 0.0, mean_cs = 0.0;
            ssim_pass(a, b, mean_lcs, mean_cs);
            if (level + 1 < scales) {
                value *= std::pow(std::max(mean_cs, 0.0), kAlphas[level]);
                a = downsample2(a);
                b = downsample2(b);
            } else {
                value *= std::pow(std::max(mean_lcs, 0.0), kAlphas[level]);
            }
        }
        result_sum += value;
    }
    return result_sum / static_cast<double>(s.c);
}

double cbr(std::uint64_t k, std::uint64_t m) {
    require(m >= 1, ErrorCode::invalid_argument, "cbr: source dimension must be >= 1");
    return static_cast<double>(k) / static_cast<double>(m);
}

double loss1(const Tensor& x_g, const Tensor& y_g, double alpha, double beta, double aux_term) {
    require(std::isfinite(alpha) && std::isfinite(beta), ErrorCode::invalid_argument,
            "loss1: weights must be finite");
    return alpha * mse(x_g, y_g) + beta * aux_term;
}

double loss2(double loss1_value, const Tensor& x_i, const Tensor& y_ir, const Tensor& x_c,
             const Tensor& y_cr, double gamma) {
    require(std::isfinite(gamma), ErrorCode::invalid_argument, "loss2: gamma must be finite");
    return loss1_value + gamma * (mse(x_i, y_ir) + mse(x_c, y_cr));
}

} // namespace semvt
