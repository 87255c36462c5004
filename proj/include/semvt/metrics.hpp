#pragma once

#include <cstdint>
#include <vector>

#include "semvt/tensor.hpp"

namespace semvt {

struct MetricReport {
    std::vector<double> psnr_db;  // per frame
    std::vector<double> ms_ssim;  // per frame
    double psnr_mean = 0.0;       // GOP mean (infinite frames excluded from the mean)
    double ms_ssim_mean = 0.0;
    double mse = 0.0;             // whole-GOP mean squared error
    double cbr = 0.0;
    double loss1 = 0.0;
    double loss2 = 0.0;
};

// Mean of squared per-element differences across all channels.
double mse(const Tensor& x, const Tensor& y);

// 10*log10(1/MSE) for [0,1] data; +infinity when the inputs are identical
// (capped at 100 dB when written to CSV).
double psnr(const Tensor& x, const Tensor& y);

// Multi-scale structural similarity, standard constants: 11-tap Gaussian
// window (sigma 1.5), k1=0.01/k2=0.03 at peak 1, exponents
// (0.0448, 0.2856, 0.3001, 0.2363, 0.1333), luminance applied at the
// coarsest scale only, dyadic 2x2 mean downsampling between scales, mean
// over channels. Inputs smaller than 176 pixels use fewer scales: the
// largest S with min(H,W)/2^(S-1) >= 11, keeping the first S exponents.
// Operates on single frames shaped (1, H, W, C).
double ms_ssim(const Tensor& x, const Tensor& y);

// Channel bandwidth ratio k/m: transmitted feature dimension over source
// dimension.
double cbr(std::uint64_t k, std::uint64_t m);

// Stage-I objective: alpha * MSE(X_g, Y_g) + beta * aux. The gating
// auxiliary term is defined externally and plugs in via `aux_term`
// (default 0).
double loss1(const Tensor& x_g, const Tensor& y_g, double alpha, double beta,
             double aux_term = 0.0);

// Stage-II objective: loss1 + gamma * (MSE(X_i, Y_ir) + MSE(X_c, Y_cr)).
double loss2(double loss1_value, const Tensor& x_i, const Tensor& y_ir, const Tensor& x_c,
             const Tensor& y_cr, double gamma);

} // namespace semvt
