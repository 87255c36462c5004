#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "semvt/tensor.hpp"

namespace semvt {

// Stage depths/widths follow the small/mid/large presets; the transform
// analog uses the structurally meaningful ones (C1 and C3 fix the spatial
// retention, C6 the pre-projection width, C the transmitted width) and
// carries the rest as preset metadata.
struct ModelConfig {
    std::array<int, 6> depths{1, 1, 1, 1, 1, 1};       // N1..N6
    std::array<int, 6> widths{24, 48, 72, 96, 120, 144}; // C1..C6
    int out_channels = 96;    // C: transmitted channel count
    int gop_size = 4;         // n: frames per GOP
    int individual_factor = 2; // spatial pooling factor of the residual stream

    // Quantizer ranges are fixed and known to both ends; nothing about the
    // quantizer travels on the wire.
    double common_range = 16.0;
    double individual_range = 4.0;
    double st_range = 16.0; // used when the common/individual split is disabled

    static ModelConfig preset(std::string_view name); // "small" | "mid" | "large"
    void validate() const;

    static constexpr int kPatch = 8;   // spatial transform patch (three x2 stages)
    static constexpr int kStBlock = 4; // spatio-temporal spatial block (two x2 stages)

    int spatial_keep() const { return widths[0]; }        // coefficients kept per color
    int st_keep() const { return widths[5] / widths[2]; } // spatial freqs kept per channel
};

// One GOP: shape (n, H, W, 3), values in [0,1].
using Gop = Tensor;

struct QuantizedSemantics {
    Shape4 common_shape{};     // size 0 when the feature split is disabled
    Shape4 individual_shape{};
    double common_range = 1.0;
    double individual_range = 1.0;
    std::vector<std::uint8_t> codes; // common stream first, then individual; row-major
    std::uint64_t clipped_count = 0;

    std::size_t common_count() const { return common_shape.size(); }
    std::size_t total_count() const { return codes.size(); }
};

// -- Orthonormal transform stages ------------------------------------------

// Per-channel 2D DCT-II on non-overlapping 8x8 patches with low-frequency
// retention: frame (1,H,W,3) -> features (1,H/8,W/8,3*keep). Output channel
// layout is frequency-major: c = zigzag_rank*3 + color. Decode is the adjoint
// with zero-filled discarded coefficients.
Tensor spatial_encode(const Tensor& frame, const ModelConfig& cfg);
Tensor spatial_decode(const Tensor& features, const ModelConfig& cfg);

// 3D DCT on (n,4,4) blocks spanning the full temporal extent, then channel
// projection to out_channels. Output (n, h/4, w/4, C): the t axis indexes
// temporal frequency, channel layout c = spatial_rank*C3 + input_channel
// truncated at out_channels. Inverse is the adjoint.
Tensor spatiotemporal_encode(const Tensor& per_frame_features, const ModelConfig& cfg);
Tensor spatiotemporal_decode(const Tensor& st, const ModelConfig& cfg);

// -- Common / individual decomposition -------------------------------------

// X_c = temporal mean of X_st (the linear analog of downsampling the
// temporal dimension to 1).
Tensor extract_common(const Tensor& x_st);

// Residual after removing the common part, spatially average-pooled by
// `factor`: X_i = pool(X_st - broadcast(X_c)).
Tensor extract_individual(const Tensor& x_st, const Tensor& x_c, int factor);

// Nearest-neighbor replication back to the pre-pooling spatial size.
Tensor upsample_individual(const Tensor& x_i, int factor);

// -- Quantization ------------------------------------------------------------

// Uniform 8-level quantizer over [-range, range]: level k covers
// [-r + k r/4, -r + (k+1) r/4) with center -r + (2k+1) r/8. Values on an
// interior cell boundary round away from zero. Clipping is silent but
// counted via *clipped.
std::uint8_t quantize_value(double x, double range);
double dequantize_value(std::uint8_t code, double range);
std::vector<std::uint8_t> quantize(const Tensor& t, double range, std::uint64_t* clipped);
Tensor dequantize(const std::vector<std::uint8_t>& codes, Shape4 shape, double range);

// Training-style dithered quantizer: X + step * U(-1/2, 1/2) i.i.d.
Tensor soft_quantize(const Tensor& t, double step, std::uint64_t seed);

// -- Mixture-of-experts routing primitive -----------------------------------

using Expert = std::function<Tensor(const Tensor&)>;

// Softmax the gate logits, keep the top k_r experts (ties broken by lower
// index), renormalize the kept weights to sum 1, and return the weighted sum
// of the selected experts' outputs.
Tensor moe_route(const Tensor& input, const std::vector<Expert>& experts,
                 const std::vector<double>& gate_logits, int k_r);

// -- Packet-loss recovery -----------------------------------------------------

// Masked-neighborhood-mean recovery preserving the residual form
// Y + mask .* R(Y): unmasked elements pass through untouched; masked ones are
// filled with the mean of available neighbors (unmasked, or recovered in an
// earlier sweep) in a centered window, per channel. window_3d selects a
// 3x3x3 (t,h,w) window instead of 3x3 (h,w). Masked cells with no available
// neighbor chain stay 0.
Tensor recover(const Tensor& received, const LossMask& mask, bool window_3d);

// -- Whole-GOP pipeline --------------------------------------------------------

struct CodecOptions {
    bool feature_split = true; // common/individual decomposition on the wire
    bool recovery = true;      // neighborhood recovery at the decoder
};

QuantizedSemantics encode_gop(const Gop& gop, const ModelConfig& cfg,
                              const CodecOptions& opts = {});

// Stream shapes/ranges the receiver derives from the shared config and frame
// dimensions (codes stay empty); must match what encode_gop produced.
QuantizedSemantics semantic_layout(const ModelConfig& cfg, std::size_t frame_h,
                                   std::size_t frame_w, const CodecOptions& opts = {});

// `codes` are the received (possibly zero-substituted) codes in the frozen
// scan order; `element_mask` marks lost elements in the same order. Masked
// elements are forced to 0 in the centered feature domain before recovery.
Gop decode_gop(const QuantizedSemantics& layout, const std::vector<std::uint8_t>& codes,
               const std::vector<std::uint8_t>& element_mask, const ModelConfig& cfg,
               const CodecOptions& opts = {});

} // namespace semvt
