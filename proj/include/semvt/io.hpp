#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semvt/codec.hpp"
#include "semvt/tensor.hpp"

namespace semvt {

// Binary PPM (P6), 8-bit RGB. Pixels are scaled to [0,1] on ingest and
// rounded back to 8 bits on write.
Tensor read_ppm(const std::string& path);                   // (1, H, W, 3)
void write_ppm(const Tensor& frame, const std::string& path);

// Loads `count` frames from a directory of .ppm files in lexicographic
// order; all frames must share one size.
std::vector<Tensor> read_ppm_dir(const std::string& dir, std::size_t count = 0);

// File serialization of a quantized stream: 16-byte header (magic "SVQ1",
// version, GOP size, pooling factor, split flag, feature-grid dims, channel
// count) followed by the packed 3-bit codes. File-only format; the simulated
// wire carries bare packed codes.
void write_quantized(const QuantizedSemantics& q, int gop_size, int individual_factor,
                     const std::string& path);
QuantizedSemantics read_quantized(const std::string& path, double common_range,
                                  double individual_range);

// Deterministic synthetic corpus: gop_count * gop_size frames of smoothly
// moving low-frequency content, written as frame_NNNN.ppm.
void write_synthetic_corpus(const std::string& dir, std::size_t gop_count,
                            std::size_t gop_size, std::size_t height, std::size_t width,
                            std::uint64_t seed);
Gop synthetic_gop(std::size_t gop_index, std::size_t gop_size, std::size_t height,
                  std::size_t width, std::uint64_t seed);

// Formatting helpers shared by every CSV writer so outputs stay byte-stable.
std::string format_double(double v);       // shortest round-trip ("%.17g" trimmed)
std::string format_metric(double v);       // fixed "%.6f", +inf capped at 100 dB
void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

} // namespace semvt
