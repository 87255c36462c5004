#include "semvt/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "semvt/error.hpp"
#include "semvt/rng.hpp"
#include "semvt/transport.hpp"

namespace fs = std::filesystem;

namespace semvt {

Tensor read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::io, "cannot open " + path);

    auto next_token = [&in, &path]() -> std::string {
        std::string tok;
        int chr = 0;
        while ((chr = in.get()) != EOF) {
            if (chr == '#') { // comment to end of line
                while ((chr = in.get()) != EOF && chr != '\n') {}
                continue;
            }
            if (std::isspace(chr)) {
                if (!tok.empty()) break;
                continue;
            }
            tok.push_back(static_cast<char>(chr));
        }
        require(!tok.empty(), ErrorCode::io, path + ": truncated PPM header");
        return tok;
    };

    require(next_token() == "P6", ErrorCode::io, path + ": not a binary PPM (P6)");
    const long w = std::stol(next_token());
    const long h = std::stol(next_token());
    const long maxval = std::stol(next_token());
    require(w > 0 && h > 0, ErrorCode::io, path + ": bad dimensions");
    require(maxval == 255, ErrorCode::io, path + ": only 8-bit PPM supported");

    std::vector<std::uint8_t> raw(static_cast<std::size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    require(in.gcount() == static_cast<std::streamsize>(raw.size()), ErrorCode::io,
            path + ": truncated pixel data");

    Tensor frame(Shape4{1, static_cast<std::size_t>(h), static_cast<std::size_t>(w), 3});
    for (std::size_t i = 0; i < raw.size(); ++i) frame[i] = raw[i] / 255.0;
    return frame;
}

void write_ppm(const Tensor& frame, const std::string& path) {
    const auto& s = frame.shape();
    require(s.t == 1 && s.c == 3, ErrorCode::invalid_argument, "write_ppm: expected (1,H,W,3)");
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::io, "cannot open " + path);
    out << "P6\n" << s.w << " " << s.h << "\n255\n";
    std::vector<std::uint8_t> raw(frame.size());
    for (std::size_t i = 0; i < frame.size(); ++i) {
        const double v = std::clamp(frame[i], 0.0, 1.0);
        raw[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    require(out.good(), ErrorCode::io, "write failed: " + path);
}

std::vector<Tensor> read_ppm_dir(const std::string& dir, std::size_t count) {
    require(fs::is_directory(dir), ErrorCode::config, "frame directory not found: " + dir);
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".ppm")
            names.push_back(e.path().string());
    }
    std::sort(names.begin(), names.end());
    require(!names.empty(), ErrorCode::config, "no .ppm frames in " + dir);
    if (count > 0) {
        require(names.size() >= count, ErrorCode::config, "not enough frames in " + dir);
        names.resize(count);
    }
    std::vector<Tensor> frames;
    frames.reserve(names.size());
    for (const auto& n : names) {
        frames.push_back(read_ppm(n));
        require(frames.back().shape() == frames.front().shape(), ErrorCode::config,
                "frame size mismatch: " + n);
    }
    return frames;
}

namespace {
constexpr char kMagic[4] = {'S', 'V', 'Q', '1'};
constexpr std::uint8_t kVersion = 1;

void put_u16(std::vector<std::uint8_t>& v, std::uint16_t x) {
    v.push_back(static_cast<std::uint8_t>(x & 0xFF));
    v.push_back(static_cast<std::uint8_t>(x >> 8));
}
std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
} // namespace

void write_quantized(const QuantizedSemantics& q, int gop_size, int individual_factor,
                     const std::string& path) {
    const bool split = q.common_shape.size() > 0;
    const Shape4& grid = split ? q.common_shape : q.individual_shape;
    std::vector<std::uint8_t> header;
    header.insert(header.end(), kMagic, kMagic + 4);
    header.push_back(kVersion);
    header.push_back(static_cast<std::uint8_t>(gop_size));
    header.push_back(static_cast<std::uint8_t>(individual_factor));
    header.push_back(split ? 1 : 0);
    put_u16(header, static_cast<std::uint16_t>(grid.h));
    put_u16(header, static_cast<std::uint16_t>(grid.w));
    put_u16(header, static_cast<std::uint16_t>(grid.c));
    put_u16(header, 0); // reserved
    require(header.size() == 16, ErrorCode::invalid_argument, "quantized header must be 16 bytes");

    auto packed = pack_elements(q.codes);
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::io, "cannot open " + path);
    out.write(reinterpret_cast<const char*>(header.data()), 16);
    out.write(reinterpret_cast<const char*>(packed.data()),
              static_cast<std::streamsize>(packed.size()));
    require(out.good(), ErrorCode::io, "write failed: " + path);
}

QuantizedSemantics read_quantized(const std::string& path, double common_range,
                                  double individual_range) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::io, "cannot open " + path);
    std::uint8_t header[16];
    in.read(reinterpret_cast<char*>(header), 16);
    require(in.gcount() == 16, ErrorCode::io, path + ": truncated header");
    require(std::memcmp(header, kMagic, 4) == 0, ErrorCode::io, path + ": bad magic");
    require(header[4] == kVersion, ErrorCode::io, path + ": unsupported version");

    const std::size_t gop = header[5];
    const std::size_t factor = header[6];
    const bool split = header[7] != 0;
    const std::size_t h = get_u16(header + 8), w = get_u16(header + 10), c = get_u16(header + 12);
    require(gop >= 1 && factor >= 1 && h >= 1 && w >= 1 && c >= 1, ErrorCode::io,
            path + ": bad dimensions");

    QuantizedSemantics q;
    if (split) {
        require(h % factor == 0 && w % factor == 0, ErrorCode::io, path + ": bad pooling factor");
        q.common_shape = Shape4{1, h, w, c};
        q.individual_shape = Shape4{gop, h / factor, w / factor, c};
    } else {
        q.individual_shape = Shape4{gop, h, w, c};
    }
    q.common_range = common_range;
    q.individual_range = individual_range;

    const std::size_t n = q.common_shape.size() + q.individual_shape.size();
    std::vector<std::uint8_t> packed(packed_byte_length(n));
    in.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
    require(in.gcount() == static_cast<std::streamsize>(packed.size()), ErrorCode::io,
            path + ": truncated code payload");
    q.codes = unpack_elements(packed, n);
    return q;
}

Gop synthetic_gop(std::size_t gop_index, std::size_t gop_size, std::size_t height,
                  std::size_t width, std::uint64_t seed) {
    // Smooth low-frequency content drifting over the GOP: two sinusoidal
    // gratings plus a moving Gaussian blob, per-GOP parameters from the seed.
    Xoshiro256ss rng(substream_seed(seed, gop_index));
    const double pi = std::acos(-1.0);
    const double f1 = 0.5 + 1.5 * rng.next_unit();
    const double f2 = 0.5 + 1.5 * rng.next_unit();
    const double ang1 = 2 * pi * rng.next_unit();
    const double ang2 = 2 * pi * rng.next_unit();
    const double ph1 = 2 * pi * rng.next_unit();
    const double ph2 = 2 * pi * rng.next_unit();
    const double drift1 = 0.2 + 0.4 * rng.next_unit();
    const double drift2 = 0.2 + 0.4 * rng.next_unit();
    const double cx0 = rng.next_unit(), cy0 = rng.next_unit();
    const double vx = 0.12 * (rng.next_unit() - 0.5), vy = 0.12 * (rng.next_unit() - 0.5);
    const double sigma = 0.12 + 0.12 * rng.next_unit();

    Gop gop(Shape4{gop_size, height, width, 3});
    for (std::size_t t = 0; t < gop_size; ++t) {
        const double td = static_cast<double>(t);
        const double cx = cx0 + vx * td, cy = cy0 + vy * td;
        for (std::size_t y = 0; y < height; ++y) {
            for (std::size_t x = 0; x < width; ++x) {
                const double u = static_cast<double>(x) / static_cast<double>(width);
                const double v = static_cast<double>(y) / static_cast<double>(height);
                const double g1 = std::sin(2 * pi * f1 * (u * std::cos(ang1) + v * std::sin(ang1)) +
                                           ph1 + drift1 * td);
                const double g2 = std::cos(2 * pi * f2 * (u * std::cos(ang2) + v * std::sin(ang2)) +
                                           ph2 + drift2 * td);
                const double dx = u - cx, dy = v - cy;
                const double blob = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
                const double base = 0.5 + 0.18 * g1 + 0.14 * g2 + 0.22 * blob;
                gop.at(t, y, x, 0) = std::clamp(base + 0.04 * g2, 0.0, 1.0);
                gop.at(t, y, x, 1) = std::clamp(base, 0.0, 1.0);
                gop.at(t, y, x, 2) = std::clamp(base - 0.04 * g1, 0.0, 1.0);
            }
        }
    }
    return gop;
}

void write_synthetic_corpus(const std::string& dir, std::size_t gop_count, std::size_t gop_size,
                            std::size_t height, std::size_t width, std::uint64_t seed) {
    fs::create_directories(dir);
    char name[32];
    for (std::size_t g = 0; g < gop_count; ++g) {
        Gop gop = synthetic_gop(g, gop_size, height, width, seed);
        for (std::size_t t = 0; t < gop_size; ++t) {
            Tensor frame(Shape4{1, height, width, 3});
            for (std::size_t y = 0; y < height; ++y)
                for (std::size_t x = 0; x < width; ++x)
                    for (std::size_t c = 0; c < 3; ++c) frame.at(0, y, x, c) = gop.at(t, y, x, c);
            std::snprintf(name, sizeof(name), "frame_%04zu.ppm", g * gop_size + t);
            write_ppm(frame, (fs::path(dir) / name).string());
        }
    }
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // prefer the shortest representation that round-trips
    for (int prec = 1; prec <= 16; ++prec) {
        char shorter[64];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        if (std::strtod(shorter, nullptr) == v) return shorter;
    }
    return buf;
}

std::string format_metric(double v) {
    if (std::isinf(v)) v = 100.0; // PSNR cap for identical frames
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::io, "cannot open " + path);
    out << contents;
    require(out.good(), ErrorCode::io, "write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::io, "cannot open " + path);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

} // namespace semvt
