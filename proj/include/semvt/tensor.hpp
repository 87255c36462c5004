#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "semvt/error.hpp"

namespace semvt {

struct Shape4 {
    std::size_t t = 0, h = 0, w = 0, c = 0;

    std::size_t size() const { return t * h * w * c; }
    bool operator==(const Shape4&) const = default;
};

// Dense row-major (t, h, w, c) tensor of doubles. Row-major scan order is the
// frozen serialization order for quantized streams, so it is part of the wire
// contract, not an implementation detail.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape4 shape, double fill = 0.0) : shape_(shape), data_(shape.size(), fill) {}

    const Shape4& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::size_t index(std::size_t t, std::size_t h, std::size_t w, std::size_t c) const {
        return ((t * shape_.h + h) * shape_.w + w) * shape_.c + c;
    }
    double& at(std::size_t t, std::size_t h, std::size_t w, std::size_t c) {
        return data_[index(t, h, w, c)];
    }
    double at(std::size_t t, std::size_t h, std::size_t w, std::size_t c) const {
        return data_[index(t, h, w, c)];
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

private:
    Shape4 shape_;
    std::vector<double> data_;
};

// Binary mask over the same index space as a Tensor; 1 = element erased.
struct LossMask {
    Shape4 shape;
    std::vector<std::uint8_t> values; // 0 or 1, row-major like Tensor

    LossMask() = default;
    explicit LossMask(Shape4 s, std::uint8_t fill = 0) : shape(s), values(s.size(), fill) {}

    std::size_t weight() const {
        std::size_t n = 0;
        for (auto v : values) n += v;
        return n;
    }
};

inline void require_same_shape(const Shape4& a, const Shape4& b, const char* what) {
    require(a == b, ErrorCode::invalid_argument, std::string(what) + ": shape mismatch");
}

} // namespace semvt
