#include "semvt/transport.hpp"

#include <algorithm>
#include <unordered_set>

#include "semvt/error.hpp"
#include "semvt/rng.hpp"

namespace semvt {

std::array<std::uint8_t, 3> encode_header(const AppHeader& h) {
    return {h.gop_number, static_cast<std::uint8_t>(h.segment_label >> 8),
            static_cast<std::uint8_t>(h.segment_label & 0xFF)};
}

AppHeader decode_header(const std::uint8_t* bytes, std::size_t len) {
    require(len >= 3, ErrorCode::invalid_argument, "header decode: need 3 bytes");
    AppHeader h;
    h.gop_number = bytes[0];
    h.segment_label = static_cast<std::uint16_t>((bytes[1] << 8) | bytes[2]);
    return h;
}

std::vector<std::uint32_t> gen_permutation(InterleaveKey key, std::size_t length) {
    require(length >= 1, ErrorCode::invalid_argument, "permutation length must be >= 1");
    std::vector<std::uint32_t> perm(length);
    for (std::size_t i = 0; i < length; ++i) perm[i] = static_cast<std::uint32_t>(i);
    Xoshiro256ss rng(key.seed);
    for (std::size_t i = length - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i + 1));
        std::swap(perm[i], perm[j]);
    }
    return perm;
}

std::vector<std::uint8_t> interleave(const std::vector<std::uint8_t>& elements,
                                     InterleaveKey key) {
    require(!elements.empty(), ErrorCode::invalid_argument, "interleave: empty input");
    const auto perm = gen_permutation(key, elements.size());
    std::vector<std::uint8_t> out(elements.size());
    for (std::size_t i = 0; i < elements.size(); ++i) out[i] = elements[perm[i]];
    return out;
}

std::vector<std::uint8_t> deinterleave(const std::vector<std::uint8_t>& elements,
                                       InterleaveKey key) {
    require(!elements.empty(), ErrorCode::invalid_argument, "deinterleave: empty input");
    const auto perm = gen_permutation(key, elements.size());
    std::vector<std::uint8_t> out(elements.size());
    for (std::size_t i = 0; i < elements.size(); ++i) out[perm[i]] = elements[i];
    return out;
}

std::size_t packed_byte_length(std::size_t element_count) {
    return (3 * element_count + 7) / 8;
}

std::vector<std::uint8_t> pack_elements(const std::vector<std::uint8_t>& codes) {
    std::vector<std::uint8_t> bytes(packed_byte_length(codes.size()), 0);
    for (std::size_t i = 0; i < codes.size(); ++i) {
        require(codes[i] <= 7, ErrorCode::invalid_argument, "pack: code out of 3-bit range");
        const std::size_t bit = 3 * i;
        for (int b = 0; b < 3; ++b) {
            if (codes[i] & (1u << b)) bytes[(bit + b) >> 3] |= 1u << ((bit + b) & 7);
        }
    }
    return bytes;
}

std::vector<std::uint8_t> element_mask_from_bytes(const std::vector<std::uint8_t>& byte_mask,
                                                  std::size_t element_count) {
    require(byte_mask.size() >= packed_byte_length(element_count), ErrorCode::invalid_argument,
            "element mask: byte mask too short");
    std::vector<std::uint8_t> mask(element_count, 0);
    for (std::size_t i = 0; i < element_count; ++i) {
        const std::size_t first_byte = (3 * i) >> 3;
        const std::size_t last_byte = (3 * i + 2) >> 3;
        mask[i] = byte_mask[first_byte] | byte_mask[last_byte];
    }
    return mask;
}

std::vector<std::uint8_t> unpack_elements(const std::vector<std::uint8_t>& bytes,
                                          std::size_t element_count) {
    require(bytes.size() >= packed_byte_length(element_count), ErrorCode::invalid_argument,
            "unpack: byte buffer too short");
    std::vector<std::uint8_t> codes(element_count, 0);
    for (std::size_t i = 0; i < element_count; ++i) {
        const std::size_t bit = 3 * i;
        std::uint8_t v = 0;
        for (int b = 0; b < 3; ++b) {
            if (bytes[(bit + b) >> 3] & (1u << ((bit + b) & 7))) v |= 1u << b;
        }
        codes[i] = v;
    }
    return codes;
}

std::vector<Segment> segment(const std::vector<std::uint8_t>& payload, std::uint64_t n_p,
                             std::uint8_t gop_number) {
    require(n_p >= 1, ErrorCode::invalid_argument, "segment: n_p must be >= 1");
    require(!payload.empty(), ErrorCode::invalid_argument, "segment: empty payload");
    require(n_p <= 65536, ErrorCode::invalid_argument,
            "segment: n_p exceeds the 16-bit label space");
    const std::uint64_t len = payload.size();
    const std::uint64_t l_data = (len + n_p - 1) / n_p;
    std::vector<Segment> segments;
    segments.reserve(n_p);
    for (std::uint64_t s = 0; s < n_p; ++s) {
        Segment seg;
        seg.header.gop_number = gop_number;
        seg.header.segment_label = static_cast<std::uint16_t>(s);
        const std::uint64_t begin = std::min(s * l_data, len);
        const std::uint64_t end = std::min(begin + l_data, len);
        seg.payload.assign(payload.begin() + static_cast<std::ptrdiff_t>(begin),
                           payload.begin() + static_cast<std::ptrdiff_t>(end));
        segments.push_back(std::move(seg));
    }
    return segments;
}

FramedPacket frame_packet(const Segment& seg, const StackConfig& cfg) {
    FramedPacket p;
    p.gop = seg.header.gop_number;
    p.label = seg.header.segment_label;
    p.payload_bytes = seg.payload.size();
    p.packet_bytes = seg.payload.size() + cfg.total_overhead();
    return p;
}

ReassemblyResult reassemble(const std::vector<Segment>& received, const SegmentGeometry& geom,
                            InterleaveKey key) {
    require(geom.n_p >= 1, ErrorCode::invalid_argument, "reassemble: n_p must be >= 1");
    require(geom.byte_length >= packed_byte_length(geom.element_count),
            ErrorCode::invalid_argument, "reassemble: geometry byte/element mismatch");
    const std::uint64_t l_data = (geom.byte_length + geom.n_p - 1) / geom.n_p;

    ReassemblyResult out;
    out.data.assign(geom.byte_length, 0);
    out.byte_mask.assign(geom.byte_length, 1); // lost until a segment covers it

    std::unordered_set<std::uint16_t> seen;
    for (const auto& seg : received) {
        const auto& h = seg.header;
        require(h.gop_number == received.front().header.gop_number,
                ErrorCode::invalid_argument, "reassemble: mixed GOP numbers");
        require(h.segment_label < geom.n_p, ErrorCode::invalid_argument,
                "reassemble: segment label out of range");
        require(seen.insert(h.segment_label).second, ErrorCode::invalid_argument,
                "reassemble: duplicate segment label");
        const std::uint64_t offset = h.segment_label * l_data;
        require(offset + seg.payload.size() <= geom.byte_length, ErrorCode::invalid_argument,
                "reassemble: segment overruns original length");
        std::copy(seg.payload.begin(), seg.payload.end(),
                  out.data.begin() + static_cast<std::ptrdiff_t>(offset));
        std::fill_n(out.byte_mask.begin() + static_cast<std::ptrdiff_t>(offset),
                    seg.payload.size(), std::uint8_t{0});
    }
    if (!received.empty()) out.gop_number = received.front().header.gop_number;

    // Map the wire-order mask through the permutation so it marks elements
    // in their original (pre-interleave) positions.
    const auto wire_mask = element_mask_from_bytes(out.byte_mask, geom.element_count);
    out.element_mask.assign(geom.element_count, 0);
    if (geom.element_count > 0) {
        const auto perm = gen_permutation(key, geom.element_count);
        for (std::uint64_t i = 0; i < geom.element_count; ++i)
            out.element_mask[perm[i]] = wire_mask[i];
    }
    return out;
}

std::optional<ReassemblyResult> GopBuffer::push(Segment seg) {
    if (last_flushed_gop_ && seg.header.gop_number == *last_flushed_gop_ &&
        (!current_gop_ || seg.header.gop_number != *current_gop_)) {
        ++stale_dropped_;
        return std::nullopt;
    }
    if (!current_gop_) {
        current_gop_ = seg.header.gop_number;
        pending_.push_back(std::move(seg));
        return std::nullopt;
    }
    if (seg.header.gop_number == *current_gop_) {
        pending_.push_back(std::move(seg));
        return std::nullopt;
    }
    auto result = flush();
    current_gop_ = seg.header.gop_number;
    pending_.push_back(std::move(seg));
    return result;
}

std::optional<ReassemblyResult> GopBuffer::flush() {
    if (!current_gop_) return std::nullopt;
    auto result = reassemble(pending_, geometry_, key_);
    last_flushed_gop_ = *current_gop_;
    current_gop_.reset();
    pending_.clear();
    return result;
}

} // namespace semvt
