#include "semvt/channel.hpp"

#include <cmath>
#include <cstdio>

#include "semvt/error.hpp"
#include "semvt/rng.hpp"

namespace semvt {

void ChannelParams::validate() const {
    require(p_s >= 0.0 && p_s <= 1.0, ErrorCode::invalid_argument, "p_s must be in [0,1]");
    require(m_bits >= 1, ErrorCode::invalid_argument, "m_bits must be >= 1");
}

std::vector<std::uint8_t> transmit_packets(const std::vector<std::uint64_t>& packet_byte_lengths,
                                           const ChannelParams& params) {
    params.validate();
    std::vector<std::uint8_t> drops(packet_byte_lengths.size(), 0);
    for (std::size_t i = 0; i < packet_byte_lengths.size(); ++i) {
        const std::uint64_t n_sym = (8 * packet_byte_lengths[i] + params.m_bits - 1) /
                                    params.m_bits;
        // One uniform against the whole-packet survival probability samples
        // exactly the same Bernoulli as n_sym independent symbol draws.
        double p_drop;
        if (params.p_s <= 0.0)
            p_drop = 0.0;
        else if (params.p_s >= 1.0)
            p_drop = n_sym == 0 ? 0.0 : 1.0;
        else
            p_drop = 1.0 -
                     std::exp(static_cast<double>(n_sym) * std::log1p(-params.p_s));
        const double u = counter_uniform(params.master_seed, i);
        drops[i] = u < p_drop ? 1 : 0;
    }
    return drops;
}

std::vector<std::uint8_t> drop_packets_at_rate(std::size_t packet_count, double p_l,
                                               std::uint64_t seed) {
    require(p_l >= 0.0 && p_l <= 1.0, ErrorCode::invalid_argument, "p_l must be in [0,1]");
    std::vector<std::uint8_t> drops(packet_count, 0);
    for (std::size_t i = 0; i < packet_count; ++i)
        drops[i] = counter_uniform(seed, i) < p_l ? 1 : 0;
    return drops;
}

std::pair<Tensor, LossMask> erase_elements(const Tensor& input, double p_l, std::uint64_t seed) {
    require(p_l >= 0.0 && p_l <= 1.0, ErrorCode::invalid_argument, "p_l must be in [0,1]");
    Tensor out = input;
    LossMask mask(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) {
        if (counter_uniform(seed, i) < p_l) {
            out[i] = 0.0;
            mask.values[i] = 1;
        }
    }
    return {std::move(out), std::move(mask)};
}

std::vector<std::uint8_t> mask_from_drops(const std::vector<std::uint8_t>& drop_flags,
                                          const SegmentGeometry& geometry, InterleaveKey key) {
    require(drop_flags.size() == geometry.n_p, ErrorCode::invalid_argument,
            "mask_from_drops: drop flag count must equal n_p");
    // Rebuild a receive set with empty payloads for dropped segments and let
    // the transport reassembly derive the mask; keeps one source of truth.
    const std::uint64_t l_data = (geometry.byte_length + geometry.n_p - 1) / geometry.n_p;
    std::vector<Segment> received;
    for (std::uint64_t s = 0; s < geometry.n_p; ++s) {
        if (drop_flags[s]) continue;
        Segment seg;
        seg.header.segment_label = static_cast<std::uint16_t>(s);
        const std::uint64_t begin = std::min(s * l_data, geometry.byte_length);
        const std::uint64_t end = std::min(begin + l_data, geometry.byte_length);
        seg.payload.assign(static_cast<std::size_t>(end - begin), 0);
        received.push_back(std::move(seg));
    }
    return reassemble(received, geometry, key).element_mask;
}

void write_drop_trace_csv(const std::vector<std::uint8_t>& drop_flags, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    require(f != nullptr, ErrorCode::io, "cannot open " + path);
    std::fputs("packet_index,dropped\n", f);
    for (std::size_t i = 0; i < drop_flags.size(); ++i)
        std::fprintf(f, "%zu,%d\n", i, drop_flags[i] ? 1 : 0);
    std::fclose(f);
}

void write_mask_dump(const LossMask& mask, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    require(f != nullptr, ErrorCode::io, "cannot open " + path);
    if (!mask.values.empty())
        std::fwrite(mask.values.data(), 1, mask.values.size(), f);
    std::fclose(f);
}

} // namespace semvt
