#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semvt/tensor.hpp"
#include "semvt/transport.hpp"

namespace semvt {

struct ChannelParams {
    double p_s = 0.0;              // symbol error rate
    unsigned m_bits = 1;           // bits per symbol
    std::uint64_t master_seed = 0; // all substreams derive from this

    void validate() const;
};

// Per-symbol erasure channel: a packet of L bytes needs ceil(8L/m_bits)
// symbols; it is dropped iff at least one symbol errs. Each packet draws from
// its own (master_seed, index) substream, so results are reproducible and
// independent of evaluation order. Returns one drop flag per packet.
std::vector<std::uint8_t> transmit_packets(const std::vector<std::uint64_t>& packet_byte_lengths,
                                           const ChannelParams& params);

// Packet-level erasure at a given loss rate (the loss-rate-grid channel):
// each packet is dropped independently with probability p_l.
std::vector<std::uint8_t> drop_packets_at_rate(std::size_t packet_count, double p_l,
                                               std::uint64_t seed);

// Element-level erasure (the direct training channel analog): each element
// independently zeroed with probability p_l in the centered feature domain.
std::pair<Tensor, LossMask> erase_elements(const Tensor& input, double p_l, std::uint64_t seed);

// Element-level loss mask implied by a packet drop pattern. Defined to equal
// transport::reassemble's element_mask for the same drops; the transport path
// is the single source of truth and this is the cross-check entry point.
std::vector<std::uint8_t> mask_from_drops(const std::vector<std::uint8_t>& drop_flags,
                                          const SegmentGeometry& geometry, InterleaveKey key);

// Debug interfaces.
void write_drop_trace_csv(const std::vector<std::uint8_t>& drop_flags, const std::string& path);
void write_mask_dump(const LossMask& mask, const std::string& path);

} // namespace semvt
