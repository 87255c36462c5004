#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace semvt {

// 3-byte application-layer header: GOP number (1 byte), segment label
// (2 bytes, big-endian). Wire format is bit-exact and golden-tested.
struct AppHeader {
    std::uint8_t gop_number = 0;
    std::uint16_t segment_label = 0;

    bool operator==(const AppHeader&) const = default;
};

std::array<std::uint8_t, 3> encode_header(const AppHeader& h);
AppHeader decode_header(const std::uint8_t* bytes, std::size_t len);

struct Segment {
    AppHeader header;
    std::vector<std::uint8_t> payload; // <= l_data bytes; the tail may be short
};

// Per-layer overhead in bytes; lower layers are modeled as opaque
// length-only overhead whose contents are never inspected.
struct StackConfig {
    std::uint32_t ah_bytes = 3;
    std::uint32_t transport_bytes = 8;
    std::uint32_t network_bytes = 20;
    std::uint32_t link_bytes = 18;

    std::uint32_t total_overhead() const {
        return ah_bytes + transport_bytes + network_bytes + link_bytes;
    }
};

struct InterleaveKey {
    std::uint64_t seed = 0;
};

struct FramedPacket {
    std::uint8_t gop = 0;
    std::uint16_t label = 0;
    std::uint64_t packet_bytes = 0; // payload + full stack overhead
    std::uint64_t payload_bytes = 0;
};

// Element counts and byte lengths the receiver needs to rebuild a GOP's
// semantic stream and its loss mask.
struct SegmentGeometry {
    std::uint64_t n_p = 1;          // expected segment count
    std::uint64_t byte_length = 0;  // packed payload bytes before segmentation
    std::uint64_t element_count = 0; // 3-bit semantic elements in the stream
};

struct ReassemblyResult {
    std::vector<std::uint8_t> data;         // packed bytes, zero-filled gaps
    std::vector<std::uint8_t> byte_mask;    // 1 = byte carried by a missing segment
    std::vector<std::uint8_t> element_mask; // per element, original (pre-interleave) order
    std::uint8_t gop_number = 0;
};

// Fisher-Yates permutation of 0..length-1 driven by xoshiro256** seeded via
// splitmix64 expansion of the key; byte-exact across platforms.
std::vector<std::uint32_t> gen_permutation(InterleaveKey key, std::size_t length);

// Interleaving granularity is the semantic element (one 3-bit code), not the
// bit or the byte: out[i] = in[perm[i]]. deinterleave inverts exactly.
std::vector<std::uint8_t> interleave(const std::vector<std::uint8_t>& elements,
                                     InterleaveKey key);
std::vector<std::uint8_t> deinterleave(const std::vector<std::uint8_t>& elements,
                                       InterleaveKey key);

// Packs 3-bit codes into a little-endian bitstream: element i occupies bit
// positions [3i, 3i+3), bit b lives in byte b/8 at in-byte position b%8
// (8 codes per 3 bytes). Trailing pad bits are zero.
std::vector<std::uint8_t> pack_elements(const std::vector<std::uint8_t>& codes);
std::vector<std::uint8_t> unpack_elements(const std::vector<std::uint8_t>& bytes,
                                          std::size_t element_count);
std::size_t packed_byte_length(std::size_t element_count);

// Wire-order element mask: element i is lost iff any byte holding one of its
// packed bits is lost.
std::vector<std::uint8_t> element_mask_from_bytes(const std::vector<std::uint8_t>& byte_mask,
                                                  std::size_t element_count);

// Splits the payload into n_p segments of l_data = ceil(len/n_p) bytes; the
// last segment carries the remainder (possibly empty when n_p > len).
std::vector<Segment> segment(const std::vector<std::uint8_t>& payload, std::uint64_t n_p,
                             std::uint8_t gop_number);

FramedPacket frame_packet(const Segment& seg, const StackConfig& cfg);

ReassemblyResult reassemble(const std::vector<Segment>& received, const SegmentGeometry& geom,
                            InterleaveKey key);

// Receiver-side GOP accumulator. In-order delivery is assumed: the first
// segment with a different GOP number flushes the buffered GOP. Stale
// segments for an already-flushed GOP are dropped and counted. Single-owner
// state machine; callers serialize access.
class GopBuffer {
public:
    GopBuffer(SegmentGeometry geometry, InterleaveKey key)
        : geometry_(geometry), key_(key) {}

    std::optional<ReassemblyResult> push(Segment seg);
    std::optional<ReassemblyResult> flush(); // end-of-stream
    std::uint64_t stale_dropped() const { return stale_dropped_; }

private:
    SegmentGeometry geometry_;
    InterleaveKey key_;
    std::vector<Segment> pending_;
    std::optional<std::uint8_t> current_gop_;
    std::optional<std::uint8_t> last_flushed_gop_;
    std::uint64_t stale_dropped_ = 0;
};

} // namespace semvt
