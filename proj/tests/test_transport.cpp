#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "semvt/error.hpp"
#include "semvt/rng.hpp"
#include "semvt/transport.hpp"

using namespace semvt;

namespace {

std::vector<std::uint8_t> random_codes(Xoshiro256ss& rng, std::size_t n) {
    std::vector<std::uint8_t> codes(n);
    for (auto& c : codes) c = static_cast<std::uint8_t>(rng.next_below(8));
    return codes;
}

// Position-tracking oracle: given dropped segment labels, derive the set of
// original-order element indices whose packed bits touch a lost byte. Walks
// bit positions directly, independent of the library's mask path.
std::set<std::size_t> oracle_lost_elements(const std::vector<std::uint16_t>& dropped_labels,
                                           std::size_t byte_len, std::size_t n_p,
                                           std::size_t element_count, InterleaveKey key) {
    const std::size_t l_data = (byte_len + n_p - 1) / n_p;
    std::vector<bool> byte_lost(byte_len, false);
    for (auto label : dropped_labels) {
        const std::size_t begin = std::min<std::size_t>(label * l_data, byte_len);
        const std::size_t end = std::min<std::size_t>(begin + l_data, byte_len);
        for (std::size_t b = begin; b < end; ++b) byte_lost[b] = true;
    }
    const auto perm = gen_permutation(key, element_count);
    std::set<std::size_t> lost;
    for (std::size_t i = 0; i < element_count; ++i) {
        bool hit = false;
        for (std::size_t bit = 3 * i; bit < 3 * i + 3; ++bit)
            if (byte_lost[bit >> 3]) hit = true;
        if (hit) lost.insert(perm[i]); // wire position i holds original element perm[i]
    }
    return lost;
}

} // namespace

TEST_CASE("header wire format golden vectors") {
    const auto bytes = encode_header({5, 300});
    CHECK(bytes[0] == 0x05);
    CHECK(bytes[1] == 0x01);
    CHECK(bytes[2] == 0x2C);

    const auto zero = encode_header({0, 0});
    CHECK(zero == std::array<std::uint8_t, 3>{0, 0, 0});

    CHECK_THROWS_AS(decode_header(bytes.data(), 2), Error);
}

TEST_CASE("header round trip") {
    Xoshiro256ss rng(3);
    for (int i = 0; i < 1000; ++i) {
        AppHeader h{static_cast<std::uint8_t>(rng.next_below(256)),
                    static_cast<std::uint16_t>(rng.next_below(65536))};
        const auto bytes = encode_header(h);
        CHECK(decode_header(bytes.data(), bytes.size()) == h);
    }
}

TEST_CASE("gen_permutation golden vector (seed 0x1234, length 8)") {
    const auto perm = gen_permutation({0x1234}, 8);
    const std::vector<std::uint32_t> expected{3, 7, 6, 5, 0, 4, 2, 1};
    CHECK(perm == expected);

    const auto perm16 = gen_permutation({0x1234}, 16);
    const std::vector<std::uint32_t> expected16{10, 12, 2, 15, 4, 1, 11, 3,
                                                13, 14, 7, 8, 6, 0, 5, 9};
    CHECK(perm16 == expected16);
}

TEST_CASE("xoshiro256** reference outputs (seed 0x1234)") {
    Xoshiro256ss rng(0x1234);
    CHECK(rng.next() == 0xcf1350dcca3debe9ULL);
    CHECK(rng.next() == 0xacc53b3fb46c231fULL);
    CHECK(rng.next() == 0x17d76a4d73642536ULL);
    CHECK(rng.next() == 0xe573ffdbe8dfbf83ULL);
}

TEST_CASE("gen_permutation is a bijection; depends only on (seed, length)") {
    CHECK(gen_permutation({99}, 1) == std::vector<std::uint32_t>{0});
    Xoshiro256ss rng(5);
    for (int i = 0; i < 30; ++i) {
        const std::size_t len = 1 + rng.next_below(2000);
        const std::uint64_t seed = rng.next();
        auto perm = gen_permutation({seed}, len);
        CHECK(perm == gen_permutation({seed}, len));
        std::sort(perm.begin(), perm.end());
        bool identity = true;
        for (std::size_t k = 0; k < len; ++k) identity &= perm[k] == k;
        CHECK(identity);
    }
}

TEST_CASE("interleave/deinterleave invert each other and preserve the multiset") {
    Xoshiro256ss rng(17);
    for (int i = 0; i < 50; ++i) {
        const std::size_t n = 1 + rng.next_below(5000);
        const InterleaveKey key{rng.next()};
        const auto codes = random_codes(rng, n);
        const auto mixed = interleave(codes, key);
        CHECK(deinterleave(mixed, key) == codes);

        auto a = codes, b = mixed;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
    }
    const std::vector<std::uint8_t> one{5};
    CHECK(interleave(one, {123}) == one);
}

TEST_CASE("different seeds disperse differently") {
    Xoshiro256ss rng(29);
    int differing = 0;
    for (int i = 0; i < 100; ++i) {
        const auto a = gen_permutation({rng.next()}, 64);
        const auto b = gen_permutation({rng.next()}, 64);
        if (a != b) ++differing;
    }
    CHECK(differing >= 99);
}

TEST_CASE("3-bit packing layout") {
    // codes 0..7 pack into exactly 3 bytes, little-endian bitstream
    std::vector<std::uint8_t> codes{1, 2, 3, 4, 5, 6, 7, 0};
    const auto bytes = pack_elements(codes);
    REQUIRE(bytes.size() == 3);
    // bit stream LSB-first per code: 100 010 110 001 101 011 111 000
    CHECK(bytes[0] == 0xD1);
    CHECK(bytes[1] == 0xAC);
    CHECK(bytes[2] == 0x1F);
    CHECK(unpack_elements(bytes, 8) == codes);

    CHECK(packed_byte_length(8) == 3);
    CHECK(packed_byte_length(9) == 4);
    CHECK(packed_byte_length(1) == 1);
    CHECK(packed_byte_length(3) == 2);

    CHECK_THROWS_AS(pack_elements({8}), Error);
}

TEST_CASE("pack/unpack round trip") {
    Xoshiro256ss rng(41);
    for (int i = 0; i < 40; ++i) {
        const auto codes = random_codes(rng, 1 + rng.next_below(10000));
        CHECK(unpack_elements(pack_elements(codes), codes.size()) == codes);
    }
}

TEST_CASE("segmentation: even split and ceil split") {
    std::vector<std::uint8_t> payload(155520, 0xAB);
    const auto segs = segment(payload, 1080, 7);
    REQUIRE(segs.size() == 1080);
    for (std::size_t i = 0; i < segs.size(); ++i) {
        CHECK(segs[i].payload.size() == 144);
        CHECK(segs[i].header.gop_number == 7);
        CHECK(segs[i].header.segment_label == i);
    }

    std::vector<std::uint8_t> ten(10);
    std::iota(ten.begin(), ten.end(), 0);
    const auto s3 = segment(ten, 3, 0);
    REQUIRE(s3.size() == 3);
    CHECK(s3[0].payload.size() == 4);
    CHECK(s3[1].payload.size() == 4);
    CHECK(s3[2].payload.size() == 2);

    const auto s1 = segment(ten, 1, 0);
    REQUIRE(s1.size() == 1);
    CHECK(s1[0].payload == ten);

    // n_p > payload length: trailing segments are empty
    const auto s20 = segment(ten, 20, 0);
    REQUIRE(s20.size() == 20);
    CHECK(s20[9].payload.size() == 1);
    CHECK(s20[10].payload.empty());

    CHECK_THROWS_AS(segment(ten, 65537, 0), Error);
    CHECK_THROWS_AS(segment({}, 1, 0), Error);
}

TEST_CASE("frame_packet lengths") {
    Segment seg;
    seg.payload.assign(144, 0);
    CHECK(frame_packet(seg, StackConfig{}).packet_bytes == 193);

    StackConfig zero{3, 0, 0, 0};
    CHECK(frame_packet(seg, zero).packet_bytes == 147);

    // 1080 packets of 144 bytes: totals match the analytic byte count
    std::uint64_t total = 0;
    std::vector<std::uint8_t> payload(155520, 1);
    for (const auto& s : segment(payload, 1080, 0))
        total += frame_packet(s, StackConfig{}).packet_bytes;
    CHECK(total == 208440);
    CHECK(StackConfig{}.total_overhead() == 49);
}

TEST_CASE("reassemble: lossless round trip") {
    Xoshiro256ss rng(53);
    for (int i = 0; i < 30; ++i) {
        const std::size_t n_elem = 1 + rng.next_below(20000);
        const InterleaveKey key{rng.next()};
        const auto codes = random_codes(rng, n_elem);
        const auto wire = interleave(codes, key);
        const auto payload = pack_elements(wire);
        const std::uint64_t n_p = 1 + rng.next_below(64);

        const auto segs = segment(payload, n_p, 9);
        SegmentGeometry geom{n_p, payload.size(), n_elem};
        const auto rx = reassemble(segs, geom, key);
        CHECK(rx.gop_number == 9);
        CHECK(rx.data == payload);
        CHECK(std::count(rx.element_mask.begin(), rx.element_mask.end(), 1) == 0);
        CHECK(deinterleave(unpack_elements(rx.data, n_elem), key) == codes);
    }
}

TEST_CASE("reassemble: byte placement of a dropped middle segment") {
    // sizes [4,4,2]: dropping segment 1 zeroes bytes 4..7
    std::vector<std::uint8_t> payload{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    auto segs = segment(payload, 3, 0);
    segs.erase(segs.begin() + 1);
    SegmentGeometry geom{3, payload.size(), 0};
    const auto rx = reassemble(segs, geom, {0});
    const std::vector<std::uint8_t> expect{1, 2, 3, 4, 0, 0, 0, 0, 9, 10};
    CHECK(rx.data == expect);
    for (std::size_t b = 0; b < 10; ++b) CHECK(rx.byte_mask[b] == (b >= 4 && b < 8 ? 1 : 0));
}

TEST_CASE("reassemble rejects malformed receive sets") {
    std::vector<std::uint8_t> payload(12, 1);
    auto segs = segment(payload, 3, 0);
    SegmentGeometry geom{3, payload.size(), 32};

    auto dup = segs;
    dup[1].header.segment_label = 0;
    CHECK_THROWS_AS(reassemble(dup, geom, {0}), Error);

    auto mixed = segs;
    mixed[2].header.gop_number = 1;
    CHECK_THROWS_AS(reassemble(mixed, geom, {0}), Error);

    auto bad_label = segs;
    bad_label[2].header.segment_label = 3;
    CHECK_THROWS_AS(reassemble(bad_label, geom, {0}), Error);
}

TEST_CASE("dropped segments: mask equals the position-tracking oracle") {
    Xoshiro256ss rng(67);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n_elem = 8 + rng.next_below(8000);
        const InterleaveKey key{rng.next()};
        const auto codes = random_codes(rng, n_elem);
        const auto payload = pack_elements(interleave(codes, key));
        const std::uint64_t n_p = 1 + rng.next_below(48);

        auto segs = segment(payload, n_p, 1);
        std::vector<std::uint16_t> dropped;
        std::vector<Segment> received;
        for (auto& s : segs) {
            if (rng.next_unit() < 0.3)
                dropped.push_back(s.header.segment_label);
            else
                received.push_back(s);
        }
        if (received.empty()) continue; // all-lost handled by the caller

        SegmentGeometry geom{n_p, payload.size(), n_elem};
        const auto rx = reassemble(received, geom, key);
        const auto expect = oracle_lost_elements(dropped, payload.size(), n_p, n_elem, key);

        std::set<std::size_t> got;
        for (std::size_t i = 0; i < n_elem; ++i)
            if (rx.element_mask[i]) got.insert(i);
        CHECK(got == expect);

        // unmasked elements decode to the transmitted codes
        const auto rx_codes = deinterleave(unpack_elements(rx.data, n_elem), key);
        for (std::size_t i = 0; i < n_elem; ++i)
            if (!rx.element_mask[i]) CHECK(rx_codes[i] == codes[i]);
    }
}

TEST_CASE("divisible segment payloads lose whole elements (144-byte case)") {
    // 144 bytes = 384 codes exactly; one dropped segment of 1080 loses 384
    const std::size_t n_elem = 1080 * 384;
    std::vector<std::uint8_t> codes(n_elem, 5);
    const InterleaveKey key{77};
    const auto payload = pack_elements(codes); // count is interleave-invariant
    REQUIRE(payload.size() == 155520);
    auto segs = segment(payload, 1080, 0);
    segs.erase(segs.begin() + 500);
    SegmentGeometry geom{1080, payload.size(), n_elem};
    const auto rx = reassemble(segs, geom, key);
    CHECK(std::count(rx.element_mask.begin(), rx.element_mask.end(), 1) == 384);
    CHECK(std::count(rx.byte_mask.begin(), rx.byte_mask.end(), 1) == 144);
}

TEST_CASE("gop buffer flushes on GOP change") {
    std::vector<std::uint8_t> payload(12, 3);
    SegmentGeometry geom{3, payload.size(), 32};
    GopBuffer buffer(geom, {0});

    auto segs1 = segment(payload, 3, 1);
    CHECK(!buffer.push(segs1[0]));
    CHECK(!buffer.push(segs1[1]));
    CHECK(!buffer.push(segs1[2]));

    auto segs2 = segment(payload, 3, 2);
    auto flushed = buffer.push(segs2[0]);
    REQUIRE(flushed.has_value());
    CHECK(flushed->gop_number == 1);
    CHECK(flushed->data == payload);

    // explicit end-of-stream flush emits the buffered GOP
    auto last = buffer.flush();
    REQUIRE(last.has_value());
    CHECK(last->gop_number == 2);
    CHECK(std::count(last->byte_mask.begin(), last->byte_mask.end(), 1) == 8); // 2 missing segs

    CHECK(!buffer.flush()); // nothing buffered
}

TEST_CASE("gop buffer: wraparound 255 -> 0 is a change; stale segments dropped") {
    std::vector<std::uint8_t> payload(12, 3);
    SegmentGeometry geom{3, payload.size(), 32};
    GopBuffer buffer(geom, {0});

    auto old_gop = segment(payload, 3, 255);
    for (const auto& s : old_gop) buffer.push(s);
    auto wrapped = segment(payload, 3, 0);
    auto flushed = buffer.push(wrapped[0]);
    REQUIRE(flushed.has_value());
    CHECK(flushed->gop_number == 255);

    // a stale segment for the flushed GOP is dropped and counted
    CHECK(!buffer.push(old_gop[1]));
    CHECK(buffer.stale_dropped() == 1);

    auto final_flush = buffer.flush();
    REQUIRE(final_flush.has_value());
    CHECK(final_flush->gop_number == 0);
}
