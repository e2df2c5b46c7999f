#pragma once

#include <cstdint>
#include <vector>

#include "ndv/common.hpp"
#include "ndv/count_sketch.hpp"
#include "ndv/exact_l0.hpp"
#include "ndv/hll.hpp"

namespace ndv {

// Serialized sketch frame. Layout: 1-byte kind tag, 1-byte version, a
// little-endian header (b or depth/width plus the 8-byte seed), then the
// packed payload. HyperLogLog registers are packed 6 bits each, so the
// byte length is the honest per-sketch communication cost.
struct SketchBytes {
    std::vector<std::uint8_t> data;

    std::size_t size() const { return data.size(); }
    std::uint8_t kind() const {
        if (data.empty()) throw DecodeError("SketchBytes: empty frame");
        return data[0];
    }

    static constexpr std::uint8_t kKindHll = 1;
    static constexpr std::uint8_t kKindCountSketch = 2;
    static constexpr std::uint8_t kKindExactL0 = 3;
    static constexpr std::uint8_t kVersion = 1;
};

SketchBytes to_bytes(const HllSketch& s);
SketchBytes to_bytes(const CountSketch& s);
SketchBytes to_bytes(const ExactL0& s);

HllSketch hll_from_bytes(const SketchBytes& b);
CountSketch count_sketch_from_bytes(const SketchBytes& b);
ExactL0 exact_l0_from_bytes(const SketchBytes& b);

// Uniform decode entry point for code templated over the l0 sketch type.
template <typename S>
S from_bytes(const SketchBytes& b);

template <>
inline HllSketch from_bytes<HllSketch>(const SketchBytes& b) { return hll_from_bytes(b); }
template <>
inline CountSketch from_bytes<CountSketch>(const SketchBytes& b) {
    return count_sketch_from_bytes(b);
}
template <>
inline ExactL0 from_bytes<ExactL0>(const SketchBytes& b) { return exact_l0_from_bytes(b); }

}  // namespace ndv
