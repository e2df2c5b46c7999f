#pragma once

#include <cstdint>
#include <vector>

#include "ndv/common.hpp"

namespace ndv {

// HyperLogLog distinct-count sketch over 64-bit element ids.
//
// The hash is split into a register index (low `b` bits) and a rank
// (leading-zero count of the remaining 64-b bits, plus one). Registers hold
// the max rank seen, so values stay in [0, 64-b] and merge is a register-wise
// max. Relative standard error of the estimate is about 1.04/sqrt(2^b).
class HllSketch {
public:
    static constexpr int kMinBits = 4;
    static constexpr int kMaxBits = 20;

    HllSketch(int index_bits, std::uint64_t hash_seed);

    void insert(std::uint64_t id);
    void merge(const HllSketch& other);
    double estimate() const;

    // Fresh empty sketch with the same parameters (merge identity).
    HllSketch cleared() const { return HllSketch(bits_, seed_); }

    bool compatible_with(const HllSketch& other) const {
        return bits_ == other.bits_ && seed_ == other.seed_;
    }
    bool operator==(const HllSketch& other) const {
        return compatible_with(other) && registers_ == other.registers_;
    }

    int index_bits() const { return bits_; }
    std::uint64_t hash_seed() const { return seed_; }
    std::uint64_t register_count() const { return registers_.size(); }
    const std::vector<std::uint8_t>& registers() const { return registers_; }

    // Overwrites register contents; values must fit [0, 64-b] (used by decode).
    void load_registers(std::vector<std::uint8_t> regs);

private:
    int bits_;
    std::uint64_t seed_;
    std::vector<std::uint8_t> registers_;
};

}  // namespace ndv
