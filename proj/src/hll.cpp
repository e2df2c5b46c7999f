#include "ndv/hll.hpp"

#include <array>
#include <bit>
#include <cmath>

#include "ndv/hash.hpp"

namespace ndv {

namespace {

double alpha(std::size_t m) {
    switch (m) {
        case 16: return 0.673;
        case 32: return 0.697;
        case 64: return 0.709;
        default: return 0.7213 / (1.0 + 1.079 / static_cast<double>(m));
    }
}

}  // namespace

HllSketch::HllSketch(int index_bits, std::uint64_t hash_seed)
    : bits_(index_bits), seed_(hash_seed) {
    if (index_bits < kMinBits || index_bits > kMaxBits) {
        throw ConfigError("HllSketch: index bits must be in [4, 20], got " +
                          std::to_string(index_bits));
    }
    registers_.assign(std::size_t{1} << bits_, 0);
}

void HllSketch::insert(std::uint64_t id) {
    const std::uint64_t h = hash64(id, seed_);
    const std::size_t idx = h & (registers_.size() - 1);
    const std::uint64_t w = h >> bits_;
    // w occupies the low 64-b bits; rank counts its leading zeros within that
    // window, capped so register values stay in [0, 64-b].
    const int max_rank = 64 - bits_;
    const int rank = (w == 0) ? max_rank
                              : std::min(std::countl_zero(w) - bits_ + 1, max_rank);
    if (registers_[idx] < rank) registers_[idx] = static_cast<std::uint8_t>(rank);
}

void HllSketch::merge(const HllSketch& other) {
    if (!compatible_with(other)) {
        throw IncompatibleSketch("HllSketch::merge: mismatched bits or hash seed");
    }
    for (std::size_t i = 0; i < registers_.size(); ++i) {
        if (registers_[i] < other.registers_[i]) registers_[i] = other.registers_[i];
    }
}

double HllSketch::estimate() const {
    static constexpr int kTableSize = 65;
    static const auto pow2neg = [] {
        std::array<double, kTableSize> t{};
        for (int i = 0; i < kTableSize; ++i) t[i] = std::ldexp(1.0, -i);
        return t;
    }();

    const double m = static_cast<double>(registers_.size());
    double inv_sum = 0.0;
    std::size_t zeros = 0;
    for (std::uint8_t r : registers_) {
        inv_sum += pow2neg[r];
        zeros += (r == 0);
    }
    const double raw = alpha(registers_.size()) * m * m / inv_sum;
    if (raw <= 2.5 * m && zeros > 0) {
        return m * std::log(m / static_cast<double>(zeros));
    }
    // No large-range correction: a 64-bit hash space makes it unnecessary.
    return raw;
}

void HllSketch::load_registers(std::vector<std::uint8_t> regs) {
    if (regs.size() != registers_.size()) {
        throw ConfigError("HllSketch::load_registers: wrong register count");
    }
    const std::uint8_t cap = static_cast<std::uint8_t>(64 - bits_);
    for (std::uint8_t r : regs) {
        if (r > cap) throw DecodeError("HllSketch: register value out of range");
    }
    registers_ = std::move(regs);
}

}  // namespace ndv
