#pragma once

#include <cstdint>
#include <vector>

#include "ndv/common.hpp"

namespace ndv {

// Count Sketch over 64-bit keys with signed 32-bit counters.
//
// Each of `depth` rows hashes a key to one of `width` counters and adds a
// random sign times the update. The table is linear in the update stream, so
// adding two sketches with equal seeds equals sketching the combined stream.
// estimate_l2sq() returns the median over rows of the per-row sum of squared
// counters, an estimate of the squared l2 norm of the key-count vector.
class CountSketch {
public:
    CountSketch(std::uint32_t depth, std::uint32_t width, std::uint64_t seed);

    void update(std::uint64_t key, std::int64_t delta);
    void merge(const CountSketch& other);
    double estimate_l2sq() const;

    bool compatible_with(const CountSketch& other) const {
        return depth_ == other.depth_ && width_ == other.width_ && seed_ == other.seed_;
    }
    bool operator==(const CountSketch& other) const {
        return compatible_with(other) && table_ == other.table_;
    }

    std::uint32_t depth() const { return depth_; }
    std::uint32_t width() const { return width_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<std::int32_t>& table() const { return table_; }
    void load_table(std::vector<std::int32_t> table);

private:
    std::uint32_t depth_;
    std::uint32_t width_;
    std::uint64_t seed_;
    std::vector<std::uint64_t> bucket_seeds_;  // derived per row from seed_
    std::vector<std::uint64_t> sign_seeds_;
    std::vector<std::int32_t> table_;          // row-major depth x width
};

}  // namespace ndv
