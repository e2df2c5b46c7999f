#include "ndv/count_sketch.hpp"

#include <algorithm>

#include "ndv/hash.hpp"

namespace ndv {

CountSketch::CountSketch(std::uint32_t depth, std::uint32_t width, std::uint64_t seed)
    : depth_(depth), width_(width), seed_(seed) {
    if (depth == 0 || width == 0) {
        throw ConfigError("CountSketch: depth and width must be positive");
    }
    bucket_seeds_.reserve(depth);
    sign_seeds_.reserve(depth);
    for (std::uint32_t r = 0; r < depth; ++r) {
        bucket_seeds_.push_back(derive_seed(seed, 2 * r));
        sign_seeds_.push_back(derive_seed(seed, 2 * r + 1));
    }
    table_.assign(static_cast<std::size_t>(depth) * width, 0);
}

void CountSketch::update(std::uint64_t key, std::int64_t delta) {
    for (std::uint32_t r = 0; r < depth_; ++r) {
        const std::size_t col = hash64(key, bucket_seeds_[r]) % width_;
        const std::int64_t sign = (hash64(key, sign_seeds_[r]) & 1) ? 1 : -1;
        table_[static_cast<std::size_t>(r) * width_ + col] +=
            static_cast<std::int32_t>(sign * delta);
    }
}

void CountSketch::merge(const CountSketch& other) {
    if (!compatible_with(other)) {
        throw IncompatibleSketch("CountSketch::merge: mismatched shape or seed");
    }
    for (std::size_t i = 0; i < table_.size(); ++i) table_[i] += other.table_[i];
}

double CountSketch::estimate_l2sq() const {
    std::vector<double> row_stats(depth_);
    for (std::uint32_t r = 0; r < depth_; ++r) {
        std::int64_t sum_sq = 0;
        const std::int32_t* row = table_.data() + static_cast<std::size_t>(r) * width_;
        for (std::uint32_t c = 0; c < width_; ++c) {
            sum_sq += static_cast<std::int64_t>(row[c]) * row[c];
        }
        row_stats[r] = static_cast<double>(sum_sq);
    }
    std::sort(row_stats.begin(), row_stats.end());
    const std::uint32_t mid = depth_ / 2;
    if (depth_ % 2 == 1) return row_stats[mid];
    return 0.5 * (row_stats[mid - 1] + row_stats[mid]);
}

void CountSketch::load_table(std::vector<std::int32_t> table) {
    if (table.size() != table_.size()) {
        throw ConfigError("CountSketch::load_table: wrong table size");
    }
    table_ = std::move(table);
}

}  // namespace ndv
