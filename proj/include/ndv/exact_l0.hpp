#pragma once

#include <cstdint>
#include <set>

namespace ndv {

// Exact-set reference implementation of the distinct-count sketch interface.
// Zero-error stand-in for HllSketch in property tests: estimate is the set
// cardinality and merge is set union.
class ExactL0 {
public:
    ExactL0() = default;

    void insert(std::uint64_t id) { elements_.insert(id); }

    void merge(const ExactL0& other) {
        elements_.insert(other.elements_.begin(), other.elements_.end());
    }

    double estimate() const { return static_cast<double>(elements_.size()); }

    // Fresh empty sketch (merge identity), mirroring HllSketch::cleared.
    ExactL0 cleared() const { return ExactL0(); }

    bool compatible_with(const ExactL0&) const { return true; }
    bool operator==(const ExactL0& other) const { return elements_ == other.elements_; }

    const std::set<std::uint64_t>& elements() const { return elements_; }
    void load_elements(std::set<std::uint64_t> ids) { elements_ = std::move(ids); }

private:
    std::set<std::uint64_t> elements_;
};

}  // namespace ndv
