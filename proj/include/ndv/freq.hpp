#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

namespace ndv {

// Exact element -> count map for one machine's sample. This is the object
// whose cross-machine transfer the sketch pipeline avoids; it stays exact
// here to serve as the brute-force baseline and oracle.
struct FreqDict {
    std::unordered_map<std::uint64_t, std::uint64_t> counts;

    std::uint64_t distinct() const { return counts.size(); }
    std::uint64_t total() const;
};

// Frequency-of-frequency vector: f[i] = number of elements occurring exactly
// i times. Also used for populations (class-size histogram F_i). Sorted keys
// keep file output and iteration order deterministic.
struct Fof {
    std::map<std::uint64_t, std::uint64_t> f;

    bool operator==(const Fof& other) const { return f == other.f; }
};

struct FofStats {
    std::uint64_t d = 0;    // sum of f_i
    std::uint64_t n = 0;    // sum of i * f_i
    std::uint64_t f1 = 0;
    std::uint64_t f2 = 0;
    double l2sq = 0.0;      // sum of i^2 * f_i
};

FreqDict dict_from_stream(std::span<const std::uint64_t> occurrences);
FreqDict dict_merge(const std::vector<FreqDict>& dicts);
Fof fof_from_dict(const FreqDict& dict);
FofStats fof_stats(const Fof& fof);

// Bytes to ship one machine's dictionary: 8-byte id plus a varint count per
// entry. Deliberately compact so the sketch path's savings are conservative.
std::uint64_t dict_comm_bytes(const FreqDict& dict);

std::uint64_t varint_size(std::uint64_t value);

}  // namespace ndv
