#include "ndv/freq.hpp"

namespace ndv {

std::uint64_t FreqDict::total() const {
    std::uint64_t sum = 0;
    for (const auto& [id, count] : counts) sum += count;
    return sum;
}

FreqDict dict_from_stream(std::span<const std::uint64_t> occurrences) {
    FreqDict dict;
    dict.counts.reserve(occurrences.size());
    for (std::uint64_t id : occurrences) ++dict.counts[id];
    return dict;
}

FreqDict dict_merge(const std::vector<FreqDict>& dicts) {
    FreqDict merged;
    for (const FreqDict& d : dicts) {
        for (const auto& [id, count] : d.counts) merged.counts[id] += count;
    }
    return merged;
}

Fof fof_from_dict(const FreqDict& dict) {
    Fof fof;
    for (const auto& [id, count] : dict.counts) ++fof.f[count];
    return fof;
}

FofStats fof_stats(const Fof& fof) {
    FofStats s;
    long double l2sq = 0.0L;
    for (const auto& [i, fi] : fof.f) {
        s.d += fi;
        s.n += i * fi;
        l2sq += static_cast<long double>(i) * static_cast<long double>(i) *
                static_cast<long double>(fi);
    }
    if (auto it = fof.f.find(1); it != fof.f.end()) s.f1 = it->second;
    if (auto it = fof.f.find(2); it != fof.f.end()) s.f2 = it->second;
    s.l2sq = static_cast<double>(l2sq);
    return s;
}

std::uint64_t varint_size(std::uint64_t value) {
    std::uint64_t bytes = 1;
    while (value >= 0x80) {
        value >>= 7;
        ++bytes;
    }
    return bytes;
}

std::uint64_t dict_comm_bytes(const FreqDict& dict) {
    std::uint64_t bytes = 0;
    for (const auto& [id, count] : dict.counts) bytes += 8 + varint_size(count);
    return bytes;
}

}  // namespace ndv
