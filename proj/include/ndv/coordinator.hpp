#pragma once

#include <bit>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "ndv/common.hpp"
#include "ndv/count_sketch.hpp"
#include "ndv/freq.hpp"
#include "ndv/hash.hpp"
#include "ndv/sketch_io.hpp"

namespace ndv {

// The distributed protocol, templated over the distinct-count sketch type L0
// (HllSketch in production, ExactL0 in oracle tests). L0 must provide
// insert/merge/estimate/cleared and value semantics.

struct SummaryConfig {
    std::uint32_t cs_depth = 5;
    std::uint32_t cs_width = 20000;
    std::uint64_t cs_seed = 0;
    double q_resample = 0.01;
    std::uint64_t resample_seed = 0;  // distinct per machine
};

// Everything one machine ships to the coordinator: distinct-count sketch of
// all local ids, one of the locally-unique ids, a Count Sketch of the local
// frequency vector, the same pair over a Bernoulli(q_resample) resample, and
// two scalars. dict_bytes is what the exact-FoF baseline would have sent.
template <typename L0>
struct MachineSummary {
    L0 ndv_sketch;
    L0 f1_sketch;
    CountSketch cs;
    L0 resample_ndv;
    L0 resample_f1;
    std::uint64_t n_local = 0;
    std::uint64_t d_local = 0;
    std::uint64_t dict_bytes = 0;
};

template <typename L0, typename MakeL0>
MachineSummary<L0> summarize_machine(std::span<const std::uint64_t> stream,
                                     const MakeL0& make_l0, const SummaryConfig& cfg) {
    MachineSummary<L0> out{make_l0(), make_l0(),
                           CountSketch(cfg.cs_depth, cfg.cs_width, cfg.cs_seed),
                           make_l0(), make_l0()};
    FreqDict dict;
    FreqDict redict;
    std::mt19937_64 rng(cfg.resample_seed);
    std::bernoulli_distribution keep(cfg.q_resample);
    for (std::uint64_t id : stream) {
        dict.counts[id] += 1;
        if (keep(rng)) redict.counts[id] += 1;
    }
    for (const auto& [id, count] : dict.counts) {
        out.ndv_sketch.insert(id);
        if (count == 1) out.f1_sketch.insert(id);
        out.cs.update(id, static_cast<std::int64_t>(count));
    }
    for (const auto& [id, count] : redict.counts) {
        out.resample_ndv.insert(id);
        if (count == 1) out.resample_f1.insert(id);
    }
    out.n_local = stream.size();
    out.d_local = dict.distinct();
    out.dict_bytes = dict_comm_bytes(dict);
    return out;
}

// Pre-Merged Sketch tree: levels[0] holds one NDV sketch per machine (padded
// to a power of two with empty sketches), levels[l+1][i] the merge of
// levels[l][2i] and levels[l][2i+1]; halving stops once a level has two
// sketches. merge_count tallies the merges spent during construction.
template <typename L0>
struct PMTree {
    std::vector<std::vector<L0>> levels;
    std::uint64_t merge_count = 0;

    std::size_t padded_k() const { return levels.empty() ? 0 : levels.front().size(); }
};

template <typename L0>
PMTree<L0> build_premerge(std::vector<L0> ndv_sketches) {
    if (ndv_sketches.empty()) throw ConfigError("premerge tree needs at least one sketch");
    const std::size_t padded = std::bit_ceil(ndv_sketches.size());
    while (ndv_sketches.size() < padded) ndv_sketches.push_back(ndv_sketches.front().cleared());

    PMTree<L0> tree;
    tree.levels.push_back(std::move(ndv_sketches));
    while (tree.levels.back().size() > 2) {
        const auto& prev = tree.levels.back();
        std::vector<L0> next;
        next.reserve(prev.size() / 2);
        for (std::size_t i = 0; i + 1 < prev.size(); i += 2) {
            L0 node = prev[i];
            node.merge(prev[i + 1]);
            ++tree.merge_count;
            next.push_back(std::move(node));
        }
        tree.levels.push_back(std::move(next));
    }
    return tree;
}

// Sibling-path cover: the O(log k) tree nodes whose union is every machine
// except `index` — the level-0 sibling, then the sibling of each ancestor.
template <typename L0>
std::vector<const L0*> complement_cover(const PMTree<L0>& tree, std::size_t index) {
    if (index >= tree.padded_k()) throw ConfigError("cover index out of range");
    std::vector<const L0*> cover;
    if (tree.padded_k() == 1) return cover;  // lone machine: empty complement
    cover.reserve(tree.levels.size());
    for (std::size_t l = 0; l < tree.levels.size(); ++l) {
        cover.push_back(&tree.levels[l][(index >> l) ^ 1]);
    }
    return cover;
}

namespace detail {
inline void bump(std::uint64_t* merges) {
    if (merges) ++*merges;
}
}  // namespace detail

// Global unique-element count: for each machine j, merge its complement cover
// into B and add estimate(B + f1_j) - estimate(B). Per-machine differences may
// go negative under sketch noise and are kept; only the final sum is clamped.
template <typename L0>
double esti_f1(const PMTree<L0>& tree, const std::vector<const L0*>& f1_sketches,
               std::uint64_t* merges = nullptr) {
    if (f1_sketches.size() > tree.padded_k()) {
        throw ConfigError("more f1 sketches than tree leaves");
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < f1_sketches.size(); ++j) {
        L0 b = tree.levels.front().front().cleared();
        for (const L0* node : complement_cover(tree, j)) {
            b.merge(*node);
            detail::bump(merges);
        }
        const double without = b.estimate();
        b.merge(*f1_sketches[j]);
        detail::bump(merges);
        sum += b.estimate() - without;
    }
    return sum < 0.0 ? 0.0 : sum;
}

template <typename L0>
double esti_f1(const PMTree<L0>& tree, const std::vector<MachineSummary<L0>>& summaries,
               std::uint64_t* merges = nullptr) {
    std::vector<const L0*> f1_sketches;
    f1_sketches.reserve(summaries.size());
    for (const auto& s : summaries) f1_sketches.push_back(&s.f1_sketch);
    return esti_f1(tree, f1_sketches, merges);
}

// Distinct count of the union: merge the two top-level sketches.
template <typename L0>
double esti_d(const PMTree<L0>& tree, std::uint64_t* merges = nullptr) {
    const auto& top = tree.levels.back();
    if (top.size() == 1) return top.front().estimate();
    L0 all = top.front();
    all.merge(top.back());
    detail::bump(merges);
    return all.estimate();
}

// Squared second moment of the union frequency vector; Count Sketch linearity
// makes the sum of per-machine tables the sketch of the global counts.
template <typename L0>
double esti_l2sq(const std::vector<MachineSummary<L0>>& summaries) {
    if (summaries.empty()) throw ConfigError("no summaries to merge");
    CountSketch merged = summaries.front().cs;
    for (std::size_t j = 1; j < summaries.size(); ++j) merged.merge(summaries[j].cs);
    return merged.estimate_l2sq();
}

struct ResampleEstimate {
    double d = 0.0;
    double f1 = 0.0;
};

// Same d / f1 pipeline over the resample sketches.
template <typename L0>
ResampleEstimate esti_resample(const std::vector<MachineSummary<L0>>& summaries,
                               std::uint64_t* merges = nullptr) {
    if (summaries.empty()) throw ConfigError("no summaries to merge");
    std::vector<L0> ndv;
    std::vector<const L0*> f1s;
    ndv.reserve(summaries.size());
    f1s.reserve(summaries.size());
    for (const auto& s : summaries) {
        ndv.push_back(s.resample_ndv);
        f1s.push_back(&s.resample_f1);
    }
    PMTree<L0> tree = build_premerge(std::move(ndv));
    if (merges) *merges += tree.merge_count;
    ResampleEstimate out;
    out.f1 = esti_f1(tree, f1s, merges);
    out.d = esti_d(tree, merges);
    return out;
}

// Serialize/deserialize round trip standing in for the machine->coordinator
// wire; the byte counter keeps communication accounting honest.
template <typename S>
S transfer(const S& sketch, std::uint64_t* bytes = nullptr) {
    const SketchBytes wire = to_bytes(sketch);
    if (bytes) *bytes += wire.size();
    return from_bytes<S>(wire);
}

// Per-machine communication, split by sketch role. Scalar bytes cover
// n_local and d_local (8 bytes each).
struct RoleBytes {
    std::uint64_t ndv = 0;
    std::uint64_t f1 = 0;
    std::uint64_t cs = 0;
    std::uint64_t resample = 0;
    std::uint64_t scalars = 0;

    std::uint64_t total() const { return ndv + f1 + cs + resample + scalars; }
};

struct CommLedger {
    std::vector<RoleBytes> per_machine;
    std::uint64_t dict_bytes = 0;  // exact-FoF baseline total
    std::uint64_t merge_count = 0;

    std::uint64_t sketch_total() const {
        std::uint64_t t = 0;
        for (const auto& m : per_machine) t += m.total();
        return t;
    }
};

template <typename L0>
CommLedger comm_report(const std::vector<MachineSummary<L0>>& summaries) {
    CommLedger ledger;
    ledger.per_machine.reserve(summaries.size());
    for (const auto& s : summaries) {
        RoleBytes rb;
        rb.ndv = to_bytes(s.ndv_sketch).size();
        rb.f1 = to_bytes(s.f1_sketch).size();
        rb.cs = to_bytes(s.cs).size();
        rb.resample = to_bytes(s.resample_ndv).size() + to_bytes(s.resample_f1).size();
        rb.scalars = 16;
        ledger.per_machine.push_back(rb);
        ledger.dict_bytes += s.dict_bytes;
    }
    return ledger;
}

}  // namespace ndv
