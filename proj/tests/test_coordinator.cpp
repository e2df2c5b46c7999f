#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "ndv/coordinator.hpp"
#include "ndv/exact_l0.hpp"
#include "ndv/freq.hpp"
#include "ndv/hll.hpp"

using namespace ndv;

namespace {

const auto make_exact = [] { return ExactL0(); };

SummaryConfig small_cfg(std::uint64_t resample_seed = 1, double q_resample = 1.0) {
    SummaryConfig cfg;
    cfg.cs_depth = 5;
    cfg.cs_width = 4096;
    cfg.cs_seed = 99;
    cfg.q_resample = q_resample;
    cfg.resample_seed = resample_seed;
    return cfg;
}

std::vector<MachineSummary<ExactL0>> summarize_all(
    const std::vector<std::vector<std::uint64_t>>& streams, double q_resample = 1.0) {
    std::vector<MachineSummary<ExactL0>> out;
    for (std::size_t m = 0; m < streams.size(); ++m) {
        out.push_back(
            summarize_machine<ExactL0>(streams[m], make_exact, small_cfg(100 + m, q_resample)));
    }
    return out;
}

PMTree<ExactL0> tree_of(const std::vector<MachineSummary<ExactL0>>& summaries) {
    std::vector<ExactL0> ndv;
    for (const auto& s : summaries) ndv.push_back(s.ndv_sketch);
    return build_premerge(std::move(ndv));
}

FofStats exact_union_stats(const std::vector<std::vector<std::uint64_t>>& streams) {
    std::vector<FreqDict> locals;
    for (const auto& s : streams) locals.push_back(dict_from_stream(s));
    return fof_stats(fof_from_dict(dict_merge(locals)));
}

}  // namespace

TEST_CASE("summarize_machine splits ids into ndv, f1, and the count sketch") {
    // stream [a, a, b]
    const std::vector<std::uint64_t> stream = {5, 5, 6};
    const auto s = summarize_machine<ExactL0>(stream, make_exact, small_cfg());
    CHECK(s.n_local == 3);
    CHECK(s.d_local == 2);
    CHECK(s.ndv_sketch.elements() == std::set<std::uint64_t>{5, 6});
    CHECK(s.f1_sketch.elements() == std::set<std::uint64_t>{6});
    CHECK(s.cs.estimate_l2sq() == doctest::Approx(5.0));  // 2^2 + 1^2
    CHECK(s.dict_bytes == 18);                            // 2 ids * (8 + 1)
}

TEST_CASE("summarize_machine on an empty stream leaves everything empty") {
    const auto s = summarize_machine<ExactL0>({}, make_exact, small_cfg());
    CHECK(s.n_local == 0);
    CHECK(s.d_local == 0);
    CHECK(s.ndv_sketch.estimate() == 0.0);
    CHECK(s.f1_sketch.estimate() == 0.0);
    CHECK(s.cs.estimate_l2sq() == 0.0);
}

TEST_CASE("all-singleton stream makes f1 equal ndv") {
    const std::vector<std::uint64_t> stream = {1, 2, 3, 4};
    const auto s = summarize_machine<ExactL0>(stream, make_exact, small_cfg());
    CHECK(s.f1_sketch == s.ndv_sketch);
}

TEST_CASE("f1 set is always a subset of the ndv set") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 50; ++t) {
        std::vector<std::uint64_t> stream;
        for (int i = 0; i < 100; ++i) stream.push_back(rng() % 30);
        const auto s = summarize_machine<ExactL0>(stream, make_exact, small_cfg());
        for (std::uint64_t id : s.f1_sketch.elements()) {
            CHECK(s.ndv_sketch.elements().count(id) == 1);
        }
    }
}

TEST_CASE("premerge tree halves level sizes down to two") {
    std::vector<ExactL0> four(4);
    for (std::uint64_t m = 0; m < 4; ++m) four[m].insert(m);
    const auto tree = build_premerge(four);
    REQUIRE(tree.levels.size() == 2);
    CHECK(tree.levels[0].size() == 4);
    CHECK(tree.levels[1].size() == 2);
    CHECK(tree.levels[1][0].elements() == std::set<std::uint64_t>{0, 1});
    CHECK(tree.levels[1][1].elements() == std::set<std::uint64_t>{2, 3});
    CHECK(tree.merge_count == 2);
}

TEST_CASE("premerge tree with two machines never runs the halving loop") {
    std::vector<ExactL0> two(2);
    const auto tree = build_premerge(two);
    CHECK(tree.levels.size() == 1);
    CHECK(tree.merge_count == 0);
}

TEST_CASE("non-power-of-two machine counts are padded by empty sketches") {
    std::vector<ExactL0> five(5);
    for (std::uint64_t m = 0; m < 5; ++m) five[m].insert(1000 + m);
    const auto tree = build_premerge(five);
    CHECK(tree.padded_k() == 8);
    // Pads are merge identities: the full union is exactly the 5 real ids.
    ExactL0 all = tree.levels.back()[0];
    all.merge(tree.levels.back()[1]);
    CHECK(all.estimate() == 5.0);
}

TEST_CASE("premerge rejects incompatible sketch parameters") {
    std::vector<HllSketch> bad = {HllSketch(10, 1), HllSketch(10, 1), HllSketch(10, 2),
                                  HllSketch(10, 1)};
    CHECK_THROWS_AS(build_premerge(std::move(bad)), IncompatibleSketch);
}

TEST_CASE("complement cover follows the sibling path") {
    std::vector<ExactL0> four(4);
    for (std::uint64_t m = 0; m < 4; ++m) four[m].insert(m);
    const auto tree = build_premerge(four);

    const auto cover0 = complement_cover(tree, 0);
    REQUIRE(cover0.size() == 2);
    CHECK(cover0[0] == &tree.levels[0][1]);
    CHECK(cover0[1] == &tree.levels[1][1]);

    std::vector<ExactL0> two(2);
    two[0].insert(0);
    two[1].insert(1);
    const auto tree2 = build_premerge(two);
    const auto cover1 = complement_cover(tree2, 1);
    REQUIRE(cover1.size() == 1);
    CHECK(cover1[0] == &tree2.levels[0][0]);

    CHECK_THROWS_AS(complement_cover(tree, 4), ConfigError);
}

TEST_CASE("complement cover of k=8 index 5 is three sketches covering the rest") {
    std::vector<ExactL0> eight(8);
    for (std::uint64_t m = 0; m < 8; ++m) eight[m].insert(m);
    const auto tree = build_premerge(eight);
    const auto cover = complement_cover(tree, 5);
    REQUIRE(cover.size() == 3);
    ExactL0 u;
    for (const auto* s : cover) u.merge(*s);
    CHECK(u.elements() == std::set<std::uint64_t>{0, 1, 2, 3, 4, 6, 7});
}

TEST_CASE("complement cover is exhaustive-exact for every k up to 64") {
    for (std::size_t k = 1; k <= 64; ++k) {
        std::vector<ExactL0> leaves(k);
        for (std::uint64_t m = 0; m < k; ++m) leaves[m].insert(m);
        const auto tree = build_premerge(leaves);
        for (std::size_t idx = 0; idx < k; ++idx) {
            ExactL0 u;
            for (const auto* s : complement_cover(tree, idx)) u.merge(*s);
            std::set<std::uint64_t> want;
            for (std::uint64_t m = 0; m < k; ++m) {
                if (m != idx) want.insert(m);
            }
            REQUIRE(u.elements() == want);
        }
    }
}

TEST_CASE("esti_f1 reproduces the two-machine worked example") {
    // X = {a:1, b:2}, Y = {a:1, c:1}: only c is globally unique.
    const std::vector<std::vector<std::uint64_t>> streams = {{1, 2, 2}, {1, 3}};
    const auto summaries = summarize_all(streams);
    const auto tree = tree_of(summaries);
    CHECK(esti_f1(tree, summaries) == 1.0);
    CHECK(esti_d(tree) == 3.0);
}

TEST_CASE("esti_f1 of all-empty machines is zero") {
    const std::vector<std::vector<std::uint64_t>> streams(4);
    const auto summaries = summarize_all(streams);
    const auto tree = tree_of(summaries);
    CHECK(esti_f1(tree, summaries) == 0.0);
    CHECK(esti_d(tree) == 0.0);
}

TEST_CASE("disjoint all-singleton machines sum to the total element count") {
    std::vector<std::vector<std::uint64_t>> streams(5);
    std::uint64_t id = 0;
    for (auto& s : streams) {
        for (int i = 0; i < 7; ++i) s.push_back(id++);
    }
    const auto summaries = summarize_all(streams);
    const auto tree = tree_of(summaries);
    CHECK(esti_f1(tree, summaries) == 35.0);
}

TEST_CASE("oracle equivalence on randomized multisets") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = std::vector<std::size_t>{2, 3, 4, 5, 8, 16}[trial % 6];
        const std::uint64_t alphabet = 1 + rng() % 200;
        std::vector<std::vector<std::uint64_t>> streams(k);
        for (auto& s : streams) {
            const int items = static_cast<int>(rng() % 60);
            for (int i = 0; i < items; ++i) {
                const std::uint64_t id = rng() % alphabet;
                const int copies = 1 + static_cast<int>(rng() % 5);
                for (int c = 0; c < copies; ++c) s.push_back(id);
            }
        }
        const FofStats want = exact_union_stats(streams);
        const auto summaries = summarize_all(streams);
        const auto tree = tree_of(summaries);
        REQUIRE(esti_f1(tree, summaries) == static_cast<double>(want.f1));
        REQUIRE(esti_d(tree) == static_cast<double>(want.d));
    }
}

TEST_CASE("merge counter stays within the k log k budget") {
    for (std::size_t k : {2, 4, 8, 16, 32, 64, 128}) {
        std::vector<ExactL0> leaves(k);
        auto tree = build_premerge(leaves);
        std::uint64_t merges = tree.merge_count;
        std::vector<const ExactL0*> f1s;
        for (std::size_t m = 0; m < k; ++m) f1s.push_back(&tree.levels[0][m]);
        esti_f1(tree, f1s, &merges);
        const double log2k = std::log2(static_cast<double>(k));
        CHECK(static_cast<double>(merges) <= 4.0 * k * log2k + 2.0 * k);
    }
}

TEST_CASE("esti_l2sq merges count sketches linearly") {
    // One machine {a:2, b:1} -> 5; a:1 + a:1 across two machines -> 4.
    const auto one = summarize_all({{1, 1, 2}});
    CHECK(esti_l2sq(one) == doctest::Approx(5.0));

    const auto split = summarize_all({{7}, {7}});
    CHECK(esti_l2sq(split) == doctest::Approx(4.0));
}

TEST_CASE("full-rate resample reproduces the sample exactly") {
    const std::vector<std::vector<std::uint64_t>> streams = {{1, 2, 2, 3}, {3, 4}};
    const auto summaries = summarize_all(streams, 1.0);
    const auto tree = tree_of(summaries);
    const ResampleEstimate res = esti_resample(summaries);
    CHECK(res.d == esti_d(tree));
    CHECK(res.f1 == esti_f1(tree, summaries));
}

TEST_CASE("near-zero resample rate keeps almost nothing") {
    std::vector<std::uint64_t> stream;
    for (std::uint64_t i = 0; i < 200; ++i) stream.push_back(i);
    const auto summaries = summarize_all({stream}, 0.001);
    const ResampleEstimate res = esti_resample(summaries);
    CHECK(res.d <= 3.0);
}

TEST_CASE("transfer round-trips sketches and counts their bytes") {
    HllSketch h(10, 4);
    for (std::uint64_t x = 0; x < 1000; ++x) h.insert(x);
    std::uint64_t bytes = 0;
    const HllSketch back = transfer(h, &bytes);
    CHECK(back == h);
    CHECK(bytes == to_bytes(h).size());
}

TEST_CASE("comm report bytes are data-independent for the sketch path") {
    SummaryConfig cfg;
    cfg.cs_depth = 5;
    cfg.cs_width = 20000;
    cfg.cs_seed = 3;
    cfg.q_resample = 0.5;
    const auto make_hll = [] { return HllSketch(12, 8); };

    std::vector<std::uint64_t> big;
    for (std::uint64_t i = 0; i < 20000; ++i) big.push_back(i % 9000);
    const std::vector<std::uint64_t> tiny = {1, 2, 3};
    const std::vector<std::uint64_t> none;
    std::vector<MachineSummary<HllSketch>> summaries;
    cfg.resample_seed = 1;
    summaries.push_back(summarize_machine<HllSketch>(big, make_hll, cfg));
    cfg.resample_seed = 2;
    summaries.push_back(summarize_machine<HllSketch>(tiny, make_hll, cfg));
    cfg.resample_seed = 3;
    summaries.push_back(summarize_machine<HllSketch>(none, make_hll, cfg));

    const CommLedger ledger = comm_report(summaries);
    REQUIRE(ledger.per_machine.size() == 3);
    // b=12 sketch is 3083 bytes; four of them, one count sketch, 16 scalar bytes.
    const std::uint64_t want = 4 * 3083 + 400018 + 16;
    for (const auto& m : ledger.per_machine) CHECK(m.total() == want);
    CHECK(ledger.sketch_total() == 3 * want);
    // The exact baseline does depend on the data.
    CHECK(ledger.dict_bytes == 9000 * 9 + 3 * 9 + 0);
}
