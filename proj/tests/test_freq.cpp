#include <cstdint>
#include <vector>

#include "doctest.h"
#include "ndv/freq.hpp"

using namespace ndv;

TEST_CASE("dict_from_stream counts occurrences") {
    const std::vector<std::uint64_t> stream = {7, 7, 9, 7, 9, 11};
    const FreqDict dict = dict_from_stream(stream);
    CHECK(dict.distinct() == 3);
    CHECK(dict.total() == 6);
    CHECK(dict.counts.at(7) == 3);
    CHECK(dict.counts.at(9) == 2);
    CHECK(dict.counts.at(11) == 1);
    CHECK(dict_from_stream({}).distinct() == 0);
}

TEST_CASE("dict_merge adds counts across machines") {
    const std::vector<std::uint64_t> s1 = {1, 2, 2};
    const std::vector<std::uint64_t> s2 = {2, 3};
    const FreqDict merged = dict_merge({dict_from_stream(s1), dict_from_stream(s2)});
    CHECK(merged.distinct() == 3);
    CHECK(merged.counts.at(1) == 1);
    CHECK(merged.counts.at(2) == 3);
    CHECK(merged.counts.at(3) == 1);
    CHECK(dict_merge({}).distinct() == 0);
}

TEST_CASE("fof_from_dict histograms the counts") {
    const std::vector<std::uint64_t> stream = {1, 1, 2, 3, 3, 3};
    const Fof fof = fof_from_dict(dict_from_stream(stream));
    CHECK(fof.f.at(1) == 1);  // element 2
    CHECK(fof.f.at(2) == 1);  // element 1
    CHECK(fof.f.at(3) == 1);  // element 3
    CHECK(fof.f.size() == 3);
}

TEST_CASE("fof_stats aggregates d, n, f1, f2 and the second moment") {
    Fof fof;
    fof.f = {{1, 4}, {2, 2}, {5, 1}};
    const FofStats st = fof_stats(fof);
    CHECK(st.d == 7);
    CHECK(st.n == 13);
    CHECK(st.f1 == 4);
    CHECK(st.f2 == 2);
    CHECK(st.l2sq == doctest::Approx(4 + 8 + 25).epsilon(1e-12));

    CHECK(fof_stats(Fof{}).d == 0);
    CHECK(fof_stats(Fof{}).l2sq == 0.0);
}

TEST_CASE("varint_size matches the 7-bit group count") {
    CHECK(varint_size(0) == 1);
    CHECK(varint_size(127) == 1);
    CHECK(varint_size(128) == 2);
    CHECK(varint_size(16383) == 2);
    CHECK(varint_size(16384) == 3);
    CHECK(varint_size(~0ULL) == 10);
}

TEST_CASE("dict_comm_bytes is 8 bytes per id plus a varint count") {
    FreqDict dict;
    dict.counts = {{10, 1}, {11, 127}, {12, 128}};
    // 3 ids * 8 + 1 + 1 + 2
    CHECK(dict_comm_bytes(dict) == 28);
    CHECK(dict_comm_bytes(FreqDict{}) == 0);
}
