#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ndv/common.hpp"
#include "ndv/freq.hpp"

namespace ndv {

// How samples are drawn and spread across simulated machines.
struct SamplePlan {
    double q = 0.01;          // sample rate in (0, 1]
    std::uint32_t k = 1;      // machine count
    std::uint64_t seed = 0;
};

// Expected sample statistics under the Poisson approximation of
// Binomial(i, q) class sampling.
struct ExpectedSampleStats {
    double f1 = 0.0;
    double d = 0.0;
};

struct AssumptionCheck {
    double ratio = 0.0;   // E[f1] / E[d]
    bool passes = false;  // ratio >= c
    double e_f1 = 0.0;
    double e_d = 0.0;
};

// Population class-size histogram with D = round(N/lambda) classes whose
// sizes follow Poisson(lambda), assigned by cumulative rounding of the
// expected class counts over the window [1, lambda + 12*sqrt(lambda)].
Fof gen_fof_poisson(std::uint64_t n_population, double lambda, std::uint64_t seed);

// Zipfian population: class j in [1, D] has size max(1, round(C / j^s)) with
// C = N / sum_j j^-s. Sizes are aggregated into the F_i histogram.
Fof gen_fof_zipf(std::uint64_t n_population, double skew, std::uint64_t class_count,
                 std::uint64_t seed);

// Binomial(i, q) sampling of every population class, partitioned uniformly
// across machines. Each sampled class gets a fresh id shared by all of its
// occurrences, so cross-machine duplicates happen exactly when the partition
// splits a class. Classes are drawn one by one while F_i <= 10^4 and through
// a multinomial split of the F_i classes over sampled-count buckets above
// that, so the population itself is never materialized.
std::vector<std::vector<std::uint64_t>> sample_population(const Fof& population,
                                                          const SamplePlan& plan);

ExpectedSampleStats expected_sample_stats(const Fof& population, double q);

// Assumption check: does the expected singleton fraction E[f1]/E[d] of a
// q-rate sample reach c? Expectations use the exact Binomial form, which
// matches the Poissonized form for small q and stays correct up to q = 1.
AssumptionCheck check_assumption(const Fof& population, double q, double c);

// FoF files: CSV lines "i,F_i", ascending i, no header.
Fof load_fof_file(const std::filesystem::path& path);
void save_fof_file(const Fof& fof, const std::filesystem::path& path);

// Per-machine occurrence files: raw little-endian 8-byte ids.
void save_streams(const std::vector<std::vector<std::uint64_t>>& streams,
                  const std::filesystem::path& dir);
std::vector<std::vector<std::uint64_t>> load_streams(const std::filesystem::path& dir,
                                                     std::uint32_t k);

}  // namespace ndv
