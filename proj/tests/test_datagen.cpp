#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "ndv/common.hpp"
#include "ndv/datagen.hpp"
#include "ndv/freq.hpp"

using namespace ndv;

namespace {

double fof_total(const Fof& fof) {
    double t = 0.0;
    for (const auto& [i, f_i] : fof.f) t += static_cast<double>(i) * static_cast<double>(f_i);
    return t;
}

double fof_classes(const Fof& fof) {
    double t = 0.0;
    for (const auto& [i, f_i] : fof.f) t += static_cast<double>(f_i);
    return t;
}

Fof sample_fof(const std::vector<std::vector<std::uint64_t>>& streams) {
    std::vector<FreqDict> locals;
    for (const auto& s : streams) locals.push_back(dict_from_stream(s));
    return fof_from_dict(dict_merge(locals));
}

// Chi-square upper critical value via the Wilson-Hilferty cube approximation.
double chi2_crit(double df, double z) {
    const double a = 2.0 / (9.0 * df);
    const double c = 1.0 - a + z * std::sqrt(a);
    return df * c * c * c;
}

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("poisson population has round(N/lambda) classes concentrated at lambda") {
    const Fof fof = gen_fof_poisson(1'000'000, 50.0, 1);
    CHECK(fof_classes(fof) == 20000.0);
    CHECK(std::abs(fof_total(fof) - 1e6) / 1e6 < 0.01);

    // Mode of the class-size histogram sits near lambda.
    std::uint64_t mode_i = 0;
    std::uint64_t mode_f = 0;
    for (const auto& [i, f_i] : fof.f) {
        if (f_i > mode_f) {
            mode_f = f_i;
            mode_i = i;
        }
    }
    CHECK(mode_i >= 45);
    CHECK(mode_i <= 55);
}

TEST_CASE("degenerate poisson population N = lambda is a single class") {
    const Fof fof = gen_fof_poisson(100, 100.0, 1);
    CHECK(fof_classes(fof) == 1.0);
    CHECK(fof.f.begin()->first >= 85);
    CHECK(fof.f.begin()->first <= 115);
}

TEST_CASE("poisson population rejects bad parameters") {
    CHECK_THROWS_AS(gen_fof_poisson(0, 50.0, 1), ConfigError);
    CHECK_THROWS_AS(gen_fof_poisson(1000, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(gen_fof_poisson(1000, -2.0, 1), ConfigError);
}

TEST_CASE("zipf population matches the closed-form small case") {
    // N=49, s=2, D=3: C = 49 / (1 + 1/4 + 1/9) = 36, sizes {36, 9, 4}.
    const Fof fof = gen_fof_zipf(49, 2.0, 3, 1);
    REQUIRE(fof.f.size() == 3);
    CHECK(fof.f.at(4) == 1);
    CHECK(fof.f.at(9) == 1);
    CHECK(fof.f.at(36) == 1);
}

TEST_CASE("zipf population conserves mass and handles one class") {
    const Fof one = gen_fof_zipf(12345, 1.5, 1, 1);
    REQUIRE(one.f.size() == 1);
    CHECK(one.f.at(12345) == 1);

    const Fof fof = gen_fof_zipf(10'000'000, 1.2, 100'000, 1);
    CHECK(std::abs(fof_total(fof) - 1e7) / 1e7 < 0.01);
    CHECK_THROWS_AS(gen_fof_zipf(1000, 1.0, 10, 1), ConfigError);
    CHECK_THROWS_AS(gen_fof_zipf(1000, 2.0, 0, 1), ConfigError);
}

TEST_CASE("full-rate sampling reproduces the population FoF exactly") {
    const Fof pop = gen_fof_poisson(20000, 20.0, 3);
    const auto streams = sample_population(pop, SamplePlan{1.0, 4, 77});
    CHECK(sample_fof(streams) == pop);
}

TEST_CASE("sample size concentrates on q*N") {
    const Fof pop = gen_fof_poisson(100'000, 50.0, 3);
    const double n_pop = fof_total(pop);
    double mean_n = 0.0;
    const int seeds = 30;
    for (int s = 0; s < seeds; ++s) {
        const auto streams = sample_population(pop, SamplePlan{0.05, 4, 1000 + static_cast<std::uint64_t>(s)});
        std::uint64_t n = 0;
        for (const auto& st : streams) n += st.size();
        mean_n += static_cast<double>(n);
    }
    mean_n /= seeds;
    CHECK(std::abs(mean_n - 0.05 * n_pop) / (0.05 * n_pop) < 0.05);
}

TEST_CASE("singleton-class population yields the Binomial pmf mean for f1") {
    Fof pop;
    pop.f[1] = 1000;
    double mean_f1 = 0.0;
    const int seeds = 100;
    for (int s = 0; s < seeds; ++s) {
        const auto streams = sample_population(pop, SamplePlan{0.01, 2, 50 + static_cast<std::uint64_t>(s)});
        mean_f1 += static_cast<double>(fof_stats(sample_fof(streams)).f1);
    }
    mean_f1 /= seeds;
    CHECK(std::abs(mean_f1 - 10.0) / 10.0 < 0.10);
}

TEST_CASE("sampling guard refuses samples past the occurrence budget") {
    Fof pop;
    pop.f[100'000'000] = 2;  // 2e8 occurrences at q=1
    CHECK_THROWS_AS(sample_population(pop, SamplePlan{1.0, 2, 1}), ResourceError);
    CHECK_THROWS_AS(sample_population(pop, SamplePlan{0.0, 2, 1}), ConfigError);
    CHECK_THROWS_AS(sample_population(pop, SamplePlan{0.5, 0, 1}), ConfigError);
}

TEST_CASE("machine partition is uniform (chi-square, alpha=0.001)") {
    const Fof pop = gen_fof_poisson(50'000, 25.0, 9);
    const std::uint32_t k = 8;
    const double crit = chi2_crit(k - 1, 3.090232);  // z for 0.999
    for (int s = 0; s < 30; ++s) {
        const auto streams = sample_population(pop, SamplePlan{0.2, k, 9000 + static_cast<std::uint64_t>(s)});
        double n = 0.0;
        for (const auto& st : streams) n += static_cast<double>(st.size());
        const double expect = n / k;
        double chi2 = 0.0;
        for (const auto& st : streams) {
            const double diff = static_cast<double>(st.size()) - expect;
            chi2 += diff * diff / expect;
        }
        CHECK(chi2 < crit);
    }
}

TEST_CASE("empirical f1 and d match the exact Binomial expectations within 3 SE") {
    const Fof pop = gen_fof_poisson(200'000, 50.0, 5);  // class sizes well under 200
    const double q = 0.04;

    // Exact expectations under per-class Binomial(i, q) sampling.
    double exact_f1 = 0.0;
    double exact_d = 0.0;
    for (const auto& [i, f_i] : pop.f) {
        const double di = static_cast<double>(i);
        const double df = static_cast<double>(f_i);
        exact_f1 += df * di * q * std::pow(1.0 - q, di - 1.0);
        exact_d += df * (1.0 - std::pow(1.0 - q, di));
    }

    const int seeds = 50;
    std::vector<double> f1s(seeds);
    std::vector<double> ds(seeds);
    for (int s = 0; s < seeds; ++s) {
        const auto streams = sample_population(pop, SamplePlan{q, 4, 400 + static_cast<std::uint64_t>(s)});
        const FofStats st = fof_stats(sample_fof(streams));
        f1s[s] = static_cast<double>(st.f1);
        ds[s] = static_cast<double>(st.d);
    }
    auto mean_and_se = [&](const std::vector<double>& v) {
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= (v.size() - 1);
        return std::pair{mean, std::sqrt(var / v.size())};
    };
    const auto [f1_mean, f1_se] = mean_and_se(f1s);
    const auto [d_mean, d_se] = mean_and_se(ds);
    CHECK(std::abs(f1_mean - exact_f1) < 3.0 * f1_se);
    CHECK(std::abs(d_mean - exact_d) < 3.0 * d_se);

    // The Poissonized expectations approximate the Binomial ones; at
    // i*q = 2 the gap is well under 2% relative.
    const ExpectedSampleStats approx = expected_sample_stats(pop, q);
    CHECK(std::abs(approx.f1 - exact_f1) / exact_f1 < 0.02);
    CHECK(std::abs(approx.d - exact_d) / exact_d < 0.02);
}

TEST_CASE("expected_sample_stats evaluates the Poissonized sums") {
    Fof a;
    a.f[1] = 1000;
    CHECK(expected_sample_stats(a, 0.01).f1 == doctest::Approx(9.90049833749168).epsilon(1e-12));

    Fof b;
    b.f[100] = 10;
    const ExpectedSampleStats st = expected_sample_stats(b, 0.01);
    CHECK(st.f1 == doctest::Approx(3.67879441171442).epsilon(1e-12));
    CHECK(st.d == doctest::Approx(6.32120558828558).epsilon(1e-12));
    CHECK_THROWS_AS(expected_sample_stats(a, 0.0), ConfigError);
    CHECK_THROWS_AS(expected_sample_stats(a, 1.5), ConfigError);
}

TEST_CASE("assumption check: all-singleton population passes any threshold") {
    Fof pop;
    pop.f[1] = 5000;
    const AssumptionCheck res = check_assumption(pop, 0.01, 0.99);
    CHECK(res.ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.passes);
}

TEST_CASE("assumption check: full sampling of multi-occurrence classes fails") {
    Fof pop;
    pop.f[2] = 100;
    pop.f[5] = 50;
    const AssumptionCheck res = check_assumption(pop, 1.0, 0.5);
    CHECK(res.ratio == 0.0);
    CHECK_FALSE(res.passes);
    CHECK_THROWS_AS(check_assumption(pop, 0.01, 0.0), ConfigError);
    CHECK_THROWS_AS(check_assumption(pop, 0.01, 1.0), ConfigError);
}

TEST_CASE("fof files round-trip and reject malformed lines") {
    const auto path = temp_file("ndv_test_fof.csv");
    Fof fof;
    fof.f = {{1, 5}, {2, 3}, {40, 1}};
    save_fof_file(fof, path);
    CHECK(load_fof_file(path) == fof);

    auto write_lines = [&](const char* text) {
        std::ofstream out(path);
        out << text;
    };
    write_lines("1,5\n2,3\n");
    CHECK(load_fof_file(path).f.at(2) == 3);

    write_lines("1,5\n2,-3\n");
    CHECK_THROWS_AS(load_fof_file(path), ParseError);
    write_lines("2,5\n1,3\n");
    CHECK_THROWS_AS(load_fof_file(path), ParseError);
    write_lines("0,5\n");
    CHECK_THROWS_AS(load_fof_file(path), ParseError);
    write_lines("1,0\n");
    CHECK_THROWS_AS(load_fof_file(path), ParseError);
    write_lines("not,a,number\n");
    CHECK_THROWS_AS(load_fof_file(path), ParseError);
    CHECK_THROWS_AS(load_fof_file("/nonexistent/fof.csv"), ResourceError);
    std::filesystem::remove(path);
}

TEST_CASE("machine stream files round-trip") {
    const auto dir = std::filesystem::temp_directory_path() / "ndv_test_streams";
    const std::vector<std::vector<std::uint64_t>> streams = {
        {1, 2, 3}, {}, {0xffffffffffffffffULL, 42}};
    save_streams(streams, dir);
    CHECK(load_streams(dir, 3) == streams);
    CHECK_THROWS_AS(load_streams(dir, 4), ResourceError);
    std::filesystem::remove_all(dir);
}
