#include "ndv/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include "ndv/hash.hpp"

namespace ndv {

namespace {

constexpr double kMaxExpectedSample = 1e8;  // refuse plans that would materialize more
constexpr std::uint64_t kClassByClassLimit = 10000;

double poisson_log_pmf(std::uint64_t i, double lambda) {
    return static_cast<double>(i) * std::log(lambda) - lambda -
           std::lgamma(static_cast<double>(i) + 1.0);
}

// log C(n, c) for the Binomial pmf in log space.
double log_choose(std::uint64_t n, std::uint64_t c) {
    return std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(c) + 1.0) -
           std::lgamma(static_cast<double>(n - c) + 1.0);
}

double binom_pmf(std::uint64_t c, std::uint64_t n, double q) {
    if (q >= 1.0) return c == n ? 1.0 : 0.0;
    if (q <= 0.0) return c == 0 ? 1.0 : 0.0;
    const double lp = log_choose(n, c) + static_cast<double>(c) * std::log(q) +
                      static_cast<double>(n - c) * std::log1p(-q);
    return std::exp(lp);
}

std::string machine_file_name(std::uint32_t machine) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "machine_%04u.bin", machine);
    return buf;
}

}  // namespace

Fof gen_fof_poisson(std::uint64_t n_population, double lambda, std::uint64_t /*seed*/) {
    if (n_population == 0) throw ConfigError("population size must be positive");
    if (!(lambda > 0.0)) throw ConfigError("poisson lambda must be positive");

    const auto class_count =
        static_cast<std::uint64_t>(std::llround(static_cast<double>(n_population) / lambda));
    if (class_count == 0) throw ConfigError("population smaller than one poisson class");

    const auto hi = static_cast<std::uint64_t>(
        std::ceil(lambda + 12.0 * std::sqrt(lambda)));

    // Window-normalized CDF over class sizes [1, hi]; cumulative rounding keeps
    // the class total exactly class_count and drops no probability mass at the
    // window edges.
    std::vector<double> pmf(hi + 1, 0.0);
    double total = 0.0;
    for (std::uint64_t i = 1; i <= hi; ++i) {
        pmf[i] = std::exp(poisson_log_pmf(i, lambda));
        total += pmf[i];
    }
    if (!(total > 0.0)) throw ConfigError("poisson window has no probability mass");

    Fof fof;
    double cdf = 0.0;
    std::uint64_t assigned = 0;
    for (std::uint64_t i = 1; i <= hi; ++i) {
        cdf += pmf[i];
        const auto upto = static_cast<std::uint64_t>(
            std::llround(static_cast<double>(class_count) * std::min(cdf / total, 1.0)));
        if (upto > assigned) fof.f[i] += upto - assigned;
        assigned = upto;
    }
    if (assigned < class_count) fof.f[hi] += class_count - assigned;
    return fof;
}

Fof gen_fof_zipf(std::uint64_t n_population, double skew, std::uint64_t class_count,
                 std::uint64_t /*seed*/) {
    if (n_population == 0) throw ConfigError("population size must be positive");
    if (class_count == 0) throw ConfigError("zipf class count must be positive");
    if (!(skew > 1.0)) throw ConfigError("zipf skew must exceed 1");

    std::vector<double> weights(class_count);
    double harmonic = 0.0;
    for (std::uint64_t j = 1; j <= class_count; ++j) {
        weights[j - 1] = std::pow(static_cast<double>(j), -skew);
        harmonic += weights[j - 1];
    }

    auto sizes_for = [&](double scale) {
        std::vector<std::uint64_t> sizes(class_count);
        for (std::uint64_t j = 0; j < class_count; ++j) {
            sizes[j] = std::max<std::uint64_t>(
                1, static_cast<std::uint64_t>(std::llround(scale * weights[j])));
        }
        return sizes;
    };
    auto total_of = [](const std::vector<std::uint64_t>& sizes) {
        std::uint64_t t = 0;
        for (auto s : sizes) t += s;
        return t;
    };

    double scale = static_cast<double>(n_population) / harmonic;
    auto sizes = sizes_for(scale);
    auto total = total_of(sizes);

    // The max(1, .) floor inflates the total when many tail classes round to
    // zero; one corrective rescale keeps the drift within 0.5%.
    const auto drift = [&] {
        return std::abs(static_cast<double>(total) - static_cast<double>(n_population)) /
               static_cast<double>(n_population);
    };
    if (drift() > 0.005) {
        scale *= static_cast<double>(n_population) / static_cast<double>(total);
        sizes = sizes_for(scale);
        total = total_of(sizes);
    }

    Fof fof;
    for (auto s : sizes) fof.f[s] += 1;
    return fof;
}

std::vector<std::vector<std::uint64_t>> sample_population(const Fof& population,
                                                          const SamplePlan& plan) {
    if (!(plan.q > 0.0) || plan.q > 1.0) throw ConfigError("sample rate must be in (0, 1]");
    if (plan.k == 0) throw ConfigError("machine count must be positive");

    std::uint64_t n_population = 0;
    for (const auto& [i, f_i] : population.f) {
        if (i == 0) throw ConfigError("class size zero in population histogram");
        n_population += i * f_i;
    }
    if (plan.q * static_cast<double>(n_population) > kMaxExpectedSample) {
        throw ResourceError("expected sample exceeds the 1e8 occurrence budget");
    }

    std::mt19937_64 rng(derive_seed(plan.seed, /*tag=*/1));
    const std::uint64_t id_seed = derive_seed(plan.seed, /*tag=*/2);
    std::uniform_int_distribution<std::uint32_t> pick_machine(0, plan.k - 1);

    std::vector<std::vector<std::uint64_t>> streams(plan.k);
    std::uint64_t class_counter = 0;

    // Sampled classes get fresh ids; every occurrence of a class carries the
    // same id no matter which machine it lands on.
    auto emit_class = [&](std::uint64_t count) {
        const std::uint64_t id = hash64(class_counter++, id_seed);
        for (std::uint64_t r = 0; r < count; ++r) streams[pick_machine(rng)].push_back(id);
    };

    for (const auto& [i, f_i] : population.f) {
        if (f_i <= kClassByClassLimit) {
            std::binomial_distribution<std::uint64_t> binom(i, plan.q);
            for (std::uint64_t c = 0; c < f_i; ++c) {
                const std::uint64_t drawn = binom(rng);
                if (drawn > 0) emit_class(drawn);
            }
            continue;
        }
        // Multinomial split of the f_i classes over sampled-count buckets
        // 0..i, drawn as a chain of conditional Binomials.
        std::uint64_t remaining = f_i;
        double mass_left = 1.0;
        for (std::uint64_t c = 0; c <= i && remaining > 0; ++c) {
            std::uint64_t bucket;
            if (c == i) {
                bucket = remaining;
            } else {
                const double p = binom_pmf(c, i, plan.q);
                const double cond = std::clamp(mass_left > 0.0 ? p / mass_left : 1.0, 0.0, 1.0);
                bucket = std::binomial_distribution<std::uint64_t>(remaining, cond)(rng);
                mass_left -= p;
            }
            if (c > 0) {
                for (std::uint64_t r = 0; r < bucket; ++r) emit_class(c);
            }
            remaining -= bucket;
        }
    }
    return streams;
}

ExpectedSampleStats expected_sample_stats(const Fof& population, double q) {
    if (!(q > 0.0) || q > 1.0) throw ConfigError("sample rate must be in (0, 1]");
    ExpectedSampleStats out;
    for (const auto& [i, f_i] : population.f) {
        const double iq = static_cast<double>(i) * q;
        const double classes = static_cast<double>(f_i);
        out.f1 += classes * iq * std::exp(-iq);
        out.d += classes * (-std::expm1(-iq));
    }
    return out;
}

AssumptionCheck check_assumption(const Fof& population, double q, double c) {
    if (!(q > 0.0) || q > 1.0) throw ConfigError("sample rate must be in (0, 1]");
    if (!(c > 0.0) || c >= 1.0) throw ConfigError("threshold must be in (0, 1)");

    AssumptionCheck out;
    for (const auto& [i, f_i] : population.f) {
        const double classes = static_cast<double>(f_i);
        const double di = static_cast<double>(i);
        if (q >= 1.0) {
            out.e_f1 += i == 1 ? classes : 0.0;
            out.e_d += classes;
            continue;
        }
        // Exact Binomial(i, q) expectations: P[exactly one kept] and
        // P[at least one kept].
        out.e_f1 += classes * di * q * std::pow(1.0 - q, di - 1.0);
        out.e_d += classes * (-std::expm1(di * std::log1p(-q)));
    }
    out.ratio = out.e_d > 0.0 ? out.e_f1 / out.e_d : 0.0;
    out.passes = out.ratio >= c;
    return out;
}

Fof load_fof_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ResourceError("cannot open FoF file: " + path.string());

    Fof fof;
    std::string line;
    std::uint64_t line_no = 0;
    std::uint64_t prev_i = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::uint64_t i = 0;
        std::uint64_t count = 0;
        char extra = 0;
        const int got = std::sscanf(line.c_str(), "%llu,%llu%c",
                                    reinterpret_cast<unsigned long long*>(&i),
                                    reinterpret_cast<unsigned long long*>(&count), &extra);
        if (got != 2 || line.find('-') != std::string::npos) {
            throw ParseError("FoF line " + std::to_string(line_no) + " is not \"i,F_i\": " + line);
        }
        if (i == 0 || count == 0) {
            throw ParseError("FoF line " + std::to_string(line_no) + " must have i>0 and F_i>0");
        }
        if (i <= prev_i) {
            throw ParseError("FoF line " + std::to_string(line_no) + " breaks ascending i order");
        }
        prev_i = i;
        fof.f[i] = count;
    }
    return fof;
}

void save_fof_file(const Fof& fof, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ResourceError("cannot write FoF file: " + path.string());
    for (const auto& [i, count] : fof.f) out << i << ',' << count << '\n';
    if (!out) throw ResourceError("short write to FoF file: " + path.string());
}

void save_streams(const std::vector<std::vector<std::uint64_t>>& streams,
                  const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (std::uint32_t m = 0; m < streams.size(); ++m) {
        std::ofstream out(dir / machine_file_name(m), std::ios::binary);
        if (!out) throw ResourceError("cannot write machine stream in " + dir.string());
        for (std::uint64_t id : streams[m]) {
            unsigned char bytes[8];
            for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(id >> (8 * b));
            out.write(reinterpret_cast<const char*>(bytes), sizeof(bytes));
        }
        if (!out) throw ResourceError("short write to machine stream in " + dir.string());
    }
}

std::vector<std::vector<std::uint64_t>> load_streams(const std::filesystem::path& dir,
                                                     std::uint32_t k) {
    std::vector<std::vector<std::uint64_t>> streams(k);
    for (std::uint32_t m = 0; m < k; ++m) {
        const auto path = dir / machine_file_name(m);
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ResourceError("cannot open machine stream: " + path.string());
        unsigned char bytes[8];
        while (in.read(reinterpret_cast<char*>(bytes), sizeof(bytes))) {
            std::uint64_t id = 0;
            for (int b = 0; b < 8; ++b) id |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
            streams[m].push_back(id);
        }
        if (in.gcount() != 0) {
            throw DecodeError("machine stream has a truncated id: " + path.string());
        }
    }
    return streams;
}

}  // namespace ndv
