#include "ndv/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "ndv/coordinator.hpp"
#include "ndv/estimators.hpp"
#include "ndv/exact_l0.hpp"
#include "ndv/hll.hpp"

namespace ndv {

namespace {

// Seed-derivation tags, one per random stream.
constexpr std::uint64_t kTagTrial = 0x74;
constexpr std::uint64_t kTagSample = 0x01;
constexpr std::uint64_t kTagHll = 0x02;
constexpr std::uint64_t kTagCs = 0x03;
constexpr std::uint64_t kTagResample = 0x1000;  // + machine index

void parallel_for(std::size_t count, std::uint32_t threads, auto&& body) {
    std::uint32_t n_threads = threads == 0 ? std::thread::hardware_concurrency() : threads;
    n_threads = std::max<std::uint32_t>(1, std::min<std::size_t>(n_threads, count));
    if (n_threads == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::mutex mu;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::uint32_t t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < count; i += n_threads) body(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(mu);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

struct ExactPath {
    Fof fof;
    FofStats stats;
    double sh_num = 0.0;
    double sh_den = 0.0;
};

ExactPath exact_path(const std::vector<std::vector<std::uint64_t>>& streams, double q) {
    std::vector<FreqDict> locals;
    locals.reserve(streams.size());
    for (const auto& stream : streams) locals.push_back(dict_from_stream(stream));
    ExactPath out;
    out.fof = fof_from_dict(dict_merge(locals));
    out.stats = fof_stats(out.fof);
    out.sh_num = shlosser_numerator(out.fof, q);
    out.sh_den = shlosser_denominator(out.fof, q);
    return out;
}

struct SketchPath {
    std::uint64_t n = 0;
    double d_hat = 0.0;
    double f1_hat = 0.0;
    double l2sq_hat = 0.0;
    double d_resample = 0.0;
    double f1_resample = 0.0;
    std::uint64_t merges_estif1 = 0;
    std::uint64_t merges_total = 0;
    std::uint64_t bytes_sketch = 0;
    std::uint64_t bytes_dict = 0;
};

template <typename L0, typename MakeL0>
SketchPath sketch_path(const std::vector<std::vector<std::uint64_t>>& streams,
                       const MakeL0& make_l0, const ExperimentConfig& cfg,
                       std::uint64_t trial_seed) {
    const std::size_t k = streams.size();
    const double q_res = resample_rate(cfg);

    // Machine side, one summary per machine, independent and parallel.
    std::vector<std::optional<MachineSummary<L0>>> built(k);
    parallel_for(k, cfg.threads, [&](std::size_t m) {
        SummaryConfig scfg;
        scfg.cs_depth = cfg.cs_depth;
        scfg.cs_width = cfg.cs_width;
        scfg.cs_seed = derive_seed(trial_seed, kTagCs);
        scfg.q_resample = q_res;
        scfg.resample_seed = derive_seed(trial_seed, kTagResample + m);
        built[m] = summarize_machine<L0>(streams[m], make_l0, scfg);
    });

    // Coordinator side: everything crosses the wire once, bytes tallied.
    CommLedger ledger;
    std::vector<MachineSummary<L0>> received;
    received.reserve(k);
    for (auto& slot : built) {
        MachineSummary<L0>& s = *slot;
        RoleBytes rb;
        MachineSummary<L0> r{transfer(s.ndv_sketch, &rb.ndv),
                             transfer(s.f1_sketch, &rb.f1),
                             transfer(s.cs, &rb.cs),
                             transfer(s.resample_ndv, &rb.resample),
                             transfer(s.resample_f1, &rb.resample),
                             s.n_local,
                             s.d_local,
                             s.dict_bytes};
        rb.scalars = 16;
        ledger.per_machine.push_back(rb);
        ledger.dict_bytes += s.dict_bytes;
        received.push_back(std::move(r));
        slot.reset();
    }

    SketchPath out;
    for (const auto& s : received) out.n += s.n_local;

    std::vector<L0> ndv;
    ndv.reserve(k);
    for (const auto& s : received) ndv.push_back(s.ndv_sketch);
    PMTree<L0> tree = build_premerge(std::move(ndv));

    std::uint64_t merges = tree.merge_count;
    out.f1_hat = esti_f1(tree, received, &merges);
    out.merges_estif1 = merges;
    out.d_hat = esti_d(tree, &merges);
    out.l2sq_hat = esti_l2sq(received);
    const ResampleEstimate res = esti_resample(received, &merges);
    out.d_resample = res.d;
    out.f1_resample = res.f1;
    out.merges_total = merges;

    out.bytes_sketch = ledger.sketch_total();
    out.bytes_dict = ledger.dict_bytes;
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string csv_safe(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    return s;
}

}  // namespace

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.dist != "poisson" && cfg.dist != "zipf" && cfg.dist != "file") {
        throw ConfigError("dist must be poisson, zipf, or file");
    }
    if (cfg.dist == "file" && cfg.fof_file.empty()) {
        throw ConfigError("dist=file needs a FoF path");
    }
    if (cfg.dist != "file" && cfg.n_population == 0) {
        throw ConfigError("population size must be positive");
    }
    if (cfg.dist == "poisson" && !(cfg.lambda > 0.0)) {
        throw ConfigError("poisson lambda must be positive");
    }
    if (cfg.dist == "zipf" && !(cfg.skew > 1.0)) throw ConfigError("zipf skew must exceed 1");
    if (cfg.dist == "zipf" && cfg.zipf_classes == 0) {
        throw ConfigError("zipf class count must be positive");
    }
    if (!(cfg.q > 0.0) || cfg.q > 1.0) throw ConfigError("sample rate must be in (0, 1]");
    if (cfg.q_resample >= 0.0 && (!(cfg.q_resample > 0.0) || cfg.q_resample > 1.0)) {
        throw ConfigError("resample rate must be in (0, 1]");
    }
    if (cfg.k == 0) throw ConfigError("machine count must be positive");
    if (cfg.b_list.empty() && !cfg.exact_l0) throw ConfigError("need at least one b value");
    for (int b : cfg.b_list) {
        if (b < HllSketch::kMinBits || b > HllSketch::kMaxBits) {
            throw ConfigError("b values must lie in [4, 20]");
        }
    }
    if (cfg.cs_depth == 0 || cfg.cs_width == 0) {
        throw ConfigError("count sketch shape must be positive");
    }
    if (cfg.trials == 0) throw ConfigError("need at least one trial");
    for (const auto& name : cfg.estimators) {
        const auto& known = estimator_names();
        if (std::find(known.begin(), known.end(), name) == known.end()) {
            throw ConfigError("unknown estimator: " + name);
        }
    }
}

Fof population_fof(const ExperimentConfig& cfg) {
    if (cfg.dist == "poisson") return gen_fof_poisson(cfg.n_population, cfg.lambda, cfg.seed);
    if (cfg.dist == "zipf") {
        return gen_fof_zipf(cfg.n_population, cfg.skew, cfg.zipf_classes, cfg.seed);
    }
    return load_fof_file(cfg.fof_file);
}

double resample_rate(const ExperimentConfig& cfg) {
    return cfg.q_resample < 0.0 ? cfg.q : cfg.q_resample;
}

std::vector<TrialRow> run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const Fof pop = population_fof(cfg);

    double pop_distinct = 0.0;
    double pop_total = 0.0;
    for (const auto& [i, f_i] : pop.f) {
        pop_distinct += static_cast<double>(f_i);
        pop_total += static_cast<double>(i) * static_cast<double>(f_i);
    }

    const std::vector<std::string>& wanted =
        cfg.estimators.empty() ? estimator_names() : cfg.estimators;

    std::vector<TrialRow> rows;
    for (std::uint32_t trial = 0; trial < cfg.trials; ++trial) {
        const std::uint64_t trial_seed = derive_seed(cfg.seed, kTagTrial + trial);
        SamplePlan plan{cfg.q, cfg.k, derive_seed(trial_seed, kTagSample)};
        const auto streams = sample_population(pop, plan);
        if (!cfg.stream_dir.empty()) {
            char sub[32];
            std::snprintf(sub, sizeof(sub), "trial_%04u", trial);
            save_streams(streams, std::filesystem::path(cfg.stream_dir) / sub);
        }
        const ExactPath exact = exact_path(streams, cfg.q);

        // Oracle mode runs once with exact sets (b is meaningless there).
        const std::vector<int> b_values = cfg.exact_l0 ? std::vector<int>{0} : cfg.b_list;
        for (int b : b_values) {
            const auto t0 = std::chrono::steady_clock::now();
            SketchPath sp;
            if (cfg.exact_l0) {
                sp = sketch_path<ExactL0>(
                    streams, [] { return ExactL0(); }, cfg, trial_seed);
                sp.l2sq_hat = exact.stats.l2sq;  // oracle mode bypasses the CS
            } else {
                const std::uint64_t hll_seed = derive_seed(trial_seed, kTagHll);
                sp = sketch_path<HllSketch>(
                    streams, [&] { return HllSketch(b, hll_seed); }, cfg, trial_seed);
            }
            const auto t1 = std::chrono::steady_clock::now();

            TrialRow row;
            row.trial = trial;
            row.trial_seed = trial_seed;
            row.b = b;
            row.pop_distinct = pop_distinct;
            row.pop_total = pop_total;
            row.exact = exact.stats;
            row.sh_num = exact.sh_num;
            row.sh_den = exact.sh_den;
            row.n = sp.n;
            row.d_hat = sp.d_hat;
            row.f1_hat = sp.f1_hat;
            row.l2sq_hat = sp.l2sq_hat;
            row.d_resample = sp.d_resample;
            row.f1_resample = sp.f1_resample;
            row.merges_estif1 = sp.merges_estif1;
            row.merges_total = sp.merges_total;
            row.bytes_sketch = sp.bytes_sketch;
            row.bytes_dict = sp.bytes_dict;
            row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

            EstimatorInputs esti_in;
            esti_in.d = sp.d_hat;
            esti_in.f1 = sp.f1_hat;
            esti_in.n = static_cast<double>(sp.n);
            esti_in.n_population = pop_total;
            esti_in.q = cfg.q;
            esti_in.l2sq = sp.l2sq_hat;
            esti_in.d_resample = sp.d_resample;
            esti_in.f1_resample = sp.f1_resample;

            EstimatorInputs exact_in;
            exact_in.d = static_cast<double>(exact.stats.d);
            exact_in.f1 = static_cast<double>(exact.stats.f1);
            exact_in.n = static_cast<double>(exact.stats.n);
            exact_in.n_population = pop_total;
            exact_in.q = cfg.q;
            exact_in.l2sq = exact.stats.l2sq;
            exact_in.fof = &exact.fof;

            for (const auto& name : wanted) {
                const Estimate esti = run_estimator(name, esti_in, /*exact_path=*/false);
                const Estimate ex = run_estimator(name, exact_in, /*exact_path=*/true);
                EstimatorRow er;
                er.estimator = name;
                er.value_esti = esti.value;
                er.value_exact = ex.value;
                er.ok_esti = esti.ok;
                er.ok_exact = ex.ok;
                er.notes_esti = esti.notes;
                er.notes_exact = ex.notes;
                row.estimates.push_back(std::move(er));
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string rows_to_csv(const ExperimentConfig& cfg, const std::vector<TrialRow>& rows) {
    std::ostringstream out;
    out << "dist,n_population,lambda,skew,q,q_resample,k,b,cs_depth,cs_width,trial,seed,"
           "pop_distinct,pop_total,n,exact_d,exact_f1,exact_f2,exact_l2sq,sh_num,sh_den,"
           "est_d,est_f1,est_l2sq,est_d_resample,est_f1_resample,"
           "estimator,value_esti,value_exact,rel_error,ratio_esti,ratio_exact,"
           "notes_esti,notes_exact,bytes_sketch,bytes_dict,merges_estif1,merges_total";
    if (cfg.timings) out << ",wall_ms";
    out << '\n';

    for (const TrialRow& row : rows) {
        for (const EstimatorRow& er : row.estimates) {
            out << cfg.dist << ',' << cfg.n_population << ',' << fmt(cfg.lambda) << ','
                << fmt(cfg.skew) << ',' << fmt(cfg.q) << ',' << fmt(resample_rate(cfg)) << ','
                << cfg.k << ',' << row.b << ',' << cfg.cs_depth << ',' << cfg.cs_width << ','
                << row.trial << ',' << row.trial_seed << ',' << fmt(row.pop_distinct) << ','
                << fmt(row.pop_total) << ',' << row.n << ',' << row.exact.d << ','
                << row.exact.f1 << ',' << row.exact.f2 << ',' << fmt(row.exact.l2sq) << ','
                << fmt(row.sh_num) << ',' << fmt(row.sh_den) << ',' << fmt(row.d_hat) << ','
                << fmt(row.f1_hat) << ',' << fmt(row.l2sq_hat) << ',' << fmt(row.d_resample)
                << ',' << fmt(row.f1_resample) << ',' << er.estimator << ',';

            out << (er.ok_esti ? fmt(er.value_esti) : "NA") << ','
                << (er.ok_exact ? fmt(er.value_exact) : "NA") << ',';

            if (er.ok_esti && er.ok_exact && er.value_exact != 0.0) {
                out << fmt(std::abs(er.value_esti - er.value_exact) /
                           std::abs(er.value_exact));
            } else {
                out << "NA";
            }
            out << ',';
            if (er.ok_esti && er.value_esti > 0.0 && row.pop_distinct > 0.0) {
                out << fmt(ratio_error(er.value_esti, row.pop_distinct));
            } else {
                out << "NA";
            }
            out << ',';
            if (er.ok_exact && er.value_exact > 0.0 && row.pop_distinct > 0.0) {
                out << fmt(ratio_error(er.value_exact, row.pop_distinct));
            } else {
                out << "NA";
            }
            out << ',' << csv_safe(er.notes_esti) << ',' << csv_safe(er.notes_exact) << ','
                << row.bytes_sketch << ',' << row.bytes_dict << ',' << row.merges_estif1
                << ',' << row.merges_total;
            if (cfg.timings) out << ',' << fmt(row.wall_ms);
            out << '\n';
        }
    }
    return out.str();
}

std::vector<CalibrationRow> calibrate(const std::vector<int>& b_list,
                                      const std::vector<std::uint64_t>& cardinalities,
                                      std::uint32_t seeds, std::uint64_t base_seed) {
    if (b_list.empty()) throw ConfigError("calibrate needs at least one b value");
    if (cardinalities.empty()) throw ConfigError("calibrate needs at least one cardinality");
    if (seeds == 0) throw ConfigError("calibrate needs at least one seed");
    for (int b : b_list) {
        if (b < HllSketch::kMinBits || b > HllSketch::kMaxBits) {
            throw ConfigError("b values must lie in [4, 20]");
        }
    }

    std::vector<CalibrationRow> rows;
    for (int b : b_list) {
        for (std::uint64_t card : cardinalities) {
            std::vector<double> rel(seeds);
            parallel_for(seeds, 0, [&](std::size_t s) {
                HllSketch h(b, derive_seed(base_seed, (static_cast<std::uint64_t>(b) << 32) ^ s));
                // Distinct inputs; the sketch's own seeded hash scatters them.
                for (std::uint64_t j = 0; j < card; ++j) h.insert(j);
                rel[s] = (h.estimate() - static_cast<double>(card)) / static_cast<double>(card);
            });
            CalibrationRow row;
            row.b = b;
            row.cardinality = card;
            row.seeds = seeds;
            double mean = 0.0;
            for (double r : rel) mean += r;
            mean /= static_cast<double>(seeds);
            double var = 0.0;
            for (double r : rel) var += (r - mean) * (r - mean);
            var = seeds > 1 ? var / static_cast<double>(seeds - 1) : 0.0;
            row.mean_rel = mean;
            row.std_rel = std::sqrt(var);
            row.theory_std = 1.04 / std::sqrt(static_cast<double>(1ULL << b));
            rows.push_back(row);
        }
    }
    return rows;
}

std::string calibrate_csv(const std::vector<CalibrationRow>& rows) {
    std::ostringstream out;
    out << "b,cardinality,seeds,mean_rel_err,std_rel_err,theory_std\n";
    for (const auto& row : rows) {
        out << row.b << ',' << row.cardinality << ',' << row.seeds << ',' << fmt(row.mean_rel)
            << ',' << fmt(row.std_rel) << ',' << fmt(row.theory_std) << '\n';
    }
    return out.str();
}

}  // namespace ndv
