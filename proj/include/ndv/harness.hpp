#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ndv/datagen.hpp"
#include "ndv/freq.hpp"

namespace ndv {

// Full description of one experiment: population, sampling, sketch shapes,
// estimator list, and trial seeding. Echoed into every CSV row.
struct ExperimentConfig {
    std::string dist = "poisson";  // poisson | zipf | file
    std::uint64_t n_population = 10'000'000;
    double lambda = 100.0;          // poisson mean
    double skew = 1.2;              // zipf skew
    std::uint64_t zipf_classes = 100'000;
    std::string fof_file;           // dist = file

    double q = 0.01;
    double q_resample = -1.0;  // < 0: same as q
    std::uint32_t k = 64;

    std::vector<int> b_list = {12};
    std::uint32_t cs_depth = 5;
    std::uint32_t cs_width = 20'000;

    std::vector<std::string> estimators;  // empty: the full family

    std::uint64_t seed = 1;
    std::uint32_t trials = 1;

    bool exact_l0 = false;  // oracle mode: exact sets instead of HLL, exact l2^2
    bool timings = false;   // adds a wall-time column (breaks byte-determinism)
    std::uint32_t threads = 0;  // per-machine summarize parallelism; 0 = auto

    // When set, per-trial machine streams are also written under
    // <stream_dir>/trial_NNNN/ as raw little-endian ids (default: in-memory only).
    std::string stream_dir;
};

void validate_config(const ExperimentConfig& cfg);

// The population FoF for cfg (generated or loaded).
Fof population_fof(const ExperimentConfig& cfg);

double resample_rate(const ExperimentConfig& cfg);

// One estimator evaluated over both pipelines.
struct EstimatorRow {
    std::string estimator;
    double value_esti = 0.0;
    double value_exact = 0.0;
    bool ok_esti = false;
    bool ok_exact = false;
    std::string notes_esti;
    std::string notes_exact;
};

// One (trial, b) pipeline run.
struct TrialRow {
    std::uint32_t trial = 0;
    std::uint64_t trial_seed = 0;
    int b = 0;  // 0 in exact-l0 oracle mode

    double pop_distinct = 0.0;  // true D
    double pop_total = 0.0;     // realized N

    FofStats exact;      // d, n, f1, f2, l2sq of the union sample
    double sh_num = 0.0;  // Shlosser correction sums over the exact FoF
    double sh_den = 0.0;

    std::uint64_t n = 0;  // sample size from machine scalars (exact)
    double d_hat = 0.0;
    double f1_hat = 0.0;
    double l2sq_hat = 0.0;
    double d_resample = 0.0;
    double f1_resample = 0.0;

    std::uint64_t merges_estif1 = 0;  // build_premerge + esti_f1 only
    std::uint64_t merges_total = 0;   // plus esti_d and the resample pass
    std::uint64_t bytes_sketch = 0;
    std::uint64_t bytes_dict = 0;
    double wall_ms = 0.0;

    std::vector<EstimatorRow> estimates;
};

std::vector<TrialRow> run_experiment(const ExperimentConfig& cfg);

std::string rows_to_csv(const ExperimentConfig& cfg, const std::vector<TrialRow>& rows);

inline std::string run_experiment_csv(const ExperimentConfig& cfg) {
    return rows_to_csv(cfg, run_experiment(cfg));
}

// HLL error calibration: empirical relative-error spread per (b, cardinality)
// against the 1.04/sqrt(2^b) reference.
struct CalibrationRow {
    int b = 0;
    std::uint64_t cardinality = 0;
    std::uint32_t seeds = 0;
    double mean_rel = 0.0;
    double std_rel = 0.0;
    double theory_std = 0.0;
};

std::vector<CalibrationRow> calibrate(const std::vector<int>& b_list,
                                      const std::vector<std::uint64_t>& cardinalities,
                                      std::uint32_t seeds, std::uint64_t base_seed);

std::string calibrate_csv(const std::vector<CalibrationRow>& rows);

}  // namespace ndv
