// ndv — experiment workbench for distributed sampling-based NDV estimation.
//
// Subcommands:
//   generate          write a population frequency-of-frequency CSV
//   run               sample, summarize, estimate; emit one CSV row per
//                     (trial, b, estimator)
//   calibrate         empirical HyperLogLog error table
//   check-assumption  E[f1]/E[d] feasibility ratio for a population at rate q
//
// Exit codes: 0 success, 2 usage/config error, 1 runtime error.
// If NDV_OUTPUT_DIR is set, relative --output paths land inside it.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ndv/common.hpp"
#include "ndv/datagen.hpp"
#include "ndv/harness.hpp"

namespace {

std::filesystem::path resolve_output(const std::string& out) {
    std::filesystem::path path(out);
    if (path.is_relative()) {
        if (const char* dir = std::getenv("NDV_OUTPUT_DIR")) {
            path = std::filesystem::path(dir) / path;
        }
    }
    return path;
}

void write_text(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    const auto path = resolve_output(out);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw ndv::ResourceError("cannot open output file: " + path.string());
    f << text;
    if (!f) throw ndv::ResourceError("short write to output file: " + path.string());
}

void add_population_flags(CLI::App* cmd, ndv::ExperimentConfig* cfg) {
    cmd->add_option("--dist", cfg->dist, "Population distribution: poisson, zipf, or file")
        ->check(CLI::IsMember({"poisson", "zipf", "file"}));
    cmd->add_option("--n", cfg->n_population, "Population size N");
    cmd->add_option("--lambda", cfg->lambda, "Poisson mean class size");
    cmd->add_option("--skew", cfg->skew, "Zipf skew (> 1)");
    cmd->add_option("--classes", cfg->zipf_classes, "Zipf class count D");
    cmd->add_option("--fof", cfg->fof_file, "FoF CSV path for --dist file");
}

int dispatch(CLI::App& app, const CLI::App* gen, const CLI::App* run, const CLI::App* cal,
             const CLI::App* chk, ndv::ExperimentConfig& cfg, const std::string& output,
             const std::vector<int>& cal_b, const std::vector<std::uint64_t>& cal_cards,
             std::uint32_t cal_seeds, double assume_c) {
    if (app.got_subcommand(gen)) {
        const ndv::Fof fof = ndv::population_fof(cfg);
        std::ostringstream text;
        for (const auto& [i, f_i] : fof.f) text << i << ',' << f_i << '\n';
        write_text(output, text.str());
        return 0;
    }
    if (app.got_subcommand(run)) {
        write_text(output, ndv::run_experiment_csv(cfg));
        return 0;
    }
    if (app.got_subcommand(cal)) {
        write_text(output, ndv::calibrate_csv(ndv::calibrate(cal_b, cal_cards, cal_seeds,
                                                             cfg.seed)));
        return 0;
    }
    if (app.got_subcommand(chk)) {
        const ndv::Fof fof = ndv::population_fof(cfg);
        const ndv::AssumptionCheck res = ndv::check_assumption(fof, cfg.q, assume_c);
        std::ostringstream text;
        text << "ratio=" << res.ratio << " e_f1=" << res.e_f1 << " e_d=" << res.e_d
             << " threshold=" << assume_c << " passes=" << (res.passes ? "true" : "false")
             << '\n';
        write_text(output, text.str());
        return 0;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed sampling-based NDV estimation workbench"};
    app.require_subcommand(1);

    ndv::ExperimentConfig cfg;
    std::string output;
    std::vector<int> cal_b = {10, 12, 14};
    std::vector<std::uint64_t> cal_cards = {1'000'000};
    std::uint32_t cal_seeds = 100;
    double assume_c = 0.5;

    CLI::App* gen = app.add_subcommand("generate", "Write a population FoF CSV");
    add_population_flags(gen, &cfg);
    gen->add_option("--seed", cfg.seed, "Base seed");
    gen->add_option("-o,--output", output, "Output path (default stdout)");

    CLI::App* run = app.add_subcommand("run", "Run the sampling + estimation experiment");
    add_population_flags(run, &cfg);
    run->add_option("--q", cfg.q, "Sample rate in (0, 1]");
    run->add_option("--q-resample", cfg.q_resample, "Resample rate (default: same as --q)");
    run->add_option("--k", cfg.k, "Machine count");
    run->add_option("--b", cfg.b_list, "HyperLogLog index bits (repeatable or comma-separated)")->delimiter(',');
    run->add_option("--cs-depth", cfg.cs_depth, "Count Sketch rows");
    run->add_option("--cs-width", cfg.cs_width, "Count Sketch buckets per row");
    run->add_option("--estimators", cfg.estimators, "Estimator subset, comma-separated (default: all)")->delimiter(',');
    run->add_option("--seed", cfg.seed, "Base seed");
    run->add_option("--trials", cfg.trials, "Trials (distinct sample seeds)");
    run->add_flag("--exact-l0", cfg.exact_l0, "Oracle mode: exact sets instead of sketches");
    run->add_flag("--timings", cfg.timings, "Add wall_ms column (not byte-deterministic)");
    run->add_option("--save-streams", cfg.stream_dir,
                    "Also write per-trial machine streams under this directory");
    run->add_option("--threads", cfg.threads, "Summarize parallelism (0 = auto)");
    run->add_option("-o,--output", output, "Output path (default stdout)");

    CLI::App* cal = app.add_subcommand("calibrate", "Empirical HLL relative-error table");
    cal->add_option("--b", cal_b, "HyperLogLog index bits (repeatable or comma-separated)")->delimiter(',');
    cal->add_option("--cardinality", cal_cards, "True cardinalities (repeatable or comma-separated)")->delimiter(',');
    cal->add_option("--seeds", cal_seeds, "Independent sketch seeds per cell");
    cal->add_option("--seed", cfg.seed, "Base seed");
    cal->add_option("-o,--output", output, "Output path (default stdout)");

    CLI::App* chk = app.add_subcommand("check-assumption",
                                       "Feasibility ratio E[f1]/E[d] for a population");
    add_population_flags(chk, &cfg);
    chk->add_option("--q", cfg.q, "Sample rate in (0, 1]");
    chk->add_option("--c", assume_c, "Required singleton fraction, in (0, 1)")->required();
    chk->add_option("--seed", cfg.seed, "Base seed");
    chk->add_option("-o,--output", output, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        return dispatch(app, gen, run, cal, chk, cfg, output, cal_b, cal_cards, cal_seeds,
                        assume_c);
    } catch (const ndv::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
