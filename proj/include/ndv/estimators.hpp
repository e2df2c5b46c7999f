#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ndv/freq.hpp"

namespace ndv {

// The sampling-based NDV estimator family. Symbols: d / f1 / f2 / n are the
// sample distinct count, singleton count, doubleton count, and size; N the
// population size; q = n/N the sample rate; l2sq the squared second moment
// of the sample frequency vector (sum of i^2 f_i). "Original" forms take the
// full sample FoF; the scalar forms take the handful of statistics that the
// sketch pipeline can estimate. Domain violations throw EstimatorError.

double gee(double d, double f1, double n_population, double n);
double gee_original(const Fof& fof, double n_population, double n);

double chao(double d, double f1, double f2);   // blows up at f2 = 0
double chao2(double d, double f1, double f2);  // bias-corrected, f2 >= 0 fine
double chao3(double d, double f1);             // f2 replaced by d - f1

// Chao-Lee skew estimate: max{ d_hat1 * (l2sq - n) / (n^2 - n - 1), 0 }.
double gamma_sq_chao_lee(double d_hat1, double l2sq, double n);

// Chao-Lee estimator, two algebraically equal routes: the closed form
// (d + f1 * gamma^2) / C and the coverage pipeline d/C + n(1-C)/C * gamma^2,
// both with C = 1 - f1/n and gamma^2 taken at d_hat1 = d/C.
double cl1(double d, double f1, double n, double l2sq);
double cl1_appendix(double d, double f1, double n, double l2sq);

double shlosser_original(const Fof& fof, double q);
double shlosser_adjusted(double d, double f1, double d_resample, double f1_resample);

// Numerator / denominator of the Shlosser correction term:
// sum (1-q)^i f_i  and  sum i q (1-q)^(i-1) f_i.
double shlosser_numerator(const Fof& fof, double q);
double shlosser_denominator(const Fof& fof, double q);

double jackknife_uj1(double d, double f1, double n, double q);

// Method-of-moments skew estimate: max(0, D/n^2 * (l2sq - n) + D/N - 1).
double gamma_sq_haas(double d_hat, double l2sq, double n, double n_population);

double jackknife_uj2(double d, double f1, double n, double q, double l2sq,
                     double n_population);
double jackknife_sj2(double d, double f1, double n, double q, double l2sq,
                     double n_population);

// First factor of the Sh2 estimator, q(1+q)^(Ntilde-1) / ((1+q)^Ntilde - 1).
// sh2_factor replaces it by its q/(1+q) limit once Ntilde > 50 to dodge
// overflow; sh2_factor_exact always evaluates the closed form.
double sh2_factor(double q, double n_tilde);
double sh2_factor_exact(double q, double n_tilde);
double shlosser_sh2(const Fof& fof, double q, double n_population, double d_uj1);

// Quality score max{D_hat/D, D/D_hat} >= 1.
double ratio_error(double d_hat, double d_true);

// ---- Plumbing for the experiment harness ----

// One estimator evaluation's inputs. Scalar fields serve the sketch path;
// fof (optional) serves the exact path. d_resample/f1_resample feed the
// resample-adjusted Shlosser forms.
struct EstimatorInputs {
    double d = 0.0;
    double f1 = 0.0;
    double n = 0.0;
    double n_population = 0.0;
    double q = 0.0;
    std::optional<double> l2sq;
    std::optional<double> d_resample;
    std::optional<double> f1_resample;
    const Fof* fof = nullptr;
};

struct Estimate {
    std::string name;
    double value = 0.0;
    bool ok = false;           // false: undefined on these inputs, see notes
    EstimatorInputs inputs;    // post-sanitation values actually used
    std::string notes;         // clamps applied, value-below-d flag, or error
};

// Clamps sketch-noise inputs into the feasible region 0 <= f1 <= d <= n and
// appends a note per clamp. l2sq is left alone (the gamma^2 forms clamp it).
EstimatorInputs sanitize_inputs(EstimatorInputs in, std::string* notes);

// Known estimator names, in report order.
const std::vector<std::string>& estimator_names();

// Evaluates one named estimator; catches EstimatorError into ok=false.
// `exact_path` picks the FoF-based original form where the two differ
// (shlosser, sh2); sketch-path inputs are sanitized first.
Estimate run_estimator(const std::string& name, const EstimatorInputs& in, bool exact_path);

}  // namespace ndv
