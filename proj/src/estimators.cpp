#include "ndv/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ndv/common.hpp"

namespace ndv {

namespace {

double fof_lookup(const Fof& fof, std::uint64_t i) {
    const auto it = fof.f.find(i);
    return it == fof.f.end() ? 0.0 : static_cast<double>(it->second);
}

double fof_distinct(const Fof& fof) {
    double d = 0.0;
    for (const auto& [i, f_i] : fof.f) d += static_cast<double>(f_i);
    return d;
}

void require(bool ok, const char* what) {
    if (!ok) throw EstimatorError(what);
}

}  // namespace

double gee(double d, double f1, double n_population, double n) {
    require(n >= 1.0, "gee needs a non-empty sample");
    require(n_population >= n, "gee needs N >= n");
    return d + (std::sqrt(n_population / n) - 1.0) * f1;
}

double gee_original(const Fof& fof, double n_population, double n) {
    require(n >= 1.0, "gee needs a non-empty sample");
    require(n_population >= n, "gee needs N >= n");
    const double f1 = fof_lookup(fof, 1);
    return std::sqrt(n_population / n) * f1 + (fof_distinct(fof) - f1);
}

double chao(double d, double f1, double f2) {
    require(f2 > 0.0, "chao blows up at f2 = 0");
    return d + f1 * f1 / (2.0 * f2);
}

double chao2(double d, double f1, double f2) {
    require(f2 >= 0.0, "chao2 needs f2 >= 0");
    return d + f1 * (f1 - 1.0) / (2.0 * (f2 + 1.0));
}

double chao3(double d, double f1) {
    if (f1 <= 0.0) return d;
    require(d > f1, "chao3 is undefined on an all-singleton sample");
    return d + 0.5 * f1 * f1 / (d - f1);
}

double gamma_sq_chao_lee(double d_hat1, double l2sq, double n) {
    require(n >= 2.0, "gamma^2 needs n >= 2");
    return std::max(d_hat1 * (l2sq - n) / (n * n - n - 1.0), 0.0);
}

double cl1(double d, double f1, double n, double l2sq) {
    require(f1 < n, "cl1 has zero sample coverage at f1 = n");
    const double coverage = 1.0 - f1 / n;
    const double gamma_sq = gamma_sq_chao_lee(d / coverage, l2sq, n);
    return (d + f1 * gamma_sq) / coverage;
}

double cl1_appendix(double d, double f1, double n, double l2sq) {
    require(f1 < n, "cl1 has zero sample coverage at f1 = n");
    const double coverage = 1.0 - f1 / n;
    const double gamma_sq = gamma_sq_chao_lee(d / coverage, l2sq, n);
    return d / coverage + n * (1.0 - coverage) / coverage * gamma_sq;
}

double shlosser_numerator(const Fof& fof, double q) {
    double sum = 0.0;
    for (const auto& [i, f_i] : fof.f) {
        sum += std::pow(1.0 - q, static_cast<double>(i)) * static_cast<double>(f_i);
    }
    return sum;
}

double shlosser_denominator(const Fof& fof, double q) {
    double sum = 0.0;
    for (const auto& [i, f_i] : fof.f) {
        sum += static_cast<double>(i) * q * std::pow(1.0 - q, static_cast<double>(i) - 1.0) *
               static_cast<double>(f_i);
    }
    return sum;
}

double shlosser_original(const Fof& fof, double q) {
    require(q > 0.0 && q <= 1.0, "shlosser needs q in (0, 1]");
    const double d = fof_distinct(fof);
    const double f1 = fof_lookup(fof, 1);
    if (f1 <= 0.0) return d;
    const double num = shlosser_numerator(fof, q);
    if (num <= 0.0) return d;  // q = 1: nothing unseen
    const double den = shlosser_denominator(fof, q);
    require(den > 0.0, "shlosser denominator vanished");
    return d + f1 * num / den;
}

double shlosser_adjusted(double d, double f1, double d_resample, double f1_resample) {
    if (f1 <= 0.0) return d;
    require(f1_resample > 0.0, "resample has no singletons; re-draw the resample");
    return d + f1 * (d - d_resample) / f1_resample;
}

double jackknife_uj1(double d, double f1, double n, double q) {
    require(n >= 1.0, "uj1 needs a non-empty sample");
    require(q > 0.0 && q <= 1.0, "uj1 needs q in (0, 1]");
    const double shrink = 1.0 - (1.0 - q) * f1 / n;
    require(shrink > 0.0, "uj1 is undefined at (1-q) f1 >= n");
    return d / shrink;
}

double gamma_sq_haas(double d_hat, double l2sq, double n, double n_population) {
    require(n >= 1.0, "gamma^2 needs a non-empty sample");
    require(n_population >= 1.0, "gamma^2 needs a non-empty population");
    return std::max(0.0, d_hat / (n * n) * (l2sq - n) + d_hat / n_population - 1.0);
}

double jackknife_uj2(double d, double f1, double n, double q, double l2sq,
                     double n_population) {
    const double uj1 = jackknife_uj1(d, f1, n, q);
    const double gamma_sq = gamma_sq_haas(uj1, l2sq, n, n_population);
    // ln(1-q) < 0 makes the correction additive; it vanishes at q = 1.
    const double correction =
        q < 1.0 ? f1 * (1.0 - q) * std::log1p(-q) * gamma_sq / q : 0.0;
    return (d - correction) / (1.0 - (1.0 - q) * f1 / n);
}

double jackknife_sj2(double d, double f1, double n, double q, double l2sq,
                     double n_population) {
    const double uj1 = jackknife_uj1(d, f1, n, q);
    require(uj1 > 0.0, "sj2 needs a positive first-order estimate");
    if (q >= 1.0) return d;
    const double n_tilde = n_population / uj1;
    const double miss = std::pow(1.0 - q, n_tilde);  // P[a class is fully missed]
    const double gamma_sq = gamma_sq_haas(uj1, l2sq, n, n_population);
    return (d - miss * std::log1p(-q) * n_population * gamma_sq) / (1.0 - miss);
}

double sh2_factor_exact(double q, double n_tilde) {
    require(q > 0.0, "sh2 needs q > 0");
    require(n_tilde > 0.0, "sh2 needs a positive average class size");
    return q * std::pow(1.0 + q, n_tilde - 1.0) / (std::pow(1.0 + q, n_tilde) - 1.0);
}

double sh2_factor(double q, double n_tilde) {
    require(q > 0.0, "sh2 needs q > 0");
    require(n_tilde > 0.0, "sh2 needs a positive average class size");
    if (n_tilde > 50.0) return q / (1.0 + q);
    return sh2_factor_exact(q, n_tilde);
}

double shlosser_sh2(const Fof& fof, double q, double n_population, double d_uj1) {
    require(q > 0.0 && q <= 1.0, "sh2 needs q in (0, 1]");
    require(d_uj1 > 0.0, "sh2 needs a positive first-order estimate");
    const double d = fof_distinct(fof);
    const double f1 = fof_lookup(fof, 1);
    if (f1 <= 0.0) return d;
    const double num = shlosser_numerator(fof, q);
    if (num <= 0.0) return d;
    const double den = shlosser_denominator(fof, q);
    require(den > 0.0, "sh2 denominator vanished");
    return d + f1 * sh2_factor(q, n_population / d_uj1) * num / den;
}

double ratio_error(double d_hat, double d_true) {
    require(d_hat > 0.0 && d_true > 0.0, "ratio error needs positive estimates");
    return std::max(d_hat / d_true, d_true / d_hat);
}

EstimatorInputs sanitize_inputs(EstimatorInputs in, std::string* notes) {
    auto note = [&](const char* what) {
        if (!notes) return;
        if (!notes->empty()) notes->push_back(' ');
        notes->append(what);
    };
    if (in.f1 < 0.0) {
        in.f1 = 0.0;
        note("clamp:f1<0");
    }
    if (in.d < 0.0) {
        in.d = 0.0;
        note("clamp:d<0");
    }
    if (in.d > in.n) {
        in.d = in.n;
        note("clamp:d>n");
    }
    if (in.f1 > in.d) {
        in.f1 = in.d;
        note("clamp:f1>d");
    }
    if (in.d_resample) {
        if (*in.d_resample < 0.0) {
            in.d_resample = 0.0;
            note("clamp:d_res<0");
        }
        if (*in.d_resample > in.d) {
            in.d_resample = in.d;
            note("clamp:d_res>d");
        }
    }
    if (in.f1_resample) {
        if (*in.f1_resample < 0.0) {
            in.f1_resample = 0.0;
            note("clamp:f1_res<0");
        }
        if (in.d_resample && *in.f1_resample > *in.d_resample) {
            in.f1_resample = *in.d_resample;
            note("clamp:f1_res>d_res");
        }
    }
    return in;
}

const std::vector<std::string>& estimator_names() {
    static const std::vector<std::string> names = {
        "gee", "chao", "chao2", "chao3", "cl1", "shlosser", "uj1", "uj2", "sj2", "sh2",
    };
    return names;
}

namespace {

double need_l2sq(const EstimatorInputs& in) {
    if (!in.l2sq) throw EstimatorError("estimator needs an l2^2 estimate");
    return *in.l2sq;
}

const Fof& need_fof(const EstimatorInputs& in) {
    if (!in.fof) throw EstimatorError("estimator needs the sample FoF");
    return *in.fof;
}

double need_resample(const EstimatorInputs& in, double& d_res) {
    if (!in.d_resample || !in.f1_resample) {
        throw EstimatorError("estimator needs resample estimates");
    }
    d_res = *in.d_resample;
    return *in.f1_resample;
}

double dispatch(const std::string& name, const EstimatorInputs& in, bool exact_path) {
    if (name == "gee") {
        return exact_path && in.fof ? gee_original(*in.fof, in.n_population, in.n)
                                    : gee(in.d, in.f1, in.n_population, in.n);
    }
    if (name == "chao") {
        if (!exact_path) throw EstimatorError("chao needs f2, which sketches do not carry");
        return chao(in.d, in.f1, fof_lookup(need_fof(in), 2));
    }
    if (name == "chao2") {
        if (!exact_path) throw EstimatorError("chao2 needs f2, which sketches do not carry");
        return chao2(in.d, in.f1, fof_lookup(need_fof(in), 2));
    }
    if (name == "chao3") return chao3(in.d, in.f1);
    if (name == "cl1") return cl1(in.d, in.f1, in.n, need_l2sq(in));
    if (name == "shlosser") {
        if (exact_path) return shlosser_original(need_fof(in), in.q);
        double d_res = 0.0;
        const double f1_res = need_resample(in, d_res);
        return shlosser_adjusted(in.d, in.f1, d_res, f1_res);
    }
    if (name == "uj1") return jackknife_uj1(in.d, in.f1, in.n, in.q);
    if (name == "uj2") {
        return jackknife_uj2(in.d, in.f1, in.n, in.q, need_l2sq(in), in.n_population);
    }
    if (name == "sj2") {
        return jackknife_sj2(in.d, in.f1, in.n, in.q, need_l2sq(in), in.n_population);
    }
    if (name == "sh2") {
        const double uj1 = jackknife_uj1(in.d, in.f1, in.n, in.q);
        if (exact_path) return shlosser_sh2(need_fof(in), in.q, in.n_population, uj1);
        // Resample route: (d - d_res)/f1_res approximates the Shlosser
        // correction ratio, as for the adjusted estimator.
        if (in.f1 <= 0.0) return in.d;
        double d_res = 0.0;
        const double f1_res = need_resample(in, d_res);
        require(f1_res > 0.0, "resample has no singletons; re-draw the resample");
        return in.d +
               in.f1 * sh2_factor(in.q, in.n_population / uj1) * (in.d - d_res) / f1_res;
    }
    throw ConfigError("unknown estimator: " + name);
}

}  // namespace

Estimate run_estimator(const std::string& name, const EstimatorInputs& in, bool exact_path) {
    Estimate out;
    out.name = name;
    out.inputs = exact_path ? in : sanitize_inputs(in, &out.notes);
    try {
        out.value = dispatch(name, out.inputs, exact_path);
        out.ok = std::isfinite(out.value);
        if (!out.ok) {
            out.notes += out.notes.empty() ? "" : " ";
            out.notes += "error:non-finite";
        } else if (out.value < out.inputs.d * (1.0 - 1e-12)) {
            // Estimators add unseen mass, so a value below d signals noisy
            // inputs; flagged rather than clamped.
            out.notes += out.notes.empty() ? "" : " ";
            out.notes += "flag:value<d";
        }
    } catch (const EstimatorError& e) {
        out.ok = false;
        out.value = std::numeric_limits<double>::quiet_NaN();
        out.notes += out.notes.empty() ? "" : " ";
        out.notes += "error:";
        out.notes += e.what();
    }
    return out;
}

}  // namespace ndv
