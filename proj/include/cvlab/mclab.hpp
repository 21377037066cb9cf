#ifndef CVLAB_MCLAB_HPP
#define CVLAB_MCLAB_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvlab/criteria.hpp"
#include "cvlab/dataset.hpp"
#include "cvlab/rules.hpp"
#include "cvlab/select.hpp"
#include "cvlab/splits.hpp"

namespace cvlab::mclab {

// True risks -----------------------------------------------------------------

/// A risk value; `exact` is false when it came from a Monte-Carlo test set,
/// in which case `stderr` is the standard error of that estimate.
struct RiskValue {
    double value = 0.0;
    double stderr = 0.0;
    bool exact = true;
};

/// Test-set size and seed used when no closed form applies.
struct FallbackPolicy {
    std::size_t test_size = 100'000;
    std::uint64_t seed = 0;
};

/// R_P(f) = E[c(f; X, Y)] under the generator. Closed forms:
///  - DensityLS / DensityLogLik with a histogram predictor and a piecewise-constant truth;
///  - Quadratic with a linear predictor (either feature law) or a regressogram (uniform law, d = 1);
///  - ZeroOne with Bernoulli labels.
/// Other combinations fall back to a Monte-Carlo test set.
RiskValue true_risk(const Predictor& f, const DataGenerator& gen, Contrast contrast, const FallbackPolicy& fb = {});

/// R_P of the best possible output (Bayes risk).
double bayes_risk(const DataGenerator& gen, Contrast contrast);

/// ℓ(f*, f) = R_P(f) - R_P(f*). For DensityLS this is ∫(f - f*)².
RiskValue excess_risk(const Predictor& f, const DataGenerator& gen, Contrast contrast, const FallbackPolicy& fb = {});

/// Var(c(f; X, Y)) for a fixed predictor.
RiskValue conditional_cost_variance(const Predictor& f, const DataGenerator& gen, Contrast contrast,
                                    const FallbackPolicy& fb = {});

// Moments ----------------------------------------------------------------------

struct Moments {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;         // divisor count - 1
    double stderr_mean = 0.0;      // sqrt(variance / count)
    double stderr_variance = 0.0;  // delta method on the fourth central moment
};

Moments moments_of(std::span<const double> values);

/// Outcome of a two-sided equality test at 3 standard errors.
struct Comparison {
    double lhs = 0.0;
    double rhs = 0.0;
    double stderr = 0.0;  // of lhs - rhs
    bool pass = false;

    double z() const { return stderr > 0 ? (lhs - rhs) / stderr : 0.0; }
};

inline constexpr double kStderrBand = 3.0;

Comparison compare(double lhs, double rhs, double stderr);

// Plans ------------------------------------------------------------------------

/// Scheme recipe that can be instantiated for any n and seed.
struct PlanSpec {
    Scheme::Kind kind = Scheme::Kind::VFold;
    std::size_t V = 5;
    std::size_t n_e = 0;  // Holdout and MonteCarlo
    std::size_t p = 1;    // LeavePOut
    std::size_t L = 1;    // RepeatedVFold

    std::string label() const;
};

/// "holdout:<ne>", "vfold:<V>", "mc:<ne>:<V>", "loo", "lpo:<p>", "rvfold:<V>:<L>".
PlanSpec plan_spec_from_string(const std::string& spec);
SplitPlan make_plan(const PlanSpec& spec, std::size_t n, std::uint64_t seed,
                    std::uint64_t max_splits = kDefaultMaxSplits);

// Experiments ------------------------------------------------------------------

struct ExperimentConfig {
    DataGenerator generator = PiecewiseConstantDensity::uniform();
    std::size_t n = 50;
    RuleMenu rules;
    Contrast contrast = Contrast::DensityLS;
    std::vector<PlanSpec> schemes;
    std::size_t replicates = 100;
    std::uint64_t master_seed = 0;
    /// Reuse one plan per scheme for every replicate (conditional law).
    bool frozen_plans = false;
    std::size_t jobs = 1;
    /// Test-set policy for risks without a closed form; the seed is a base
    /// from which per-replicate streams are derived.
    FallbackPolicy fallback;
};

/// Throws ConfigError unless R >= 2, the menu is nonempty and every scheme is valid for n.
void validate(const ExperimentConfig& config);

struct CellReport {
    std::string rule;
    std::string scheme;
    Moments cv;
    Moments corrected;
    Moments risk_full;  // R_P(f(D_n))
    Moments risk_fold;  // mean over j of R_P(f(D^{E_j}))
    Moments bias_cv;    // cv - risk_full, paired
    Moments bias_corrected;
};

struct IncrementReport {
    std::string rule_a;
    std::string rule_b;
    std::string scheme;
    Moments cv;         // cv(a) - cv(b)
    Moments corrected;  // corrected(a) - corrected(b)
};

struct MomentReport {
    std::size_t replicates = 0;
    std::size_t failures = 0;
    std::vector<std::string> failure_messages;  // first few only
    std::vector<CellReport> cells;
    std::vector<IncrementReport> increments;

    const CellReport& cell(const std::string& rule, const std::string& scheme) const;
    const IncrementReport& increment(const std::string& a, const std::string& b, const std::string& scheme) const;
};

/// R datasets from derived seeds; every criterion on freshly drawn plans
/// (unless frozen); moments reduced in replicate order.
MomentReport run_experiment(const ExperimentConfig& config);

nlohmann::ordered_json to_json(const Moments& m);
nlohmann::ordered_json to_json(const MomentReport& report);
std::string to_csv(const MomentReport& report);

// Law checks -------------------------------------------------------------------

/// Shared inputs of the statistical checks. Each check draws its datasets from
/// streams derived from `seed` and a check-specific tag.
struct LawSetup {
    DataGenerator generator = PiecewiseConstantDensity::uniform();
    std::size_t n = 50;
    RulePtr rule;
    Contrast contrast = Contrast::DensityLS;
    std::size_t replicates = 1000;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    bool frozen_plans = false;
    FallbackPolicy fallback;
};

/// Mean corrected CV against mean R_P(f(D_n)), paired on the same datasets.
Comparison corrected_unbiasedness_check(const LawSetup& setup, const PlanSpec& scheme);

/// Mean plain CV against mean R_P(f(D_{n_e})) on independent fresh samples of size n_e.
Comparison expectation_law_check(const LawSetup& setup, const PlanSpec& scheme);

struct RiskCurveFit {
    std::vector<std::size_t> sizes;
    std::vector<Moments> risk;  // R_P(f(D_m)) per size
    double alpha = 0.0;
    double beta = 0.0;
    double stderr_alpha = 0.0;
    double stderr_beta = 0.0;
};

/// Weighted least squares of E[R_P(f(D_m))] against 1/m.
RiskCurveFit fit_risk_curve(const LawSetup& setup, std::span<const std::size_t> sizes);

struct BiasLawReport {
    RiskCurveFit curve;
    Moments empirical_bias;           // CV - R_P(f(D_n)), paired
    double predicted_bias = 0.0;      // beta_hat (1/n_e - 1/n)
    double stderr_predicted = 0.0;
    Comparison against_prediction;
    Comparison against_zero;
};

BiasLawReport bias_law_check(const LawSetup& setup, const PlanSpec& scheme, std::span<const std::size_t> curve_sizes);

struct VarianceOrderingReport {
    Moments holdout;
    Moments monte_carlo;
    Moments leave_p_out;
    bool holdout_ge_mc = false;
    bool mc_ge_lpo = false;
    bool pass() const { return holdout_ge_mc && mc_ge_lpo; }
};

/// Var(hold-out) >= Var(MC-CV with V splits) >= Var(leave-p-out) at fixed n_e,
/// each inequality allowed 3 combined standard errors of slack.
VarianceOrderingReport variance_ordering_check(const LawSetup& setup, std::size_t n_e, std::size_t V);

struct AffineFit {
    std::vector<double> x;  // 1/V or 1/L
    std::vector<Moments> variance;
    double intercept = 0.0;
    double slope = 0.0;
    double stderr_intercept = 0.0;
    double stderr_slope = 0.0;
    double r_squared = 0.0;
    std::optional<Moments> limit;  // directly enumerated leave-p-out variance
    std::optional<Comparison> intercept_vs_limit;
    bool slope_nonnegative = false;
    bool intercept_nonnegative = false;
};

/// Ordinary least squares of Var(MC-CV) against 1/V over V_grid.
AffineFit affine_in_inv_V_check(const LawSetup& setup, std::size_t n_e, std::span<const std::size_t> V_grid,
                                bool enumerate_limit = true);

/// Same law for repeated V-fold against 1/L; the limit is leave-(n/V)-out when enumerable.
AffineFit repeated_vfold_variance_check(const LawSetup& setup, std::size_t V, std::span<const std::size_t> L_grid,
                                        bool enumerate_limit = true);

// Variance constants of the regular-histogram density setting.
double c1_vf(std::size_t V, double n);
double c2_vf(std::size_t V, double n);
double c1_mc(std::size_t V, double n, double n_e);
double c2_mc(std::size_t V, double n, double n_e);

struct VarianceFitReport {
    std::size_t n = 0;
    std::vector<std::size_t> V;  // fit pair then test value
    std::vector<Moments> observed;
    std::vector<double> predicted;
    double W1_hat = 0.0;
    double W2_hat = 0.0;
    double relative_error = 0.0;  // at the test V
    double r_squared = 0.0;
};

/// Solve (1/n²) C1(V) W1 + (1/n) C2(V) W2 = Var(V-fold) at the two fit values
/// of V and predict the variance at V_test. Throws ConditioningError for a
/// singular 2x2 system.
VarianceFitReport variance_constant_cross_prediction(const LawSetup& setup, std::size_t V_fit_a, std::size_t V_fit_b,
                                                     std::size_t V_test);

struct HoldoutDecompositionReport {
    Moments total;           // Var of the hold-out criterion
    Moments risk_of_fit;     // R_P(f(D^E)) values; variance is the first term
    Moments cost_variance;   // Var(c | f) values; mean / |E^c| is the second term
    double first_term = 0.0;
    double second_term = 0.0;
    Comparison decomposition;
};

/// Var(hold-out) against Var(R_P(f(D^E))) + E[Var(c | f(D^E))] / n_val, the two
/// sides estimated on independent datasets (training size n_e, validation size n_val).
HoldoutDecompositionReport holdout_variance_decomposition_check(const LawSetup& setup, std::size_t n_e,
                                                                std::size_t n_val);

struct SmartnessPoint {
    std::size_t n = 0;
    double mean_risk = 0.0;
    double stderr = 0.0;
    bool exact = false;
    bool increase = false;  // mean risk above the previous size
};

struct SmartnessReport {
    std::vector<SmartnessPoint> curve;
    bool smart() const;
};

/// Mean risk against sample size. Exact binomial sums for majority vote under
/// Bernoulli labels; Monte-Carlo over `replicates` datasets otherwise.
SmartnessReport smartness_probe(const LearningRule& rule, const DataGenerator& gen, Contrast contrast,
                                std::span<const std::size_t> sizes, std::size_t replicates = 1000,
                                std::uint64_t seed = 0, std::size_t jobs = 1);

struct SweepReport {
    std::vector<double> C;
    std::vector<double> mean_ratio;
    std::vector<double> stderr_ratio;
    std::vector<double> expected_penalty;  // per menu entry
    std::size_t best = 0;
    double C_star() const { return C.at(best); }
};

/// For each C: m_C = argmin R̂_n(f_m(D_n)) + C·E[pen_id(m)] with E[pen_id]
/// estimated on independent replicates, and the mean over `replicates` datasets
/// of ℓ(f*, f_{m_C}) / min_m ℓ(f*, f_m).
SweepReport surpenalization_sweep(const RuleMenu& menu, const DataGenerator& gen, Contrast contrast, std::size_t n,
                                  std::span<const double> C_grid, std::size_t replicates, std::uint64_t seed,
                                  std::size_t jobs = 1);

nlohmann::ordered_json to_json(const Comparison& c);
nlohmann::ordered_json to_json(const AffineFit& f);
nlohmann::ordered_json to_json(const VarianceFitReport& r);

}  // namespace cvlab::mclab

#endif  // CVLAB_MCLAB_HPP
