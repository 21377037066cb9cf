#ifndef CVLAB_CRITERIA_HPP
#define CVLAB_CRITERIA_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include <json.hpp>

#include "cvlab/dataset.hpp"
#include "cvlab/rules.hpp"
#include "cvlab/splits.hpp"

namespace cvlab {

/// A cross-validation criterion with its per-split hold-out values.
/// `value` is the mean of `per_split`, summed in plan order.
struct RiskEstimate {
    double value = 0.0;
    std::vector<double> per_split;
    Scheme scheme;
    std::optional<std::size_t> n_e;
};

/// Everything a plan evaluation produces from one pass of fits.
struct PlanEvaluation {
    std::vector<double> holdout;            // contrast of f(D^E_j) on D^{E_j^c}
    std::vector<double> full_sample_of_fold;  // contrast of f(D^E_j) on D_n
    double full_fit_empirical = 0.0;        // contrast of f(D_n) on D_n
    std::vector<PredictorPtr> fold_predictors;  // filled only on request
    PredictorPtr full_predictor;

    double cv() const;
    double corrected() const;
};

/// Fit the rule once per split and once on the full sample.
PlanEvaluation evaluate_plan(const LearningRule& rule, const Dataset& ds, const SplitPlan& plan, Contrast contrast,
                             bool keep_fold_predictors = false);

double holdout_risk(const LearningRule& rule, const Dataset& ds, const Split& split, Contrast contrast);

RiskEstimate cv_risk(const LearningRule& rule, const Dataset& ds, const SplitPlan& plan, Contrast contrast);

/// CV + R̂_n(f(D_n)) - (1/V) Σ_j R̂_n(f(D^{E_j})).
double corrected_cv_risk(const LearningRule& rule, const Dataset& ds, const SplitPlan& plan, Contrast contrast);

/// R̂_n(f(D_n)) + C·pen_vf with pen_vf = corrected CV - R̂_n(f(D_n)).
/// Evaluated as corrected + (C-1)·pen_vf so that C = 1 returns the corrected
/// criterion bit for bit. Requires a V-fold plan and C >= 0.
double vfold_penalized_criterion(const LearningRule& rule, const Dataset& ds, const SplitPlan& plan,
                                 Contrast contrast, double C);
double vfold_penalized_from(const PlanEvaluation& eval, double C);

/// Risk-curve constants: E[R(f(D_n))] = alpha + beta/n and
/// E[R(f(D_n)) - R̂_n(f(D_n))] = gamma/n.
struct TheoreticalModel {
    double alpha = 0.0;
    double beta = 1.0;
    double gamma = 2.0;
};

/// beta·(1/n_e - 1/n), for 1 <= n_e <= n.
double theoretical_bias(const TheoreticalModel& model, std::size_t n, std::size_t n_e);

/// (1/2)(1 + n/n_e), the overpenalization of CV with training size n_e when gamma = 2 beta.
double overpenalization_factor_cv(std::size_t n, std::size_t n_e);

/// 1 + 1/(2(V-1)).
double overpenalization_factor_vfold(std::size_t V);

nlohmann::ordered_json to_json(const RiskEstimate& r);

}  // namespace cvlab

#endif  // CVLAB_CRITERIA_HPP
