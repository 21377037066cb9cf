#include "cvlab/criteria.hpp"

#include <numeric>

#include "cvlab/error.hpp"

namespace cvlab {

namespace {

double mean_in_order(const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
}

void check_plan(const Dataset& ds, const SplitPlan& plan) {
    if (plan.n != ds.size())
        throw ShapeError("plan is for n = " + std::to_string(plan.n) + " but dataset has " +
                         std::to_string(ds.size()) + " rows");
    if (plan.splits.empty()) throw ShapeError("plan holds no splits");
}

}  // namespace

double PlanEvaluation::cv() const { return mean_in_order(holdout); }

double PlanEvaluation::corrected() const {
    return cv() + full_fit_empirical - mean_in_order(full_sample_of_fold);
}

PlanEvaluation evaluate_plan(const LearningRule& rule, const Dataset& ds, const SplitPlan& plan, Contrast contrast,
                             bool keep_fold_predictors) {
    check_plan(ds, plan);
    check_compatible(contrast, ds.kind());
    std::vector<std::size_t> all(ds.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const SubSample full{ds, all};

    PlanEvaluation out;
    out.full_predictor = rule.fit(full);
    out.full_fit_empirical = contrast_eval(contrast, *out.full_predictor, full);
    out.holdout.reserve(plan.size());
    out.full_sample_of_fold.reserve(plan.size());
    for (const Split& split : plan.splits) {
        const auto predictor = rule.fit(SubSample{ds, split.train()});
        const auto validation = split.validation();
        out.holdout.push_back(contrast_eval(contrast, *predictor, SubSample{ds, validation}));
        out.full_sample_of_fold.push_back(contrast_eval(contrast, *predictor, full));
        if (keep_fold_predictors) out.fold_predictors.push_back(predictor);
    }
    return out;
}

double holdout_risk(const LearningRule& rule, const Dataset& ds, const Split& split, Contrast contrast) {
    if (split.n() != ds.size()) throw ShapeError("split and dataset sizes differ");
    check_compatible(contrast, ds.kind());
    const auto predictor = rule.fit(SubSample{ds, split.train()});
    const auto validation = split.validation();
    return contrast_eval(contrast, *predictor, SubSample{ds, validation});
}

RiskEstimate cv_risk(const LearningRule& rule, const Dataset& ds, const SplitPlan& plan, Contrast contrast) {
    check_plan(ds, plan);
    RiskEstimate r;
    r.per_split.reserve(plan.size());
    for (const Split& split : plan.splits) r.per_split.push_back(holdout_risk(rule, ds, split, contrast));
    r.value = mean_in_order(r.per_split);
    r.scheme = plan.scheme;
    r.n_e = plan.n_e;
    return r;
}

double corrected_cv_risk(const LearningRule& rule, const Dataset& ds, const SplitPlan& plan, Contrast contrast) {
    return evaluate_plan(rule, ds, plan, contrast).corrected();
}

double vfold_penalized_from(const PlanEvaluation& eval, double C) {
    if (!(C >= 0.0)) throw BoundsError("overpenalization constant must be >= 0");
    const double corrected = eval.corrected();
    if (C == 1.0) return corrected;  // also exact when pen_vf is infinite
    const double pen_vf = corrected - eval.full_fit_empirical;
    return corrected + (C - 1.0) * pen_vf;
}

double vfold_penalized_criterion(const LearningRule& rule, const Dataset& ds, const SplitPlan& plan,
                                 Contrast contrast, double C) {
    if (plan.scheme.kind != Scheme::Kind::VFold)
        throw SchemeError("V-fold penalization needs a V-fold plan, got " + plan.scheme.label());
    return vfold_penalized_from(evaluate_plan(rule, ds, plan, contrast), C);
}

double theoretical_bias(const TheoreticalModel& model, std::size_t n, std::size_t n_e) {
    if (n_e < 1 || n_e > n) throw BoundsError("theoretical bias needs 1 <= n_e <= n");
    return model.beta * (1.0 / static_cast<double>(n_e) - 1.0 / static_cast<double>(n));
}

double overpenalization_factor_cv(std::size_t n, std::size_t n_e) {
    if (n_e < 1 || n_e > n) throw BoundsError("overpenalization factor needs 1 <= n_e <= n");
    return 0.5 * (1.0 + static_cast<double>(n) / static_cast<double>(n_e));
}

double overpenalization_factor_vfold(std::size_t V) {
    if (V < 2) throw BoundsError("V-fold overpenalization needs V >= 2");
    return 1.0 + 1.0 / (2.0 * static_cast<double>(V - 1));
}

nlohmann::ordered_json to_json(const RiskEstimate& r) {
    nlohmann::ordered_json j;
    j["value"] = r.value;
    j["n_e"] = r.n_e ? nlohmann::ordered_json(*r.n_e) : nlohmann::ordered_json(nullptr);
    j["scheme"] = to_json(r.scheme);
    j["per_split"] = r.per_split;
    return j;
}

}  // namespace cvlab
