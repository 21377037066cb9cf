#ifndef CVLAB_RULES_HPP
#define CVLAB_RULES_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cvlab/dataset.hpp"

namespace cvlab {

/// Output of a learning rule. For prediction tasks, operator() returns the
/// predicted response (or label); for density tasks it returns the density.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual double operator()(std::span<const double> x) const = 0;
    /// Exact ∫ f² for density predictors, empty otherwise.
    virtual std::optional<double> l2_norm_sq() const { return std::nullopt; }
};

using PredictorPtr = std::shared_ptr<const Predictor>;

class LinearPredictor final : public Predictor {
public:
    explicit LinearPredictor(std::vector<double> coefficients) : coef_(std::move(coefficients)) {}
    double operator()(std::span<const double> x) const override;
    const std::vector<double>& coefficients() const noexcept { return coef_; }

private:
    std::vector<double> coef_;
};

/// Piecewise-constant function of one real on [edges.front(), edges.back()].
/// Cells are right-open [a,b) except the last, which is closed.
class StepFunction {
public:
    StepFunction(std::vector<double> edges, std::vector<double> values);

    /// Cell containing x, or -1 when x lies outside the support.
    long cell_of(double x) const noexcept;
    double at(double x) const noexcept;

    const std::vector<double>& edges() const noexcept { return edges_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t cells() const noexcept { return values_.size(); }

private:
    std::vector<double> edges_;
    std::vector<double> values_;
};

class HistogramDensity final : public Predictor {
public:
    explicit HistogramDensity(StepFunction f);
    double operator()(std::span<const double> x) const override { return f_.at(x[0]); }
    std::optional<double> l2_norm_sq() const override { return l2_; }
    const StepFunction& step() const noexcept { return f_; }

private:
    StepFunction f_;
    double l2_;
};

class Regressogram final : public Predictor {
public:
    explicit Regressogram(StepFunction f) : f_(std::move(f)) {}
    double operator()(std::span<const double> x) const override;
    const StepFunction& step() const noexcept { return f_; }

private:
    StepFunction f_;
};

class ConstantPredictor final : public Predictor {
public:
    explicit ConstantPredictor(double value) : value_(value) {}
    double operator()(std::span<const double>) const override { return value_; }
    double value() const noexcept { return value_; }

private:
    double value_;
};

class KnnPredictor final : public Predictor {
public:
    KnnPredictor(Dataset train, std::size_t k);
    double operator()(std::span<const double> x) const override;

private:
    Dataset train_;
    std::size_t k_;
};

/// A pure map from a sub-sample to a predictor.
class LearningRule {
public:
    virtual ~LearningRule() = default;
    virtual PredictorPtr fit(const SubSample& sample) const = 0;
    virtual std::string name() const = 0;

    PredictorPtr fit(const Dataset& ds) const;
};

using RulePtr = std::shared_ptr<const LearningRule>;

enum class TieMode { DeterministicZero, Randomized };

RulePtr ols_rule();
/// OLS on the first k features only (nested linear models).
RulePtr ols_rule(std::size_t k);
RulePtr histogram_rule(double h);
/// Regressogram on the partition of [0,1] given by `edges` (0 = t0 < ... < tk = 1).
RulePtr regressogram_rule(std::vector<double> edges);
RulePtr regular_regressogram_rule(std::size_t cells);
RulePtr knn_rule(std::size_t k);
/// Constant classifier predicting the most frequent label. `seed` drives the
/// coin used by TieMode::Randomized; each fit draws it from a stream keyed by
/// the sub-sample content so refits on the same data agree.
RulePtr majority_vote_rule(TieMode tie, std::uint64_t seed = 0);

/// Tie mode when `rule` is a majority vote rule.
std::optional<TieMode> majority_vote_tie_mode(const LearningRule& rule);

/// Parse "ols", "ols:<k>", "hist:<h>", "regressogram:<cells>", "knn:<k>", "majority",
/// "majority:random[:<seed>]". Throws ConfigError on anything else.
RulePtr rule_from_string(const std::string& spec);

/// Regular histogram on [0,1] with bin width h (1/h must be an integer to 1e-9).
std::shared_ptr<const HistogramDensity> fit_histogram_density(std::span<const double> sample, double h);

/// Cell means over `edges`; empty cells predict 0.
std::shared_ptr<const Regressogram> fit_regressogram(std::span<const double> x, std::span<const double> y,
                                                     std::vector<double> edges);

std::shared_ptr<const ConstantPredictor> fit_majority_vote(std::span<const int> labels, TieMode tie,
                                                           std::uint64_t coin_seed);

enum class Contrast { Quadratic, ZeroOne, DensityLS, DensityLogLik };

std::string to_string(Contrast c);
Contrast contrast_from_string(const std::string& name);
bool is_density_contrast(Contrast c) noexcept;

/// Cost of predictor f at one observation. For DensityLS this is ∫f² - 2 f(x),
/// whose sample mean is the least-squares adequacy functional.
double pointwise_cost(Contrast c, const Predictor& f, std::span<const double> x, double y);

/// Empirical contrast over the sample: mean pointwise cost for prediction
/// contrasts, ∫f² - (2/n')Σ f(X_i) for DensityLS and -(1/n')Σ ln f(X_i) for
/// DensityLogLik. A zero density value makes DensityLogLik return +infinity.
double contrast_eval(Contrast c, const Predictor& f, const SubSample& sample);
double contrast_eval(Contrast c, const Predictor& f, const Dataset& ds);

/// Throws UnsupportedTaskError when `c` cannot score observations of `kind`.
void check_compatible(Contrast c, TaskKind kind);

}  // namespace cvlab

#endif  // CVLAB_RULES_HPP
