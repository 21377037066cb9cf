#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "cvlab/error.hpp"
#include "cvlab/mclab.hpp"
#include "cvlab/parallel.hpp"
#include "cvlab/rng.hpp"

namespace cvlab::mclab {

namespace {

void require_rule(const LawSetup& setup) {
    if (!setup.rule) throw ConfigError("law check needs a rule");
    if (setup.replicates < 2) throw ConfigError("law check needs at least 2 replicates");
}

double combined(double a, double b) { return std::sqrt(a * a + b * b); }

// Seed of the plan used in replicate r of a check stream.
std::uint64_t plan_seed(const LawSetup& setup, std::string_view tag, std::size_t stream, std::size_t r) {
    return derive_seed(setup.seed, tag, stream, setup.frozen_plans ? 0 : r + 1);
}

double risk_of(const LawSetup& setup, const Predictor& f, std::uint64_t seed) {
    FallbackPolicy fb = setup.fallback;
    fb.seed = seed;
    return true_risk(f, setup.generator, setup.contrast, fb).value;
}

// Plain CV criteria of `spec` on fresh datasets of size n, one per replicate.
std::vector<double> cv_values(const LawSetup& setup, const PlanSpec& spec, std::size_t n, std::string_view tag,
                              std::size_t stream) {
    return parallel_map<double>(setup.replicates, setup.jobs, [&](std::size_t r) {
        const Dataset ds = generate(setup.generator, n, derive_seed(setup.seed, tag, stream, r));
        const SplitPlan plan = make_plan(spec, n, plan_seed(setup, tag, stream, r));
        return cv_risk(*setup.rule, ds, plan, setup.contrast).value;
    });
}

// R_P(f(D_m)) on fresh datasets of size m.
std::vector<double> risk_values(const LawSetup& setup, std::size_t m, std::string_view tag, std::size_t stream) {
    return parallel_map<double>(setup.replicates, setup.jobs, [&](std::size_t r) {
        const Dataset ds = generate(setup.generator, m, derive_seed(setup.seed, tag, stream, r));
        return risk_of(setup, *setup.rule->fit(ds), derive_seed(setup.seed, tag, stream, r + setup.replicates));
    });
}

std::size_t constant_training_size(const PlanSpec& spec, std::size_t n) {
    const SplitPlan probe = make_plan(spec, n, 0);
    if (!probe.n_e) throw SchemeError("scheme " + spec.label() + " has no constant training size");
    return *probe.n_e;
}

struct LineFit {
    double intercept, slope, se_intercept, se_slope, r_squared;
};

// Least squares of y on (1, x). With weights w_k = 1/se_k² the coefficient
// errors come from (XᵀWX)⁻¹; unweighted fits propagate se_k through the
// linear coefficient maps.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& se,
                 bool weighted) {
    const std::size_t K = x.size();
    Eigen::MatrixXd X(K, 2);
    Eigen::VectorXd Y(K), W(K);
    for (std::size_t k = 0; k < K; ++k) {
        X(k, 0) = 1.0;
        X(k, 1) = x[k];
        Y[k] = y[k];
        W[k] = weighted && se[k] > 0 ? 1.0 / (se[k] * se[k]) : 1.0;
    }
    const Eigen::Matrix2d A = X.transpose() * W.asDiagonal() * X;
    Eigen::FullPivLU<Eigen::Matrix2d> lu(A);
    if (!lu.isInvertible()) throw ConditioningError("line fit needs at least two distinct abscissae");
    const Eigen::Matrix2d Ainv = lu.inverse();
    const Eigen::MatrixXd maps = Ainv * X.transpose() * W.asDiagonal();  // coefficient = maps · Y
    const Eigen::Vector2d beta = maps * Y;
    double se_a = 0.0, se_b = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        se_a += maps(0, k) * maps(0, k) * se[k] * se[k];
        se_b += maps(1, k) * maps(1, k) * se[k] * se[k];
    }
    const double mean_y = Y.mean();
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const double fit = beta[0] + beta[1] * x[k];
        ss_res += (y[k] - fit) * (y[k] - fit);
        ss_tot += (y[k] - mean_y) * (y[k] - mean_y);
    }
    return {beta[0], beta[1], std::sqrt(se_a), std::sqrt(se_b), ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0};
}

AffineFit affine_fit(std::vector<double> x, std::vector<Moments> variance) {
    std::vector<double> y, se;
    for (const auto& m : variance) {
        y.push_back(m.variance);
        se.push_back(m.stderr_variance);
    }
    const LineFit f = fit_line(x, y, se, false);
    AffineFit out;
    out.x = std::move(x);
    out.variance = std::move(variance);
    out.intercept = f.intercept;
    out.slope = f.slope;
    out.stderr_intercept = f.se_intercept;
    out.stderr_slope = f.se_slope;
    out.r_squared = f.r_squared;
    out.slope_nonnegative = f.slope >= -kStderrBand * f.se_slope;
    out.intercept_nonnegative = f.intercept >= -kStderrBand * f.se_intercept;
    return out;
}

void attach_limit(AffineFit& fit, const Moments& limit) {
    fit.limit = limit;
    fit.intercept_vs_limit =
        compare(fit.intercept, limit.variance, combined(fit.stderr_intercept, limit.stderr_variance));
}

}  // namespace

Comparison corrected_unbiasedness_check(const LawSetup& setup, const PlanSpec& scheme) {
    require_rule(setup);
    const auto pairs = parallel_map<std::array<double, 2>>(setup.replicates, setup.jobs, [&](std::size_t r) {
        const Dataset ds = generate(setup.generator, setup.n, derive_seed(setup.seed, "unbiased", r));
        const SplitPlan plan = make_plan(scheme, setup.n, plan_seed(setup, "unbiased", 0, r));
        const auto eval = evaluate_plan(*setup.rule, ds, plan, setup.contrast);
        return std::array<double, 2>{eval.corrected(),
                                     risk_of(setup, *eval.full_predictor, derive_seed(setup.seed, "unbiased/test", r))};
    });
    std::vector<double> lhs, rhs, diff;
    for (const auto& [c, t] : pairs) {
        lhs.push_back(c);
        rhs.push_back(t);
        diff.push_back(c - t);
    }
    return compare(moments_of(lhs).mean, moments_of(rhs).mean, moments_of(diff).stderr_mean);
}

Comparison expectation_law_check(const LawSetup& setup, const PlanSpec& scheme) {
    require_rule(setup);
    const std::size_t n_e = constant_training_size(scheme, setup.n);
    const Moments cv = moments_of(cv_values(setup, scheme, setup.n, "expectation/cv", 0));
    const Moments risk = moments_of(risk_values(setup, n_e, "expectation/fresh", 0));
    return compare(cv.mean, risk.mean, combined(cv.stderr_mean, risk.stderr_mean));
}

RiskCurveFit fit_risk_curve(const LawSetup& setup, std::span<const std::size_t> sizes) {
    require_rule(setup);
    if (sizes.size() < 2) throw ConfigError("risk curve needs at least two sample sizes");
    RiskCurveFit out;
    std::vector<double> x, y, se;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        if (sizes[k] == 0) throw BoundsError("risk curve sizes must be positive");
        out.sizes.push_back(sizes[k]);
        out.risk.push_back(moments_of(risk_values(setup, sizes[k], "curve", k)));
        x.push_back(1.0 / static_cast<double>(sizes[k]));
        y.push_back(out.risk.back().mean);
        se.push_back(out.risk.back().stderr_mean);
    }
    const bool weighted = std::all_of(se.begin(), se.end(), [](double s) { return s > 0; });
    const LineFit f = fit_line(x, y, se, weighted);
    out.alpha = f.intercept;
    out.beta = f.slope;
    out.stderr_alpha = f.se_intercept;
    out.stderr_beta = f.se_slope;
    return out;
}

BiasLawReport bias_law_check(const LawSetup& setup, const PlanSpec& scheme, std::span<const std::size_t> curve_sizes) {
    require_rule(setup);
    const std::size_t n_e = constant_training_size(scheme, setup.n);
    BiasLawReport out;
    out.curve = fit_risk_curve(setup, curve_sizes);
    const auto bias = parallel_map<double>(setup.replicates, setup.jobs, [&](std::size_t r) {
        const Dataset ds = generate(setup.generator, setup.n, derive_seed(setup.seed, "bias", r));
        const SplitPlan plan = make_plan(scheme, setup.n, plan_seed(setup, "bias", 0, r));
        const auto eval = evaluate_plan(*setup.rule, ds, plan, setup.contrast);
        return eval.cv() - risk_of(setup, *eval.full_predictor, derive_seed(setup.seed, "bias/test", r));
    });
    out.empirical_bias = moments_of(bias);
    const double gap = 1.0 / static_cast<double>(n_e) - 1.0 / static_cast<double>(setup.n);
    out.predicted_bias = out.curve.beta * gap;
    out.stderr_predicted = out.curve.stderr_beta * gap;
    out.against_prediction = compare(out.empirical_bias.mean, out.predicted_bias,
                                     combined(out.empirical_bias.stderr_mean, out.stderr_predicted));
    out.against_zero = compare(out.empirical_bias.mean, 0.0, out.empirical_bias.stderr_mean);
    return out;
}

VarianceOrderingReport variance_ordering_check(const LawSetup& setup, std::size_t n_e, std::size_t V) {
    require_rule(setup);
    if (n_e == 0 || n_e >= setup.n) throw BoundsError("variance ordering needs 1 <= n_e <= n - 1");
    PlanSpec ho{Scheme::Kind::Holdout, 1, n_e};
    PlanSpec mc{Scheme::Kind::MonteCarlo, V, n_e};
    PlanSpec lpo{Scheme::Kind::LeavePOut, 1, 0, setup.n - n_e};
    make_plan(lpo, setup.n, 0);  // budget check before any simulation
    VarianceOrderingReport out;
    out.holdout = moments_of(cv_values(setup, ho, setup.n, "ordering", 0));
    out.monte_carlo = moments_of(cv_values(setup, mc, setup.n, "ordering", 1));
    out.leave_p_out = moments_of(cv_values(setup, lpo, setup.n, "ordering", 2));
    const auto at_least = [](const Moments& a, const Moments& b) {
        return a.variance - b.variance >= -kStderrBand * combined(a.stderr_variance, b.stderr_variance);
    };
    out.holdout_ge_mc = at_least(out.holdout, out.monte_carlo);
    out.mc_ge_lpo = at_least(out.monte_carlo, out.leave_p_out);
    return out;
}

AffineFit affine_in_inv_V_check(const LawSetup& setup, std::size_t n_e, std::span<const std::size_t> V_grid,
                                bool enumerate_limit) {
    require_rule(setup);
    std::vector<std::size_t> distinct(V_grid.begin(), V_grid.end());
    std::sort(distinct.begin(), distinct.end());
    if (std::unique(distinct.begin(), distinct.end()) - distinct.begin() < 3)
        throw ConfigError("affine fit in 1/V needs at least three distinct V");
    std::vector<double> x;
    std::vector<Moments> var;
    for (std::size_t k = 0; k < V_grid.size(); ++k) {
        const PlanSpec mc{Scheme::Kind::MonteCarlo, V_grid[k], n_e};
        var.push_back(moments_of(cv_values(setup, mc, setup.n, "affine", k)));
        x.push_back(1.0 / static_cast<double>(V_grid[k]));
    }
    AffineFit out = affine_fit(std::move(x), std::move(var));
    if (enumerate_limit) {
        const PlanSpec lpo{Scheme::Kind::LeavePOut, 1, 0, setup.n - n_e};
        attach_limit(out, moments_of(cv_values(setup, lpo, setup.n, "affine/lpo", 0)));
    }
    return out;
}

AffineFit repeated_vfold_variance_check(const LawSetup& setup, std::size_t V, std::span<const std::size_t> L_grid,
                                        bool enumerate_limit) {
    require_rule(setup);
    std::vector<std::size_t> distinct(L_grid.begin(), L_grid.end());
    std::sort(distinct.begin(), distinct.end());
    if (std::unique(distinct.begin(), distinct.end()) - distinct.begin() < 3)
        throw ConfigError("affine fit in 1/L needs at least three distinct L");
    std::vector<double> x;
    std::vector<Moments> var;
    for (std::size_t k = 0; k < L_grid.size(); ++k) {
        const PlanSpec rv{Scheme::Kind::RepeatedVFold, V, 0, 1, L_grid[k]};
        var.push_back(moments_of(cv_values(setup, rv, setup.n, "rvfold", k)));
        x.push_back(1.0 / static_cast<double>(L_grid[k]));
    }
    AffineFit out = affine_fit(std::move(x), std::move(var));
    if (enumerate_limit && V >= 2 && setup.n % V == 0 &&
        binomial(setup.n, setup.n / V) <= kDefaultMaxSplits) {
        const PlanSpec lpo{Scheme::Kind::LeavePOut, 1, 0, setup.n / V};
        attach_limit(out, moments_of(cv_values(setup, lpo, setup.n, "rvfold/lpo", 0)));
    }
    return out;
}

// Variance constants -------------------------------------------------------------

double c1_vf(std::size_t V, double n) {
    if (V < 2) throw BoundsError("V-fold constants need V >= 2");
    if (!(n > 0)) throw BoundsError("V-fold constants need n > 0");
    const double v = static_cast<double>(V) - 1.0;
    return 1.0 + 4.0 / v + 4.0 / (v * v) + 1.0 / (v * v * v) - static_cast<double>(V * V) / (n * v * v);
}

double c2_vf(std::size_t V, double n) {
    if (V < 2) throw BoundsError("V-fold constants need V >= 2");
    if (!(n > 0)) throw BoundsError("V-fold constants need n > 0");
    const double t = 1.0 + static_cast<double>(V) / (n * (static_cast<double>(V) - 1.0));
    return t * t;
}

namespace {

void check_mc(std::size_t V, double n, double n_e) {
    if (V < 1) throw BoundsError("Monte-Carlo constants need V >= 1");
    if (!(n > 1)) throw BoundsError("Monte-Carlo constants need n > 1");
    if (!(n_e > 0 && n_e < n)) throw BoundsError("Monte-Carlo constants need 0 < n_e < n");
}

}  // namespace

double c1_mc(std::size_t V, double n, double n_e) {
    check_mc(V, n, n_e);
    const double inv_v = 1.0 / static_cast<double>(V);
    const double r = n / n_e;
    const double single = r * r + 2.0 * n * n / (n_e * (n - n_e)) - r * r * r / n;
    const double many = 1.0 + (r + 1.0) * (r + 1.0) / (n - 1.0) - r * r / n;
    return inv_v * single + (1.0 - inv_v) * many;
}

double c2_mc(std::size_t V, double n, double n_e) {
    check_mc(V, n, n_e);
    const double inv_v = 1.0 / static_cast<double>(V);
    const double r = n / n_e;
    const double single = n / (n - n_e) + r * r * r / n;
    const double t = 1.0 + r / n;
    return inv_v * single + (1.0 - inv_v) * t * t;
}

VarianceFitReport variance_constant_cross_prediction(const LawSetup& setup, std::size_t V_fit_a, std::size_t V_fit_b,
                                                     std::size_t V_test) {
    require_rule(setup);
    const double n = static_cast<double>(setup.n);
    auto row = [&](std::size_t V) { return Eigen::RowVector2d(c1_vf(V, n) / (n * n), c2_vf(V, n) / n); };
    Eigen::Matrix2d A;
    A.row(0) = row(V_fit_a);
    A.row(1) = row(V_fit_b);
    const Eigen::JacobiSVD<Eigen::Matrix2d> svd(A);
    const double smax = svd.singularValues()[0], smin = svd.singularValues()[1];
    if (V_fit_a == V_fit_b || smin <= 1e-10 * smax)
        throw ConditioningError("the 2x2 system for (W1, W2) is singular at V = {" + std::to_string(V_fit_a) + ", " +
                                std::to_string(V_fit_b) + "}; pick two different V values");

    VarianceFitReport out;
    out.n = setup.n;
    out.V = {V_fit_a, V_fit_b, V_test};
    for (std::size_t k = 0; k < 3; ++k) {
        const PlanSpec vf{Scheme::Kind::VFold, out.V[k]};
        out.observed.push_back(moments_of(cv_values(setup, vf, setup.n, "vfconst", k)));
    }
    const Eigen::Vector2d b(out.observed[0].variance, out.observed[1].variance);
    const Eigen::Vector2d W = A.fullPivLu().solve(b);
    out.W1_hat = W[0];
    out.W2_hat = W[1];
    double mean_obs = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        out.predicted.push_back(row(out.V[k]).dot(W));
        mean_obs += out.observed[k].variance / 3.0;
    }
    const double obs_test = out.observed[2].variance;
    out.relative_error = std::abs(out.predicted[2] - obs_test) / std::abs(obs_test);
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        const double o = out.observed[k].variance;
        ss_res += (o - out.predicted[k]) * (o - out.predicted[k]);
        ss_tot += (o - mean_obs) * (o - mean_obs);
    }
    out.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return out;
}

HoldoutDecompositionReport holdout_variance_decomposition_check(const LawSetup& setup, std::size_t n_e,
                                                                std::size_t n_val) {
    require_rule(setup);
    if (n_e == 0 || n_val == 0) throw BoundsError("hold-out decomposition needs n_e >= 1 and n_val >= 1");
    HoldoutDecompositionReport out;
    const PlanSpec ho{Scheme::Kind::Holdout, 1, n_e};
    out.total = moments_of(cv_values(setup, ho, n_e + n_val, "decomposition/total", 0));

    const auto terms = parallel_map<std::array<double, 2>>(setup.replicates, setup.jobs, [&](std::size_t r) {
        const Dataset train = generate(setup.generator, n_e, derive_seed(setup.seed, "decomposition/terms", r));
        const auto f = setup.rule->fit(train);
        FallbackPolicy fb = setup.fallback;
        fb.seed = derive_seed(setup.seed, "decomposition/risk", r);
        const double risk = true_risk(*f, setup.generator, setup.contrast, fb).value;
        fb.seed = derive_seed(setup.seed, "decomposition/inner", r);
        const double var = conditional_cost_variance(*f, setup.generator, setup.contrast, fb).value;
        return std::array<double, 2>{risk, var};
    });
    std::vector<double> risk, var;
    for (const auto& [a, b] : terms) {
        risk.push_back(a);
        var.push_back(b);
    }
    out.risk_of_fit = moments_of(risk);
    out.cost_variance = moments_of(var);
    const double nv = static_cast<double>(n_val);
    out.first_term = out.risk_of_fit.variance;
    out.second_term = out.cost_variance.mean / nv;
    const double se_rhs = combined(out.risk_of_fit.stderr_variance, out.cost_variance.stderr_mean / nv);
    out.decomposition = compare(out.total.variance, out.first_term + out.second_term,
                                combined(out.total.stderr_variance, se_rhs));
    return out;
}

// Smartness ---------------------------------------------------------------------------

bool SmartnessReport::smart() const {
    return std::none_of(curve.begin(), curve.end(), [](const SmartnessPoint& p) { return p.increase; });
}

namespace {

double binomial_pmf(std::size_t n, std::size_t k, double p) {
    if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return k == n ? 1.0 : 0.0;
    const double nn = static_cast<double>(n), kk = static_cast<double>(k);
    return std::exp(std::lgamma(nn + 1) - std::lgamma(kk + 1) - std::lgamma(nn - kk + 1) + kk * std::log(p) +
                    (nn - kk) * std::log1p(-p));
}

// E[risk] of the majority vote on n Bernoulli(p1) labels, summing over the count of ones.
double majority_vote_mean_risk(std::size_t n, double p1, TieMode tie) {
    const double risk_one = 1.0 - p1, risk_zero = p1;
    double s = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        double r;
        if (2 * k > n)
            r = risk_one;
        else if (2 * k < n)
            r = risk_zero;
        else
            r = tie == TieMode::Randomized ? 0.5 * (risk_one + risk_zero) : risk_zero;
        s += binomial_pmf(n, k, p1) * r;
    }
    return s;
}

}  // namespace

SmartnessReport smartness_probe(const LearningRule& rule, const DataGenerator& gen, Contrast contrast,
                                std::span<const std::size_t> sizes, std::size_t replicates, std::uint64_t seed,
                                std::size_t jobs) {
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        if (sizes[k] == 0) throw BoundsError("smartness probe sizes must be positive");
        if (k > 0 && sizes[k] <= sizes[k - 1]) throw BoundsError("smartness probe sizes must increase");
    }
    check_compatible(contrast, task_kind(gen));
    const auto tie = majority_vote_tie_mode(rule);
    const auto* labels = std::get_if<BernoulliLabels>(&gen);
    const bool exact = tie && labels && contrast == Contrast::ZeroOne;
    if (!exact && replicates < 2) throw ConfigError("Monte-Carlo smartness probe needs at least 2 replicates");

    SmartnessReport out;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        SmartnessPoint p;
        p.n = sizes[k];
        p.exact = exact;
        if (exact) {
            p.mean_risk = majority_vote_mean_risk(p.n, labels->p1, *tie);
        } else {
            const auto risks = parallel_map<double>(replicates, jobs, [&](std::size_t r) {
                const Dataset ds = generate(gen, p.n, derive_seed(seed, "smartness", k, r));
                FallbackPolicy fb;
                fb.seed = derive_seed(seed, "smartness/test", k, r);
                return true_risk(*rule.fit(ds), gen, contrast, fb).value;
            });
            const Moments m = moments_of(risks);
            p.mean_risk = m.mean;
            p.stderr = m.stderr_mean;
        }
        if (k > 0) {
            const auto& prev = out.curve.back();
            const double slack = exact ? 1e-12 : kStderrBand * combined(p.stderr, prev.stderr);
            p.increase = p.mean_risk - prev.mean_risk > slack;
        }
        out.curve.push_back(p);
    }
    return out;
}

// Overpenalization sweep ----------------------------------------------------------------

SweepReport surpenalization_sweep(const RuleMenu& menu, const DataGenerator& gen, Contrast contrast, std::size_t n,
                                  std::span<const double> C_grid, std::size_t replicates, std::uint64_t seed,
                                  std::size_t jobs) {
    if (menu.empty()) throw ConfigError("sweep needs a nonempty menu");
    if (C_grid.empty()) throw ConfigError("sweep needs a nonempty C grid");
    for (const double C : C_grid)
        if (!(C >= 0.0) || !std::isfinite(C)) throw BoundsError("sweep constants must be finite and >= 0");
    if (replicates < 2) throw ConfigError("sweep needs at least 2 replicates");
    const std::size_t M = menu.size();

    struct Fits {
        std::vector<double> empirical, risk;
    };
    auto fit_all = [&](std::string_view tag, std::size_t r) {
        const Dataset ds = generate(gen, n, derive_seed(seed, tag, r));
        Fits f;
        for (std::size_t m = 0; m < M; ++m) {
            const auto pred = menu[m].rule->fit(ds);
            FallbackPolicy fb;
            fb.seed = derive_seed(seed, tag, r, m + 1);
            f.empirical.push_back(contrast_eval(contrast, *pred, ds));
            f.risk.push_back(true_risk(*pred, gen, contrast, fb).value);
        }
        return f;
    };

    SweepReport out;
    out.C.assign(C_grid.begin(), C_grid.end());
    const auto pen_runs = parallel_map<Fits>(replicates, jobs, [&](std::size_t r) { return fit_all("sweep/pen", r); });
    out.expected_penalty.assign(M, 0.0);
    for (const auto& f : pen_runs)
        for (std::size_t m = 0; m < M; ++m) out.expected_penalty[m] += (f.risk[m] - f.empirical[m]);
    for (auto& p : out.expected_penalty) p /= static_cast<double>(replicates);

    const double bayes = bayes_risk(gen, contrast);
    const auto eval_runs =
        parallel_map<Fits>(replicates, jobs, [&](std::size_t r) { return fit_all("sweep/eval", r); });
    std::vector<std::vector<double>> ratios(out.C.size());
    std::vector<double> crit(M);
    for (const auto& f : eval_runs) {
        std::vector<double> loss(M);
        for (std::size_t m = 0; m < M; ++m) loss[m] = std::max(f.risk[m] - bayes, 0.0);
        const double best = *std::min_element(loss.begin(), loss.end());
        for (std::size_t c = 0; c < out.C.size(); ++c) {
            for (std::size_t m = 0; m < M; ++m) crit[m] = f.empirical[m] + out.C[c] * out.expected_penalty[m];
            const double chosen = loss[first_argmin(crit)];
            ratios[c].push_back(best > 0 ? chosen / best
                                         : (chosen == 0 ? 1.0 : std::numeric_limits<double>::infinity()));
        }
    }
    for (const auto& r : ratios) {
        const Moments m = moments_of(r);
        out.mean_ratio.push_back(m.mean);
        out.stderr_ratio.push_back(m.stderr_mean);
    }
    out.best = first_argmin(out.mean_ratio);
    return out;
}

nlohmann::ordered_json to_json(const Comparison& c) {
    nlohmann::ordered_json j;
    j["lhs"] = c.lhs;
    j["rhs"] = c.rhs;
    j["stderr"] = c.stderr;
    j["z"] = c.z();
    j["pass"] = c.pass;
    return j;
}

nlohmann::ordered_json to_json(const AffineFit& f) {
    nlohmann::ordered_json j;
    j["x"] = f.x;
    auto var = nlohmann::ordered_json::array();
    for (const auto& m : f.variance) var.push_back(to_json(m));
    j["variance"] = std::move(var);
    j["intercept"] = f.intercept;
    j["slope"] = f.slope;
    j["stderr_intercept"] = f.stderr_intercept;
    j["stderr_slope"] = f.stderr_slope;
    j["r_squared"] = f.r_squared;
    if (f.limit) j["limit"] = to_json(*f.limit);
    if (f.intercept_vs_limit) j["intercept_vs_limit"] = to_json(*f.intercept_vs_limit);
    j["slope_nonnegative"] = f.slope_nonnegative;
    j["intercept_nonnegative"] = f.intercept_nonnegative;
    return j;
}

nlohmann::ordered_json to_json(const VarianceFitReport& r) {
    nlohmann::ordered_json j;
    j["n"] = r.n;
    j["V"] = r.V;
    auto obs = nlohmann::ordered_json::array();
    for (const auto& m : r.observed) obs.push_back(to_json(m));
    j["observed"] = std::move(obs);
    j["predicted"] = r.predicted;
    j["W1_hat"] = r.W1_hat;
    j["W2_hat"] = r.W2_hat;
    j["relative_error"] = r.relative_error;
    j["r_squared"] = r.r_squared;
    return j;
}

}  // namespace cvlab::mclab
