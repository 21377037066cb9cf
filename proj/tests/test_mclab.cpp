#include <doctest.h>

#include <cmath>

#include "cvlab/error.hpp"
#include "cvlab/experiment_file.hpp"
#include "cvlab/mclab.hpp"
#include "cvlab/rng.hpp"

using namespace cvlab;
using namespace cvlab::mclab;

namespace {

const PiecewiseConstantDensity kTwoCell{{0.0, 0.3, 1.0}, {2.0, 4.0 / 7.0}};

LawSetup histogram_setup(std::size_t n, double h, std::size_t R, std::uint64_t seed) {
    LawSetup s;
    s.generator = kTwoCell;
    s.n = n;
    s.rule = histogram_rule(h);
    s.contrast = Contrast::DensityLS;
    s.replicates = R;
    s.seed = seed;
    return s;
}

double quadrature(const std::function<double(double)>& g, int M = 100000) {
    double s = 0.0;
    for (int k = 0; k < M; ++k) s += g((k + 0.5) / M);
    return s / M;
}

double truth_density(const PiecewiseConstantDensity& p, double x) {
    for (std::size_t i = 0; i + 1 < p.breakpoints.size(); ++i)
        if (x < p.breakpoints[i + 1]) return p.densities[i];
    return p.densities.back();
}

// Sample mean of the pointwise cost on a large independent test set.
Moments empirical_cost(const Predictor& f, const DataGenerator& gen, Contrast c, std::size_t N, std::uint64_t seed) {
    const auto test = generate(gen, N, seed);
    std::vector<double> costs(N);
    for (std::size_t i = 0; i < N; ++i) {
        const auto x = std::span<const double>(test.features().data() + i * test.dim(), test.dim());
        const double y = test.kind() == TaskKind::Regression       ? test.response(i)
                         : test.kind() == TaskKind::Classification ? test.label(i)
                                                                   : 0.0;
        costs[i] = pointwise_cost(c, f, x, y);
    }
    return moments_of(costs);
}

ExperimentConfig small_config(std::size_t R, std::uint64_t seed) {
    ExperimentConfig c;
    c.generator = kTwoCell;
    c.n = 20;
    c.rules = RuleMenu::from_specs({"hist:1", "hist:0.25", "hist:0.2"});
    c.contrast = Contrast::DensityLS;
    c.schemes = {plan_spec_from_string("vfold:5"), plan_spec_from_string("holdout:10"),
                 plan_spec_from_string("mc:10:3")};
    c.replicates = R;
    c.master_seed = seed;
    return c;
}

}  // namespace

TEST_CASE("true risk: examples") {
    const auto flat = fit_histogram_density(std::vector<double>{0.4}, 1.0);
    const auto uniform = PiecewiseConstantDensity::uniform();
    const auto ex = excess_risk(*flat, uniform, Contrast::DensityLS);
    CHECK(ex.exact);
    CHECK(std::abs(ex.value) < 1e-15);

    const LinearPredictor truth({1.0, -2.0});
    for (const auto law : {FeatureLaw::Uniform, FeatureLaw::StandardNormal}) {
        const auto r = true_risk(truth, LinearModel{{1.0, -2.0}, 0.5, law}, Contrast::Quadratic);
        CHECK(r.exact);
        CHECK(r.value == doctest::Approx(0.25).epsilon(1e-14));
    }

    const PiecewiseConstantDensity left{{0.0, 0.5, 1.0}, {2.0, 0.0}};
    const double oracle = quadrature([&](double x) { return std::pow(1.0 - truth_density(left, x), 2); });
    CHECK(oracle == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(excess_risk(*flat, left, Contrast::DensityLS).value == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("true risk: histogram against quadrature") {
    Rng r(3);
    for (const double h : {1.0, 0.5, 0.25, 0.2, 0.1}) {
        std::vector<double> pts(25);
        for (auto& p : pts) p = r.uniform01();
        const auto f = fit_histogram_density(pts, h);
        const double oracle = quadrature([&](double x) {
            const double xs[] = {x};
            const double v = (*f)(xs);
            return v * v - 2.0 * v * truth_density(kTwoCell, x);
        });
        const auto risk = true_risk(*f, kTwoCell, Contrast::DensityLS);
        CHECK(risk.exact);
        CHECK(risk.value == doctest::Approx(oracle).epsilon(1e-9));

        const double kl = quadrature([&](double x) {
            const double xs[] = {x};
            return -std::log((*f)(xs)) * truth_density(kTwoCell, x);
        });
        if (std::isfinite(kl)) CHECK(true_risk(*f, kTwoCell, Contrast::DensityLogLik).value == doctest::Approx(kl).epsilon(1e-9));
    }
}

TEST_CASE("true risk: closed forms agree with large test sets") {
    // 5 stderr keeps each check well away from chance failure.
    const LinearPredictor lin({0.7, 0.1});
    for (const auto law : {FeatureLaw::Uniform, FeatureLaw::StandardNormal}) {
        const LinearModel gen{{1.0, -0.5}, 0.3, law};
        const auto exact = true_risk(lin, gen, Contrast::Quadratic);
        const auto mc = empirical_cost(lin, gen, Contrast::Quadratic, 200000, 5);
        CHECK(std::abs(exact.value - mc.mean) < 5 * mc.stderr_mean);
        const auto var = conditional_cost_variance(lin, gen, Contrast::Quadratic);
        CHECK(std::abs(var.value - mc.variance) < 5 * mc.stderr_variance);
    }

    const auto reg = regular_regressogram_rule(3)->fit(generate(LinearModel{{2.0}, 0.5}, 30, 4));
    const LinearModel gen1{{2.0}, 0.5, FeatureLaw::Uniform};
    const auto mc = empirical_cost(*reg, gen1, Contrast::Quadratic, 200000, 6);
    const auto exact = true_risk(*reg, gen1, Contrast::Quadratic);
    CHECK(exact.exact);
    CHECK(std::abs(exact.value - mc.mean) < 5 * mc.stderr_mean);

    const auto hist = histogram_rule(0.25)->fit(generate(kTwoCell, 40, 9));
    const auto dmc = empirical_cost(*hist, kTwoCell, Contrast::DensityLS, 200000, 7);
    CHECK(std::abs(true_risk(*hist, kTwoCell, Contrast::DensityLS).value - dmc.mean) < 5 * dmc.stderr_mean);
    CHECK(std::abs(conditional_cost_variance(*hist, kTwoCell, Contrast::DensityLS).value - dmc.variance) <
          5 * dmc.stderr_variance);

    const ConstantPredictor zero(0.0), one(1.0);
    CHECK(true_risk(zero, BernoulliLabels{0.9}, Contrast::ZeroOne).value == doctest::Approx(0.9));
    CHECK(true_risk(one, BernoulliLabels{0.9}, Contrast::ZeroOne).value == doctest::Approx(0.1));
    CHECK(conditional_cost_variance(one, BernoulliLabels{0.9}, Contrast::ZeroOne).value == doctest::Approx(0.09));
}

TEST_CASE("true risk: Monte-Carlo fallback declares itself") {
    const auto ds = generate(LinearModel{{1.0}, 0.2}, 30, 2);
    const auto knn = knn_rule(3)->fit(ds);
    const LinearModel gen{{1.0}, 0.2};
    const auto r = true_risk(*knn, gen, Contrast::Quadratic, {20000, 1});
    CHECK_FALSE(r.exact);
    CHECK(r.stderr > 0.0);
    CHECK(r.value > 0.04 - 5 * r.stderr);
    const auto again = true_risk(*knn, gen, Contrast::Quadratic, {20000, 1});
    CHECK(again.value == r.value);
}

TEST_CASE("bayes risk") {
    CHECK(bayes_risk(kTwoCell, Contrast::DensityLS) == doctest::Approx(-(4.0 * 0.3 + 16.0 / 49.0 * 0.7)));
    CHECK(bayes_risk(LinearModel{{1.0}, 0.5}, Contrast::Quadratic) == doctest::Approx(0.25));
    CHECK(bayes_risk(BernoulliLabels{0.3}, Contrast::ZeroOne) == doctest::Approx(0.3));
    CHECK(bayes_risk(PiecewiseConstantDensity::uniform(), Contrast::DensityLogLik) == doctest::Approx(0.0));
}

TEST_CASE("moments and comparisons") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto m = moments_of(v);
    CHECK(m.count == 4);
    CHECK(m.mean == 2.5);
    CHECK(m.variance == doctest::Approx(5.0 / 3.0));
    CHECK(m.stderr_mean == doctest::Approx(std::sqrt(5.0 / 12.0)));
    // m4 = (2 * 1.5^4 + 2 * 0.5^4) / 4, s^2 = 5/3, R = 4.
    const double m4 = (2 * std::pow(1.5, 4) + 2 * std::pow(0.5, 4)) / 4.0;
    const double s4 = 25.0 / 9.0;
    CHECK(m.stderr_variance == doctest::Approx(std::sqrt((m4 - s4 * 1.0 / 3.0) / 4.0)));

    CHECK(compare(1.0, 1.2, 0.1).pass);
    CHECK_FALSE(compare(1.0, 1.4, 0.1).pass);
    CHECK(compare(1.0, 1.4, 0.1).z() == doctest::Approx(-4.0));
    CHECK(compare(2.0, 2.0, 0.0).pass);
}

TEST_CASE("plan specs") {
    for (const char* s : {"holdout:7", "vfold:5", "mc:7:3", "loo", "lpo:2", "rvfold:3:4"})
        CHECK(plan_spec_from_string(s).label() == s);
    for (const char* s : {"", "vfold", "vfold:x", "mc:3", "kfold:5", "rvfold:3"})
        CHECK_THROWS_AS(plan_spec_from_string(s), ConfigError);
    CHECK(make_plan(plan_spec_from_string("rvfold:3:4"), 9, 1).size() == 12);
    CHECK(make_plan(plan_spec_from_string("lpo:2"), 5, 0).size() == 10);
    CHECK_THROWS_AS(make_plan(plan_spec_from_string("vfold:10"), 5, 0), BoundsError);
}

TEST_CASE("run_experiment: R = 2 smoke") {
    auto c = small_config(2, 1);
    c.rules = RuleMenu::from_specs({"hist:1"});
    const auto rep = run_experiment(c);
    CHECK(rep.replicates == 2);
    CHECK(rep.failures == 0);
    REQUIRE(rep.cells.size() == 3);
    const auto& cell = rep.cell("hist:1", "vfold:5");
    CHECK(cell.cv.count == 2);
    // The flat fit ignores the data: every criterion is -1 and the correction is 0.
    CHECK(cell.cv.mean == -1.0);
    CHECK(cell.cv.variance == 0.0);
    CHECK(cell.corrected.mean == -1.0);
    CHECK(rep.increments.empty());
    const auto j = to_json(rep);
    CHECK(j["replicates"] == 2);
    const auto csv = to_csv(rep);
    CHECK(csv.rfind("kind,rule,rule_b,scheme,quantity,count,mean,variance,stderr_mean,stderr_variance\n", 0) == 0);
    CHECK_THROWS_AS(rep.cell("hist:1", "loo"), ConfigError);
}

TEST_CASE("run_experiment validation") {
    auto c = small_config(1, 0);
    CHECK_THROWS_AS(validate(c), ConfigError);
    c.replicates = 5;
    c.rules = RuleMenu{};
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = small_config(5, 0);
    c.schemes.push_back(plan_spec_from_string("holdout:20"));
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = small_config(5, 0);
    c.contrast = Contrast::Quadratic;
    CHECK_THROWS_AS(validate(c), Error);
}

TEST_CASE("run_experiment is independent of the worker count") {
    auto c = small_config(40, 9);
    const auto a = run_experiment(c);
    c.jobs = 4;
    const auto b = run_experiment(c);
    CHECK(to_json(a).dump() == to_json(b).dump());
    CHECK(to_csv(a) == to_csv(b));
    c.master_seed = 10;
    CHECK(to_json(run_experiment(c)).dump() != to_json(a).dump());
}

TEST_CASE("run_experiment: increment moments obey Cauchy-Schwarz") {
    const auto rep = run_experiment(small_config(300, 4));
    for (const auto& inc : rep.increments) {
        const auto& a = rep.cell(inc.rule_a, inc.scheme).cv;
        const auto& b = rep.cell(inc.rule_b, inc.scheme).cv;
        const double bound = a.variance + b.variance + 2.0 * std::sqrt(a.variance * b.variance);
        CHECK(inc.cv.variance <= bound * (1 + 1e-12));
    }
}

TEST_CASE("run_experiment: nearby bin widths have low increment variance") {
    auto c = small_config(2000, 12);
    c.n = 60;
    c.rules = RuleMenu::from_specs({"hist:0.25", "hist:0.2"});
    c.schemes = {plan_spec_from_string("vfold:5")};
    const auto rep = run_experiment(c);
    const auto& a = rep.cell("hist:0.25", "vfold:5").cv;
    const auto& inc = rep.increment("hist:0.25", "hist:0.2", "vfold:5").cv;
    const double se = std::sqrt(a.stderr_variance * a.stderr_variance + inc.stderr_variance * inc.stderr_variance);
    CHECK(a.variance - inc.variance > kStderrBand * se);
}

TEST_CASE("single Monte-Carlo split has the hold-out law") {
    auto c = small_config(3000, 2);
    c.rules = RuleMenu::from_specs({"hist:0.25"});
    c.schemes = {plan_spec_from_string("mc:12:1"), plan_spec_from_string("holdout:12")};
    const auto rep = run_experiment(c);
    const auto& mc = rep.cell("hist:0.25", "mc:12:1").cv;
    const auto& ho = rep.cell("hist:0.25", "holdout:12").cv;
    CHECK(compare(mc.variance, ho.variance, std::hypot(mc.stderr_variance, ho.stderr_variance)).pass);
    CHECK(compare(mc.mean, ho.mean, std::hypot(mc.stderr_mean, ho.stderr_mean)).pass);
}

TEST_CASE("enumerating every training subset reproduces leave-p-out") {
    const auto ds = generate(kTwoCell, 8, 3);
    std::vector<std::vector<std::size_t>> trains;
    for (unsigned mask = 0; mask < 256; ++mask)
        if (__builtin_popcount(mask) == 5) {
            std::vector<std::size_t> t;
            for (std::size_t i = 0; i < 8; ++i)
                if (mask >> i & 1u) t.push_back(i);
            trains.push_back(t);
        }
    const auto rule = histogram_rule(0.25);
    const double all = cv_risk(*rule, ds, custom_plan(8, trains), Contrast::DensityLS).value;
    const double lpo = cv_risk(*rule, ds, leave_p_out(8, 3), Contrast::DensityLS).value;
    CHECK(all == doctest::Approx(lpo).epsilon(1e-14));
}

TEST_CASE("repeated V-fold with one repetition is V-fold") {
    const auto frozen_v = make_plan(plan_spec_from_string("vfold:4"), 20, 7);
    const auto frozen_r = make_plan(plan_spec_from_string("rvfold:4:1"), 20, 7);
    CHECK(frozen_v.splits == frozen_r.splits);

    auto setup = histogram_setup(12, 0.25, 3000, 8);
    const std::size_t L[] = {1, 2, 5};
    const auto fit_r = repeated_vfold_variance_check(setup, 3, L, false);
    auto cv = small_config(3000, 8);
    cv.n = 12;
    cv.rules = RuleMenu::from_specs({"hist:0.25"});
    cv.schemes = {plan_spec_from_string("vfold:3")};
    const auto& single = run_experiment(cv).cell("hist:0.25", "vfold:3").cv;
    REQUIRE(fit_r.variance.size() == 3);
    CHECK(compare(fit_r.variance[0].variance, single.variance,
                  std::hypot(fit_r.variance[0].stderr_variance, single.stderr_variance))
              .pass);
}

TEST_CASE("law checks at small scale") {
    auto s = histogram_setup(20, 0.25, 3000, 31);
    CHECK(corrected_unbiasedness_check(s, plan_spec_from_string("vfold:2")).pass);
    CHECK(expectation_law_check(s, plan_spec_from_string("holdout:10")).pass);
    const auto order = variance_ordering_check(histogram_setup(10, 0.25, 2000, 3), 6, 5);
    CHECK(order.pass());
    CHECK(order.holdout.variance >= order.leave_p_out.variance);
}

TEST_CASE("risk curve fit recovers a 1/m law") {
    const auto s = histogram_setup(40, 0.25, 2000, 17);
    const std::size_t sizes[] = {10, 20, 40, 80};
    const auto fit = fit_risk_curve(s, sizes);
    REQUIRE(fit.risk.size() == 4);
    CHECK(fit.beta > 0.0);
    for (std::size_t k = 1; k < 4; ++k) CHECK(fit.risk[k].mean < fit.risk[k - 1].mean);
    CHECK(fit.alpha < fit.risk.back().mean);
}

TEST_CASE("affine fit reports are well-formed") {
    const auto s = histogram_setup(12, 0.25, 1500, 23);
    const std::size_t grid[] = {1, 2, 5, 10};
    const auto fit = affine_in_inv_V_check(s, 6, grid);
    CHECK(fit.x.size() == 4);
    CHECK(fit.x[0] == 1.0);
    CHECK(fit.limit.has_value());
    CHECK(fit.intercept_vs_limit.has_value());
    CHECK(fit.r_squared <= 1.0);
    const auto j = to_json(fit);
    CHECK(j.contains("intercept"));
    CHECK(j.contains("r_squared"));
}

TEST_CASE("hold-out variance decomposition") {
    LawSetup det;
    det.generator = LinearModel{{1.0, 2.0}, 0.0};
    det.rule = ols_rule();
    det.contrast = Contrast::Quadratic;
    det.replicates = 50;
    const auto zero = holdout_variance_decomposition_check(det, 5, 5);
    CHECK(zero.total.variance < 1e-20);
    CHECK(zero.first_term < 1e-20);
    CHECK(zero.second_term < 1e-20);

    const auto mid = holdout_variance_decomposition_check(histogram_setup(0, 0.25, 3000, 5), 20, 20);
    CHECK(mid.decomposition.pass);

    // A huge validation set removes the second term.
    const auto wide = holdout_variance_decomposition_check(histogram_setup(0, 0.25, 1000, 6), 20, 5000);
    CHECK(wide.second_term < 0.05 * wide.first_term);
    CHECK(compare(wide.total.variance, wide.first_term, wide.decomposition.stderr).pass);
}

TEST_CASE("smartness probe: exact majority vote risks") {
    const std::size_t sizes[] = {1, 2, 3, 4};
    const auto det = smartness_probe(*majority_vote_rule(TieMode::DeterministicZero), BernoulliLabels{0.9},
                                     Contrast::ZeroOne, sizes);
    REQUIRE(det.curve.size() == 4);
    CHECK(det.curve[0].exact);
    CHECK(det.curve[0].mean_risk == doctest::Approx(0.18).epsilon(1e-14));
    CHECK(det.curve[1].mean_risk == doctest::Approx(0.252).epsilon(1e-14));
    CHECK(det.curve[1].increase);
    CHECK_FALSE(det.smart());

    const auto rnd = smartness_probe(*majority_vote_rule(TieMode::Randomized, 3), BernoulliLabels{0.9},
                                     Contrast::ZeroOne, sizes);
    CHECK(rnd.curve[1].mean_risk == doctest::Approx(0.18).epsilon(1e-14));
    CHECK(rnd.smart());

    std::vector<std::size_t> upto20(20);
    for (std::size_t i = 0; i < 20; ++i) upto20[i] = i + 1;
    const auto half = smartness_probe(*majority_vote_rule(TieMode::Randomized, 3), BernoulliLabels{0.5},
                                      Contrast::ZeroOne, upto20);
    for (const auto& p : half.curve) CHECK(p.mean_risk == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("smartness probe: Monte-Carlo path") {
    const std::size_t sizes[] = {5, 20, 80};
    const auto rep = smartness_probe(*histogram_rule(0.25), kTwoCell, Contrast::DensityLS, sizes, 500, 4);
    REQUIRE(rep.curve.size() == 3);
    CHECK_FALSE(rep.curve[0].exact);
    CHECK(rep.curve[0].stderr > 0.0);
    CHECK(rep.smart());
}

TEST_CASE("overpenalization sweep") {
    const double grid[] = {0.5, 1.0, 2.0};
    const auto single = surpenalization_sweep(RuleMenu::from_specs({"ols:1"}), LinearModel{{1.0, 0.5}, 1.0}, Contrast::Quadratic,
                                              20, grid, 30, 1);
    for (const double r : single.mean_ratio) CHECK(r == 1.0);

    const auto menu = RuleMenu::from_specs({"ols:1", "ols:2", "ols:3", "ols:4"});
    const auto rep = surpenalization_sweep(menu, LinearModel{{1.0, 0.5, 0.2, 0.0}, 2.0, FeatureLaw::StandardNormal},
                                           Contrast::Quadratic, 30, grid, 60, 2, 2);
    REQUIRE(rep.mean_ratio.size() == 3);
    CHECK(rep.expected_penalty.size() == 4);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(std::isfinite(rep.mean_ratio[k]));
        CHECK(rep.mean_ratio[k] >= 1.0);
        CHECK(rep.mean_ratio[rep.best] <= rep.mean_ratio[k]);
    }
    // Larger models carry larger expected penalties.
    for (std::size_t m = 1; m < 4; ++m) CHECK(rep.expected_penalty[m] > rep.expected_penalty[m - 1]);
}

TEST_CASE("variance constants") {
    CHECK(c2_vf(2, 4) == 2.25);
    CHECK(c1_vf(2, 4) == doctest::Approx(9.0));
    CHECK(c1_mc(1, 1e6, 5e5) == doctest::Approx(12.0).epsilon(1e-2));
    const double n = 1e6;
    CHECK(c1_mc(100, n, n * 99 / 100) / c1_vf(100, n) == doctest::Approx(3.0).epsilon(0.05));
    for (const std::size_t V : {2, 5, 10, 20, 50, 100}) {
        const double vd = static_cast<double>(V);
        CHECK(c2_mc(V, n, n * (vd - 1) / vd) / c2_vf(V, n) == doctest::Approx(2.0 - 1.0 / vd).epsilon(0.01));
    }
    CHECK_THROWS_AS(c1_vf(1, 10), BoundsError);
    CHECK_THROWS_AS(c2_vf(1, 10), BoundsError);
    CHECK_THROWS_AS(c1_mc(0, 10, 5), BoundsError);
    CHECK_THROWS_AS(c1_mc(2, 10, 10), BoundsError);
}

TEST_CASE("variance constant cross-prediction") {
    const auto s = histogram_setup(30, 0.25, 400, 3);
    CHECK_THROWS_AS(variance_constant_cross_prediction(s, 2, 2, 5), ConditioningError);
    const auto rep = variance_constant_cross_prediction(s, 2, 5, 10);
    CHECK(rep.V == std::vector<std::size_t>{2, 5, 10});
    CHECK(rep.observed.size() == 3);
    CHECK(rep.predicted.size() == 3);
    // The fit reproduces the two fitting points exactly.
    CHECK(rep.predicted[0] == doctest::Approx(rep.observed[0].variance).epsilon(1e-9));
    CHECK(rep.predicted[1] == doctest::Approx(rep.observed[1].variance).epsilon(1e-9));
    CHECK(to_json(rep).contains("W1_hat"));
}

TEST_CASE("experiment files") {
    const std::string text = R"(# two-cell histogram experiment
generator = density
breakpoints = 0, 0.3, 1
densities = 2, 0.5714285714285714
n = 20
rules = hist:0.25, hist:1
contrast = density_ls
schemes = vfold:5, holdout:10
replicates = 50
master_seed = 4
checks = unbiased, ordering
ordering.n_e = 8
)";
    const auto f = parse_experiment_file(text);
    CHECK(f.config.n == 20);
    CHECK(f.config.rules.size() == 2);
    CHECK(f.config.schemes.size() == 2);
    CHECK(f.seed_given);
    CHECK(f.checks == std::vector<std::string>{"unbiased", "ordering"});
    CHECK(to_json(f)["n"] == 20);

    CHECK_THROWS_AS(parse_experiment_file("n = 3\nn = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_file("colour = red\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_file("n = many\n"), ConfigError);
    CHECK_NOTHROW(parse_experiment_file("rules = hist:1\n"));
    CHECK_THROWS_AS(parse_experiment_file("n = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_file("rules = hist:1\nchecks = ordering\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_file("rules = hist:1\nchecks = astrology\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_file("rules = hist:1\nchecks = rvfold\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_file("n\n"), Error);
    CHECK_THROWS_AS(load_experiment_file("/nonexistent/config.cfg"), Error);
}
