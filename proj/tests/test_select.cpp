#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cvlab/error.hpp"
#include "cvlab/rng.hpp"
#include "cvlab/select.hpp"

using namespace cvlab;

namespace {

// Ignores its data and predicts a fixed value.
class FixedRule final : public LearningRule {
public:
    explicit FixedRule(double v) : v_(v) {}
    PredictorPtr fit(const SubSample&) const override { return std::make_shared<ConstantPredictor>(v_); }
    std::string name() const override { return "fixed"; }

private:
    double v_;
};

RuleMenu fixed_menu(std::initializer_list<std::pair<const char*, double>> entries) {
    std::vector<MenuEntry> out;
    for (const auto& [id, v] : entries) out.push_back({id, std::make_shared<FixedRule>(v)});
    return RuleMenu(std::move(out));
}

// Plan whose j-th validation block is blocks[j].
SplitPlan plan_from_blocks(std::size_t n, const std::vector<std::vector<std::size_t>>& blocks) {
    std::vector<std::vector<std::size_t>> trains;
    for (const auto& b : blocks) {
        std::vector<std::size_t> t;
        for (std::size_t i = 0; i < n; ++i)
            if (std::find(b.begin(), b.end(), i) == b.end()) t.push_back(i);
        trains.push_back(t);
    }
    return custom_plan(n, trains);
}

// ∫ f² - 2 ∫ f f* for a histogram f, by midpoint quadrature aligned with every cell.
double density_ls_risk(const Predictor& f, const PiecewiseConstantDensity& truth) {
    const int M = 20000;
    double sq = 0.0, cross = 0.0;
    for (int k = 0; k < M; ++k) {
        const double x[] = {(k + 0.5) / M};
        const double v = f(x);
        const double t = x[0] < truth.breakpoints[1] ? truth.densities[0] : truth.densities[1];
        sq += v * v / M;
        cross += v * t / M;
    }
    return sq - 2.0 * cross;
}

}  // namespace

TEST_CASE("menu") {
    CHECK_THROWS_AS(RuleMenu({{"a", ols_rule()}, {"a", ols_rule()}}), ConfigError);
    CHECK_THROWS_AS(RuleMenu({{"a", nullptr}}), ConfigError);
    const auto m = RuleMenu::from_specs({"hist:1", "hist:0.5"});
    CHECK(m.size() == 2);
    CHECK(m[1].id == "hist:0.5");
    const auto ds = Dataset::density(1, {0.1, 0.2});
    CHECK_THROWS_AS(cv_select(RuleMenu{}, ds, leave_one_out(2), Contrast::DensityLS), ConfigError);
}

TEST_CASE("cv_select: singleton and ties") {
    const auto ds = generate(LinearModel{{1.0}, 1.0}, 10, 1);
    const auto plan = vfold(10, 5, 1);
    const auto single = cv_select(RuleMenu({{"only", ols_rule()}}), ds, plan, Contrast::Quadratic);
    CHECK(single.chosen == "only");
    const auto twins = cv_select(RuleMenu({{"first", ols_rule()}, {"second", ols_rule()}}), ds, plan,
                                 Contrast::Quadratic);
    CHECK(twins.chosen == "first");
    CHECK(twins.chosen_index == 0);
    CHECK(twins.criterion_values[0] == twins.criterion_values[1]);
}

TEST_CASE("cv_select: chosen attains the minimum") {
    const auto ds = generate(PiecewiseConstantDensity{{0.0, 0.5, 1.0}, {1.6, 0.4}}, 60, 2);
    const auto menu = RuleMenu::from_specs({"hist:1", "hist:0.5", "hist:0.25", "hist:0.1"});
    const auto r = cv_select(menu, ds, vfold(60, 5, 3), Contrast::DensityLS);
    const double best = *std::min_element(r.criterion_values.begin(), r.criterion_values.end());
    CHECK(r.criterion_values[r.chosen_index] == best);
    for (std::size_t i = 0; i < r.chosen_index; ++i) CHECK(r.criterion_values[i] > best);
    CHECK(r.ids == std::vector<std::string>{"hist:1", "hist:0.5", "hist:0.25", "hist:0.1"});
}

TEST_CASE("cv_select: histogram menu beats the flat fit") {
    const PiecewiseConstantDensity truth{{0.0, 0.5, 1.0}, {1.6, 0.4}};
    const auto menu = RuleMenu::from_specs({"hist:1", "hist:0.5", "hist:0.25"});
    const double flat_risk = -1.0;  // ∫1 - 2∫f* for the uniform density
    int wins = 0;
    const int R = 500;
    for (int r = 0; r < R; ++r) {
        const auto ds = generate(truth, 200, derive_seed(11, "data", r));
        const auto sel = cv_select(menu, ds, vfold(200, 5, derive_seed(11, "plan", r)), Contrast::DensityLS);
        const auto f = menu[sel.chosen_index].rule->fit(ds);
        if (density_ls_risk(*f, truth) < flat_risk) ++wins;
    }
    CHECK(wins >= 475);
}

TEST_CASE("first_argmin is invariant under a common shift") {
    Rng r(5);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> v(7), w(7);
        for (auto& x : v) x = std::floor(r.uniform01() * 4.0);  // small range so ties occur
        const double shift = r.normal() * 100.0;
        for (std::size_t i = 0; i < 7; ++i) w[i] = v[i] + shift;
        CHECK(first_argmin(v) == first_argmin(w));
    }
    const std::vector<double> tie{2.0, 1.0, 1.0};
    CHECK(first_argmin(tie) == 1);
}

TEST_CASE("penalized and corrected selection") {
    const auto ds = generate(LinearModel{{1.0, 0.5, 0.0}, 1.0, FeatureLaw::StandardNormal}, 30, 4);
    const auto menu = RuleMenu::from_specs({"ols:1", "ols:2", "ols:3"});
    const auto plan = vfold(30, 5, 2);
    const auto a = penalized_select(menu, ds, plan, Contrast::Quadratic, 1.0);
    const auto b = corrected_cv_select(menu, ds, plan, Contrast::Quadratic);
    CHECK(a.criterion_values == b.criterion_values);
    CHECK(a.chosen == b.chosen);
    // With no penalty the largest model has the smallest training error.
    CHECK(penalized_select(menu, ds, plan, Contrast::Quadratic, 0.0).chosen == "ols:3");
}

TEST_CASE("vote_select") {
    // y = (0,0,0,0,1,1): blocks {0,1},{2,3} favour the 0-predictor, {4,5} the 1-predictor.
    const auto ds = Dataset::regression(1, {0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 1, 1});
    const auto menu = fixed_menu({{"m1", 0.0}, {"m2", 1.0}});
    const auto three = plan_from_blocks(6, {{0, 1}, {2, 3}, {4, 5}});
    const auto r = vote_select(menu, ds, three, Contrast::Quadratic);
    CHECK(r.chosen == "m1");
    CHECK(r.per_split_winners == std::vector<std::string>{"m1", "m1", "m2"});
    CHECK(r.criterion_values[0] == doctest::Approx(1.0 / 3.0));
    CHECK(r.criterion_values[1] == doctest::Approx(2.0 / 3.0));

    const auto unanimous = plan_from_blocks(6, {{0, 1}, {2, 3}});
    CHECK(vote_select(menu, ds, unanimous, Contrast::Quadratic).chosen == "m1");

    // One vote each: menu order decides.
    const auto split_vote = plan_from_blocks(6, {{0, 1}, {4, 5}});
    CHECK(vote_select(fixed_menu({{"m2", 1.0}, {"m1", 0.0}}), ds, split_vote, Contrast::Quadratic).chosen == "m2");
}

TEST_CASE("vote_select with one split equals cv_select") {
    const auto ds = generate(PiecewiseConstantDensity{{0.0, 0.5, 1.0}, {1.6, 0.4}}, 40, 7);
    const auto menu = RuleMenu::from_specs({"hist:1", "hist:0.5", "hist:0.25", "hist:0.125"});
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto plan = holdout(40, 25, s);
        CHECK(vote_select(menu, ds, plan, Contrast::DensityLS).chosen ==
              cv_select(menu, ds, plan, Contrast::DensityLS).chosen);
    }
}

TEST_CASE("aggregate_predict") {
    const double x[] = {0.0};
    const auto ds = Dataset::regression(1, {0, 0, 0, 0}, {0, 0, 2, 2});
    const auto same = plan_from_blocks(4, {{0}, {1}});
    CHECK(aggregate_predict(fixed_menu({{"a", 0.0}, {"b", 2.0}}), ds, same, Contrast::Quadratic, x) == 0.0);
    const auto mixed = plan_from_blocks(4, {{0, 1}, {2, 3}});
    CHECK(aggregate_predict(fixed_menu({{"a", 0.0}, {"b", 2.0}}), ds, mixed, Contrast::Quadratic, x) == 1.0);

    const auto cls = Dataset::classification(0, {}, {1, 1, 1, 1, 0, 0});
    const auto votes = plan_from_blocks(6, {{0, 1}, {2, 3}, {4, 5}});
    const double none[] = {0.0};
    CHECK(aggregate_predict(fixed_menu({{"one", 1.0}, {"zero", 0.0}}), cls, votes, Contrast::ZeroOne,
                            std::span<const double>(none, 0)) == 1.0);

    const auto dens = Dataset::density(1, {0.1, 0.4, 0.8});
    CHECK_THROWS_AS(aggregate_predict(RuleMenu::from_specs({"hist:1"}), dens, leave_one_out(3), Contrast::DensityLS,
                                      x),
                    UnsupportedTaskError);
}

TEST_CASE("aggregate_predict trains winners on the full sample") {
    const auto ds = generate(LinearModel{{2.0}, 0.5}, 20, 8);
    const double x[] = {0.7};
    const double agg = aggregate_predict(RuleMenu({{"ols", ols_rule()}}), ds, vfold(20, 4, 1), Contrast::Quadratic, x);
    CHECK(agg == doctest::Approx((*ols_rule()->fit(ds))(x)).epsilon(1e-14));
}

TEST_CASE("wrapped selection of one rule is that rule") {
    const auto ds = generate(PiecewiseConstantDensity{{0.0, 0.5, 1.0}, {1.6, 0.4}}, 30, 5);
    const auto wrapped = wrap_selection_as_rule(RuleMenu::from_specs({"hist:0.25"}),
                                                [](std::size_t n, std::uint64_t s) { return vfold(n, 3, s); },
                                                Contrast::DensityLS, 9);
    const std::vector<std::size_t> rows{0, 3, 4, 8, 9, 12, 20, 21, 29};
    const auto a = wrapped->fit(SubSample{ds, rows});
    const auto b = histogram_rule(0.25)->fit(SubSample{ds, rows});
    for (double t = 0.0; t <= 1.0; t += 0.05) {
        const double p[] = {t};
        CHECK((*a)(p) == (*b)(p));
    }
    const auto plan = vfold(30, 5, 1);
    CHECK(cv_risk(*wrapped, ds, plan, Contrast::DensityLS).value ==
          cv_risk(*histogram_rule(0.25), ds, plan, Contrast::DensityLS).value);
}

TEST_CASE("hold-out on a wrapped rule is a three-way split") {
    const auto ds = generate(PiecewiseConstantDensity{{0.0, 0.5, 1.0}, {1.6, 0.4}}, 40, 6);
    const auto menu = RuleMenu::from_specs({"hist:1", "hist:0.5", "hist:0.1"});
    const auto wrapped = wrap_selection_as_rule(menu, [](std::size_t n, std::uint64_t) { return leave_one_out(n); },
                                                Contrast::DensityLS);
    const auto split = holdout(40, 24, 3).splits[0];
    const auto train = ds.subset(split.train());
    const auto test = ds.subset(split.validation());
    const auto sel = cv_select(menu, train, leave_one_out(24), Contrast::DensityLS);
    const auto f = menu[sel.chosen_index].rule->fit(train);
    CHECK(holdout_risk(*wrapped, ds, split, Contrast::DensityLS) ==
          doctest::Approx(contrast_eval(Contrast::DensityLS, *f, test)).epsilon(1e-14));
}

TEST_CASE("reusing the selection criterion as a risk estimate is optimistic") {
    const PiecewiseConstantDensity truth{{0.0, 0.3, 1.0}, {2.0, 4.0 / 7.0}};
    std::vector<std::string> specs;
    for (const int k : {1, 2, 4, 5, 10, 20}) specs.push_back("hist:" + std::to_string(1.0 / k));
    const auto menu = RuleMenu::from_specs(specs);
    const auto wrapped = wrap_selection_as_rule(menu, [](std::size_t n, std::uint64_t s) { return vfold(n, 5, s); },
                                                Contrast::DensityLS, 1);
    const int R = 300;
    double sum = 0.0, sum_sq = 0.0;
    for (int r = 0; r < R; ++r) {
        const auto ds = generate(truth, 40, derive_seed(21, "data", r));
        const auto plan = vfold(40, 5, derive_seed(21, "plan", r));
        const auto naive = cv_select(menu, ds, plan, Contrast::DensityLS);
        const double naive_min = naive.criterion_values[naive.chosen_index];
        const double honest = cv_risk(*wrapped, ds, plan, Contrast::DensityLS).value;
        sum += honest - naive_min;
        sum_sq += (honest - naive_min) * (honest - naive_min);
    }
    const double mean = sum / R;
    const double se = std::sqrt((sum_sq / R - mean * mean) / (R - 1));
    MESSAGE("optimism " << mean << " +- " << se);
    CHECK(mean > 3.0 * se);
}

TEST_CASE("inner plan errors carry the sub-sample size") {
    const auto ds = Dataset::density(1, {0.1, 0.2, 0.3, 0.9});
    const auto wrapped = wrap_selection_as_rule(RuleMenu::from_specs({"hist:1"}),
                                                [](std::size_t n, std::uint64_t s) { return vfold(n, 5, s); },
                                                Contrast::DensityLS);
    try {
        wrapped->fit(ds);
        FAIL("expected a bounds error");
    } catch (const BoundsError& e) {
        CHECK(std::string(e.what()).find("size 4") != std::string::npos);
    }
}

TEST_CASE("SelectionResult JSON") {
    const auto ds = Dataset::regression(1, {0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 1, 1});
    const auto r = vote_select(fixed_menu({{"m1", 0.0}, {"m2", 1.0}}), ds,
                               plan_from_blocks(6, {{0, 1}, {2, 3}, {4, 5}}), Contrast::Quadratic);
    const auto j = to_json(r);
    CHECK(j["chosen"] == "m1");
    CHECK(j["criterion_table"].size() == 2);
    CHECK(j["criterion_table"][1]["id"] == "m2");
    CHECK(j["per_split_winners"].size() == 3);
}
