#include "cvlab/select.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "cvlab/error.hpp"
#include "cvlab/rng.hpp"

namespace cvlab {

RuleMenu::RuleMenu(std::vector<MenuEntry> entries) : entries_(std::move(entries)) {
    std::set<std::string> seen;
    for (const auto& e : entries_) {
        if (!e.rule) throw ConfigError("menu entry '" + e.id + "' has no rule");
        if (!seen.insert(e.id).second) throw ConfigError("duplicate menu identifier '" + e.id + "'");
    }
}

RuleMenu RuleMenu::from_specs(const std::vector<std::string>& specs) {
    std::vector<MenuEntry> entries;
    for (const auto& s : specs) entries.push_back({s, rule_from_string(s)});
    return RuleMenu(std::move(entries));
}

std::size_t first_argmin(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] < values[best]) best = i;
    return best;
}

namespace {

void require_menu(const RuleMenu& menu) {
    if (menu.empty()) throw ConfigError("selection needs a nonempty menu");
}

template <class Fn>
auto with_rule_context(const MenuEntry& entry, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        e.rethrow_with_context("rule '" + entry.id + "'");
        throw;
    }
}

SelectionResult finish(const RuleMenu& menu, std::vector<double> values) {
    SelectionResult r;
    for (const auto& e : menu) r.ids.push_back(e.id);
    r.chosen_index = first_argmin(values);
    r.chosen = menu[r.chosen_index].id;
    r.criterion_values = std::move(values);
    return r;
}

}  // namespace

SelectionResult cv_select(const RuleMenu& menu, const Dataset& ds, const SplitPlan& plan, Contrast contrast) {
    require_menu(menu);
    std::vector<double> values;
    values.reserve(menu.size());
    for (const auto& e : menu)
        values.push_back(with_rule_context(e, [&] { return cv_risk(*e.rule, ds, plan, contrast).value; }));
    return finish(menu, std::move(values));
}

SelectionResult corrected_cv_select(const RuleMenu& menu, const Dataset& ds, const SplitPlan& plan,
                                    Contrast contrast) {
    require_menu(menu);
    std::vector<double> values;
    values.reserve(menu.size());
    for (const auto& e : menu)
        values.push_back(with_rule_context(e, [&] { return corrected_cv_risk(*e.rule, ds, plan, contrast); }));
    return finish(menu, std::move(values));
}

SelectionResult penalized_select(const RuleMenu& menu, const Dataset& ds, const SplitPlan& plan, Contrast contrast,
                                 double C) {
    require_menu(menu);
    std::vector<double> values;
    values.reserve(menu.size());
    for (const auto& e : menu)
        values.push_back(
            with_rule_context(e, [&] { return vfold_penalized_criterion(*e.rule, ds, plan, contrast, C); }));
    return finish(menu, std::move(values));
}

std::vector<std::size_t> per_split_winners(const RuleMenu& menu, const Dataset& ds, const SplitPlan& plan,
                                           Contrast contrast) {
    require_menu(menu);
    if (plan.splits.empty()) throw ShapeError("plan holds no splits");
    std::vector<std::size_t> winners;
    winners.reserve(plan.size());
    std::vector<double> risks(menu.size());
    for (const Split& split : plan.splits) {
        for (std::size_t m = 0; m < menu.size(); ++m)
            risks[m] = with_rule_context(menu[m], [&] { return holdout_risk(*menu[m].rule, ds, split, contrast); });
        winners.push_back(first_argmin(risks));
    }
    return winners;
}

SelectionResult vote_select(const RuleMenu& menu, const Dataset& ds, const SplitPlan& plan, Contrast contrast) {
    const auto winners = per_split_winners(menu, ds, plan, contrast);
    std::vector<double> votes(menu.size(), 0.0);
    for (const std::size_t w : winners) votes[w] += 1.0;
    const auto total = static_cast<double>(winners.size());
    for (auto& v : votes) v = 1.0 - v / total;
    SelectionResult r = finish(menu, std::move(votes));
    for (const std::size_t w : winners) r.per_split_winners.push_back(menu[w].id);
    return r;
}

double aggregate_predict(const RuleMenu& menu, const Dataset& ds, const SplitPlan& plan, Contrast contrast,
                         std::span<const double> x) {
    if (ds.kind() == TaskKind::Density) throw UnsupportedTaskError("aggregated CV needs a prediction task");
    const auto winners = per_split_winners(menu, ds, plan, contrast);
    std::map<std::size_t, double> prediction_of;  // each winner is trained once on D_n
    for (const std::size_t w : winners)
        if (!prediction_of.contains(w))
            prediction_of[w] = with_rule_context(menu[w], [&] { return (*menu[w].rule->fit(ds))(x); });
    if (ds.kind() == TaskKind::Regression) {
        double s = 0.0;
        for (const std::size_t w : winners) s += prediction_of[w];
        return s / static_cast<double>(winners.size());
    }
    std::map<double, std::size_t> votes;
    for (const std::size_t w : winners) ++votes[prediction_of[w]];
    double best = votes.begin()->first;
    std::size_t best_count = 0;
    for (const auto& [label, count] : votes)  // ascending labels: ties go to the smaller one
        if (count > best_count) {
            best = label;
            best_count = count;
        }
    return best;
}

namespace {

class SelectionRule final : public LearningRule {
public:
    SelectionRule(RuleMenu menu, PlanFactory factory, Contrast contrast, std::uint64_t seed)
        : menu_(std::move(menu)), factory_(std::move(factory)), contrast_(contrast), seed_(seed) {
        require_menu(menu_);
        if (!factory_) throw ConfigError("wrapped selection needs a plan factory");
    }

    PredictorPtr fit(const SubSample& s) const override {
        const Dataset local = s.data.subset(s.rows);
        const std::uint64_t inner_seed = derive_seed(seed_, "inner-plan", s.data.fingerprint(s.rows));
        SplitPlan plan;
        try {
            plan = factory_(local.size(), inner_seed);
        } catch (const Error& e) {
            e.rethrow_with_context("inner plan for a sub-sample of size " + std::to_string(local.size()));
        }
        const SelectionResult chosen = cv_select(menu_, local, plan, contrast_);
        return menu_[chosen.chosen_index].rule->fit(local);
    }

    std::string name() const override {
        std::string s = "select(";
        for (std::size_t i = 0; i < menu_.size(); ++i) s += (i ? "," : "") + menu_[i].id;
        return s + ")";
    }

private:
    RuleMenu menu_;
    PlanFactory factory_;
    Contrast contrast_;
    std::uint64_t seed_;
};

}  // namespace

RulePtr wrap_selection_as_rule(RuleMenu menu, PlanFactory plan_factory, Contrast contrast, std::uint64_t seed) {
    return std::make_shared<SelectionRule>(std::move(menu), std::move(plan_factory), contrast, seed);
}

nlohmann::ordered_json to_json(const SelectionResult& r) {
    nlohmann::ordered_json j;
    j["chosen"] = r.chosen;
    auto table = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < r.ids.size(); ++i) {
        nlohmann::ordered_json row;
        row["id"] = r.ids[i];
        row["criterion"] = r.criterion_values[i];
        table.push_back(std::move(row));
    }
    j["criterion_table"] = std::move(table);
    if (!r.per_split_winners.empty()) j["per_split_winners"] = r.per_split_winners;
    return j;
}

}  // namespace cvlab
