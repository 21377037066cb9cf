#ifndef CVLAB_SELECT_HPP
#define CVLAB_SELECT_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvlab/criteria.hpp"

namespace cvlab {

struct MenuEntry {
    std::string id;
    RulePtr rule;
};

/// Ordered collection of candidate rules. Order decides every tie.
class RuleMenu {
public:
    RuleMenu() = default;
    explicit RuleMenu(std::vector<MenuEntry> entries);

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    const MenuEntry& operator[](std::size_t i) const { return entries_.at(i); }
    auto begin() const noexcept { return entries_.begin(); }
    auto end() const noexcept { return entries_.end(); }

    /// Menu whose ids are the rule specs themselves.
    static RuleMenu from_specs(const std::vector<std::string>& specs);

private:
    std::vector<MenuEntry> entries_;
};

struct SelectionResult {
    std::string chosen;
    std::size_t chosen_index = 0;
    std::vector<std::string> ids;
    /// Criterion per menu entry; `chosen` attains its minimum (first in menu order).
    /// For voting this is the fraction of splits the entry did not win.
    std::vector<double> criterion_values;
    std::vector<std::string> per_split_winners;
};

/// Index of the first minimum.
std::size_t first_argmin(std::span<const double> values);

SelectionResult cv_select(const RuleMenu& menu, const Dataset& ds, const SplitPlan& plan, Contrast contrast);

/// argmin of the bias-corrected CV criterion.
SelectionResult corrected_cv_select(const RuleMenu& menu, const Dataset& ds, const SplitPlan& plan,
                                    Contrast contrast);

/// argmin of R̂_n(f_m(D_n)) + C·pen_vf(m) over a V-fold plan.
SelectionResult penalized_select(const RuleMenu& menu, const Dataset& ds, const SplitPlan& plan, Contrast contrast,
                                 double C);

/// Majority vote over the per-split hold-out argmins.
SelectionResult vote_select(const RuleMenu& menu, const Dataset& ds, const SplitPlan& plan, Contrast contrast);

/// Hold-out argmin on each split of the plan, in plan order.
std::vector<std::size_t> per_split_winners(const RuleMenu& menu, const Dataset& ds, const SplitPlan& plan,
                                           Contrast contrast);

/// Aggregated CV: average (regression) or majority vote (classification) of
/// f_{m_j}(D_n; x) over the per-split winners m_j, each trained on all of D_n.
double aggregate_predict(const RuleMenu& menu, const Dataset& ds, const SplitPlan& plan, Contrast contrast,
                         std::span<const double> x);

/// Maps a sub-sample size and a seed to the plan used inside a wrapped rule.
using PlanFactory = std::function<SplitPlan(std::size_t n, std::uint64_t seed)>;

/// The whole selection pipeline D ↦ f_{m(D)}(D) as a learning rule. Inner plan
/// seeds come from `seed` and the sub-sample content. Wrapping a wrapped rule
/// gives two-stage selection.
RulePtr wrap_selection_as_rule(RuleMenu menu, PlanFactory plan_factory, Contrast contrast, std::uint64_t seed = 0);

nlohmann::ordered_json to_json(const SelectionResult& r);

}  // namespace cvlab

#endif  // CVLAB_SELECT_HPP
