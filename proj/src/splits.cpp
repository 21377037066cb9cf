#include "cvlab/splits.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "cvlab/dataset.hpp"
#include "cvlab/error.hpp"
#include "cvlab/rng.hpp"

namespace cvlab {

Split::Split(std::vector<std::size_t> train, std::size_t n) : train_(std::move(train)), n_(n) {
    std::sort(train_.begin(), train_.end());
    if (train_.empty() || train_.size() >= n_)
        throw BoundsError("training set size " + std::to_string(train_.size()) +
                          " must lie in [1, n-1] with n = " + std::to_string(n_));
    if (train_.back() >= n_) throw BoundsError("training index out of range");
    if (std::adjacent_find(train_.begin(), train_.end()) != train_.end())
        throw BoundsError("training indices must be distinct");
}

std::vector<std::size_t> Split::validation() const {
    std::vector<std::size_t> out;
    out.reserve(n_ - train_.size());
    std::size_t t = 0;
    for (std::size_t i = 0; i < n_; ++i) {
        if (t < train_.size() && train_[t] == i) {
            ++t;
        } else {
            out.push_back(i);
        }
    }
    return out;
}

std::string Scheme::label() const {
    switch (kind) {
        case Kind::Holdout: return "holdout";
        case Kind::VFold: return "vfold(" + std::to_string(V) + ")";
        case Kind::MonteCarlo: return "mc(" + std::to_string(V) + ")";
        case Kind::LeaveOneOut: return "loo";
        case Kind::LeavePOut: return "lpo(" + std::to_string(p) + ")";
        case Kind::RepeatedVFold: return "rvfold(" + std::to_string(V) + "x" + std::to_string(L) + ")";
        case Kind::Custom: return "custom";
    }
    return "custom";
}

namespace {

void finalize(SplitPlan& plan) {
    plan.reg_exact = !plan.splits.empty() &&
                     std::all_of(plan.splits.begin(), plan.splits.end(), [&](const Split& s) {
                         return s.train_size() == plan.splits.front().train_size();
                     });
    plan.n_e = plan.reg_exact ? std::optional<std::size_t>(plan.splits.front().train_size()) : std::nullopt;
}

void check_train_size(std::size_t n, std::size_t n_e) {
    if (n < 2 || n_e < 1 || n_e > n - 1)
        throw BoundsError("training size n_e = " + std::to_string(n_e) + " must lie in [1, n-1] with n = " +
                          std::to_string(n));
}

std::vector<Split> vfold_splits(std::size_t n, std::size_t V, std::uint64_t seed) {
    const auto order = random_permutation(n, derive_seed(seed, "vfold"));
    std::vector<std::vector<std::size_t>> blocks(V);
    for (std::size_t k = 0; k < n; ++k) blocks[k % V].push_back(order[k]);
    std::vector<Split> splits;
    splits.reserve(V);
    for (auto& block : blocks) {
        std::sort(block.begin(), block.end());
        std::vector<std::size_t> train;
        train.reserve(n - block.size());
        std::size_t b = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (b < block.size() && block[b] == i) {
                ++b;
            } else {
                train.push_back(i);
            }
        }
        splits.emplace_back(std::move(train), n);
    }
    return splits;
}

}  // namespace

std::vector<std::size_t> random_subset(std::size_t n, std::size_t k, std::uint64_t seed) {
    // Partial Fisher-Yates over the first k positions.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.uniform_index(n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

SplitPlan holdout(std::size_t n, std::size_t n_e, std::uint64_t seed) {
    check_train_size(n, n_e);
    SplitPlan plan;
    plan.n = n;
    plan.scheme = {Scheme::Kind::Holdout};
    plan.seed = seed;
    plan.splits.emplace_back(random_subset(n, n_e, derive_seed(seed, "subset", 0)), n);
    finalize(plan);
    return plan;
}

SplitPlan monte_carlo(std::size_t n, std::size_t n_e, std::size_t V, std::uint64_t seed) {
    check_train_size(n, n_e);
    if (V < 1) throw BoundsError("Monte-Carlo CV needs V >= 1");
    SplitPlan plan;
    plan.n = n;
    plan.scheme = {Scheme::Kind::MonteCarlo, V};
    plan.seed = seed;
    plan.splits.reserve(V);
    for (std::size_t j = 0; j < V; ++j)
        plan.splits.emplace_back(random_subset(n, n_e, derive_seed(seed, "subset", j)), n);
    finalize(plan);
    return plan;
}

SplitPlan vfold(std::size_t n, std::size_t V, std::uint64_t seed) {
    if (V < 2 || V > n)
        throw BoundsError("V-fold needs 2 <= V <= n (V = " + std::to_string(V) + ", n = " + std::to_string(n) + ")");
    SplitPlan plan;
    plan.n = n;
    plan.scheme = {Scheme::Kind::VFold, V};
    plan.seed = seed;
    plan.splits = vfold_splits(n, V, seed);
    finalize(plan);
    return plan;
}

SplitPlan leave_one_out(std::size_t n) {
    if (n < 2) throw BoundsError("leave-one-out needs n >= 2");
    SplitPlan plan;
    plan.n = n;
    plan.scheme = {Scheme::Kind::LeaveOneOut};
    plan.splits.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<std::size_t> train;
        train.reserve(n - 1);
        for (std::size_t i = 0; i < n; ++i)
            if (i != j) train.push_back(i);
        plan.splits.emplace_back(std::move(train), n);
    }
    finalize(plan);
    return plan;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(r);
}

SplitPlan leave_p_out(std::size_t n, std::size_t p, std::uint64_t max_splits) {
    if (n < 2 || p < 1 || p > n - 1)
        throw BoundsError("leave-p-out needs 1 <= p <= n-1 (p = " + std::to_string(p) + ", n = " +
                          std::to_string(n) + ")");
    const std::uint64_t count = binomial(n, p);
    if (count > max_splits)
        throw BudgetError("leave-p-out would enumerate binomial(" + std::to_string(n) + "," + std::to_string(p) +
                          ") = " + std::to_string(count) + " splits, above the limit of " +
                          std::to_string(max_splits));
    SplitPlan plan;
    plan.n = n;
    plan.scheme = {Scheme::Kind::LeavePOut, 0, p};
    plan.splits.reserve(count);
    // Validation sets in lexicographic order.
    std::vector<std::size_t> val(p);
    std::iota(val.begin(), val.end(), std::size_t{0});
    for (;;) {
        std::vector<std::size_t> train;
        train.reserve(n - p);
        std::size_t v = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (v < p && val[v] == i) {
                ++v;
            } else {
                train.push_back(i);
            }
        }
        plan.splits.emplace_back(std::move(train), n);
        std::size_t pos = p;
        while (pos > 0 && val[pos - 1] == n - p + pos - 1) --pos;
        if (pos == 0) break;
        ++val[pos - 1];
        for (std::size_t q = pos; q < p; ++q) val[q] = val[q - 1] + 1;
    }
    finalize(plan);
    return plan;
}

SplitPlan repeated_vfold(std::size_t n, std::size_t V, std::size_t L, std::uint64_t seed) {
    if (L < 1) throw BoundsError("repeated V-fold needs L >= 1");
    if (V < 2 || V > n) throw BoundsError("V-fold needs 2 <= V <= n");
    SplitPlan plan;
    plan.n = n;
    plan.scheme = {Scheme::Kind::RepeatedVFold, V, 0, L};
    plan.seed = seed;
    plan.splits.reserve(V * L);
    for (std::size_t l = 0; l < L; ++l) {
        const std::uint64_t s = l == 0 ? seed : derive_seed(seed, "repeat", l);
        for (auto& split : vfold_splits(n, V, s)) plan.splits.push_back(std::move(split));
    }
    finalize(plan);
    return plan;
}

SplitPlan concatenate(const SplitPlan& a, const SplitPlan& b) {
    if (a.n != b.n) throw ShapeError("cannot concatenate plans over different sample sizes");
    SplitPlan plan;
    plan.n = a.n;
    plan.scheme = {Scheme::Kind::Custom};
    plan.splits = a.splits;
    plan.splits.insert(plan.splits.end(), b.splits.begin(), b.splits.end());
    finalize(plan);
    return plan;
}

SplitPlan custom_plan(std::size_t n, std::vector<std::vector<std::size_t>> trains) {
    if (trains.empty()) throw BoundsError("a plan needs at least one split");
    SplitPlan plan;
    plan.n = n;
    plan.scheme = {Scheme::Kind::Custom};
    for (auto& t : trains) plan.splits.emplace_back(std::move(t), n);
    finalize(plan);
    return plan;
}

std::vector<std::vector<std::size_t>> validation_blocks(const SplitPlan& plan) {
    std::vector<std::vector<std::size_t>> out;
    out.reserve(plan.size());
    for (const auto& s : plan.splits) out.push_back(s.validation());
    return out;
}

// JSON ----------------------------------------------------------------------

namespace {

const char* kind_name(Scheme::Kind k) {
    switch (k) {
        case Scheme::Kind::Holdout: return "holdout";
        case Scheme::Kind::VFold: return "vfold";
        case Scheme::Kind::MonteCarlo: return "mc";
        case Scheme::Kind::LeaveOneOut: return "loo";
        case Scheme::Kind::LeavePOut: return "lpo";
        case Scheme::Kind::RepeatedVFold: return "rvfold";
        case Scheme::Kind::Custom: return "custom";
    }
    return "custom";
}

}  // namespace

nlohmann::ordered_json to_json(const Scheme& s) {
    nlohmann::ordered_json j;
    j["name"] = kind_name(s.kind);
    if (s.kind == Scheme::Kind::VFold || s.kind == Scheme::Kind::MonteCarlo ||
        s.kind == Scheme::Kind::RepeatedVFold)
        j["V"] = s.V;
    if (s.kind == Scheme::Kind::LeavePOut) j["p"] = s.p;
    if (s.kind == Scheme::Kind::RepeatedVFold) j["L"] = s.L;
    return j;
}

Scheme scheme_from_json(const nlohmann::ordered_json& j) {
    const std::string name = j.at("name").get<std::string>();
    Scheme s;
    for (auto k : {Scheme::Kind::Holdout, Scheme::Kind::VFold, Scheme::Kind::MonteCarlo, Scheme::Kind::LeaveOneOut,
                   Scheme::Kind::LeavePOut, Scheme::Kind::RepeatedVFold, Scheme::Kind::Custom})
        if (name == kind_name(k)) s.kind = k;
    if (name != kind_name(s.kind)) throw ParseError("unknown scheme '" + name + "'");
    s.V = j.value("V", std::size_t{0});
    s.p = j.value("p", std::size_t{0});
    s.L = j.value("L", std::size_t{0});
    return s;
}

nlohmann::ordered_json to_json(const SplitPlan& plan) {
    nlohmann::ordered_json j;
    j["scheme"] = to_json(plan.scheme);
    j["n"] = plan.n;
    j["n_e"] = plan.n_e ? nlohmann::ordered_json(*plan.n_e) : nlohmann::ordered_json(nullptr);
    j["seed"] = plan.seed ? nlohmann::ordered_json(*plan.seed) : nlohmann::ordered_json(nullptr);
    j["reg_exact"] = plan.reg_exact;
    auto splits = nlohmann::ordered_json::array();
    for (const auto& s : plan.splits) splits.push_back(s.train());
    j["splits"] = std::move(splits);
    return j;
}

SplitPlan plan_from_json(const nlohmann::ordered_json& j) {
    try {
        SplitPlan plan;
        plan.n = j.at("n").get<std::size_t>();
        plan.scheme = scheme_from_json(j.at("scheme"));
        if (j.contains("seed") && !j["seed"].is_null()) plan.seed = j["seed"].get<std::uint64_t>();
        for (const auto& t : j.at("splits")) plan.splits.emplace_back(t.get<std::vector<std::size_t>>(), plan.n);
        if (plan.splits.empty()) throw ParseError("plan holds no splits");
        finalize(plan);
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed split plan: ") + e.what());
    }
}

}  // namespace cvlab
