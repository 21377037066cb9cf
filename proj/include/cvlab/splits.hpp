#ifndef CVLAB_SPLITS_HPP
#define CVLAB_SPLITS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cvlab {

/// A training index set E, a proper nonempty subset of {0..n-1}.
/// The validation set is the complement and is computed on demand.
class Split {
public:
    /// `train` need not be sorted; throws BoundsError unless 1 <= |E| <= n-1
    /// and indices are distinct and < n.
    Split(std::vector<std::size_t> train, std::size_t n);

    const std::vector<std::size_t>& train() const noexcept { return train_; }
    std::vector<std::size_t> validation() const;
    std::size_t n() const noexcept { return n_; }
    std::size_t train_size() const noexcept { return train_.size(); }
    std::size_t validation_size() const noexcept { return n_ - train_.size(); }

    friend bool operator==(const Split&, const Split&) = default;

private:
    std::vector<std::size_t> train_;
    std::size_t n_;
};

struct Scheme {
    enum class Kind { Holdout, VFold, MonteCarlo, LeaveOneOut, LeavePOut, RepeatedVFold, Custom };
    Kind kind = Kind::Custom;
    std::size_t V = 0;  // VFold, MonteCarlo, RepeatedVFold
    std::size_t p = 0;  // LeavePOut
    std::size_t L = 0;  // RepeatedVFold

    /// Short label such as "vfold(5)" or "lpo(2)".
    std::string label() const;
    friend bool operator==(const Scheme&, const Scheme&) = default;
};

/// Ordered family of splits with scheme metadata.
struct SplitPlan {
    std::vector<Split> splits;
    std::size_t n = 0;
    std::optional<std::size_t> n_e;  // set when all training sizes coincide
    Scheme scheme;
    std::optional<std::uint64_t> seed;
    bool reg_exact = false;

    std::size_t size() const noexcept { return splits.size(); }
};

inline constexpr std::uint64_t kDefaultMaxSplits = 1'000'000;

SplitPlan holdout(std::size_t n, std::size_t n_e, std::uint64_t seed);
SplitPlan vfold(std::size_t n, std::size_t V, std::uint64_t seed);
SplitPlan monte_carlo(std::size_t n, std::size_t n_e, std::size_t V, std::uint64_t seed);
SplitPlan leave_one_out(std::size_t n);
SplitPlan leave_p_out(std::size_t n, std::size_t p, std::uint64_t max_splits = kDefaultMaxSplits);
SplitPlan repeated_vfold(std::size_t n, std::size_t V, std::size_t L, std::uint64_t seed);

/// Splits of `a` followed by those of `b`; scheme becomes Custom.
SplitPlan concatenate(const SplitPlan& a, const SplitPlan& b);

/// Plan from explicit training sets (scheme Custom).
SplitPlan custom_plan(std::size_t n, std::vector<std::vector<std::size_t>> trains);

/// binomial(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept;

/// Validation blocks of a V-fold plan in plan order (complements of the splits).
std::vector<std::vector<std::size_t>> validation_blocks(const SplitPlan& plan);

/// Uniform random size-k subset of {0..n-1}, sorted.
std::vector<std::size_t> random_subset(std::size_t n, std::size_t k, std::uint64_t seed);

nlohmann::ordered_json to_json(const Scheme& s);
Scheme scheme_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const SplitPlan& plan);
SplitPlan plan_from_json(const nlohmann::ordered_json& j);

}  // namespace cvlab

#endif  // CVLAB_SPLITS_HPP
