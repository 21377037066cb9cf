#ifndef CVLAB_DATASET_HPP
#define CVLAB_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace cvlab {

enum class TaskKind { Regression, Classification, Density };

std::string to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& name);

/**
 * An ordered, immutable sample of n observations.
 *
 * Features are stored row-major (n rows of d reals, d may be 0 for pure-label
 * tasks). Regression responses are reals; classification labels are dense
 * integers 0..K-1 (K >= 2) kept as exact doubles; density samples carry no
 * response.
 */
class Dataset {
public:
    static Dataset regression(std::size_t d, std::vector<double> x, std::vector<double> y);
    static Dataset classification(std::size_t d, std::vector<double> x, std::vector<int> labels);
    static Dataset density(std::size_t d, std::vector<double> x);

    TaskKind kind() const noexcept { return kind_; }
    std::size_t size() const noexcept { return n_; }
    std::size_t dim() const noexcept { return d_; }
    bool has_response() const noexcept { return kind_ != TaskKind::Density; }

    std::span<const double> row(std::size_t i) const noexcept {
        return {x_.data() + i * d_, d_};
    }
    double feature(std::size_t i, std::size_t k) const noexcept { return x_[i * d_ + k]; }
    double response(std::size_t i) const noexcept { return y_[i]; }
    int label(std::size_t i) const noexcept { return static_cast<int>(y_[i]); }
    /// max(2, largest label + 1) for classification, 0 otherwise.
    int num_classes() const noexcept;

    const std::vector<double>& features() const noexcept { return x_; }
    const std::vector<double>& responses() const noexcept { return y_; }

    /// Rows `rows` in the given order; indices may repeat.
    Dataset subset(std::span<const std::size_t> rows) const;

    /// Content hash of the rows `rows` (bit patterns of features and responses).
    std::uint64_t fingerprint(std::span<const std::size_t> rows) const noexcept;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    Dataset(TaskKind kind, std::size_t n, std::size_t d, std::vector<double> x, std::vector<double> y);

    TaskKind kind_;
    std::size_t n_;
    std::size_t d_;
    std::vector<double> x_;
    std::vector<double> y_;
};

/// A (dataset, rows) view used to fit and evaluate on sub-samples without copying.
struct SubSample {
    const Dataset& data;
    std::span<const std::size_t> rows;

    std::size_t size() const noexcept { return rows.size(); }
};

enum class FeatureLaw { Uniform, StandardNormal };

std::string to_string(FeatureLaw law);

/// y = <x, beta> + sigma * N(0,1), x i.i.d. from `x_law` on R^d.
struct LinearModel {
    std::vector<double> beta;
    double sigma = 0.0;
    FeatureLaw x_law = FeatureLaw::Uniform;
};

/// Density on [0,1], constant on the cells [breakpoints[i], breakpoints[i+1]).
struct PiecewiseConstantDensity {
    std::vector<double> breakpoints;
    std::vector<double> densities;

    static PiecewiseConstantDensity uniform() { return {{0.0, 1.0}, {1.0}}; }
    double operator()(double x) const noexcept;
    /// ∫ f².
    double l2_norm_sq() const noexcept;
};

/// Labels in {0,1} with P(Y = 1) = p1 and no features.
struct BernoulliLabels {
    double p1 = 0.5;
};

using DataGenerator = std::variant<LinearModel, PiecewiseConstantDensity, BernoulliLabels>;

/// Task of the datasets drawn from `gen`.
TaskKind task_kind(const DataGenerator& gen) noexcept;

/// Throws ConfigError when the generator violates its invariants.
void validate(const DataGenerator& gen);

/// n i.i.d. draws; a pure function of (gen, n, seed).
Dataset generate(const DataGenerator& gen, std::size_t n, std::uint64_t seed);

/// Rows in uniformly random order.
Dataset permute(const Dataset& ds, std::uint64_t seed);

/// Uniformly random permutation of 0..n-1 (Fisher-Yates).
std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed);

Dataset load_csv(const std::filesystem::path& path);
void save_csv(const Dataset& ds, const std::filesystem::path& path);

Dataset parse_csv(const std::string& text);
std::string format_csv(const Dataset& ds);

}  // namespace cvlab

#endif  // CVLAB_DATASET_HPP
