#include "cvlab/rules.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "cvlab/error.hpp"
#include "cvlab/ols.hpp"
#include "cvlab/rng.hpp"

namespace cvlab {

double LinearPredictor::operator()(std::span<const double> x) const {
    double s = 0.0;
    const std::size_t d = std::min(x.size(), coef_.size());
    for (std::size_t k = 0; k < d; ++k) s += coef_[k] * x[k];
    return s;
}

StepFunction::StepFunction(std::vector<double> edges, std::vector<double> values)
    : edges_(std::move(edges)), values_(std::move(values)) {
    if (edges_.size() < 2 || values_.size() + 1 != edges_.size())
        throw ShapeError("step function needs k+1 edges for k cells");
    for (std::size_t i = 0; i + 1 < edges_.size(); ++i)
        if (!(edges_[i] < edges_[i + 1])) throw ShapeError("step function edges must increase");
}

long StepFunction::cell_of(double x) const noexcept {
    if (!(x >= edges_.front() && x <= edges_.back())) return -1;
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
    const long cell = static_cast<long>(it - edges_.begin()) - 1;
    return std::min<long>(cell, static_cast<long>(values_.size()) - 1);
}

double StepFunction::at(double x) const noexcept {
    const long c = cell_of(x);
    return c < 0 ? 0.0 : values_[static_cast<std::size_t>(c)];
}

HistogramDensity::HistogramDensity(StepFunction f) : f_(std::move(f)), l2_(0.0) {
    for (std::size_t i = 0; i < f_.cells(); ++i) {
        const double v = f_.values()[i];
        l2_ += v * v * (f_.edges()[i + 1] - f_.edges()[i]);
    }
}

double Regressogram::operator()(std::span<const double> x) const {
    const double v = std::clamp(x[0], f_.edges().front(), f_.edges().back());
    return f_.at(v);
}

KnnPredictor::KnnPredictor(Dataset train, std::size_t k) : train_(std::move(train)), k_(k) {
    if (k_ == 0) throw ConfigError("k-NN needs k >= 1");
    k_ = std::min(k_, train_.size());
}

double KnnPredictor::operator()(std::span<const double> x) const {
    const std::size_t n = train_.size();
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        const auto r = train_.row(i);
        for (std::size_t k = 0; k < r.size(); ++k) s += (r[k] - x[k]) * (r[k] - x[k]);
        dist[i] = {s, i};
    }
    // Pair ordering breaks distance ties by the smaller index.
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k_), dist.end());
    if (train_.kind() == TaskKind::Classification) {
        std::vector<std::size_t> votes(static_cast<std::size_t>(train_.num_classes()), 0);
        for (std::size_t j = 0; j < k_; ++j) ++votes[static_cast<std::size_t>(train_.label(dist[j].second))];
        return static_cast<double>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    }
    double s = 0.0;
    for (std::size_t j = 0; j < k_; ++j) s += train_.response(dist[j].second);
    return s / static_cast<double>(k_);
}

PredictorPtr LearningRule::fit(const Dataset& ds) const {
    std::vector<std::size_t> rows(ds.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return fit(SubSample{ds, rows});
}

// Fitting primitives ---------------------------------------------------------

namespace {

std::size_t regular_cell_count(double h) {
    if (!(h > 0.0 && h <= 1.0)) throw GridError("bin width must lie in (0,1]");
    const double inv = 1.0 / h;
    const double m = std::round(inv);
    if (std::abs(inv - m) > 1e-9) throw GridError("bin width " + std::to_string(h) + " does not divide [0,1]");
    return static_cast<std::size_t>(m);
}

std::vector<double> regular_edges(std::size_t m) {
    std::vector<double> edges(m + 1);
    for (std::size_t k = 0; k <= m; ++k) edges[k] = static_cast<double>(k) / static_cast<double>(m);
    return edges;
}

std::size_t regular_cell(double x, std::size_t m) {
    auto c = static_cast<std::size_t>(std::min(std::floor(x * static_cast<double>(m)), static_cast<double>(m - 1)));
    const auto mm = static_cast<double>(m);
    if (c > 0 && x < static_cast<double>(c) / mm) --c;
    if (c + 1 < m && x >= static_cast<double>(c + 1) / mm) ++c;
    return c;
}

}  // namespace

std::shared_ptr<const HistogramDensity> fit_histogram_density(std::span<const double> sample, double h) {
    const std::size_t m = regular_cell_count(h);
    if (sample.empty()) throw ShapeError("histogram needs a nonempty sample");
    std::vector<double> counts(m, 0.0);
    for (const double x : sample) {
        if (!(x >= 0.0 && x <= 1.0)) throw BoundsError("histogram sample point outside [0,1]");
        counts[regular_cell(x, m)] += 1.0;
    }
    const double scale = static_cast<double>(m) / static_cast<double>(sample.size());
    for (auto& c : counts) c *= scale;
    return std::make_shared<HistogramDensity>(StepFunction(regular_edges(m), std::move(counts)));
}

std::shared_ptr<const Regressogram> fit_regressogram(std::span<const double> x, std::span<const double> y,
                                                     std::vector<double> edges) {
    if (x.size() != y.size()) throw ShapeError("regressogram inputs differ in length");
    if (edges.size() < 2 || edges.front() != 0.0 || edges.back() != 1.0)
        throw ConfigError("regressogram cells must partition [0,1]");
    const std::size_t k = edges.size() - 1;
    StepFunction probe(edges, std::vector<double>(k, 0.0));
    std::vector<double> sums(k, 0.0), counts(k, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const long c = probe.cell_of(std::clamp(x[i], 0.0, 1.0));
        sums[static_cast<std::size_t>(c)] += y[i];
        counts[static_cast<std::size_t>(c)] += 1.0;
    }
    for (std::size_t c = 0; c < k; ++c) sums[c] = counts[c] > 0 ? sums[c] / counts[c] : 0.0;
    return std::make_shared<Regressogram>(StepFunction(std::move(edges), std::move(sums)));
}

std::shared_ptr<const ConstantPredictor> fit_majority_vote(std::span<const int> labels, TieMode tie,
                                                           std::uint64_t coin_seed) {
    if (labels.empty()) throw ShapeError("majority vote needs at least one label");
    const int top = *std::max_element(labels.begin(), labels.end());
    std::vector<std::size_t> votes(static_cast<std::size_t>(std::max(top + 1, 2)), 0);
    for (const int l : labels) ++votes[static_cast<std::size_t>(l)];
    const std::size_t best = *std::max_element(votes.begin(), votes.end());
    std::vector<int> tied;
    for (std::size_t l = 0; l < votes.size(); ++l)
        if (votes[l] == best) tied.push_back(static_cast<int>(l));
    if (tied.size() == 1 || tie == TieMode::DeterministicZero)
        return std::make_shared<ConstantPredictor>(static_cast<double>(tied.front()));
    Rng coin(coin_seed);
    return std::make_shared<ConstantPredictor>(static_cast<double>(tied[coin.uniform_index(tied.size())]));
}

// Rules ----------------------------------------------------------------------

namespace {

void require_kind(const SubSample& s, TaskKind kind, const char* rule) {
    if (s.data.kind() != kind)
        throw UnsupportedTaskError(std::string(rule) + " cannot fit a " + to_string(s.data.kind()) + " dataset");
    if (s.rows.empty()) throw ShapeError(std::string(rule) + " needs a nonempty sub-sample");
}

std::vector<double> first_feature(const SubSample& s) {
    if (s.data.dim() != 1) throw ShapeError("rule needs one-dimensional features");
    std::vector<double> x;
    x.reserve(s.size());
    for (const std::size_t i : s.rows) x.push_back(s.data.feature(i, 0));
    return x;
}

class OlsRule final : public LearningRule {
public:
    explicit OlsRule(std::optional<std::size_t> k = std::nullopt) : k_(k) {
        if (k_ && *k_ == 0) throw ConfigError("OLS needs at least one feature");
    }
    PredictorPtr fit(const SubSample& s) const override {
        require_kind(s, TaskKind::Regression, "OLS");
        if (k_ && *k_ > s.data.dim())
            throw ShapeError("OLS on " + std::to_string(*k_) + " features but dataset has d = " +
                             std::to_string(s.data.dim()));
        const auto n = static_cast<Eigen::Index>(s.size());
        const auto d = static_cast<Eigen::Index>(k_ ? *k_ : s.data.dim());
        Eigen::MatrixXd X(n, d);
        Eigen::VectorXd y(n);
        for (Eigen::Index r = 0; r < n; ++r) {
            const std::size_t i = s.rows[static_cast<std::size_t>(r)];
            for (Eigen::Index k = 0; k < d; ++k) X(r, k) = s.data.feature(i, static_cast<std::size_t>(k));
            y[r] = s.data.response(i);
        }
        const OlsFit f = fit_ols(X, y);
        return std::make_shared<LinearPredictor>(std::vector<double>(f.coefficients.begin(), f.coefficients.end()));
    }
    std::string name() const override { return k_ ? "ols:" + std::to_string(*k_) : "ols"; }

private:
    std::optional<std::size_t> k_;
};

class HistogramRule final : public LearningRule {
public:
    explicit HistogramRule(double h) : h_(h) { regular_cell_count(h_); }
    PredictorPtr fit(const SubSample& s) const override {
        require_kind(s, TaskKind::Density, "histogram");
        return fit_histogram_density(first_feature(s), h_);
    }
    std::string name() const override { return "hist:" + format_width(); }

private:
    std::string format_width() const {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", h_);
        return buf;
    }
    double h_;
};

class RegressogramRule final : public LearningRule {
public:
    explicit RegressogramRule(std::vector<double> edges) : edges_(std::move(edges)) {
        StepFunction check(edges_, std::vector<double>(edges_.size() - 1, 0.0));
        if (edges_.front() != 0.0 || edges_.back() != 1.0) throw ConfigError("regressogram cells must partition [0,1]");
    }
    PredictorPtr fit(const SubSample& s) const override {
        require_kind(s, TaskKind::Regression, "regressogram");
        const auto x = first_feature(s);
        std::vector<double> y;
        y.reserve(s.size());
        for (const std::size_t i : s.rows) y.push_back(s.data.response(i));
        return fit_regressogram(x, y, edges_);
    }
    std::string name() const override { return "regressogram:" + std::to_string(edges_.size() - 1); }

private:
    std::vector<double> edges_;
};

class KnnRule final : public LearningRule {
public:
    explicit KnnRule(std::size_t k) : k_(k) {
        if (k_ == 0) throw ConfigError("k-NN needs k >= 1");
    }
    PredictorPtr fit(const SubSample& s) const override {
        if (s.data.kind() == TaskKind::Density) throw UnsupportedTaskError("k-NN cannot fit a density dataset");
        if (s.rows.empty()) throw ShapeError("k-NN needs a nonempty sub-sample");
        return std::make_shared<KnnPredictor>(s.data.subset(s.rows), k_);
    }
    std::string name() const override { return "knn:" + std::to_string(k_); }

private:
    std::size_t k_;
};

class MajorityVoteRule final : public LearningRule {
public:
    MajorityVoteRule(TieMode tie, std::uint64_t seed) : tie_(tie), seed_(seed) {}
    PredictorPtr fit(const SubSample& s) const override {
        require_kind(s, TaskKind::Classification, "majority vote");
        std::vector<int> labels;
        labels.reserve(s.size());
        for (const std::size_t i : s.rows) labels.push_back(s.data.label(i));
        return fit_majority_vote(labels, tie_, derive_seed(seed_, "tie", s.data.fingerprint(s.rows)));
    }
    std::string name() const override {
        return tie_ == TieMode::Randomized ? "majority:random:" + std::to_string(seed_) : "majority";
    }
    TieMode tie() const noexcept { return tie_; }

private:
    TieMode tie_;
    std::uint64_t seed_;
};

}  // namespace

RulePtr ols_rule() { return std::make_shared<OlsRule>(); }
RulePtr ols_rule(std::size_t k) { return std::make_shared<OlsRule>(k); }

std::optional<TieMode> majority_vote_tie_mode(const LearningRule& rule) {
    if (const auto* m = dynamic_cast<const MajorityVoteRule*>(&rule)) return m->tie();
    return std::nullopt;
}
RulePtr histogram_rule(double h) { return std::make_shared<HistogramRule>(h); }
RulePtr regressogram_rule(std::vector<double> edges) { return std::make_shared<RegressogramRule>(std::move(edges)); }
RulePtr regular_regressogram_rule(std::size_t cells) {
    if (cells == 0) throw ConfigError("regressogram needs at least one cell");
    return regressogram_rule(regular_edges(cells));
}
RulePtr knn_rule(std::size_t k) { return std::make_shared<KnnRule>(k); }
RulePtr majority_vote_rule(TieMode tie, std::uint64_t seed) { return std::make_shared<MajorityVoteRule>(tie, seed); }

RulePtr rule_from_string(const std::string& spec) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const auto colon = spec.find(':', start);
        parts.push_back(spec.substr(start, colon - start));
        if (colon == std::string::npos) break;
        start = colon + 1;
    }
    auto number = [&](std::size_t i) -> double {
        try {
            std::size_t used = 0;
            const double v = std::stod(parts.at(i), &used);
            if (used != parts[i].size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("bad parameter in rule '" + spec + "'");
        }
    };
    auto count = [&](std::size_t i) -> std::size_t {
        const double v = number(i);
        if (v < 1 || v != std::floor(v)) throw ConfigError("rule '" + spec + "' needs a positive integer");
        return static_cast<std::size_t>(v);
    };
    const std::string& head = parts[0];
    if (head == "ols" && parts.size() == 1) return ols_rule();
    if (head == "ols" && parts.size() == 2) return ols_rule(count(1));
    if (head == "hist" && parts.size() == 2) {
        try {
            return histogram_rule(number(1));
        } catch (const GridError& e) {
            throw ConfigError(e.what());
        }
    }
    if (head == "regressogram" && parts.size() == 2) return regular_regressogram_rule(count(1));
    if (head == "knn" && parts.size() == 2) return knn_rule(count(1));
    if (head == "majority" && parts.size() == 1) return majority_vote_rule(TieMode::DeterministicZero);
    if (head == "majority" && parts.size() >= 2 && parts.size() <= 3 && parts[1] == "random") {
        const std::uint64_t seed = parts.size() == 3 ? static_cast<std::uint64_t>(number(2)) : 0;
        return majority_vote_rule(TieMode::Randomized, seed);
    }
    throw ConfigError("unknown rule '" + spec + "'");
}

// Contrasts ------------------------------------------------------------------

std::string to_string(Contrast c) {
    switch (c) {
        case Contrast::Quadratic: return "quadratic";
        case Contrast::ZeroOne: return "zero_one";
        case Contrast::DensityLS: return "density_ls";
        case Contrast::DensityLogLik: return "density_loglik";
    }
    return "unknown";
}

Contrast contrast_from_string(const std::string& name) {
    for (auto c : {Contrast::Quadratic, Contrast::ZeroOne, Contrast::DensityLS, Contrast::DensityLogLik})
        if (name == to_string(c)) return c;
    throw ConfigError("unknown contrast '" + name + "'");
}

bool is_density_contrast(Contrast c) noexcept {
    return c == Contrast::DensityLS || c == Contrast::DensityLogLik;
}

void check_compatible(Contrast c, TaskKind kind) {
    const bool ok = is_density_contrast(c) ? kind == TaskKind::Density
                    : c == Contrast::ZeroOne ? kind == TaskKind::Classification
                                             : kind == TaskKind::Regression;
    if (!ok) throw UnsupportedTaskError("contrast " + to_string(c) + " cannot score a " + to_string(kind) + " dataset");
}

namespace {

double require_l2(const Predictor& f) {
    const auto l2 = f.l2_norm_sq();
    if (!l2) throw UnsupportedTaskError("least-squares density contrast needs a density predictor");
    return *l2;
}

}  // namespace

double pointwise_cost(Contrast c, const Predictor& f, std::span<const double> x, double y) {
    switch (c) {
        case Contrast::Quadratic: {
            const double e = f(x) - y;
            return e * e;
        }
        case Contrast::ZeroOne: return f(x) != y ? 1.0 : 0.0;
        case Contrast::DensityLS: return require_l2(f) - 2.0 * f(x);
        case Contrast::DensityLogLik: {
            const double v = f(x);
            return v > 0.0 ? -std::log(v) : std::numeric_limits<double>::infinity();
        }
    }
    return 0.0;
}

double contrast_eval(Contrast c, const Predictor& f, const SubSample& sample) {
    if (sample.rows.empty()) throw ShapeError("contrast needs a nonempty sample");
    check_compatible(c, sample.data.kind());
    const auto m = static_cast<double>(sample.size());
    const Dataset& ds = sample.data;
    switch (c) {
        case Contrast::DensityLS: {
            const double l2 = require_l2(f);
            double s = 0.0;
            for (const std::size_t i : sample.rows) s += f(ds.row(i));
            return l2 - 2.0 * s / m;
        }
        case Contrast::DensityLogLik: {
            double s = 0.0;
            for (const std::size_t i : sample.rows) {
                const double v = f(ds.row(i));
                if (!(v > 0.0)) return std::numeric_limits<double>::infinity();
                s += std::log(v);
            }
            return -s / m;
        }
        default: {
            double s = 0.0;
            for (const std::size_t i : sample.rows) s += pointwise_cost(c, f, ds.row(i), ds.response(i));
            return s / m;
        }
    }
}

double contrast_eval(Contrast c, const Predictor& f, const Dataset& ds) {
    std::vector<std::size_t> rows(ds.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return contrast_eval(c, f, SubSample{ds, rows});
}

}  // namespace cvlab
