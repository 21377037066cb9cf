#include "cvlab/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cvlab/error.hpp"
#include "cvlab/rng.hpp"

namespace cvlab {

std::string to_string(TaskKind kind) {
    switch (kind) {
        case TaskKind::Regression: return "regression";
        case TaskKind::Classification: return "classification";
        case TaskKind::Density: return "density";
    }
    return "unknown";
}

TaskKind task_kind_from_string(const std::string& name) {
    if (name == "regression") return TaskKind::Regression;
    if (name == "classification") return TaskKind::Classification;
    if (name == "density") return TaskKind::Density;
    throw ParseError("unknown dataset kind '" + name + "'");
}

std::string to_string(FeatureLaw law) {
    return law == FeatureLaw::Uniform ? "uniform" : "normal";
}

Dataset::Dataset(TaskKind kind, std::size_t n, std::size_t d, std::vector<double> x,
                 std::vector<double> y)
    : kind_(kind), n_(n), d_(d), x_(std::move(x)), y_(std::move(y)) {
    if (n_ == 0) throw ShapeError("dataset must hold at least one observation");
    if (x_.size() != n_ * d_) throw ShapeError("feature block is not n x d");
    if (has_response() && y_.size() != n_) throw ShapeError("response count differs from row count");
    if (!has_response() && !y_.empty()) throw ShapeError("density dataset cannot carry responses");
    if (kind_ == TaskKind::Density && d_ == 0) throw ShapeError("density dataset needs d >= 1");
}

Dataset Dataset::regression(std::size_t d, std::vector<double> x, std::vector<double> y) {
    const std::size_t n = y.size();
    return Dataset(TaskKind::Regression, n, d, std::move(x), std::move(y));
}

Dataset Dataset::classification(std::size_t d, std::vector<double> x, std::vector<int> labels) {
    std::vector<double> y;
    y.reserve(labels.size());
    for (const int l : labels) {
        if (l < 0) throw ShapeError("labels must be nonnegative integers");
        y.push_back(static_cast<double>(l));
    }
    const std::size_t n = y.size();
    return Dataset(TaskKind::Classification, n, d, std::move(x), std::move(y));
}

Dataset Dataset::density(std::size_t d, std::vector<double> x) {
    if (d == 0) throw ShapeError("density dataset needs d >= 1");
    const std::size_t n = x.size() / d;
    if (n * d != x.size()) throw ShapeError("feature block is not n x d");
    return Dataset(TaskKind::Density, n, d, std::move(x), {});
}

int Dataset::num_classes() const noexcept {
    if (kind_ != TaskKind::Classification) return 0;
    int k = 1;
    for (const double v : y_) k = std::max(k, static_cast<int>(v));
    return std::max(2, k + 1);
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    std::vector<double> x;
    x.reserve(rows.size() * d_);
    std::vector<double> y;
    if (has_response()) y.reserve(rows.size());
    for (const std::size_t i : rows) {
        if (i >= n_) throw ShapeError("row index out of range");
        const auto r = row(i);
        x.insert(x.end(), r.begin(), r.end());
        if (has_response()) y.push_back(y_[i]);
    }
    return Dataset(kind_, rows.size(), d_, std::move(x), std::move(y));
}

std::uint64_t Dataset::fingerprint(std::span<const std::size_t> rows) const noexcept {
    std::uint64_t h = mix64(rows.size() ^ 0x5043'5641'4C41'4231ULL);
    auto absorb = [&h](double v) { h = mix64(h ^ std::bit_cast<std::uint64_t>(v)); };
    for (const std::size_t i : rows) {
        for (const double v : row(i)) absorb(v);
        if (has_response()) absorb(y_[i]);
    }
    return h;
}

double PiecewiseConstantDensity::operator()(double x) const noexcept {
    if (breakpoints.size() < 2 || x < breakpoints.front() || x > breakpoints.back()) return 0.0;
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
    std::size_t cell = static_cast<std::size_t>(it - breakpoints.begin());
    cell = cell == 0 ? 0 : cell - 1;
    cell = std::min(cell, densities.size() - 1);
    return densities[cell];
}

double PiecewiseConstantDensity::l2_norm_sq() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < densities.size(); ++i)
        s += densities[i] * densities[i] * (breakpoints[i + 1] - breakpoints[i]);
    return s;
}

namespace {

struct Validator {
    void operator()(const LinearModel& m) const {
        if (m.beta.empty()) throw ConfigError("linear model needs at least one coefficient");
        if (!(m.sigma >= 0.0) || !std::isfinite(m.sigma)) throw ConfigError("sigma must be >= 0");
    }
    void operator()(const PiecewiseConstantDensity& p) const {
        if (p.breakpoints.size() < 2 || p.densities.size() + 1 != p.breakpoints.size())
            throw ConfigError("density needs k+1 breakpoints for k cells");
        if (p.breakpoints.front() != 0.0 || p.breakpoints.back() != 1.0)
            throw ConfigError("density breakpoints must span [0,1]");
        double mass = 0.0;
        for (std::size_t i = 0; i < p.densities.size(); ++i) {
            const double w = p.breakpoints[i + 1] - p.breakpoints[i];
            if (!(w > 0.0)) throw ConfigError("density breakpoints must be increasing");
            if (!(p.densities[i] >= 0.0)) throw ConfigError("density values must be nonnegative");
            mass += p.densities[i] * w;
        }
        if (std::abs(mass - 1.0) > 1e-12) throw ConfigError("density does not integrate to 1");
    }
    void operator()(const BernoulliLabels& b) const {
        if (!(b.p1 > 0.0 && b.p1 < 1.0)) throw ConfigError("p1 must lie in (0,1)");
    }
};

double sample_density(const PiecewiseConstantDensity& p, Rng& rng) {
    const double u = rng.uniform01();
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < p.densities.size(); ++i) {
        const double w = p.breakpoints[i + 1] - p.breakpoints[i];
        const double mass = p.densities[i] * w;
        if (mass <= 0.0) continue;
        last_positive = i;
        if (u < cumulative + mass) {
            const double x = p.breakpoints[i] + (u - cumulative) / p.densities[i];
            return std::clamp(x, p.breakpoints[i], p.breakpoints[i + 1]);
        }
        cumulative += mass;
    }
    // u landed in the rounding gap above the accumulated mass.
    return p.breakpoints[last_positive + 1];
}

}  // namespace

TaskKind task_kind(const DataGenerator& gen) noexcept {
    if (std::holds_alternative<LinearModel>(gen)) return TaskKind::Regression;
    if (std::holds_alternative<PiecewiseConstantDensity>(gen)) return TaskKind::Density;
    return TaskKind::Classification;
}

void validate(const DataGenerator& gen) { std::visit(Validator{}, gen); }

Dataset generate(const DataGenerator& gen, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw BoundsError("generate needs n >= 1");
    validate(gen);
    Rng rng(derive_seed(seed, "generate"));
    if (const auto* lm = std::get_if<LinearModel>(&gen)) {
        const std::size_t d = lm->beta.size();
        std::vector<double> x(n * d), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double mean = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double v = lm->x_law == FeatureLaw::Uniform ? rng.uniform01() : rng.normal();
                x[i * d + k] = v;
                mean += v * lm->beta[k];
            }
            y[i] = lm->sigma > 0.0 ? mean + lm->sigma * rng.normal() : mean;
        }
        return Dataset::regression(d, std::move(x), std::move(y));
    }
    if (const auto* pd = std::get_if<PiecewiseConstantDensity>(&gen)) {
        std::vector<double> x(n);
        for (auto& v : x) v = sample_density(*pd, rng);
        return Dataset::density(1, std::move(x));
    }
    const auto& bl = std::get<BernoulliLabels>(gen);
    std::vector<int> labels(n);
    for (auto& l : labels) l = rng.bernoulli(bl.p1) ? 1 : 0;
    return Dataset::classification(0, {}, std::move(labels));
}

std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = rng.uniform_index(i);
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

Dataset permute(const Dataset& ds, std::uint64_t seed) {
    const auto perm = random_permutation(ds.size(), derive_seed(seed, "permute"));
    return ds.subset(perm);
}

// CSV ---------------------------------------------------------------------

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

double parse_number(const std::string& field, std::size_t line_no) {
    const std::string f = trim(field);
    double v = 0.0;
    const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || res.ec != std::errc{} || res.ptr != f.data() + f.size())
        throw ParseError("row " + std::to_string(line_no) + ": non-numeric field '" + f + "'");
    return v;
}

}  // namespace

std::string format_csv(const Dataset& ds) {
    std::string out = "#kind=" + to_string(ds.kind()) + ",d=" + std::to_string(ds.dim()) + "\n";
    std::vector<std::string> header;
    for (std::size_t k = 0; k < ds.dim(); ++k) header.push_back("x" + std::to_string(k + 1));
    if (ds.has_response()) header.emplace_back("y");
    for (std::size_t k = 0; k < header.size(); ++k) out += (k ? "," : "") + header[k];
    out += "\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        bool first = true;
        for (const double v : ds.row(i)) {
            if (!first) out += ",";
            out += format_double(v);
            first = false;
        }
        if (ds.has_response()) {
            if (!first) out += ",";
            out += ds.kind() == TaskKind::Classification ? std::to_string(ds.label(i))
                                                         : format_double(ds.response(i));
        }
        out += "\n";
    }
    return out;
}

Dataset parse_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(is, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!trim(line).empty()) return true;
        }
        return false;
    };

    if (!next_line() || line.rfind("#", 0) != 0)
        throw ParseError("row 1: missing '#kind=<kind>,d=<int>' declaration");
    std::string kind_name;
    long long d_value = -1;
    for (const auto& field : split_fields(line.substr(1))) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) throw ParseError("row 1: malformed declaration '" + field + "'");
        const std::string key = trim(field.substr(0, eq));
        const std::string value = trim(field.substr(eq + 1));
        if (key == "kind") {
            kind_name = value;
        } else if (key == "d") {
            const auto res = std::from_chars(value.data(), value.data() + value.size(), d_value);
            if (res.ec != std::errc{} || res.ptr != value.data() + value.size() || d_value < 0)
                throw ParseError("row 1: invalid dimension '" + value + "'");
        } else {
            throw ParseError("row 1: unknown declaration key '" + key + "'");
        }
    }
    if (kind_name.empty() || d_value < 0) throw ParseError("row 1: declaration needs kind and d");
    const TaskKind kind = task_kind_from_string(kind_name);
    const auto d = static_cast<std::size_t>(d_value);
    const bool with_y = kind != TaskKind::Density;

    if (!next_line()) throw ParseError("row 2: missing column header");
    const auto header = split_fields(line);
    const std::size_t width = d + (with_y ? 1 : 0);
    if (header.size() != width)
        throw ParseError("row " + std::to_string(line_no) + ": header has " +
                         std::to_string(header.size()) + " columns, expected " + std::to_string(width));
    for (std::size_t k = 0; k < d; ++k)
        if (trim(header[k]) != "x" + std::to_string(k + 1))
            throw ParseError("row " + std::to_string(line_no) + ": expected column x" +
                             std::to_string(k + 1));
    if (with_y && trim(header.back()) != "y")
        throw ParseError("row " + std::to_string(line_no) + ": last column must be y");

    std::vector<double> x, y;
    std::vector<int> labels;
    while (next_line()) {
        const auto fields = split_fields(line);
        if (fields.size() != width)
            throw ParseError("row " + std::to_string(line_no) + ": ragged row with " +
                             std::to_string(fields.size()) + " fields, expected " + std::to_string(width));
        for (std::size_t k = 0; k < d; ++k) x.push_back(parse_number(fields[k], line_no));
        if (!with_y) continue;
        const double v = parse_number(fields.back(), line_no);
        if (kind == TaskKind::Classification) {
            if (v < 0 || v != std::floor(v) || v > 1e9)
                throw ParseError("row " + std::to_string(line_no) + ": label must be a nonnegative integer");
            labels.push_back(static_cast<int>(v));
        } else {
            y.push_back(v);
        }
    }
    const std::size_t n = kind == TaskKind::Classification ? labels.size()
                          : kind == TaskKind::Regression   ? y.size()
                                                           : (d ? x.size() / d : 0);
    if (n == 0) throw ParseError("file holds no observations");
    switch (kind) {
        case TaskKind::Regression: return Dataset::regression(d, std::move(x), std::move(y));
        case TaskKind::Classification: return Dataset::classification(d, std::move(x), std::move(labels));
        case TaskKind::Density: return Dataset::density(d, std::move(x));
    }
    throw ParseError("unreachable");
}

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << format_csv(ds);
}

}  // namespace cvlab
