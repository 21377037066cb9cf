#include "cvlab/mclab.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "cvlab/error.hpp"
#include "cvlab/parallel.hpp"
#include "cvlab/rng.hpp"

namespace cvlab::mclab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Constant pieces of a step predictor against a piecewise-constant truth.
struct Piece {
    double width;
    double truth;
    double fit;
};

std::vector<Piece> merge_pieces(const StepFunction& f, const PiecewiseConstantDensity& d) {
    std::vector<double> cuts = d.breakpoints;
    for (const double e : f.edges())
        if (e > 0.0 && e < 1.0) cuts.push_back(e);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<Piece> out;
    out.reserve(cuts.size());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        if (b <= a) continue;
        const double mid = 0.5 * (a + b);
        out.push_back({b - a, d(mid), f.at(mid)});
    }
    return out;
}

const HistogramDensity* as_histogram(const Predictor& f) { return dynamic_cast<const HistogramDensity*>(&f); }

// Costs of f on a fresh test sample.
std::vector<double> test_costs(const Predictor& f, const DataGenerator& gen, Contrast contrast,
                               const FallbackPolicy& fb) {
    if (fb.test_size < 2) throw ConfigError("Monte-Carlo test size must be at least 2");
    if (contrast == Contrast::DensityLS && !f.l2_norm_sq())
        throw UnsupportedTaskError("least-squares density risk needs ∫f² from the predictor");
    const Dataset test = generate(gen, fb.test_size, derive_seed(fb.seed, "true-risk"));
    std::vector<double> costs(test.size());
    for (std::size_t i = 0; i < test.size(); ++i)
        costs[i] = pointwise_cost(contrast, f, test.row(i), test.has_response() ? test.response(i) : 0.0);
    return costs;
}

double linear_excess(const std::vector<double>& coef, const LinearModel& m) {
    if (coef.size() > m.beta.size()) throw ShapeError("linear predictor has more coefficients than the model");
    std::vector<double> b(m.beta.size());
    for (std::size_t k = 0; k < b.size(); ++k) b[k] = (k < coef.size() ? coef[k] : 0.0) - m.beta[k];
    double sum = 0.0, sum_sq = 0.0;
    for (const double v : b) {
        sum += v;
        sum_sq += v * v;
    }
    if (m.x_law == FeatureLaw::StandardNormal) return sum_sq;
    // E[x_k x_l] = 1/3 on the diagonal and 1/4 off it for Uniform[0,1] features.
    return sum * sum / 4.0 + sum_sq / 12.0;
}

// ∫_a^b (c - βx)² dx.
double segment_sq(double c, double beta, double a, double b) {
    return c * c * (b - a) - c * beta * (b * b - a * a) + beta * beta * (b * b * b - a * a * a) / 3.0;
}

std::optional<double> exact_risk(const Predictor& f, const DataGenerator& gen, Contrast contrast) {
    if (const auto* d = std::get_if<PiecewiseConstantDensity>(&gen)) {
        const auto* hist = as_histogram(f);
        if (!hist) return std::nullopt;
        const auto pieces = merge_pieces(hist->step(), *d);
        if (contrast == Contrast::DensityLS) {
            double cross = 0.0;
            for (const auto& p : pieces) cross += p.width * p.truth * p.fit;
            return *hist->l2_norm_sq() - 2.0 * cross;
        }
        double s = 0.0;
        for (const auto& p : pieces) {
            if (p.truth == 0.0) continue;
            if (p.fit <= 0.0) return kInf;
            s -= p.width * p.truth * std::log(p.fit);
        }
        return s;
    }
    if (const auto* m = std::get_if<LinearModel>(&gen)) {
        if (const auto* lin = dynamic_cast<const LinearPredictor*>(&f))
            return m->sigma * m->sigma + linear_excess(lin->coefficients(), *m);
        const auto* reg = dynamic_cast<const Regressogram*>(&f);
        if (reg && m->x_law == FeatureLaw::Uniform && m->beta.size() == 1) {
            const auto& edges = reg->step().edges();
            const auto& values = reg->step().values();
            double s = 0.0;
            for (std::size_t c = 0; c < values.size(); ++c) {
                const double a = std::clamp(edges[c], 0.0, 1.0), b = std::clamp(edges[c + 1], 0.0, 1.0);
                if (b > a) s += segment_sq(values[c], m->beta[0], a, b);
            }
            return m->sigma * m->sigma + s;
        }
        return std::nullopt;
    }
    const double p1 = std::get<BernoulliLabels>(gen).p1;
    const double c = f(std::span<const double>{});
    if (contrast == Contrast::ZeroOne) return c == 1.0 ? 1.0 - p1 : c == 0.0 ? p1 : 1.0;
    return p1 * (1.0 - c) * (1.0 - c) + (1.0 - p1) * c * c;
}

std::optional<double> exact_cost_variance(const Predictor& f, const DataGenerator& gen, Contrast contrast) {
    if (const auto* d = std::get_if<PiecewiseConstantDensity>(&gen)) {
        const auto* hist = as_histogram(f);
        if (!hist) return std::nullopt;
        double m1 = 0.0, m2 = 0.0;
        for (const auto& p : merge_pieces(hist->step(), *d)) {
            if (p.truth == 0.0) continue;
            double g = p.fit;
            if (contrast == Contrast::DensityLogLik) {
                if (p.fit <= 0.0) return kInf;
                g = std::log(p.fit);
            }
            m1 += p.width * p.truth * g;
            m2 += p.width * p.truth * g * g;
        }
        const double var = std::max(0.0, m2 - m1 * m1);
        return contrast == Contrast::DensityLS ? 4.0 * var : var;
    }
    if (const auto* b = std::get_if<BernoulliLabels>(&gen)) {
        const double p1 = b->p1;
        const double c = f(std::span<const double>{});
        if (contrast == Contrast::ZeroOne) {
            const double q = *exact_risk(f, gen, contrast);
            return q * (1.0 - q);
        }
        const double gap = (1.0 - c) * (1.0 - c) - c * c;
        return p1 * (1.0 - p1) * gap * gap;
    }
    return std::nullopt;
}

}  // namespace

RiskValue true_risk(const Predictor& f, const DataGenerator& gen, Contrast contrast, const FallbackPolicy& fb) {
    check_compatible(contrast, task_kind(gen));
    if (const auto exact = exact_risk(f, gen, contrast)) return {*exact, 0.0, true};
    const auto costs = test_costs(f, gen, contrast, fb);
    const Moments m = moments_of(costs);
    return {m.mean, m.stderr_mean, false};
}

double bayes_risk(const DataGenerator& gen, Contrast contrast) {
    check_compatible(contrast, task_kind(gen));
    if (const auto* d = std::get_if<PiecewiseConstantDensity>(&gen)) {
        if (contrast == Contrast::DensityLS) return -d->l2_norm_sq();
        double s = 0.0;
        for (std::size_t i = 0; i < d->densities.size(); ++i) {
            const double f = d->densities[i];
            if (f > 0.0) s -= (d->breakpoints[i + 1] - d->breakpoints[i]) * f * std::log(f);
        }
        return s;
    }
    if (const auto* m = std::get_if<LinearModel>(&gen)) return m->sigma * m->sigma;
    const double p1 = std::get<BernoulliLabels>(gen).p1;
    return contrast == Contrast::ZeroOne ? std::min(p1, 1.0 - p1) : p1 * (1.0 - p1);
}

RiskValue excess_risk(const Predictor& f, const DataGenerator& gen, Contrast contrast, const FallbackPolicy& fb) {
    RiskValue r = true_risk(f, gen, contrast, fb);
    r.value -= bayes_risk(gen, contrast);
    if (r.exact) r.value = std::max(r.value, 0.0);  // rounding below the Bayes risk
    return r;
}

RiskValue conditional_cost_variance(const Predictor& f, const DataGenerator& gen, Contrast contrast,
                                    const FallbackPolicy& fb) {
    check_compatible(contrast, task_kind(gen));
    if (const auto exact = exact_cost_variance(f, gen, contrast)) return {*exact, 0.0, true};
    const auto costs = test_costs(f, gen, contrast, fb);
    const Moments m = moments_of(costs);
    return {m.variance, m.stderr_variance, false};
}

Moments moments_of(std::span<const double> values) {
    Moments m;
    m.count = values.size();
    if (m.count == 0) return m;
    const auto R = static_cast<double>(m.count);
    double s = 0.0;
    for (const double v : values) s += v;
    m.mean = s / R;
    if (m.count < 2) return m;
    double m2 = 0.0, m4 = 0.0;
    for (const double v : values) {
        const double c = v - m.mean;
        m2 += c * c;
        m4 += c * c * c * c;
    }
    m.variance = m2 / (R - 1.0);
    m.stderr_mean = std::sqrt(m.variance / R);
    m4 /= R;
    const double s4 = m.variance * m.variance;
    const double inner = m4 - s4 * (R - 3.0) / (R - 1.0);
    m.stderr_variance = inner > 0.0 ? std::sqrt(inner / R) : 0.0;
    return m;
}

Comparison compare(double lhs, double rhs, double stderr) {
    Comparison c{lhs, rhs, stderr, false};
    // A relative 1e-12 allowance keeps exact ties passing when stderr is 0.
    const double slack = 1e-12 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
    c.pass = std::abs(lhs - rhs) <= kStderrBand * stderr + slack;
    return c;
}

// Plans -------------------------------------------------------------------------

std::string PlanSpec::label() const {
    using K = Scheme::Kind;
    switch (kind) {
        case K::Holdout: return "holdout:" + std::to_string(n_e);
        case K::VFold: return "vfold:" + std::to_string(V);
        case K::MonteCarlo: return "mc:" + std::to_string(n_e) + ":" + std::to_string(V);
        case K::LeaveOneOut: return "loo";
        case K::LeavePOut: return "lpo:" + std::to_string(p);
        case K::RepeatedVFold: return "rvfold:" + std::to_string(V) + ":" + std::to_string(L);
        case K::Custom: break;
    }
    return "custom";
}

PlanSpec plan_spec_from_string(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream in(spec);
    for (std::string item; std::getline(in, item, ':');) parts.push_back(item);
    if (parts.empty()) throw ConfigError("empty scheme spec");
    auto count = [&](std::size_t i) {
        const std::string& t = parts.at(i);
        std::size_t v = 0;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
            throw ConfigError("bad integer '" + t + "' in scheme '" + spec + "'");
        return v;
    };
    using K = Scheme::Kind;
    PlanSpec p;
    const std::string& head = parts[0];
    if (head == "holdout" && parts.size() == 2) {
        p.kind = K::Holdout;
        p.n_e = count(1);
    } else if (head == "vfold" && parts.size() == 2) {
        p.kind = K::VFold;
        p.V = count(1);
    } else if (head == "mc" && parts.size() == 3) {
        p.kind = K::MonteCarlo;
        p.n_e = count(1);
        p.V = count(2);
    } else if (head == "loo" && parts.size() == 1) {
        p.kind = K::LeaveOneOut;
    } else if (head == "lpo" && parts.size() == 2) {
        p.kind = K::LeavePOut;
        p.p = count(1);
    } else if (head == "rvfold" && parts.size() == 3) {
        p.kind = K::RepeatedVFold;
        p.V = count(1);
        p.L = count(2);
    } else {
        throw ConfigError("unknown scheme '" + spec + "'");
    }
    return p;
}

SplitPlan make_plan(const PlanSpec& spec, std::size_t n, std::uint64_t seed, std::uint64_t max_splits) {
    using K = Scheme::Kind;
    switch (spec.kind) {
        case K::Holdout: return holdout(n, spec.n_e, seed);
        case K::VFold: return vfold(n, spec.V, seed);
        case K::MonteCarlo: return monte_carlo(n, spec.n_e, spec.V, seed);
        case K::LeaveOneOut: return leave_one_out(n);
        case K::LeavePOut: return leave_p_out(n, spec.p, max_splits);
        case K::RepeatedVFold: return repeated_vfold(n, spec.V, spec.L, seed);
        case K::Custom: break;
    }
    throw SchemeError("custom plans have no recipe");
}

// Experiments -------------------------------------------------------------------

void validate(const ExperimentConfig& config) {
    if (config.replicates < 2) throw ConfigError("an experiment needs at least 2 replicates");
    if (config.rules.empty()) throw ConfigError("an experiment needs at least one rule");
    if (config.schemes.empty()) throw ConfigError("an experiment needs at least one scheme");
    validate(config.generator);
    check_compatible(config.contrast, task_kind(config.generator));
    for (const auto& s : config.schemes) {
        try {
            make_plan(s, config.n, 0);
        } catch (const Error& e) {
            throw ConfigError("scheme " + s.label() + " is invalid for n = " + std::to_string(config.n) + ": " +
                              e.what());
        }
    }
}

namespace {

struct CellValues {
    double cv, corrected, risk_full, risk_fold;
};

struct ReplicateOutcome {
    bool ok = false;
    std::string message;
    std::vector<CellValues> values;  // index scheme * rules + rule
};

Moments moments_over(const std::vector<ReplicateOutcome>& reps, auto&& get) {
    std::vector<double> v;
    v.reserve(reps.size());
    for (const auto& r : reps)
        if (r.ok) v.push_back(get(r));
    return moments_of(v);
}

}  // namespace

MomentReport run_experiment(const ExperimentConfig& config) {
    validate(config);
    const std::size_t S = config.schemes.size(), M = config.rules.size();

    std::vector<SplitPlan> frozen;
    if (config.frozen_plans)
        for (std::size_t s = 0; s < S; ++s)
            frozen.push_back(make_plan(config.schemes[s], config.n, derive_seed(config.master_seed, "plan", 0, s)));

    auto run_one = [&](std::size_t r) {
        ReplicateOutcome out;
        try {
            const Dataset ds = generate(config.generator, config.n, derive_seed(config.master_seed, "data", r));
            out.values.resize(S * M);
            std::vector<std::optional<double>> risk_full(M);
            for (std::size_t s = 0; s < S; ++s) {
                const SplitPlan plan = config.frozen_plans
                                           ? frozen[s]
                                           : make_plan(config.schemes[s], config.n,
                                                       derive_seed(config.master_seed, "plan", r, s));
                for (std::size_t m = 0; m < M; ++m) {
                    const auto eval = evaluate_plan(*config.rules[m].rule, ds, plan, config.contrast, true);
                    FallbackPolicy fb = config.fallback;
                    fb.seed = derive_seed(config.fallback.seed, "full", r, m);
                    if (!risk_full[m])
                        risk_full[m] = true_risk(*eval.full_predictor, config.generator, config.contrast, fb).value;
                    double fold = 0.0;
                    for (std::size_t j = 0; j < eval.fold_predictors.size(); ++j) {
                        fb.seed = derive_seed(config.fallback.seed, "fold", r, (s * M + m) * plan.size() + j);
                        fold += true_risk(*eval.fold_predictors[j], config.generator, config.contrast, fb).value;
                    }
                    fold /= static_cast<double>(eval.fold_predictors.size());
                    out.values[s * M + m] = {eval.cv(), eval.corrected(), *risk_full[m], fold};
                }
            }
            out.ok = true;
        } catch (const std::exception& e) {
            out.ok = false;
            out.message = "replicate " + std::to_string(r) + ": " + e.what();
            out.values.clear();
        }
        return out;
    };
    const auto reps = parallel_map<ReplicateOutcome>(config.replicates, config.jobs, run_one);

    MomentReport report;
    report.replicates = config.replicates;
    for (const auto& r : reps)
        if (!r.ok) {
            ++report.failures;
            if (report.failure_messages.size() < 10) report.failure_messages.push_back(r.message);
        }
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t m = 0; m < M; ++m) {
            const std::size_t k = s * M + m;
            CellReport c;
            c.rule = config.rules[m].id;
            c.scheme = config.schemes[s].label();
            c.cv = moments_over(reps, [&](const auto& r) { return r.values[k].cv; });
            c.corrected = moments_over(reps, [&](const auto& r) { return r.values[k].corrected; });
            c.risk_full = moments_over(reps, [&](const auto& r) { return r.values[k].risk_full; });
            c.risk_fold = moments_over(reps, [&](const auto& r) { return r.values[k].risk_fold; });
            c.bias_cv = moments_over(reps, [&](const auto& r) { return r.values[k].cv - r.values[k].risk_full; });
            c.bias_corrected =
                moments_over(reps, [&](const auto& r) { return r.values[k].corrected - r.values[k].risk_full; });
            report.cells.push_back(std::move(c));
        }
        for (std::size_t a = 0; a < M; ++a)
            for (std::size_t b = a + 1; b < M; ++b) {
                const std::size_t ka = s * M + a, kb = s * M + b;
                IncrementReport inc;
                inc.rule_a = config.rules[a].id;
                inc.rule_b = config.rules[b].id;
                inc.scheme = config.schemes[s].label();
                inc.cv = moments_over(reps, [&](const auto& r) { return r.values[ka].cv - r.values[kb].cv; });
                inc.corrected = moments_over(
                    reps, [&](const auto& r) { return r.values[ka].corrected - r.values[kb].corrected; });
                report.increments.push_back(std::move(inc));
            }
    }
    return report;
}

const CellReport& MomentReport::cell(const std::string& rule, const std::string& scheme) const {
    for (const auto& c : cells)
        if (c.rule == rule && c.scheme == scheme) return c;
    throw ConfigError("no cell for rule '" + rule + "' and scheme '" + scheme + "'");
}

const IncrementReport& MomentReport::increment(const std::string& a, const std::string& b,
                                               const std::string& scheme) const {
    for (const auto& i : increments)
        if (i.rule_a == a && i.rule_b == b && i.scheme == scheme) return i;
    throw ConfigError("no increment for rules '" + a + "', '" + b + "' and scheme '" + scheme + "'");
}

nlohmann::ordered_json to_json(const Moments& m) {
    nlohmann::ordered_json j;
    j["count"] = m.count;
    j["mean"] = m.mean;
    j["variance"] = m.variance;
    j["stderr_mean"] = m.stderr_mean;
    j["stderr_variance"] = m.stderr_variance;
    return j;
}

nlohmann::ordered_json to_json(const MomentReport& report) {
    nlohmann::ordered_json j;
    j["replicates"] = report.replicates;
    j["failures"] = report.failures;
    j["failure_messages"] = report.failure_messages;
    auto cells = nlohmann::ordered_json::array();
    for (const auto& c : report.cells) {
        nlohmann::ordered_json row;
        row["rule"] = c.rule;
        row["scheme"] = c.scheme;
        row["cv"] = to_json(c.cv);
        row["corrected"] = to_json(c.corrected);
        row["risk_full"] = to_json(c.risk_full);
        row["risk_fold"] = to_json(c.risk_fold);
        row["bias_cv"] = to_json(c.bias_cv);
        row["bias_corrected"] = to_json(c.bias_corrected);
        cells.push_back(std::move(row));
    }
    j["cells"] = std::move(cells);
    auto incs = nlohmann::ordered_json::array();
    for (const auto& i : report.increments) {
        nlohmann::ordered_json row;
        row["rule_a"] = i.rule_a;
        row["rule_b"] = i.rule_b;
        row["scheme"] = i.scheme;
        row["cv"] = to_json(i.cv);
        row["corrected"] = to_json(i.corrected);
        incs.push_back(std::move(row));
    }
    j["increments"] = std::move(incs);
    return j;
}

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void csv_row(std::string& out, const std::string& kind, const std::string& a, const std::string& b,
             const std::string& scheme, const std::string& quantity, const Moments& m) {
    out += kind + "," + a + "," + b + "," + scheme + "," + quantity + "," + std::to_string(m.count) + "," +
           num(m.mean) + "," + num(m.variance) + "," + num(m.stderr_mean) + "," + num(m.stderr_variance) + "\n";
}

}  // namespace

std::string to_csv(const MomentReport& report) {
    std::string out = "kind,rule,rule_b,scheme,quantity,count,mean,variance,stderr_mean,stderr_variance\n";
    for (const auto& c : report.cells) {
        csv_row(out, "cell", c.rule, "", c.scheme, "cv", c.cv);
        csv_row(out, "cell", c.rule, "", c.scheme, "corrected", c.corrected);
        csv_row(out, "cell", c.rule, "", c.scheme, "risk_full", c.risk_full);
        csv_row(out, "cell", c.rule, "", c.scheme, "risk_fold", c.risk_fold);
        csv_row(out, "cell", c.rule, "", c.scheme, "bias_cv", c.bias_cv);
        csv_row(out, "cell", c.rule, "", c.scheme, "bias_corrected", c.bias_corrected);
    }
    for (const auto& i : report.increments) {
        csv_row(out, "increment", i.rule_a, i.rule_b, i.scheme, "cv", i.cv);
        csv_row(out, "increment", i.rule_a, i.rule_b, i.scheme, "corrected", i.corrected);
    }
    return out;
}

}  // namespace cvlab::mclab
