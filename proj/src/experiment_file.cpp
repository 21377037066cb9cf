#include "cvlab/experiment_file.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cvlab/error.hpp"
#include "cvlab/rng.hpp"

namespace cvlab::mclab {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream in(value);
    for (std::string item; std::getline(in, item, ',');) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_real(const std::string& key, const std::string& v) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty())
        throw ConfigError("key '" + key + "': '" + v + "' is not a number");
    return x;
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
    std::uint64_t x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty())
        throw ConfigError("key '" + key + "': '" + v + "' is not a nonnegative integer");
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<double> to_reals(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split_list(v)) out.push_back(to_real(key, item));
    return out;
}

std::vector<std::size_t> to_counts(const std::string& key, const std::string& v) {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(v)) out.push_back(static_cast<std::size_t>(to_count(key, item)));
    return out;
}

const std::set<std::string> kTopKeys{"generator", "breakpoints", "densities", "beta",      "sigma",
                                     "x_law",     "p1",          "n",         "rules",     "contrast",
                                     "schemes",   "replicates",  "master_seed", "frozen_plans", "test_size",
                                     "checks",    "check_replicates"};

const std::map<std::string, std::set<std::string>> kCheckParams{
    {"unbiased", {"schemes"}},
    {"expectation", {"schemes"}},
    {"bias", {"scheme", "zero_scheme", "curve_sizes"}},
    {"ordering", {"n_e", "V"}},
    {"affine", {"n_e", "V_grid", "min_r2"}},
    {"rvfold", {"V", "L_grid", "min_r2"}},
    {"vfconst", {"V_fit", "V_test", "tolerance"}},
    {"decomposition", {"n_e", "n_val"}},
    {"smartness", {"sizes"}},
    {"sweep", {"C_grid", "repetitions"}},
};

DataGenerator build_generator(const std::map<std::string, std::string>& kv) {
    auto get = [&](const std::string& k) -> const std::string* {
        const auto it = kv.find(k);
        return it == kv.end() ? nullptr : &it->second;
    };
    const std::string kind = get("generator") ? *get("generator") : "density";
    DataGenerator gen;
    if (kind == "density") {
        PiecewiseConstantDensity d = PiecewiseConstantDensity::uniform();
        if (get("breakpoints")) d.breakpoints = to_reals("breakpoints", *get("breakpoints"));
        if (get("densities")) d.densities = to_reals("densities", *get("densities"));
        gen = d;
    } else if (kind == "linear") {
        LinearModel m;
        if (!get("beta")) throw ConfigError("generator 'linear' needs key 'beta'");
        m.beta = to_reals("beta", *get("beta"));
        if (get("sigma")) m.sigma = to_real("sigma", *get("sigma"));
        if (get("x_law")) {
            const std::string& law = *get("x_law");
            if (law == "uniform")
                m.x_law = FeatureLaw::Uniform;
            else if (law == "normal")
                m.x_law = FeatureLaw::StandardNormal;
            else
                throw ConfigError("x_law must be 'uniform' or 'normal', got '" + law + "'");
        }
        gen = m;
    } else if (kind == "bernoulli") {
        BernoulliLabels b;
        if (get("p1")) b.p1 = to_real("p1", *get("p1"));
        gen = b;
    } else {
        throw ConfigError("unknown generator '" + kind + "' (density, linear or bernoulli)");
    }
    validate(gen);
    return gen;
}

Contrast default_contrast(const DataGenerator& gen) {
    switch (task_kind(gen)) {
        case TaskKind::Regression: return Contrast::Quadratic;
        case TaskKind::Classification: return Contrast::ZeroOne;
        case TaskKind::Density: break;
    }
    return Contrast::DensityLS;
}

}  // namespace

ExperimentFile parse_experiment_file(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::stringstream in(text);
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        if (!kv.emplace(key, value).second)
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }

    ExperimentFile file;
    for (const auto& [key, value] : kv) {
        if (kTopKeys.contains(key)) continue;
        const auto dot = key.find('.');
        const auto it = dot == std::string::npos ? kCheckParams.end() : kCheckParams.find(key.substr(0, dot));
        if (it == kCheckParams.end() || !it->second.contains(key.substr(dot + 1)))
            throw ConfigError("unknown config key '" + key + "'");
        file.params[key] = value;
    }

    ExperimentConfig& c = file.config;
    c.generator = build_generator(kv);
    auto get = [&](const std::string& k) -> const std::string* {
        const auto it = kv.find(k);
        return it == kv.end() ? nullptr : &it->second;
    };
    if (get("n")) c.n = static_cast<std::size_t>(to_count("n", *get("n")));
    c.contrast = get("contrast") ? contrast_from_string(*get("contrast")) : default_contrast(c.generator);
    if (!get("rules")) throw ConfigError("config needs key 'rules'");
    file.rule_specs = split_list(*get("rules"));
    c.rules = RuleMenu::from_specs(file.rule_specs);
    if (get("schemes"))
        for (const auto& s : split_list(*get("schemes"))) c.schemes.push_back(plan_spec_from_string(s));
    if (c.schemes.empty()) c.schemes.push_back(plan_spec_from_string("vfold:5"));
    if (get("replicates")) c.replicates = static_cast<std::size_t>(to_count("replicates", *get("replicates")));
    if (get("master_seed")) {
        c.master_seed = to_count("master_seed", *get("master_seed"));
        file.seed_given = true;
    }
    if (get("frozen_plans")) c.frozen_plans = to_bool("frozen_plans", *get("frozen_plans"));
    if (get("test_size")) c.fallback.test_size = static_cast<std::size_t>(to_count("test_size", *get("test_size")));
    if (get("checks")) file.checks = split_list(*get("checks"));
    static const std::map<std::string, std::vector<std::string>> kRequired{
        {"ordering", {"n_e"}}, {"affine", {"n_e"}}, {"rvfold", {"V"}}, {"decomposition", {"n_e", "n_val"}}};
    for (const auto& name : file.checks) {
        if (!kCheckParams.contains(name)) throw ConfigError("unknown check '" + name + "'");
        if (const auto it = kRequired.find(name); it != kRequired.end())
            for (const auto& param : it->second)
                if (!file.params.contains(name + "." + param))
                    throw ConfigError("check '" + name + "' needs '" + name + "." + param + "'");
    }
    if (get("check_replicates"))
        file.params["check_replicates"] = *get("check_replicates");
    validate(c);
    return file;
}

ExperimentFile load_experiment_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_experiment_file(buf.str());
}

namespace {

class Params {
public:
    Params(const ExperimentFile& f, std::string check) : f_(f), check_(std::move(check)) {}

    const std::string* raw(const std::string& name) const {
        const auto it = f_.params.find(check_ + "." + name);
        return it == f_.params.end() ? nullptr : &it->second;
    }
    std::size_t count(const std::string& name, std::size_t fallback) const {
        const auto* v = raw(name);
        return v ? static_cast<std::size_t>(to_count(check_ + "." + name, *v)) : fallback;
    }
    std::size_t required_count(const std::string& name) const {
        const auto* v = raw(name);
        if (!v) throw ConfigError("check '" + check_ + "' needs '" + check_ + "." + name + "'");
        return static_cast<std::size_t>(to_count(check_ + "." + name, *v));
    }
    double real(const std::string& name, double fallback) const {
        const auto* v = raw(name);
        return v ? to_real(check_ + "." + name, *v) : fallback;
    }
    std::vector<std::size_t> counts(const std::string& name, std::vector<std::size_t> fallback) const {
        const auto* v = raw(name);
        return v ? to_counts(check_ + "." + name, *v) : fallback;
    }
    std::vector<double> reals(const std::string& name, std::vector<double> fallback) const {
        const auto* v = raw(name);
        return v ? to_reals(check_ + "." + name, *v) : fallback;
    }
    std::vector<PlanSpec> schemes(const std::string& name, std::vector<PlanSpec> fallback) const {
        const auto* v = raw(name);
        if (!v) return fallback;
        std::vector<PlanSpec> out;
        for (const auto& s : split_list(*v)) out.push_back(plan_spec_from_string(s));
        return out;
    }

private:
    const ExperimentFile& f_;
    std::string check_;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void add_comparison(CheckOutcome& out, const std::string& label, const Comparison& c) {
    out.detail[label] = to_json(c);
    out.pass = out.pass && c.pass;
    out.summary += (out.summary.empty() ? "" : "; ") + label + " " + fmt(c.lhs) + " vs " + fmt(c.rhs) +
                   " (z = " + fmt(c.z()) + ")";
}

CheckOutcome run_one(const ExperimentFile& f, const std::string& name, const LawSetup& setup) {
    const Params p(f, name);
    CheckOutcome out;
    out.name = name;
    out.pass = true;
    if (name == "unbiased" || name == "expectation") {
        for (const auto& s : p.schemes("schemes", f.config.schemes)) {
            const Comparison c = name == "unbiased" ? corrected_unbiasedness_check(setup, s)
                                                    : expectation_law_check(setup, s);
            add_comparison(out, s.label(), c);
        }
    } else if (name == "bias") {
        const PlanSpec scheme = p.schemes("scheme", {plan_spec_from_string("vfold:2")}).at(0);
        const PlanSpec zero = p.schemes("zero_scheme", {plan_spec_from_string("loo")}).at(0);
        const std::size_t n = setup.n;
        const auto sizes = p.counts("curve_sizes", {std::max<std::size_t>(n / 4, 1), n / 2, n, 2 * n});
        const BiasLawReport main = bias_law_check(setup, scheme, sizes);
        add_comparison(out, scheme.label() + " bias vs beta fit", main.against_prediction);
        const BiasLawReport z = bias_law_check(setup, zero, sizes);
        add_comparison(out, zero.label() + " bias vs 0", z.against_zero);
        out.detail["beta_hat"] = main.curve.beta;
        out.detail["stderr_beta"] = main.curve.stderr_beta;
    } else if (name == "ordering") {
        const auto r = variance_ordering_check(setup, p.required_count("n_e"), p.count("V", 10));
        out.pass = r.pass();
        out.detail["holdout"] = to_json(r.holdout);
        out.detail["monte_carlo"] = to_json(r.monte_carlo);
        out.detail["leave_p_out"] = to_json(r.leave_p_out);
        out.summary = "Var " + fmt(r.holdout.variance) + " >= " + fmt(r.monte_carlo.variance) + " >= " +
                      fmt(r.leave_p_out.variance);
    } else if (name == "affine" || name == "rvfold") {
        const double min_r2 = p.real("min_r2", 0.95);
        const AffineFit fit =
            name == "affine"
                ? affine_in_inv_V_check(setup, p.required_count("n_e"), p.counts("V_grid", {1, 2, 5, 10, 20, 50}))
                : repeated_vfold_variance_check(setup, p.required_count("V"), p.counts("L_grid", {1, 2, 5, 10}));
        out.pass = fit.r_squared >= min_r2 && fit.slope_nonnegative && fit.intercept_nonnegative;
        if (fit.intercept_vs_limit) out.pass = out.pass && fit.intercept_vs_limit->pass;
        out.detail = to_json(fit);
        out.summary = "R^2 = " + fmt(fit.r_squared) + ", slope = " + fmt(fit.slope) + ", intercept = " +
                      fmt(fit.intercept);
        if (fit.limit) out.summary += " vs enumerated " + fmt(fit.limit->variance);
    } else if (name == "vfconst") {
        const auto fit_pair = p.counts("V_fit", {2, 5});
        if (fit_pair.size() != 2) throw ConfigError("vfconst.V_fit needs two values");
        const double tol = p.real("tolerance", 0.1);
        const auto r = variance_constant_cross_prediction(setup, fit_pair[0], fit_pair[1], p.count("V_test", 10));
        out.pass = r.relative_error <= tol;
        out.detail = to_json(r);
        out.summary = "relative error " + fmt(r.relative_error) + " (tolerance " + fmt(tol) + "), W1 = " +
                      fmt(r.W1_hat) + ", W2 = " + fmt(r.W2_hat);
    } else if (name == "decomposition") {
        const auto r = holdout_variance_decomposition_check(setup, p.required_count("n_e"), p.required_count("n_val"));
        out.detail["first_term"] = r.first_term;
        out.detail["second_term"] = r.second_term;
        add_comparison(out, "Var(hold-out) vs two terms", r.decomposition);
    } else if (name == "smartness") {
        std::vector<std::size_t> def(20);
        for (std::size_t i = 0; i < def.size(); ++i) def[i] = i + 1;
        const auto r = smartness_probe(*setup.rule, setup.generator, setup.contrast, p.counts("sizes", def),
                                       setup.replicates, derive_seed(setup.seed, "smartness"), setup.jobs);
        out.pass = r.smart();
        auto curve = nlohmann::ordered_json::array();
        for (const auto& pt : r.curve) {
            nlohmann::ordered_json row;
            row["n"] = pt.n;
            row["mean_risk"] = pt.mean_risk;
            row["stderr"] = pt.stderr;
            row["exact"] = pt.exact;
            row["increase"] = pt.increase;
            curve.push_back(std::move(row));
        }
        out.detail["curve"] = std::move(curve);
        out.summary = r.smart() ? "mean risk never increases" : "mean risk increases somewhere";
    } else if (name == "sweep") {
        const auto C = p.reals("C_grid", {0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0});
        const std::size_t reps = p.count("repetitions", 1);
        std::size_t at_least_one = 0;
        bool finite = true;
        auto stars = nlohmann::ordered_json::array();
        nlohmann::ordered_json first;
        for (std::size_t k = 0; k < reps; ++k) {
            const auto s = surpenalization_sweep(f.config.rules, setup.generator, setup.contrast, setup.n, C,
                                                 setup.replicates, derive_seed(setup.seed, "sweep", k), setup.jobs);
            for (const double v : s.mean_ratio) finite = finite && std::isfinite(v);
            if (s.C_star() >= 1.0) ++at_least_one;
            stars.push_back(s.C_star());
            if (k == 0) {
                first["C"] = s.C;
                first["mean_ratio"] = s.mean_ratio;
                first["stderr_ratio"] = s.stderr_ratio;
            }
        }
        out.pass = finite && 2 * at_least_one > reps;
        out.detail["curve"] = std::move(first);
        out.detail["C_star"] = std::move(stars);
        out.summary = "C* >= 1 in " + std::to_string(at_least_one) + " of " + std::to_string(reps) + " sweeps";
    } else {
        throw ConfigError("unknown check '" + name + "'");
    }
    return out;
}

}  // namespace

std::vector<CheckOutcome> run_checks(const ExperimentFile& file) {
    std::vector<CheckOutcome> out;
    LawSetup setup;
    setup.generator = file.config.generator;
    setup.n = file.config.n;
    setup.rule = file.config.rules[0].rule;
    setup.contrast = file.config.contrast;
    setup.jobs = file.config.jobs;
    setup.frozen_plans = file.config.frozen_plans;
    setup.fallback = file.config.fallback;
    const auto it = file.params.find("check_replicates");
    setup.replicates = it == file.params.end() ? file.config.replicates
                                               : static_cast<std::size_t>(to_count("check_replicates", it->second));
    for (std::size_t k = 0; k < file.checks.size(); ++k) {
        setup.seed = derive_seed(file.config.master_seed, "check", k);
        try {
            out.push_back(run_one(file, file.checks[k], setup));
        } catch (const Error& e) {
            e.rethrow_with_context("check '" + file.checks[k] + "'");
        }
    }
    return out;
}

nlohmann::ordered_json to_json(const ExperimentFile& file) {
    const ExperimentConfig& c = file.config;
    nlohmann::ordered_json j;
    std::visit(
        [&](const auto& g) {
            using G = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<G, PiecewiseConstantDensity>) {
                j["generator"] = "density";
                j["breakpoints"] = g.breakpoints;
                j["densities"] = g.densities;
            } else if constexpr (std::is_same_v<G, LinearModel>) {
                j["generator"] = "linear";
                j["beta"] = g.beta;
                j["sigma"] = g.sigma;
                j["x_law"] = g.x_law == FeatureLaw::Uniform ? "uniform" : "normal";
            } else {
                j["generator"] = "bernoulli";
                j["p1"] = g.p1;
            }
        },
        c.generator);
    j["n"] = c.n;
    j["rules"] = file.rule_specs;
    j["contrast"] = to_string(c.contrast);
    auto schemes = nlohmann::ordered_json::array();
    for (const auto& s : c.schemes) schemes.push_back(s.label());
    j["schemes"] = std::move(schemes);
    j["replicates"] = c.replicates;
    j["master_seed"] = c.master_seed;
    j["frozen_plans"] = c.frozen_plans;
    j["test_size"] = c.fallback.test_size;
    j["checks"] = file.checks;
    j["params"] = file.params;
    return j;
}

}  // namespace cvlab::mclab
