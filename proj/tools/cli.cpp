#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cvlab/criteria.hpp"
#include "cvlab/dataset.hpp"
#include "cvlab/error.hpp"
#include "cvlab/experiment_file.hpp"
#include "cvlab/mclab.hpp"
#include "cvlab/select.hpp"
#include "cvlab/splits.hpp"

namespace cvlab::cli {

namespace {

using nlohmann::ordered_json;

std::string num(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& given, std::ostream& err) {
    const std::uint64_t seed = given ? *given : (std::uint64_t{std::random_device{}()} << 32) ^ std::random_device{}();
    err << "seed: " << seed << "\n";
    return seed;
}

struct SchemeFlags {
    std::string scheme = "vfold";
    std::optional<std::size_t> V, p, n_e, L;
    std::optional<std::uint64_t> seed;
    std::uint64_t max_splits = kDefaultMaxSplits;

    void add_to(CLI::App& app, const std::string& default_scheme) {
        scheme = default_scheme;
        app.add_option("--scheme", scheme, "holdout | vfold | mc | loo | lpo | rvfold")->capture_default_str();
        app.add_option("--v", V, "number of folds or Monte-Carlo splits");
        app.add_option("--p", p, "validation size for lpo");
        app.add_option("--ne", n_e, "training size for holdout and mc");
        app.add_option("--l", L, "repetitions for rvfold");
        app.add_option("--seed", seed, "plan seed (random when omitted; always printed)");
        app.add_option("--max-splits", max_splits, "enumeration budget for lpo")->capture_default_str();
    }

    mclab::PlanSpec spec() const {
        auto need = [&](const std::optional<std::size_t>& v, const char* flag) {
            if (!v) throw ConfigError("scheme '" + scheme + "' needs " + flag);
            return *v;
        };
        mclab::PlanSpec s;
        using K = Scheme::Kind;
        if (scheme == "holdout") {
            s.kind = K::Holdout;
            s.n_e = need(n_e, "--ne");
        } else if (scheme == "vfold") {
            s.kind = K::VFold;
            s.V = V.value_or(5);
        } else if (scheme == "mc") {
            s.kind = K::MonteCarlo;
            s.n_e = need(n_e, "--ne");
            s.V = need(V, "--v");
        } else if (scheme == "loo") {
            s.kind = K::LeaveOneOut;
        } else if (scheme == "lpo") {
            s.kind = K::LeavePOut;
            s.p = need(p, "--p");
        } else if (scheme == "rvfold") {
            s.kind = K::RepeatedVFold;
            s.V = V.value_or(5);
            s.L = need(L, "--l");
        } else {
            throw ConfigError("unknown scheme '" + scheme + "'");
        }
        return s;
    }

    SplitPlan build(std::size_t n, std::ostream& err) const {
        const auto s = spec();
        return mclab::make_plan(s, n, resolve_seed(seed, err), max_splits);
    }
};

SplitPlan load_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read plan file '" + path + "'");
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("plan file '" + path + "': " + e.what());
    }
    return plan_from_json(j);
}

Contrast contrast_for(const std::optional<std::string>& name, const Dataset& ds) {
    if (name) return contrast_from_string(*name);
    switch (ds.kind()) {
        case TaskKind::Regression: return Contrast::Quadratic;
        case TaskKind::Classification: return Contrast::ZeroOne;
        case TaskKind::Density: break;
    }
    return Contrast::DensityLS;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << text;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cross-validation risk estimation and model selection toolkit", "cvlab"};
    app.require_subcommand(1);

    // split
    auto* split = app.add_subcommand("split", "emit a split plan as JSON");
    std::size_t split_n = 0;
    std::string split_out;
    SchemeFlags split_flags;
    split->add_option("--n", split_n, "sample size")->required();
    split_flags.add_to(*split, "vfold");
    split->add_option("--out", split_out, "output file (stdout when omitted)");

    // estimate
    auto* estimate = app.add_subcommand("estimate", "cross-validation risk estimate of one rule");
    std::string est_data, est_rule, est_plan;
    std::optional<std::string> est_contrast;
    bool est_corrected = true;
    SchemeFlags est_flags;
    estimate->add_option("--data", est_data, "dataset CSV")->required();
    estimate->add_option("--rule", est_rule, "rule spec, e.g. ols, hist:0.25, knn:3")->required();
    estimate->add_option("--contrast", est_contrast, "quadratic | zero_one | density_ls | density_loglik");
    estimate->add_option("--plan", est_plan, "split plan JSON (overrides --scheme)");
    estimate->add_flag("--corrected,!--no-corrected", est_corrected, "bias-corrected criterion (default on)");
    est_flags.add_to(*estimate, "vfold");

    // select
    auto* select = app.add_subcommand("select", "choose a rule from a menu");
    std::string sel_data, sel_rules, sel_plan, sel_method = "cv";
    std::optional<std::string> sel_contrast;
    bool sel_corrected = false;
    double sel_C = 1.0;
    SchemeFlags sel_flags;
    select->add_option("--data", sel_data, "dataset CSV")->required();
    select->add_option("--rules", sel_rules, "comma-separated rule specs")->required();
    select->add_option("--contrast", sel_contrast, "quadratic | zero_one | density_ls | density_loglik");
    select->add_option("--plan", sel_plan, "split plan JSON (overrides --scheme)");
    select->add_option("--method", sel_method, "cv | penalized | vote")->capture_default_str();
    select->add_option("--C", sel_C, "overpenalization constant for --method penalized")->capture_default_str();
    select->add_flag("--corrected,!--no-corrected", sel_corrected, "bias-corrected criterion (default off)");
    sel_flags.add_to(*select, "vfold");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "run a Monte-Carlo experiment and its checks");
    std::string exp_config, exp_out_dir = ".";
    std::size_t exp_jobs = 1;
    experiment->add_option("--config", exp_config, "key = value config file")->required();
    experiment->add_option("--out-dir", exp_out_dir, "directory for report.json and report.csv")
        ->capture_default_str();
    experiment->add_option("--jobs", exp_jobs, "worker threads (results do not depend on it)")->capture_default_str();

    // constants
    auto* constants = app.add_subcommand("constants", "variance constants C1, C2");
    std::string const_kind = "vf";
    std::size_t const_V = 2;
    double const_n = 0.0;
    std::optional<double> const_ne;
    bool const_table = false;
    constants->add_option("--kind", const_kind, "vf | mc")->capture_default_str();
    constants->add_option("--v", const_V, "number of folds or splits")->capture_default_str();
    constants->add_option("--n", const_n, "sample size")->required();
    constants->add_option("--ne", const_ne, "training size (mc)");
    constants->add_flag("--table", const_table, "print a grid over V as CSV");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    try {
        if (split->parsed()) {
            const SplitPlan plan = split_flags.build(split_n, err);
            const std::string text = to_json(plan).dump(2) + "\n";
            if (split_out.empty())
                out << text;
            else
                write_file(split_out, text);
            return kOk;
        }

        if (estimate->parsed()) {
            const Dataset ds = load_csv(est_data);
            const RulePtr rule = rule_from_string(est_rule);
            const Contrast contrast = contrast_for(est_contrast, ds);
            const SplitPlan plan = est_plan.empty() ? est_flags.build(ds.size(), err) : load_plan(est_plan);
            if (!est_plan.empty()) err << "seed: " << (plan.seed ? std::to_string(*plan.seed) : "none") << "\n";
            RiskEstimate r = cv_risk(*rule, ds, plan, contrast);
            if (est_corrected) r.value = corrected_cv_risk(*rule, ds, plan, contrast);
            ordered_json j = to_json(r);
            j["corrected"] = est_corrected;
            j["rule"] = est_rule;
            j["contrast"] = to_string(contrast);
            out << j.dump(2) << "\n";
            return kOk;
        }

        if (select->parsed()) {
            const Dataset ds = load_csv(sel_data);
            std::vector<std::string> specs;
            std::stringstream in(sel_rules);
            for (std::string s; std::getline(in, s, ',');)
                if (!s.empty()) specs.push_back(s);
            const RuleMenu menu = RuleMenu::from_specs(specs);
            const Contrast contrast = contrast_for(sel_contrast, ds);
            const SplitPlan plan = sel_plan.empty() ? sel_flags.build(ds.size(), err) : load_plan(sel_plan);
            if (!sel_plan.empty()) err << "seed: " << (plan.seed ? std::to_string(*plan.seed) : "none") << "\n";
            SelectionResult r;
            if (sel_method == "cv")
                r = sel_corrected ? corrected_cv_select(menu, ds, plan, contrast) : cv_select(menu, ds, plan, contrast);
            else if (sel_method == "penalized")
                r = penalized_select(menu, ds, plan, contrast, sel_C);
            else if (sel_method == "vote")
                r = vote_select(menu, ds, plan, contrast);
            else
                throw ConfigError("unknown selection method '" + sel_method + "' (cv, penalized or vote)");
            ordered_json j = to_json(r);
            j["method"] = sel_method;
            j["corrected"] = sel_corrected;
            j["scheme"] = to_json(plan.scheme);
            out << j.dump(2) << "\n";
            return kOk;
        }

        if (experiment->parsed()) {
            mclab::ExperimentFile file = mclab::load_experiment_file(exp_config);
            if (!file.seed_given) file.config.master_seed = resolve_seed(std::nullopt, err);
            else
                err << "seed: " << file.config.master_seed << "\n";
            file.config.jobs = exp_jobs;
            const mclab::MomentReport report = mclab::run_experiment(file.config);
            const auto checks = mclab::run_checks(file);

            ordered_json j;
            j["config"] = to_json(file);
            j["report"] = to_json(report);
            auto cj = ordered_json::array();
            for (const auto& c : checks) {
                ordered_json row;
                row["name"] = c.name;
                row["pass"] = c.pass;
                row["summary"] = c.summary;
                row["detail"] = c.detail;
                cj.push_back(std::move(row));
            }
            j["checks"] = std::move(cj);
            std::filesystem::create_directories(exp_out_dir);
            write_file(std::filesystem::path(exp_out_dir) / "report.json", j.dump(2) + "\n");
            write_file(std::filesystem::path(exp_out_dir) / "report.csv", mclab::to_csv(report));

            out << "replicates: " << report.replicates << ", failures: " << report.failures << "\n";
            for (const auto& m : report.failure_messages) err << "warning: " << m << "\n";
            bool all = true;
            for (const auto& c : checks) {
                out << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.summary << "\n";
                all = all && c.pass;
            }
            return all ? kOk : kCheckFailed;
        }

        if (constants->parsed()) {
            if (const_kind != "vf" && const_kind != "mc") throw ConfigError("--kind must be vf or mc");
            const bool vf = const_kind == "vf";
            auto values = [&](std::size_t V) {
                if (vf) return std::pair{mclab::c1_vf(V, const_n), mclab::c2_vf(V, const_n)};
                if (!const_ne) throw ConfigError("--kind mc needs --ne");
                return std::pair{mclab::c1_mc(V, const_n, *const_ne), mclab::c2_mc(V, const_n, *const_ne)};
            };
            if (const_table) {
                out << "V,C1,C2\n";
                for (const std::size_t V : {1, 2, 3, 5, 10, 20, 50, 100}) {
                    if (vf && V < 2) continue;
                    const auto [c1, c2] = values(V);
                    out << V << "," << num(c1) << "," << num(c2) << "\n";
                }
            } else {
                const auto [c1, c2] = values(const_V);
                out << "C1 = " << num(c1) << "\nC2 = " << num(c2) << "\n";
            }
            return kOk;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.numerical() ? kNumerical : kUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}

}  // namespace cvlab::cli
