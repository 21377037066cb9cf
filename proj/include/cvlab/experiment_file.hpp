#ifndef CVLAB_EXPERIMENT_FILE_HPP
#define CVLAB_EXPERIMENT_FILE_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvlab/mclab.hpp"

namespace cvlab::mclab {

/// Parsed experiment config: the moment experiment plus the statistical
/// checks to run on it. See docs/experiment-config.md for the format.
struct ExperimentFile {
    ExperimentConfig config;
    std::vector<std::string> rule_specs;
    std::vector<std::string> checks;
    /// Raw "<check>.<param>" entries, validated at parse time.
    std::map<std::string, std::string> params;
    bool seed_given = false;
};

ExperimentFile parse_experiment_file(const std::string& text);
ExperimentFile load_experiment_file(const std::filesystem::path& path);

struct CheckOutcome {
    std::string name;
    bool pass = false;
    std::string summary;
    nlohmann::ordered_json detail;
};

/// Runs each requested check on the first rule of the menu.
std::vector<CheckOutcome> run_checks(const ExperimentFile& file);

/// Echo of the resolved config (everything that affects results; not `jobs`).
nlohmann::ordered_json to_json(const ExperimentFile& file);

}  // namespace cvlab::mclab

#endif  // CVLAB_EXPERIMENT_FILE_HPP
