#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hinfty/hinfty_lab.hpp"

namespace hinf {

enum class SuiteType { sector_equivalence, strip_group, square_function_comparison, g_function, log_bridge };

std::string to_string(SuiteType t);
SuiteType suite_type_from_string(const std::string& s);

struct SuiteJob {
    std::string name;  // output file stem
    SuiteType type = SuiteType::sector_equivalence;
    json params = json::object();  // validated suite-specific keys
    std::optional<std::uint64_t> seed;
};

struct RunConfig {
    std::map<std::string, Operator> operators;
    std::vector<SuiteJob> suites;
    LabOptions options;
    std::optional<std::uint64_t> seed;
    std::string output_dir;  // empty: chosen by the caller
};

// Validates the whole document before anything runs; ConfigInvalid on unknown
// keys, wrong types, p < 1, missing operators or duplicate suite names.
// Relative operator file references resolve against base_dir.
RunConfig parse_run_config(const json& doc, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

struct RunOutcome {
    int exit_code = 0;  // 0 all assertions hold, 1 otherwise
    json manifest;
    std::vector<SuiteReport> reports;
};

struct RunSettings {
    std::string output_dir = "lab_out";
    std::uint64_t seed = 1;
    int jobs = 1;
    std::string config_path;
};

// Seed precedence: explicit flag, then the config, then LAB_SEED, then 1.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const RunConfig& cfg);

// Runs every suite on a pool of `jobs` workers and writes <name>.json, <name>.csv
// and manifest.json into the output directory.
RunOutcome run_suites(const RunConfig& cfg, const RunSettings& settings);

// Long-format "series,x,y" rows for every series in the report.
std::string plot_csv(const SuiteReport& report);
// Reads a report written by run_suites; ReportMissing if absent or unreadable.
SuiteReport load_report(const std::string& path);

}  // namespace hinf
