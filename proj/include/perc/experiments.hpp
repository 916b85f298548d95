#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "perc/lattice.hpp"

namespace perc {

inline constexpr const char* kCodeVersion = "0.1.0";

// Configuration problems carry an optional source location (1-based) when
// they come from JSON syntax errors; semantic problems leave it at -1.
struct ConfigError : std::invalid_argument {
    int line = -1;
    int column = -1;
    explicit ConfigError(const std::string& message, int line_at = -1, int column_at = -1)
        : std::invalid_argument(message), line(line_at), column(column_at) {}
};

// A fully validated experiment description: the kind, the parameter echo
// with every default filled in (this is what the manifest records and what
// the config hash covers), and the resolved output directory.
struct ExperimentConfig {
    std::string kind;
    nlohmann::json parameters;
    std::string output_dir;
};

// Parses and validates a config document. Unknown keys anywhere in the
// document are rejected. Relative output directories are placed under
// `output_root` (the CLI passes the PERC_OUTPUT_ROOT environment variable
// or "."). Throws ConfigError, with line/column set for malformed JSON.
ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::string& output_root);

struct RunOutcome {
    std::string output_dir;
    std::vector<std::string> files;  // relative to output_dir, manifest included
    nlohmann::json summary;
    nlohmann::json acceptance;  // array of {id, pass, detail}
};

// Executes the experiment, writes its result files and manifest.json into
// the output directory, and returns what was written. Reruns with an
// identical config produce byte-identical result files.
RunOutcome run_experiment(const ExperimentConfig& config);

// Renders the verdict report for a run directory (manifest.json present)
// or a directory of run directories. Throws ConfigError when no manifest
// is found.
std::string report_runs(const std::string& directory);

// Largest deviation between the slit-domain observable after each
// distinct partial interface of the domain and the direct conditional
// average over the enumerated configurations sharing that prefix.
double martingale_max_deviation(const DobrushinDomain& domain);

std::uint64_t fnv1a_hash(std::string_view text);

}  // namespace perc
