#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "mep/portfolio.hpp"
#include "mep/uncertain_vol.hpp"

namespace mep::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Validation failure carrying the offending field path.
struct ScenarioError : InvalidParameterError {
    std::string field;
    ScenarioError(const std::string& field_, const std::string& message)
        : InvalidParameterError(field_ + ": " + message), field(field_) {}
};

enum class OutputFormat { Csv, Tree };

/// A parsed scenario document: one command plus the blocks it needs.
struct Scenario {
    std::string command;
    nlohmann::ordered_json doc;
    std::string hash;  // FNV-1a of the raw document bytes

    std::optional<std::string> output_path;
    std::optional<OutputFormat> output_format;
};

/// FNV-1a 64-bit, rendered as 16 hex characters.
std::string fnv1a_hex(const std::string& bytes);

/// Parses and validates the top-level structure. Throws ScenarioError on
/// missing or malformed fields and nlohmann's parse_error (with position)
/// on syntax errors.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Executes the scenario and renders the complete output document (CSV text
/// or a JSON tree, both LF-terminated). Numerical values carry 12
/// significant digits.
std::string render_output(const Scenario& scenario, OutputFormat format);

/// Format to use when neither the flag nor the scenario specifies one:
/// CSV for the curve commands, tree for single-value commands.
OutputFormat default_format(const std::string& command);

/// Full command-line entry point; maps errors to exit codes
/// (2 parse/validation, 3 numerical, 4 infeasible optimization) and writes
/// a machine-readable error record to stderr on failure.
int cli_main(int argc, const char* const* argv);

}  // namespace mep::cli
