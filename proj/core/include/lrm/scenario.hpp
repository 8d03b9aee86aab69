#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "lrm/hazard.hpp"
#include "lrm/market.hpp"

namespace lrm {

/// Invalid or unparsable scenario document. `field()` is the dotted path of
/// the offending entry (e.g. "market.sigma", "hazard.rates[0][1]"), or empty
/// for syntax errors, whose message carries the line and column.
class ConfigError : public std::runtime_error {
   public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message),
          field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

   private:
    std::string field_;
};

struct ReportOptions {
    int path_csv_limit = 10;  ///< paths written in full to paths.csv
    int oracle_paths = 5;     ///< paths checked against the discrete filter

    friend bool operator==(const ReportOptions&, const ReportOptions&) = default;
};

struct ScenarioConfig {
    HazardModel hazard;
    MarketModel market;
    ClaimSpec claim;
    int cohort = 1;
    int grid_steps = 100;
    int n_paths = 1;
    int quadrature_nodes = 64;
    std::uint64_t seed = 0;
    std::string outputs = "out";
    ReportOptions report;
};

bool operator==(const HazardModel& a, const HazardModel& b);
bool operator==(const ScenarioConfig& a, const ScenarioConfig& b);

/// Parses and validates a JSON scenario document. Throws ConfigError.
ScenarioConfig load_config(std::string_view document);
ScenarioConfig load_config_file(const std::filesystem::path& path);

/// JSON document that load_config maps back to an equal config.
std::string serialize_config(const ScenarioConfig& config);

}  // namespace lrm
