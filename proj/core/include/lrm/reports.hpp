#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "lrm/ensemble.hpp"

namespace lrm {

/// Raised when the output directory is non-empty and overwriting is off.
class OutputExistsError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

// Column lists of the emitted CSV files. State-indexed columns are expanded
// as pi_0..pi_{n-1} / m_0..m_{n-1}.
inline constexpr std::array<const char*, 7> kTerminalColumns = {
    "path", "payoff", "value_T", "cost_drift", "martingale_sum", "mmm_density", "n_dead"};
inline constexpr std::array<const char*, 7> kAggregateColumns = {
    "time", "value_mean", "value_lo", "value_hi", "cost_mean", "cost_lo", "cost_hi"};
inline constexpr std::array<const char*, 8> kPathColumns = {
    "path", "time", "theta", "eta", "value", "cost", "stock", "n_dead"};

/// Writes into `dir`:
///   summary.json       ensemble statistics and pass/fail flags
///   terminal.csv       one row per path (kTerminalColumns)
///   aggregate.csv      base-grid mean +/- 3 SE bands (kAggregateColumns)
///   paths.csv          full hedge records of the sampled paths (kPathColumns)
///   filter_path0.csv   time,n_dead,pi_*,log_mass for path 0
///   projection.csv     time,m_* (pure endowment), or
///   term_kernels.csv   node,time,m_* (term insurance)
void emit_reports(const EnsembleSummary& summary, const std::filesystem::path& dir,
                  bool overwrite);

/// The summary document alone.
std::string summary_json(const EnsembleSummary& summary);

/// Header line for a column list.
template <std::size_t N>
std::string csv_header(const std::array<const char*, N>& cols) {
    std::string out;
    for (std::size_t i = 0; i < N; ++i) {
        if (i) out += ',';
        out += cols[i];
    }
    return out;
}

}  // namespace lrm
