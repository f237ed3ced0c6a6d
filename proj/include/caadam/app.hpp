#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "caadam/bench.hpp"

namespace caadam {

struct TrainCommandResult {
    TrialResult trial;
    TrainLog log;
};

/// Single run of the first architecture and first optimizer of the config at
/// seed base_seed. Writes train_log.csv, metrics.json and
/// optimizer_state.json into `out_dir`.
TrainCommandResult run_train_command(const std::filesystem::path& config_path, const std::filesystem::path& out_dir);

struct BenchmarkCommandResult {
    std::vector<TrialResult> trials;
    ComparisonReport report;
    bool all_diverged = false;
};

/// Full grid. Writes trials.json, timings.json, report.json, report.csv and
/// logs/<trial>.csv into `out_dir`.
BenchmarkCommandResult run_benchmark_command(const std::filesystem::path& config_path,
                                             const std::filesystem::path& out_dir,
                                             std::optional<std::size_t> trials_override, std::size_t parallel);

/// Rebuilds the comparison from a trials file (and the sibling timings.json
/// when present). Writes report.json and report.csv into `out_dir` when given.
ComparisonReport run_report_command(const std::filesystem::path& trials_path, const std::string& baseline,
                                    const std::optional<std::filesystem::path>& out_dir);

}  // namespace caadam
