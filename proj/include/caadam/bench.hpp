#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "caadam/data.hpp"
#include "caadam/optim.hpp"
#include "caadam/stats.hpp"
#include "caadam/train.hpp"
#include "json.hpp"

namespace caadam {

enum class DatasetKind { csv, synth_regression, synth_classification };

struct DatasetSpec {
    DatasetKind kind = DatasetKind::synth_regression;
    // csv
    std::filesystem::path path;
    std::string target;
    Task task = Task::regression;
    // synthetic
    std::size_t n = 2000;
    std::size_t features = 8;
    double noise_std = 0.1;
    std::size_t classes = 3;
    double spread = 1.0;
    std::uint64_t seed = 0;
};

Dataset load_dataset(const DatasetSpec& spec);

struct ExperimentConfig {
    DatasetSpec dataset;
    SplitFractions split = kDefaultSplit;
    std::vector<std::vector<std::size_t>> architectures;
    std::vector<OptimizerConfig> optimizers;
    TrainConfig train;
    std::size_t trials = 30;
    std::uint64_t base_seed = 0;

    void validate() const;
};

/// Parses the experiment JSON. Relative CSV paths resolve against `base_dir`.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Canonical "[64,32]" rendering of a hidden-size list.
std::string architecture_label(const std::vector<std::size_t>& hidden);

struct TrialResult {
    std::vector<std::size_t> architecture;
    std::string optimizer;  // OptimizerConfig::label()
    std::uint64_t seed = 0;
    std::string metric_name;  // "rmse" or "accuracy"
    double metric = 0.0;      // NaN when diverged
    std::size_t epochs_run = 0;
    double best_val_loss = 0.0;
    double wall_time_s = 0.0;
    StopReason stop_reason = StopReason::max_epochs;
    std::uint64_t init_hash = 0;  // FNV-1a of the initial parameters

    std::string cell_id() const { return architecture_label(architecture) + "/" + optimizer; }
};

/// Seeds derived from a trial seed. Every optimizer in a cell sees the same
/// split, initial weights and shuffle order for a given trial.
struct TrialSeeds {
    std::uint64_t split;
    std::uint64_t init;
    std::uint64_t shuffle;
};
TrialSeeds derive_trial_seeds(std::uint64_t trial_seed);

/// Network built for one trial: shape from the dataset and hidden sizes,
/// weights from the trial's init seed.
Network build_trial_network(const Dataset& data, const std::vector<std::size_t>& hidden, std::uint64_t trial_seed);

/// FNV-1a over the raw bytes of every parameter.
std::uint64_t parameter_hash(const Network& net);

/// Trains one (architecture, optimizer, seed) combination.
TrialResult run_trial(const Dataset& data, const SplitFractions& split, const std::vector<std::size_t>& hidden,
                      const OptimizerConfig& optimizer, const TrainConfig& train_cfg, std::uint64_t trial_seed,
                      TrainLog* log_out = nullptr);

struct RunOptions {
    std::size_t parallel = 1;
    /// When set, one TrainLog CSV per trial is written here.
    std::optional<std::filesystem::path> logs_dir;
};

/// Runs every architecture x optimizer cell for seeds base_seed .. base_seed +
/// trials - 1. Diverged trials are recorded, not raised. The result is sorted
/// by cell id, then seed, independent of scheduling.
std::vector<TrialResult> run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// trials.json holds every deterministic field; wall times go to a separate
/// timings file so that identical configs give byte-identical trials files.
void write_trials_json(const std::vector<TrialResult>& trials, const std::filesystem::path& path);
void write_timings_json(const std::vector<TrialResult>& trials, const std::filesystem::path& path);
std::vector<TrialResult> read_trials_json(const std::filesystem::path& path);
/// Fills wall_time_s from a timings file; returns false if it does not exist.
bool merge_timings(std::vector<TrialResult>& trials, const std::filesystem::path& path);

struct SampleSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double std = 0.0;
};

struct Comparison {
    double improvement_pct = 0.0;
    double t = 0.0;
    double p = 1.0;
    std::string stars;
};

struct CellReport {
    std::string cell_id;
    std::vector<std::size_t> architecture;
    std::string optimizer;
    bool is_baseline = false;
    std::size_t trials = 0;
    std::size_t diverged = 0;
    SampleSummary metric;
    SampleSummary epochs;
    std::optional<SampleSummary> time;
    std::optional<Comparison> metric_vs_baseline;
    std::optional<Comparison> epochs_vs_baseline;
    std::optional<Comparison> time_vs_baseline;
};

struct ComparisonReport {
    std::string metric_name;
    bool higher_is_better = false;
    std::string baseline;
    std::vector<CellReport> cells;
};

/// Aggregates trials per cell and compares each cell against the baseline
/// optimizer of the same architecture with Welch's t-test. Improvement is
/// (baseline - cell) / baseline * 100 for lower-is-better quantities (RMSE,
/// time, epochs) and (cell - baseline) / baseline * 100 for accuracy. Time
/// statistics are omitted when any trial lacks a wall time. Throws
/// ConfigError if an architecture has no baseline cell.
ComparisonReport build_report(const std::vector<TrialResult>& trials, const std::string& baseline);

nlohmann::json to_json(const ComparisonReport& report);
void write_report_json(const ComparisonReport& report, const std::filesystem::path& path);
void write_report_csv(const ComparisonReport& report, const std::filesystem::path& path);
/// Fixed-width text table for terminals.
std::string format_report_table(const ComparisonReport& report);

/// Concatenates every TrainLog CSV in `logs_dir` (sorted by file name) into
/// one CSV with a leading `trial` column holding the file stem.
std::size_t merge_curves(const std::filesystem::path& logs_dir, const std::filesystem::path& out_csv);

}  // namespace caadam
