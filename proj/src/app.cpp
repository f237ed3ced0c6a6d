#include "caadam/app.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "caadam/error.hpp"

namespace caadam {

namespace {

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

TrainCommandResult run_train_command(const std::filesystem::path& config_path, const std::filesystem::path& out_dir) {
    const ExperimentConfig cfg = load_experiment_config(config_path);
    const Dataset data = load_dataset(cfg.dataset);
    ensure_dir(out_dir);

    const auto& hidden = cfg.architectures.front();
    const auto& opt_cfg = cfg.optimizers.front();
    const std::uint64_t seed = cfg.base_seed;
    const TrialSeeds seeds = derive_trial_seeds(seed);
    const SplitDataset parts = split_standardize(data, cfg.split, seeds.split);
    Network net = build_trial_network(data, hidden, seed);

    TrainCommandResult result;
    TrialResult& r = result.trial;
    r.architecture = hidden;
    r.optimizer = opt_cfg.label();
    r.seed = seed;
    r.metric_name = data.task == Task::regression ? "rmse" : "accuracy";
    r.init_hash = parameter_hash(net);

    Optimizer optimizer(opt_cfg, net);
    TrainConfig tcfg = cfg.train;
    tcfg.initial_lr = opt_cfg.learning_rate;
    tcfg.seed = seeds.shuffle;
    result.log = train(net, optimizer, parts, tcfg);

    r.epochs_run = result.log.epochs_run;
    r.stop_reason = result.log.stop_reason;
    r.wall_time_s = result.log.wall_time_s;
    const bool diverged = result.log.stop_reason == StopReason::diverged;
    r.metric = diverged ? std::numeric_limits<double>::quiet_NaN() : evaluate(net, parts.test);
    r.best_val_loss = diverged ? std::numeric_limits<double>::quiet_NaN() : result.log.best_val_loss;

    write_train_log_csv(result.log, out_dir / "train_log.csv");
    optimizer.save(out_dir / "optimizer_state.json");

    nlohmann::json metrics = {
        {"architecture", r.architecture},
        {"optimizer", r.optimizer},
        {"seed", r.seed},
        {"metric_name", r.metric_name},
        {"metric", std::isfinite(r.metric) ? nlohmann::json(r.metric) : nlohmann::json(nullptr)},
        {"epochs_run", r.epochs_run},
        {"best_epoch", result.log.best_epoch},
        {"best_val_loss", std::isfinite(r.best_val_loss) ? nlohmann::json(r.best_val_loss) : nlohmann::json(nullptr)},
        {"stop_reason", to_string(r.stop_reason)},
        {"wall_time_s", r.wall_time_s},
        {"scales", optimizer.scales()},
    };
    if (diverged) metrics["diagnostics"] = result.log.diagnostics;
    std::ofstream out(out_dir / "metrics.json");
    if (!out) throw IoError("cannot write metrics.json");
    out << metrics.dump(2) << '\n';
    return result;
}

BenchmarkCommandResult run_benchmark_command(const std::filesystem::path& config_path,
                                             const std::filesystem::path& out_dir,
                                             std::optional<std::size_t> trials_override, std::size_t parallel) {
    ExperimentConfig cfg = load_experiment_config(config_path);
    if (trials_override) {
        cfg.trials = *trials_override;
        cfg.validate();
    }
    ensure_dir(out_dir);

    BenchmarkCommandResult result;
    result.trials = run_experiment(cfg, {parallel, out_dir / "logs"});
    write_trials_json(result.trials, out_dir / "trials.json");
    write_timings_json(result.trials, out_dir / "timings.json");
    result.all_diverged = std::all_of(result.trials.begin(), result.trials.end(), [](const TrialResult& t) {
        return t.stop_reason == StopReason::diverged;
    });
    result.report = build_report(result.trials, "adam");
    write_report_json(result.report, out_dir / "report.json");
    write_report_csv(result.report, out_dir / "report.csv");
    return result;
}

ComparisonReport run_report_command(const std::filesystem::path& trials_path, const std::string& baseline,
                                    const std::optional<std::filesystem::path>& out_dir) {
    auto trials = read_trials_json(trials_path);
    merge_timings(trials, trials_path.parent_path() / "timings.json");
    ComparisonReport report = build_report(trials, baseline);
    if (out_dir) {
        ensure_dir(*out_dir);
        write_report_json(report, *out_dir / "report.json");
        write_report_csv(report, *out_dir / "report.csv");
    }
    return report;
}

}  // namespace caadam
