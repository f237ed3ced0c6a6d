#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "caadam/data.hpp"
#include "caadam/nn.hpp"
#include "caadam/optim.hpp"
#include "json.hpp"

namespace caadam {

struct TrainConfig {
    std::size_t batch_size = 64;
    std::size_t max_epochs = 1000;
    std::size_t early_stop_patience = 15;
    double early_stop_min_delta = 1e-5;
    double lr_reduce_factor = 0.25;
    std::size_t lr_reduce_patience = 6;
    double min_lr = 2.5e-5;
    double initial_lr = 1e-3;
    std::uint64_t seed = 0;

    void validate() const;
};

nlohmann::json to_json(const TrainConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig defaults = {});

enum class StopReason { early_stop, max_epochs, diverged };

std::string_view to_string(StopReason reason);
std::optional<StopReason> parse_stop_reason(std::string_view name);

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double lr = 0.0;  // rate used during this epoch
    double wall_time_s = 0.0;
};

struct TrainLog {
    std::vector<EpochRecord> epochs;
    StopReason stop_reason = StopReason::max_epochs;
    std::size_t epochs_run = 0;
    std::size_t best_epoch = 0;
    double best_val_loss = 0.0;
    double wall_time_s = 0.0;
    std::optional<Network> best_weights;
    std::string diagnostics;  // set when diverged
};

/// Patience counter on validation loss. An epoch improves when
/// loss < best - min_delta.
class EarlyStopping {
public:
    EarlyStopping(std::size_t patience, double min_delta);

    /// Feeds one epoch's validation loss; returns true when training should
    /// stop after this epoch.
    bool update(double val_loss);

    bool last_improved() const noexcept { return last_improved_; }
    double best() const noexcept { return best_; }
    std::size_t wait() const noexcept { return wait_; }

private:
    std::size_t patience_;
    double min_delta_;
    double best_;
    std::size_t wait_ = 0;
    bool last_improved_ = false;
};

/// Reduce-on-plateau learning-rate schedule. After `patience` epochs without
/// improvement the rate is multiplied by `factor`, floored at `min_lr`, and the
/// counter restarts.
class PlateauScheduler {
public:
    PlateauScheduler(double initial_lr, double factor, std::size_t patience, double min_delta, double min_lr);

    /// Feeds one epoch's validation loss; returns the rate for the next epoch.
    double update(double val_loss);

    double lr() const noexcept { return lr_; }

private:
    double lr_;
    double factor_;
    std::size_t patience_;
    double min_delta_;
    double min_lr_;
    double best_;
    std::size_t wait_ = 0;
};

/// Mini-batch training with early stopping and reduce-on-plateau.
///
/// Each epoch shuffles the training rows with a generator seeded from
/// cfg.seed, steps the optimizer once per batch (the trailing partial batch is
/// kept), then measures full-partition train and validation loss. At the end
/// the network holds the weights of the best validation epoch. A non-finite
/// loss or update ends the run with StopReason::diverged.
TrainLog train(Network& net, Optimizer& optimizer, const SplitDataset& data, const TrainConfig& cfg);

double rmse(const Matrix& prediction, const Matrix& targets);
/// Fraction of rows whose argmax (lowest index on ties) equals the label.
double accuracy(const Matrix& logits, const Matrix& labels);

/// RMSE for a regression head, accuracy for a classification head.
double evaluate(const Network& net, const Dataset& data);

/// CSV with header epoch,train_loss,val_loss,lr.
void write_train_log_csv(const TrainLog& log, const std::filesystem::path& path);

}  // namespace caadam
