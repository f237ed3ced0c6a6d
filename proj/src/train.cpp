#include "caadam/train.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "caadam/error.hpp"

namespace caadam {

void TrainConfig::validate() const {
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
    if (max_epochs == 0) throw ConfigError("max_epochs must be >= 1");
    if (early_stop_patience == 0 || lr_reduce_patience == 0) throw ConfigError("patience values must be >= 1");
    if (!(early_stop_min_delta >= 0.0)) throw ConfigError("early_stop_min_delta must be >= 0");
    if (!(lr_reduce_factor > 0.0 && lr_reduce_factor < 1.0)) throw ConfigError("lr_reduce_factor must be in (0, 1)");
    if (!(min_lr > 0.0)) throw ConfigError("min_lr must be > 0");
    if (!(initial_lr >= min_lr)) throw ConfigError("initial_lr must be >= min_lr");
}

nlohmann::json to_json(const TrainConfig& c) {
    return {
        {"batch_size", c.batch_size},
        {"max_epochs", c.max_epochs},
        {"early_stop_patience", c.early_stop_patience},
        {"early_stop_min_delta", c.early_stop_min_delta},
        {"lr_reduce_factor", c.lr_reduce_factor},
        {"lr_reduce_patience", c.lr_reduce_patience},
        {"min_lr", c.min_lr},
        {"initial_lr", c.initial_lr},
        {"seed", c.seed},
    };
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
    if (!j.is_object()) throw ConfigError("train config must be an object");
    static const std::vector<std::string> known = {"batch_size",         "max_epochs", "early_stop_patience",
                                                   "early_stop_min_delta", "lr_reduce_factor",
                                                   "lr_reduce_patience", "min_lr",     "initial_lr", "seed"};
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("unknown train config key '" + key + "'");
        }
    }
    try {
        c.batch_size = j.value("batch_size", c.batch_size);
        c.max_epochs = j.value("max_epochs", c.max_epochs);
        c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
        c.early_stop_min_delta = j.value("early_stop_min_delta", c.early_stop_min_delta);
        c.lr_reduce_factor = j.value("lr_reduce_factor", c.lr_reduce_factor);
        c.lr_reduce_patience = j.value("lr_reduce_patience", c.lr_reduce_patience);
        c.min_lr = j.value("min_lr", c.min_lr);
        c.initial_lr = j.value("initial_lr", c.initial_lr);
        c.seed = j.value("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("train config: ") + e.what());
    }
    c.validate();
    return c;
}

std::string_view to_string(StopReason reason) {
    switch (reason) {
        case StopReason::early_stop: return "early_stop";
        case StopReason::max_epochs: return "max_epochs";
        case StopReason::diverged: return "diverged";
    }
    return "unknown";
}

std::optional<StopReason> parse_stop_reason(std::string_view name) {
    for (auto r : {StopReason::early_stop, StopReason::max_epochs, StopReason::diverged}) {
        if (to_string(r) == name) return r;
    }
    return std::nullopt;
}

EarlyStopping::EarlyStopping(std::size_t patience, double min_delta)
    : patience_(patience), min_delta_(min_delta), best_(std::numeric_limits<double>::infinity()) {}

bool EarlyStopping::update(double val_loss) {
    last_improved_ = val_loss < best_ - min_delta_;
    if (last_improved_) {
        best_ = val_loss;
        wait_ = 0;
        return false;
    }
    ++wait_;
    return wait_ >= patience_;
}

PlateauScheduler::PlateauScheduler(double initial_lr, double factor, std::size_t patience, double min_delta,
                                   double min_lr)
    : lr_(initial_lr),
      factor_(factor),
      patience_(patience),
      min_delta_(min_delta),
      min_lr_(min_lr),
      best_(std::numeric_limits<double>::infinity()) {}

double PlateauScheduler::update(double val_loss) {
    if (val_loss < best_ - min_delta_) {
        best_ = val_loss;
        wait_ = 0;
        return lr_;
    }
    if (++wait_ >= patience_) {
        if (lr_ > min_lr_) lr_ = std::max(lr_ * factor_, min_lr_);
        wait_ = 0;
    }
    return lr_;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double full_loss(const Network& net, const Dataset& ds) {
    return loss(predict(net, ds.features), ds.targets, net.spec().head);
}

}  // namespace

TrainLog train(Network& net, Optimizer& optimizer, const SplitDataset& data, const TrainConfig& cfg) {
    cfg.validate();
    const Dataset& train_set = data.train;
    if (train_set.size() == 0 || data.validation.size() == 0) {
        throw DataError("training needs non-empty train and validation partitions");
    }
    if (cfg.batch_size > train_set.size()) throw ConfigError("batch_size exceeds the training partition");

    TrainLog log;
    EarlyStopping stopper(cfg.early_stop_patience, cfg.early_stop_min_delta);
    PlateauScheduler scheduler(cfg.initial_lr, cfg.lr_reduce_factor, cfg.lr_reduce_patience,
                               cfg.early_stop_min_delta, cfg.min_lr);
    Rng shuffle_rng = Rng(cfg.seed).split(0x5eed);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    const auto run_start = Clock::now();
    double lr = cfg.initial_lr;
    bool stopped_early = false;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs && !stopped_early; ++epoch) {
        const auto epoch_start = Clock::now();
        shuffle_rng.shuffle(order);
        EpochRecord record{epoch, 0.0, 0.0, lr, 0.0};
        try {
            for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
                const std::size_t end = std::min(begin + cfg.batch_size, order.size());
                const std::span<const std::size_t> rows(order.data() + begin, end - begin);
                const Matrix xb = gather_rows(train_set.features, rows);
                const Matrix yb = gather_rows(train_set.targets, rows);
                auto fwd = forward(net, xb);
                optimizer.step(net, backward(net, fwd.cache, yb), lr);
            }
            record.train_loss = full_loss(net, train_set);
            record.val_loss = full_loss(net, data.validation);
            if (!std::isfinite(record.train_loss) || !std::isfinite(record.val_loss)) {
                throw NonFiniteError("non-finite loss at epoch " + std::to_string(epoch));
            }
        } catch (const NonFiniteError& e) {
            log.stop_reason = StopReason::diverged;
            log.diagnostics = e.what();
            log.epochs_run = epoch;
            break;
        }
        record.wall_time_s = seconds_since(epoch_start);
        log.epochs.push_back(record);
        log.epochs_run = epoch;

        stopped_early = stopper.update(record.val_loss);
        if (stopper.last_improved()) {
            log.best_epoch = epoch;
            log.best_val_loss = record.val_loss;
            log.best_weights = net;
        }
        lr = scheduler.update(record.val_loss);
    }

    if (log.stop_reason != StopReason::diverged) {
        log.stop_reason = stopped_early ? StopReason::early_stop : StopReason::max_epochs;
    }
    if (log.best_weights && log.stop_reason != StopReason::diverged) net = *log.best_weights;
    log.wall_time_s = seconds_since(run_start);
    return log;
}

double rmse(const Matrix& prediction, const Matrix& targets) {
    if (prediction.empty()) throw DataError("rmse of empty data");
    if (!prediction.same_shape(targets)) throw ShapeError("rmse: prediction/target shapes differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < prediction.size(); ++i) {
        const double d = targets[i] - prediction[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(prediction.size()));
}

double accuracy(const Matrix& logits, const Matrix& labels) {
    if (logits.rows() == 0) throw DataError("accuracy of empty data");
    if (labels.rows() != logits.rows() || labels.cols() != 1) throw ShapeError("accuracy: label shape mismatch");
    std::size_t correct = 0;
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        const auto row = logits.row(r);
        // max_element returns the first maximum, i.e. the lowest index on ties.
        const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        if (static_cast<double>(best) == labels(r, 0)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

double evaluate(const Network& net, const Dataset& data) {
    if (data.size() == 0) throw DataError("evaluate on empty data");
    const Matrix prediction = predict(net, data.features);
    return net.spec().head == OutputHead::linear_regression ? rmse(prediction, data.targets)
                                                            : accuracy(prediction, data.targets);
}

void write_train_log_csv(const TrainLog& log, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "epoch,train_loss,val_loss,lr\n";
    char buf[64];
    auto fmt = [&](double v) {
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, ptr);
    };
    for (const auto& e : log.epochs) {
        out << e.epoch << ',' << fmt(e.train_loss) << ',' << fmt(e.val_loss) << ',' << fmt(e.lr) << '\n';
    }
}

}  // namespace caadam
