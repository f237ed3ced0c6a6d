#include "caadam/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "caadam/error.hpp"

namespace caadam {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::json number_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double number_from(const nlohmann::json& j) {
    return j.is_null() ? kNaN : j.get<double>();
}

std::string read_file(const std::filesystem::path& path, bool data_error) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        const std::string msg = "cannot read " + path.string();
        if (data_error) throw DataError(msg);
        throw ConfigError(msg);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<std::string_view> known,
                         std::string_view where) {
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("unknown key '" + key + "' in " + std::string(where));
        }
    }
}

DatasetSpec dataset_spec_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("dataset must be an object");
    reject_unknown_keys(j, {"kind", "path", "target", "task", "n", "features", "noise_std", "classes", "spread", "seed"},
                        "dataset");
    DatasetSpec d;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "csv") {
        d.kind = DatasetKind::csv;
        d.path = j.at("path").get<std::string>();
        if (d.path.is_relative() && !base_dir.empty()) d.path = base_dir / d.path;
        d.target = j.at("target").get<std::string>();
        const auto task = j.value("task", std::string("regression"));
        if (task == "regression") {
            d.task = Task::regression;
        } else if (task == "classification") {
            d.task = Task::classification;
        } else {
            throw ConfigError("dataset task must be 'regression' or 'classification'");
        }
    } else if (kind == "synth_regression") {
        d.kind = DatasetKind::synth_regression;
        d.task = Task::regression;
    } else if (kind == "synth_classification") {
        d.kind = DatasetKind::synth_classification;
        d.task = Task::classification;
    } else {
        throw ConfigError("unknown dataset kind '" + kind + "'");
    }
    d.n = j.value("n", d.n);
    d.features = j.value("features", d.features);
    d.noise_std = j.value("noise_std", d.noise_std);
    d.classes = j.value("classes", d.classes);
    d.spread = j.value("spread", d.spread);
    d.seed = j.value("seed", d.seed);
    return d;
}

std::string file_safe_label(const TrialResult& r) {
    std::string arch;
    for (std::size_t i = 0; i < r.architecture.size(); ++i) {
        if (i) arch += '-';
        arch += std::to_string(r.architecture[i]);
    }
    if (arch.empty()) arch = "linear";
    return arch + "__" + r.optimizer + "__seed" + std::to_string(r.seed);
}

nlohmann::json trial_to_json(const TrialResult& r) {
    return {
        {"architecture", r.architecture},
        {"optimizer", r.optimizer},
        {"seed", r.seed},
        {"metric_name", r.metric_name},
        {"metric", number_or_null(r.metric)},
        {"epochs_run", r.epochs_run},
        {"best_val_loss", number_or_null(r.best_val_loss)},
        {"stop_reason", to_string(r.stop_reason)},
        {"init_hash", r.init_hash},
    };
}

SampleSummary summarize_sample(const std::vector<double>& xs) {
    return {xs.size(), mean(xs), sample_std(xs)};
}

std::optional<Comparison> compare(const std::vector<double>& cell, const std::vector<double>& baseline,
                                  bool higher_is_better) {
    if (cell.size() < 2 || baseline.size() < 2) return std::nullopt;
    const double mc = mean(cell);
    const double mb = mean(baseline);
    Comparison c;
    c.improvement_pct = (higher_is_better ? (mc - mb) : (mb - mc)) / mb * 100.0;
    const auto t = welch_t_test(cell, baseline);
    c.t = t.t;
    c.p = t.p;
    c.stars = significance_stars(t.p);
    return c;
}

}  // namespace

Dataset load_dataset(const DatasetSpec& spec) {
    switch (spec.kind) {
        case DatasetKind::csv: return load_csv(spec.path, {spec.target, spec.task});
        case DatasetKind::synth_regression:
            return synth_regression(spec.n, spec.features, spec.noise_std, spec.seed);
        case DatasetKind::synth_classification:
            return synth_classification(spec.n, spec.features, spec.classes, spec.spread, spec.seed);
    }
    throw ConfigError("unknown dataset kind");
}

void ExperimentConfig::validate() const {
    if (trials < 2) throw ConfigError("trials must be >= 2 for a t-test");
    if (architectures.empty()) throw ConfigError("at least one architecture is required");
    if (optimizers.empty()) throw ConfigError("at least one optimizer is required");
    const bool has_adam = std::any_of(optimizers.begin(), optimizers.end(),
                                      [](const OptimizerConfig& o) { return o.algorithm == Algorithm::adam; });
    if (!has_adam) throw ConfigError("an adam baseline optimizer is required");
    std::set<std::string> labels;
    for (const auto& o : optimizers) {
        o.validate();
        if (!labels.insert(o.label()).second) throw ConfigError("duplicate optimizer cell '" + o.label() + "'");
    }
    for (const auto& a : architectures) {
        for (std::size_t w : a) {
            if (w == 0) throw ConfigError("hidden layer widths must be >= 1");
        }
    }
    train.validate();
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
    reject_unknown_keys(j, {"dataset", "split", "architectures", "optimizers", "train", "trials", "base_seed",
                            "description"},
                        "experiment config");
    ExperimentConfig cfg;
    try {
        cfg.dataset = dataset_spec_from_json(j.at("dataset"), base_dir);
        if (j.contains("split")) {
            const auto f = j.at("split").get<std::vector<double>>();
            if (f.size() != 3) throw ConfigError("split must list three fractions");
            cfg.split = {f[0], f[1], f[2]};
        }
        cfg.architectures = j.at("architectures").get<std::vector<std::vector<std::size_t>>>();
        if (j.contains("train")) cfg.train = train_config_from_json(j.at("train"));
        for (const auto& o : j.at("optimizers")) {
            nlohmann::json entry = o;
            // Optimizers without their own learning rate start from the
            // training schedule's initial rate.
            if (entry.is_object() && !entry.contains("learning_rate")) entry["learning_rate"] = cfg.train.initial_lr;
            cfg.optimizers.push_back(optimizer_config_from_json(entry));
        }
        cfg.trials = j.value("trials", cfg.trials);
        cfg.base_seed = j.value("base_seed", cfg.base_seed);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("experiment config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path, false));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
    return experiment_config_from_json(j, path.parent_path());
}

std::string architecture_label(const std::vector<std::size_t>& hidden) {
    std::string out = "[";
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(hidden[i]);
    }
    return out + "]";
}

TrialSeeds derive_trial_seeds(std::uint64_t trial_seed) {
    const Rng root(trial_seed);
    return {root.split(1).seed(), root.split(2).seed(), root.split(3).seed()};
}

Network build_trial_network(const Dataset& data, const std::vector<std::size_t>& hidden, std::uint64_t trial_seed) {
    NetworkSpec spec;
    spec.input_dim = data.num_features();
    spec.hidden_sizes = hidden;
    if (data.task == Task::regression) {
        spec.output_dim = data.targets.cols();
        spec.head = OutputHead::linear_regression;
    } else {
        spec.output_dim = data.num_classes;
        spec.head = OutputHead::softmax_classification;
    }
    Rng init(derive_trial_seeds(trial_seed).init);
    return Network(spec, init);
}

std::uint64_t parameter_hash(const Network& net) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const Matrix& m) {
        for (double v : m.values()) {
            unsigned char bytes[sizeof(double)];
            std::memcpy(bytes, &v, sizeof v);
            for (unsigned char b : bytes) {
                h ^= b;
                h *= 0x100000001b3ULL;
            }
        }
    };
    for (const auto& layer : net.layers()) {
        feed(layer.weights);
        feed(layer.bias);
    }
    return h;
}

TrialResult run_trial(const Dataset& data, const SplitFractions& split, const std::vector<std::size_t>& hidden,
                      const OptimizerConfig& optimizer, const TrainConfig& train_cfg, std::uint64_t trial_seed,
                      TrainLog* log_out) {
    const TrialSeeds seeds = derive_trial_seeds(trial_seed);
    const SplitDataset parts = split_standardize(data, split, seeds.split);
    Network net = build_trial_network(data, hidden, trial_seed);

    TrialResult r;
    r.architecture = hidden;
    r.optimizer = optimizer.label();
    r.seed = trial_seed;
    r.metric_name = data.task == Task::regression ? "rmse" : "accuracy";
    r.init_hash = parameter_hash(net);

    Optimizer opt(optimizer, net);
    TrainConfig cfg = train_cfg;
    cfg.initial_lr = optimizer.learning_rate;
    cfg.seed = seeds.shuffle;
    TrainLog log = train(net, opt, parts, cfg);

    r.epochs_run = log.epochs_run;
    r.stop_reason = log.stop_reason;
    r.wall_time_s = log.wall_time_s;
    if (log.stop_reason == StopReason::diverged) {
        r.metric = kNaN;
        r.best_val_loss = kNaN;
    } else {
        r.metric = evaluate(net, parts.test);
        r.best_val_loss = log.best_val_loss;
    }
    if (log_out) *log_out = std::move(log);
    return r;
}

std::vector<TrialResult> run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
    cfg.validate();
    const Dataset data = load_dataset(cfg.dataset);
    if (options.logs_dir) std::filesystem::create_directories(*options.logs_dir);

    struct Job {
        const std::vector<std::size_t>* hidden;
        const OptimizerConfig* optimizer;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto& hidden : cfg.architectures) {
        for (const auto& opt : cfg.optimizers) {
            for (std::size_t t = 0; t < cfg.trials; ++t) jobs.push_back({&hidden, &opt, cfg.base_seed + t});
        }
    }

    std::vector<TrialResult> results(jobs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                TrainLog log;
                results[i] = run_trial(data, cfg.split, *jobs[i].hidden, *jobs[i].optimizer, cfg.train, jobs[i].seed,
                                       options.logs_dir ? &log : nullptr);
                if (options.logs_dir) {
                    write_train_log_csv(log, *options.logs_dir / (file_safe_label(results[i]) + ".csv"));
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(jobs.size());
                return;
            }
        }
    };

    const std::size_t workers = std::clamp<std::size_t>(options.parallel, 1, jobs.size());
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::stable_sort(results.begin(), results.end(), [](const TrialResult& a, const TrialResult& b) {
        const auto ca = a.cell_id();
        const auto cb = b.cell_id();
        return ca != cb ? ca < cb : a.seed < b.seed;
    });
    return results;
}

void write_trials_json(const std::vector<TrialResult>& trials, const std::filesystem::path& path) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : trials) arr.push_back(trial_to_json(r));
    const nlohmann::json doc = {{"format", "caadam-trials"}, {"version", 1}, {"trials", std::move(arr)}};
    write_text(path, doc.dump(2) + "\n");
}

void write_timings_json(const std::vector<TrialResult>& trials, const std::filesystem::path& path) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : trials) {
        arr.push_back({{"cell", r.cell_id()}, {"seed", r.seed}, {"wall_time_s", number_or_null(r.wall_time_s)}});
    }
    const nlohmann::json doc = {{"format", "caadam-timings"}, {"version", 1}, {"trials", std::move(arr)}};
    write_text(path, doc.dump(2) + "\n");
}

std::vector<TrialResult> read_trials_json(const std::filesystem::path& path) {
    std::vector<TrialResult> out;
    try {
        const auto doc = nlohmann::json::parse(read_file(path, true));
        if (doc.at("format").get<std::string>() != "caadam-trials") throw DataError(path.string() + " is not a trials file");
        for (const auto& t : doc.at("trials")) {
            TrialResult r;
            r.architecture = t.at("architecture").get<std::vector<std::size_t>>();
            r.optimizer = t.at("optimizer").get<std::string>();
            r.seed = t.at("seed").get<std::uint64_t>();
            r.metric_name = t.at("metric_name").get<std::string>();
            r.metric = number_from(t.at("metric"));
            r.epochs_run = t.at("epochs_run").get<std::size_t>();
            r.best_val_loss = number_from(t.at("best_val_loss"));
            const auto reason = parse_stop_reason(t.at("stop_reason").get<std::string>());
            if (!reason) throw DataError("unknown stop_reason in " + path.string());
            r.stop_reason = *reason;
            r.init_hash = t.value("init_hash", std::uint64_t{0});
            r.wall_time_s = kNaN;
            out.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed trials file " + path.string() + ": " + e.what());
    }
    return out;
}

bool merge_timings(std::vector<TrialResult>& trials, const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) return false;
    std::map<std::pair<std::string, std::uint64_t>, double> times;
    try {
        const auto doc = nlohmann::json::parse(read_file(path, true));
        for (const auto& t : doc.at("trials")) {
            times[{t.at("cell").get<std::string>(), t.at("seed").get<std::uint64_t>()}] = number_from(t.at("wall_time_s"));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed timings file " + path.string() + ": " + e.what());
    }
    for (auto& r : trials) {
        const auto it = times.find({r.cell_id(), r.seed});
        r.wall_time_s = it == times.end() ? kNaN : it->second;
    }
    return true;
}

ComparisonReport build_report(const std::vector<TrialResult>& trials, const std::string& baseline) {
    if (trials.empty()) throw DataError("no trials to report");
    ComparisonReport report;
    report.metric_name = trials.front().metric_name;
    report.higher_is_better = report.metric_name == "accuracy";
    report.baseline = baseline;

    struct Samples {
        std::vector<std::size_t> architecture;
        std::string optimizer;
        std::size_t trials = 0;
        std::size_t diverged = 0;
        std::vector<double> metric, epochs, time;
        bool all_timed = true;
    };
    std::map<std::string, Samples> cells;
    for (const auto& r : trials) {
        if (r.metric_name != report.metric_name) throw DataError("trials mix metrics");
        auto& s = cells[r.cell_id()];
        s.architecture = r.architecture;
        s.optimizer = r.optimizer;
        ++s.trials;
        if (r.stop_reason == StopReason::diverged || !std::isfinite(r.metric)) {
            ++s.diverged;
            continue;
        }
        s.metric.push_back(r.metric);
        s.epochs.push_back(static_cast<double>(r.epochs_run));
        if (std::isfinite(r.wall_time_s)) {
            s.time.push_back(r.wall_time_s);
        } else {
            s.all_timed = false;
        }
    }

    for (const auto& [id, s] : cells) {
        const std::string base_id = architecture_label(s.architecture) + "/" + baseline;
        const auto base_it = cells.find(base_id);
        if (base_it == cells.end()) throw ConfigError("no baseline cell '" + base_id + "' in trials");
        const Samples& b = base_it->second;

        CellReport c;
        c.cell_id = id;
        c.architecture = s.architecture;
        c.optimizer = s.optimizer;
        c.is_baseline = id == base_id;
        c.trials = s.trials;
        c.diverged = s.diverged;
        c.metric = summarize_sample(s.metric);
        c.epochs = summarize_sample(s.epochs);
        c.metric_vs_baseline = compare(s.metric, b.metric, report.higher_is_better);
        c.epochs_vs_baseline = compare(s.epochs, b.epochs, false);
        if (s.all_timed && !s.time.empty()) {
            c.time = summarize_sample(s.time);
            if (b.all_timed) c.time_vs_baseline = compare(s.time, b.time, false);
        }
        report.cells.push_back(std::move(c));
    }
    return report;
}

namespace {

nlohmann::json summary_json(const SampleSummary& s) {
    return {{"n", s.n}, {"mean", number_or_null(s.mean)}, {"std", number_or_null(s.std)}};
}

nlohmann::json comparison_json(const std::optional<Comparison>& c) {
    if (!c) return nullptr;
    return {{"improvement_pct", number_or_null(c->improvement_pct)},
            {"t", number_or_null(c->t)},
            {"p", number_or_null(c->p)},
            {"stars", c->stars}};
}

std::string csv_number(double v) {
    if (!std::isfinite(v)) return "";
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

}  // namespace

nlohmann::json to_json(const ComparisonReport& report) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : report.cells) {
        cells.push_back({
            {"cell", c.cell_id},
            {"architecture", c.architecture},
            {"optimizer", c.optimizer},
            {"is_baseline", c.is_baseline},
            {"trials", c.trials},
            {"diverged", c.diverged},
            {"metric", summary_json(c.metric)},
            {"epochs", summary_json(c.epochs)},
            {"time_s", c.time ? summary_json(*c.time) : nlohmann::json(nullptr)},
            {"metric_vs_baseline", comparison_json(c.metric_vs_baseline)},
            {"epochs_vs_baseline", comparison_json(c.epochs_vs_baseline)},
            {"time_vs_baseline", comparison_json(c.time_vs_baseline)},
        });
    }
    return {
        {"metric", report.metric_name},
        {"higher_is_better", report.higher_is_better},
        {"baseline", report.baseline},
        {"test", "Welch two-sample t-test (unequal variances), two-sided"},
        {"significance", "*** p<0.001, ** p<0.01, * p<0.05"},
        {"cells", std::move(cells)},
    };
}

void write_report_json(const ComparisonReport& report, const std::filesystem::path& path) {
    write_text(path, to_json(report).dump(2) + "\n");
}

void write_report_csv(const ComparisonReport& report, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "architecture,optimizer,trials,diverged,metric,metric_mean,metric_std,epochs_mean,epochs_std,"
           "time_mean,time_std,metric_improvement_pct,metric_t,metric_p,metric_stars,"
           "epochs_improvement_pct,epochs_t,epochs_p,epochs_stars,"
           "time_improvement_pct,time_t,time_p,time_stars\n";
    auto comparison = [&](const std::optional<Comparison>& c) {
        if (!c) {
            out << ",,,";
            return;
        }
        out << csv_number(c->improvement_pct) << ',' << csv_number(c->t) << ',' << csv_number(c->p) << ','
            << c->stars;
    };
    for (const auto& c : report.cells) {
        out << '"' << architecture_label(c.architecture) << "\"," << c.optimizer << ',' << c.trials << ','
            << c.diverged << ',' << report.metric_name << ',' << csv_number(c.metric.mean) << ','
            << csv_number(c.metric.std) << ',' << csv_number(c.epochs.mean) << ',' << csv_number(c.epochs.std) << ',';
        if (c.time) {
            out << csv_number(c.time->mean) << ',' << csv_number(c.time->std) << ',';
        } else {
            out << ",,";
        }
        comparison(c.metric_vs_baseline);
        out << ',';
        comparison(c.epochs_vs_baseline);
        out << ',';
        comparison(c.time_vs_baseline);
        out << '\n';
    }
    write_text(path, out.str());
}

std::string format_report_table(const ComparisonReport& report) {
    std::ostringstream out;
    out << "baseline: " << report.baseline << "  metric: " << report.metric_name
        << (report.higher_is_better ? " (higher is better)" : " (lower is better)")
        << "  test: Welch t, two-sided\n";
    out << std::left << std::setw(24) << "architecture" << std::setw(30) << "optimizer" << std::right
        << std::setw(10) << report.metric_name << std::setw(9) << "std" << std::setw(10) << "improv%"
        << std::setw(9) << "t" << std::setw(11) << "p" << "     " << std::setw(9) << "epochs" << std::setw(9)
        << "time_s" << '\n';
    out << std::fixed;
    for (const auto& c : report.cells) {
        out << std::left << std::setw(24) << architecture_label(c.architecture) << std::setw(30) << c.optimizer
            << std::right << std::setprecision(4) << std::setw(10) << c.metric.mean << std::setw(9) << c.metric.std;
        if (c.metric_vs_baseline) {
            const auto& m = *c.metric_vs_baseline;
            out << std::setprecision(2) << std::setw(10) << m.improvement_pct << std::setprecision(3) << std::setw(9)
                << m.t << std::scientific << std::setprecision(3) << std::setw(11) << m.p << std::fixed << ' '
                << std::left << std::setw(4) << m.stars << std::right;
        } else {
            out << std::setw(10) << "-" << std::setw(9) << "-" << std::setw(11) << "-" << "     ";
        }
        out << std::setprecision(1) << std::setw(9) << c.epochs.mean;
        if (c.time) {
            out << std::setprecision(2) << std::setw(9) << c.time->mean;
        } else {
            out << std::setw(9) << "-";
        }
        if (c.diverged) out << "  (" << c.diverged << " diverged)";
        out << '\n';
    }
    return out.str();
}

std::size_t merge_curves(const std::filesystem::path& logs_dir, const std::filesystem::path& out_csv) {
    if (!std::filesystem::is_directory(logs_dir)) throw DataError(logs_dir.string() + " is not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(logs_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    if (files.empty()) throw DataError("no .csv logs in " + logs_dir.string());
    std::sort(files.begin(), files.end());

    std::ostringstream out;
    out << "trial,epoch,train_loss,val_loss,lr\n";
    for (const auto& file : files) {
        std::istringstream in(read_file(file, true));
        std::string line;
        std::getline(in, line);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line != "epoch,train_loss,val_loss,lr") throw DataError(file.string() + " is not a training log");
        const std::string stem = file.stem().string();
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            out << stem << ',' << line << '\n';
        }
    }
    write_text(out_csv, out.str());
    return files.size();
}

}  // namespace caadam
