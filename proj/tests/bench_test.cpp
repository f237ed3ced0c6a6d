#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "caadam/app.hpp"
#include "caadam/bench.hpp"
#include "caadam/error.hpp"

using namespace caadam;
namespace fs = std::filesystem;

namespace {

nlohmann::json small_config() {
    return nlohmann::json::parse(R"({
        "dataset": {"kind": "synth_regression", "n": 200, "features": 4, "noise_std": 0.1, "seed": 3},
        "architectures": [[8], [6, 4]],
        "optimizers": [
            {"algorithm": "adam"},
            {"algorithm": "caadam", "scaling": "multiplicative", "gamma": 0.95},
            {"algorithm": "caadam", "scaling": "depth", "gamma": 0.5}
        ],
        "train": {"batch_size": 32, "max_epochs": 6},
        "trials": 5,
        "base_seed": 10
    })");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TrialResult fake(const std::string& optimizer, std::uint64_t seed, double metric, std::size_t epochs, double time) {
    TrialResult r;
    r.architecture = {64, 32};
    r.optimizer = optimizer;
    r.seed = seed;
    r.metric_name = "rmse";
    r.metric = metric;
    r.epochs_run = epochs;
    r.wall_time_s = time;
    r.stop_reason = StopReason::early_stop;
    return r;
}

class BenchDir : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("caadam_bench_" + std::string(
                                                                  ::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path dir_;
};

}  // namespace

TEST(ExperimentConfig, ParsesAndFillsLearningRate) {
    auto j = small_config();
    j["train"]["initial_lr"] = 0.002;
    const ExperimentConfig cfg = experiment_config_from_json(j);
    EXPECT_EQ(cfg.architectures.size(), 2u);
    EXPECT_EQ(cfg.optimizers[1].label(), "caadam-multiplicative");
    EXPECT_EQ(cfg.optimizers[0].learning_rate, 0.002);
    EXPECT_EQ(cfg.train.max_epochs, 6u);
    EXPECT_EQ(cfg.split, kDefaultSplit);
}

TEST(ExperimentConfig, Rejections) {
    auto j = small_config();
    j["trials"] = 1;
    EXPECT_THROW(experiment_config_from_json(j), ConfigError);
    j = small_config();
    j["optimizers"] = nlohmann::json::parse(R"([{"algorithm":"sgd"}])");
    EXPECT_THROW(experiment_config_from_json(j), ConfigError);
    j = small_config();
    j["optimizers"].push_back(nlohmann::json{{"algorithm", "adam"}});
    EXPECT_THROW(experiment_config_from_json(j), ConfigError);
    j = small_config();
    j["extra"] = 1;
    EXPECT_THROW(experiment_config_from_json(j), ConfigError);
    j = small_config();
    j["dataset"]["kind"] = "mnist";
    EXPECT_THROW(experiment_config_from_json(j), ConfigError);
    j = small_config();
    j["split"] = {0.5, 0.5};
    EXPECT_THROW(experiment_config_from_json(j), ConfigError);
    EXPECT_THROW(load_experiment_config("/nonexistent/config.json"), ConfigError);
}

TEST(TrialSeeds, DistinctStreams) {
    const TrialSeeds s = derive_trial_seeds(1);
    EXPECT_NE(s.split, s.init);
    EXPECT_NE(s.init, s.shuffle);
    EXPECT_EQ(derive_trial_seeds(1).init, s.init);
    EXPECT_NE(derive_trial_seeds(2).init, s.init);
    EXPECT_EQ(architecture_label({64, 32}), "[64,32]");
    EXPECT_EQ(architecture_label({}), "[]");
}

TEST_F(BenchDir, GridCountOrderAndSharedInitialWeights) {
    const ExperimentConfig cfg = experiment_config_from_json(small_config());
    const auto trials = run_experiment(cfg, {1, dir_ / "logs"});
    ASSERT_EQ(trials.size(), 30u);
    for (std::size_t i = 1; i < trials.size(); ++i) {
        const auto& a = trials[i - 1];
        const auto& b = trials[i];
        EXPECT_TRUE(a.cell_id() < b.cell_id() || (a.cell_id() == b.cell_id() && a.seed < b.seed));
    }
    std::map<std::pair<std::string, std::uint64_t>, std::uint64_t> init_by_arch_seed;
    for (const auto& t : trials) {
        EXPECT_GE(t.seed, 10u);
        EXPECT_LT(t.seed, 15u);
        EXPECT_TRUE(std::isfinite(t.metric));
        const auto key = std::make_pair(architecture_label(t.architecture), t.seed);
        const auto [it, inserted] = init_by_arch_seed.emplace(key, t.init_hash);
        if (!inserted) EXPECT_EQ(it->second, t.init_hash) << t.cell_id() << " seed " << t.seed;
    }
    EXPECT_EQ(init_by_arch_seed.size(), 10u);
    std::size_t logs = 0;
    for (const auto& e : fs::directory_iterator(dir_ / "logs")) logs += e.path().extension() == ".csv";
    EXPECT_EQ(logs, 30u);
    EXPECT_TRUE(fs::exists(dir_ / "logs" / "6-4__caadam-depth__seed12.csv"));
}

TEST_F(BenchDir, ParallelMatchesSerialAndFilesAreStable) {
    const ExperimentConfig cfg = experiment_config_from_json(small_config());
    const auto serial = run_experiment(cfg);
    const auto parallel = run_experiment(cfg, {3, std::nullopt});
    write_trials_json(serial, dir_ / "a.json");
    write_trials_json(parallel, dir_ / "b.json");
    EXPECT_EQ(slurp(dir_ / "a.json"), slurp(dir_ / "b.json"));

    write_timings_json(serial, dir_ / "timings.json");
    auto back = read_trials_json(dir_ / "a.json");
    ASSERT_EQ(back.size(), serial.size());
    EXPECT_TRUE(std::isnan(back[0].wall_time_s));
    EXPECT_TRUE(merge_timings(back, dir_ / "timings.json"));
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back[i].metric, serial[i].metric);
        EXPECT_EQ(back[i].init_hash, serial[i].init_hash);
        EXPECT_EQ(back[i].stop_reason, serial[i].stop_reason);
        EXPECT_EQ(back[i].wall_time_s, serial[i].wall_time_s);
    }
    EXPECT_FALSE(merge_timings(back, dir_ / "missing.json"));
}

TEST_F(BenchDir, DivergedTrialsAreRecorded) {
    auto j = small_config();
    j["optimizers"] = nlohmann::json::parse(R"([{"algorithm":"adam"},{"algorithm":"sgd","learning_rate":1e6}])");
    j["architectures"] = nlohmann::json::parse("[[8]]");
    j["trials"] = 2;
    const auto trials = run_experiment(experiment_config_from_json(j));
    std::size_t diverged = 0;
    for (const auto& t : trials) {
        if (t.optimizer == "sgd") {
            EXPECT_EQ(t.stop_reason, StopReason::diverged);
            EXPECT_TRUE(std::isnan(t.metric));
            ++diverged;
        }
    }
    EXPECT_EQ(diverged, 2u);
    write_trials_json(trials, dir_ / "t.json");
    const auto back = read_trials_json(dir_ / "t.json");
    EXPECT_TRUE(std::isnan(back.back().metric));
    const ComparisonReport report = build_report(trials, "adam");
    const auto& sgd = report.cells.back();
    EXPECT_EQ(sgd.optimizer, "sgd");
    EXPECT_EQ(sgd.diverged, 2u);
    EXPECT_FALSE(sgd.metric_vs_baseline.has_value());
}

TEST(Report, ImprovementFormula) {
    std::vector<TrialResult> trials;
    const double adam[] = {0.465, 0.467, 0.466};
    const double ca[] = {0.445, 0.447, 0.446};
    for (int s = 0; s < 3; ++s) {
        trials.push_back(fake("adam", static_cast<std::uint64_t>(s), adam[s], 170, 5.0));
        trials.push_back(fake("caadam-multiplicative", static_cast<std::uint64_t>(s), ca[s], 112, 3.5));
    }
    const ComparisonReport r = build_report(trials, "adam");
    ASSERT_EQ(r.cells.size(), 2u);
    const CellReport& base = r.cells[0];
    const CellReport& cell = r.cells[1];
    EXPECT_TRUE(base.is_baseline);
    EXPECT_EQ(base.metric_vs_baseline->improvement_pct, 0.0);
    EXPECT_EQ(base.metric_vs_baseline->t, 0.0);
    EXPECT_EQ(base.metric_vs_baseline->p, 1.0);
    EXPECT_EQ(base.metric_vs_baseline->stars, "");
    EXPECT_NEAR(cell.metric_vs_baseline->improvement_pct, (0.466 - 0.446) / 0.466 * 100, 1e-9);
    EXPECT_NEAR(cell.metric_vs_baseline->improvement_pct, 4.2918, 1e-4);
    EXPECT_NEAR(cell.epochs_vs_baseline->improvement_pct, (170.0 - 112.0) / 170.0 * 100, 1e-9);
    EXPECT_NEAR(cell.time_vs_baseline->improvement_pct, 30.0, 1e-9);
    EXPECT_EQ(cell.metric_vs_baseline->stars, std::string(significance_stars(cell.metric_vs_baseline->p)));
}

TEST(Report, AccuracyIsHigherIsBetter) {
    std::vector<TrialResult> trials;
    for (int s = 0; s < 2; ++s) {
        auto a = fake("adam", static_cast<std::uint64_t>(s), 0.80 + 0.01 * s, 10, 1);
        auto b = fake("adamw", static_cast<std::uint64_t>(s), 0.84 + 0.01 * s, 10, 1);
        a.metric_name = b.metric_name = "accuracy";
        trials.push_back(a);
        trials.push_back(b);
    }
    const ComparisonReport r = build_report(trials, "adam");
    EXPECT_TRUE(r.higher_is_better);
    EXPECT_NEAR(r.cells[1].metric_vs_baseline->improvement_pct, (0.845 - 0.805) / 0.805 * 100, 1e-9);
}

TEST(Report, AggregatesMatchBruteForce) {
    Rng rng(5);
    std::vector<TrialResult> trials;
    for (const char* opt : {"adam", "nadam", "caadam-additive"}) {
        for (std::uint64_t s = 0; s < 7; ++s) {
            trials.push_back(fake(opt, s, rng.uniform(0.4, 0.5), 50 + rng.below(100), rng.uniform(1, 5)));
        }
    }
    const ComparisonReport r = build_report(trials, "adam");
    for (const CellReport& c : r.cells) {
        std::vector<double> m, e;
        for (const auto& t : trials) {
            if (t.optimizer != c.optimizer) continue;
            m.push_back(t.metric);
            e.push_back(static_cast<double>(t.epochs_run));
        }
        double mm = 0, me = 0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            mm += m[i];
            me += e[i];
        }
        mm /= static_cast<double>(m.size());
        me /= static_cast<double>(e.size());
        double vm = 0;
        for (double v : m) vm += (v - mm) * (v - mm);
        EXPECT_EQ(c.metric.n, 7u);
        EXPECT_NEAR(c.metric.mean, mm, 1e-14);
        EXPECT_NEAR(c.metric.std, std::sqrt(vm / 6.0), 1e-14);
        EXPECT_NEAR(c.epochs.mean, me, 1e-12);
        ASSERT_TRUE(c.time.has_value());
    }
}

TEST(Report, MissingBaselineAndTimes) {
    std::vector<TrialResult> trials = {fake("nadam", 0, 0.4, 10, 1), fake("nadam", 1, 0.5, 10, 1)};
    EXPECT_THROW(build_report(trials, "adam"), ConfigError);
    EXPECT_THROW(build_report({}, "adam"), DataError);
    trials.push_back(fake("adam", 0, 0.4, 10, std::nan("")));
    trials.push_back(fake("adam", 1, 0.45, 10, std::nan("")));
    const ComparisonReport r = build_report(trials, "adam");
    EXPECT_FALSE(r.cells[0].time.has_value());
    EXPECT_TRUE(r.cells[1].time.has_value());
    EXPECT_FALSE(r.cells[1].time_vs_baseline.has_value());
}

TEST_F(BenchDir, ReportFilesAndTable) {
    std::vector<TrialResult> trials;
    for (std::uint64_t s = 0; s < 3; ++s) {
        trials.push_back(fake("adam", s, 0.46 + 0.001 * static_cast<double>(s), 100, 2));
        trials.push_back(fake("caadam-multiplicative", s, 0.44 + 0.002 * static_cast<double>(s), 80, 1.5));
    }
    const ComparisonReport r = build_report(trials, "adam");
    write_report_json(r, dir_ / "report.json");
    write_report_csv(r, dir_ / "report.csv");
    const auto j = nlohmann::json::parse(slurp(dir_ / "report.json"));
    EXPECT_EQ(j.at("baseline"), "adam");
    EXPECT_EQ(j.at("cells").size(), 2u);
    const std::string csv = slurp(dir_ / "report.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
    const std::string table = format_report_table(r);
    EXPECT_NE(table.find("caadam-multiplicative"), std::string::npos);
    EXPECT_NE(table.find("[64,32]"), std::string::npos);
}

TEST_F(BenchDir, CurvesMergeSortedLogs) {
    fs::create_directories(dir_ / "logs");
    std::ofstream(dir_ / "logs" / "b.csv") << "epoch,train_loss,val_loss,lr\n1,0.5,0.6,0.001\n";
    std::ofstream(dir_ / "logs" / "a.csv") << "epoch,train_loss,val_loss,lr\n1,0.4,0.5,0.001\n2,0.3,0.4,0.001\n";
    EXPECT_EQ(merge_curves(dir_ / "logs", dir_ / "curves.csv"), 2u);
    EXPECT_EQ(slurp(dir_ / "curves.csv"),
              "trial,epoch,train_loss,val_loss,lr\na,1,0.4,0.5,0.001\na,2,0.3,0.4,0.001\nb,1,0.5,0.6,0.001\n");
    std::ofstream(dir_ / "logs" / "c.csv") << "nope\n";
    EXPECT_THROW(merge_curves(dir_ / "logs", dir_ / "curves.csv"), DataError);
    EXPECT_THROW(merge_curves(dir_ / "none", dir_ / "curves.csv"), DataError);
}

TEST_F(BenchDir, CommandsWriteTheirArtifacts) {
    auto j = small_config();
    j["architectures"] = nlohmann::json::parse("[[8]]");
    j["trials"] = 2;
    std::ofstream(dir_ / "cfg.json") << j.dump();

    const auto train = run_train_command(dir_ / "cfg.json", dir_ / "train");
    EXPECT_EQ(train.trial.optimizer, "adam");
    EXPECT_EQ(train.trial.seed, 10u);
    for (const char* f : {"train_log.csv", "metrics.json", "optimizer_state.json"})
        EXPECT_TRUE(fs::exists(dir_ / "train" / f)) << f;
    const auto metrics = nlohmann::json::parse(slurp(dir_ / "train" / "metrics.json"));
    EXPECT_EQ(metrics.at("metric_name"), "rmse");
    EXPECT_EQ(Optimizer::load(dir_ / "train" / "optimizer_state.json").steps(), train.log.epochs_run * 4);

    const auto bench = run_benchmark_command(dir_ / "cfg.json", dir_ / "bench", std::nullopt, 2);
    EXPECT_EQ(bench.trials.size(), 6u);
    EXPECT_FALSE(bench.all_diverged);
    for (const char* f : {"trials.json", "timings.json", "report.json", "report.csv"})
        EXPECT_TRUE(fs::exists(dir_ / "bench" / f)) << f;

    const auto report = run_report_command(dir_ / "bench" / "trials.json", "adam", dir_ / "rep");
    ASSERT_EQ(report.cells.size(), 3u);
    EXPECT_TRUE(report.cells[0].time.has_value());
    EXPECT_TRUE(fs::exists(dir_ / "rep" / "report.csv"));
    EXPECT_THROW(run_report_command(dir_ / "bench" / "trials.json", "rmsprop", std::nullopt), ConfigError);
    EXPECT_THROW(run_benchmark_command(dir_ / "cfg.json", dir_ / "x", std::size_t{1}, 1), ConfigError);
}
