#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "caadam/caadam.h"

namespace fs = std::filesystem;

namespace {

struct NetworkHandle {
    caadam_network* p = nullptr;
    ~NetworkHandle() { caadam_network_destroy(p); }
};
struct OptimizerHandle {
    caadam_optimizer* p = nullptr;
    ~OptimizerHandle() { caadam_optimizer_destroy(p); }
};
struct DatasetHandle {
    caadam_dataset* p = nullptr;
    ~DatasetHandle() { caadam_dataset_destroy(p); }
};

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "caadam_capi";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(CApi, VersionAndStatusNames) {
    EXPECT_STREQ(caadam_version(), "1.0.0");
    EXPECT_STREQ(caadam_status_name(CAADAM_OK), "ok");
    EXPECT_STRNE(caadam_status_name(CAADAM_ERR_DATA), caadam_status_name(CAADAM_ERR_CONFIG));
}

TEST(CApi, NetworkLifecycle) {
    const size_t hidden[] = {64, 32};
    NetworkHandle net;
    ASSERT_EQ(caadam_network_create(8, hidden, 2, 1, 0, 42, &net.p), CAADAM_OK);
    size_t layers = 0;
    ASSERT_EQ(caadam_network_layer_count(net.p, &layers), CAADAM_OK);
    EXPECT_EQ(layers, 3u);
    size_t conn[3];
    ASSERT_EQ(caadam_network_connections(net.p, conn, 3), CAADAM_OK);
    EXPECT_EQ(conn[0], 512u);
    EXPECT_EQ(conn[1], 2048u);
    EXPECT_EQ(conn[2], 32u);
    EXPECT_EQ(caadam_network_connections(net.p, conn, 2), CAADAM_ERR_INVALID_ARGUMENT);

    double x[16] = {};
    double y[2];
    ASSERT_EQ(caadam_network_predict(net.p, x, 2, 8, y, 2), CAADAM_OK);
    EXPECT_EQ(y[0], 0.0);  // zero input, zero biases
    EXPECT_EQ(caadam_network_predict(net.p, x, 2, 7, y, 2), CAADAM_ERR_SHAPE);
    EXPECT_NE(std::string(caadam_last_error()).size(), 0u);

    NetworkHandle bad;
    const size_t zero[] = {0};
    EXPECT_EQ(caadam_network_create(8, zero, 1, 1, 0, 1, &bad.p), CAADAM_ERR_SHAPE);
    EXPECT_EQ(bad.p, nullptr);
    EXPECT_EQ(caadam_network_layer_count(nullptr, &layers), CAADAM_ERR_INVALID_ARGUMENT);
}

TEST(CApi, ScaleTables) {
    const size_t c[] = {512, 2048, 32};
    double s[3];
    ASSERT_EQ(caadam_scale_table(c, 3, "multiplicative", 0.95, s), CAADAM_OK);
    EXPECT_EQ(s[0], 1.0);
    EXPECT_NEAR(s[1], 0.95, 1e-15);
    EXPECT_NEAR(s[2], 1 / 0.95, 1e-15);
    ASSERT_EQ(caadam_scale_table(c, 3, "multiplicative-unsigned", 0.95, s), CAADAM_OK);
    EXPECT_NEAR(s[2], 0.95, 1e-15);
    ASSERT_EQ(caadam_scale_table(c, 3, "depth", 0.95, s), CAADAM_OK);
    EXPECT_NEAR(s[0], std::pow(1.95, 2.0 / 3.0), 1e-15);
    EXPECT_EQ(caadam_scale_table(c, 3, "additive", 1.5, s), CAADAM_ERR_CONFIG);
    EXPECT_EQ(caadam_scale_table(c, 3, "gradient", 0.5, s), CAADAM_ERR_CONFIG);
    EXPECT_EQ(caadam_scale_table(c, 0, "additive", 0.5, s), CAADAM_ERR_STRUCTURE);
}

TEST(CApi, OptimizerCheckpointAndTraining) {
    const size_t hidden[] = {16};
    NetworkHandle net;
    ASSERT_EQ(caadam_network_create(4, hidden, 1, 1, 0, 7, &net.p), CAADAM_OK);
    OptimizerHandle opt;
    EXPECT_EQ(caadam_optimizer_create("{\"algorithm\":\"caadam\"}", net.p, &opt.p), CAADAM_ERR_CONFIG);
    EXPECT_EQ(caadam_optimizer_create("{not json", net.p, &opt.p), CAADAM_ERR_CONFIG);
    ASSERT_EQ(caadam_optimizer_create(R"({"algorithm":"caadam","scaling":"additive","gamma":0.5})", net.p, &opt.p),
              CAADAM_OK);
    double scales[2];
    ASSERT_EQ(caadam_optimizer_scales(opt.p, scales, 2), CAADAM_OK);
    EXPECT_NEAR(scales[0], 0.5, 1e-15);  // 64 connections vs 16
    EXPECT_NEAR(scales[1], 1.5, 1e-15);

    DatasetHandle data;
    ASSERT_EQ(caadam_dataset_synth_regression(300, 4, 0.1, 3, &data.p), CAADAM_OK);
    size_t rows = 0, features = 0;
    ASSERT_EQ(caadam_dataset_shape(data.p, &rows, &features), CAADAM_OK);
    EXPECT_EQ(rows, 300u);
    EXPECT_EQ(features, 4u);

    double rmse = -1;
    size_t epochs = 0;
    const auto log = scratch("train.csv");
    ASSERT_EQ(caadam_train(net.p, opt.p, data.p, R"({"max_epochs":5,"batch_size":32})", 1, log.string().c_str(), &rmse,
                           &epochs),
              CAADAM_OK)
        << caadam_last_error();
    EXPECT_EQ(epochs, 5u);
    EXPECT_GT(rmse, 0.0);
    EXPECT_TRUE(fs::exists(log));
    uint64_t steps = 0;
    ASSERT_EQ(caadam_optimizer_step_count(opt.p, &steps), CAADAM_OK);
    EXPECT_EQ(steps, 5u * 6u);  // 192 training rows at batch 32

    const auto ckpt = scratch("opt.json");
    ASSERT_EQ(caadam_optimizer_save(opt.p, ckpt.string().c_str()), CAADAM_OK);
    OptimizerHandle restored;
    ASSERT_EQ(caadam_optimizer_load(ckpt.string().c_str(), &restored.p), CAADAM_OK);
    uint64_t restored_steps = 0;
    caadam_optimizer_step_count(restored.p, &restored_steps);
    EXPECT_EQ(restored_steps, steps);
    EXPECT_EQ(caadam_optimizer_load("/nonexistent/opt.json", &restored.p), CAADAM_ERR_IO);

    EXPECT_EQ(caadam_train(net.p, opt.p, data.p, R"({"bogus":1})", 1, nullptr, &rmse, &epochs), CAADAM_ERR_CONFIG);
}

TEST(CApi, DivergenceIsNonFinite) {
    NetworkHandle net;
    ASSERT_EQ(caadam_network_create(4, nullptr, 0, 1, 0, 7, &net.p), CAADAM_OK);
    OptimizerHandle opt;
    ASSERT_EQ(caadam_optimizer_create(R"({"algorithm":"sgd","learning_rate":1e8})", net.p, &opt.p), CAADAM_OK);
    DatasetHandle data;
    ASSERT_EQ(caadam_dataset_synth_regression(200, 4, 0.1, 3, &data.p), CAADAM_OK);
    size_t epochs = 0;
    EXPECT_EQ(caadam_train(net.p, opt.p, data.p, R"({"max_epochs":20})", 1, nullptr, nullptr, &epochs),
              CAADAM_ERR_NON_FINITE);
    EXPECT_LT(epochs, 20u);
}

TEST(CApi, DatasetErrors) {
    DatasetHandle data;
    EXPECT_EQ(caadam_dataset_load_csv("/nonexistent.csv", "y", 0, &data.p), CAADAM_ERR_DATA);
    const auto path = scratch("bad.csv");
    std::ofstream(path) << "a,y\n1,oops\n";
    EXPECT_EQ(caadam_dataset_load_csv(path.string().c_str(), "y", 0, &data.p), CAADAM_ERR_DATA);
    EXPECT_NE(std::string(caadam_last_error()).find("row 1"), std::string::npos);
    std::ofstream(path) << "a,y\n1,2\n3,4\n";
    ASSERT_EQ(caadam_dataset_load_csv(path.string().c_str(), "y", 0, &data.p), CAADAM_OK);
}

TEST(CApi, Welch) {
    const double a[] = {1, 2, 3}, b[] = {4, 5, 6};
    double t = 0, p = 0;
    ASSERT_EQ(caadam_welch_t_test(a, 3, b, 3, &t, &p), CAADAM_OK);
    EXPECT_NEAR(t, -3.6742346141747673, 1e-12);
    EXPECT_NEAR(p, 0.021311641128756727, 1e-12);
    EXPECT_EQ(caadam_welch_t_test(a, 1, b, 3, &t, &p), CAADAM_ERR_CONFIG);
}

TEST(CApi, Commands) {
    const auto dir = scratch("cmd");
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto cfg = dir / "cfg.json";
    std::ofstream(cfg) << R"({
        "dataset": {"kind": "synth_regression", "n": 150, "features": 3, "seed": 1},
        "architectures": [[4]],
        "optimizers": [{"algorithm": "adam"}, {"algorithm": "caadam", "scaling": "depth"}],
        "train": {"batch_size": 16, "max_epochs": 3},
        "trials": 2
    })";
    char* summary = nullptr;
    ASSERT_EQ(caadam_cmd_train(cfg.string().c_str(), (dir / "t").string().c_str(), &summary), CAADAM_OK)
        << caadam_last_error();
    ASSERT_NE(summary, nullptr);
    EXPECT_NE(std::string(summary).find("rmse"), std::string::npos);
    caadam_string_free(summary);

    summary = nullptr;
    ASSERT_EQ(caadam_cmd_benchmark(cfg.string().c_str(), (dir / "b").string().c_str(), 0, 2, &summary), CAADAM_OK);
    EXPECT_NE(std::string(summary).find("caadam-depth"), std::string::npos);
    caadam_string_free(summary);

    summary = nullptr;
    ASSERT_EQ(caadam_cmd_report((dir / "b" / "trials.json").string().c_str(), "adam", nullptr, &summary), CAADAM_OK);
    caadam_string_free(summary);
    EXPECT_EQ(caadam_cmd_report((dir / "b" / "trials.json").string().c_str(), "nadam", nullptr, nullptr),
              CAADAM_ERR_CONFIG);

    size_t merged = 0;
    ASSERT_EQ(caadam_cmd_curves((dir / "b" / "logs").string().c_str(), (dir / "c.csv").string().c_str(), &merged),
              CAADAM_OK);
    EXPECT_EQ(merged, 4u);
    EXPECT_EQ(caadam_cmd_train("/nonexistent.json", dir.string().c_str(), nullptr), CAADAM_ERR_CONFIG);
    fs::remove_all(dir);
}
