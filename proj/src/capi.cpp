#include "caadam/caadam.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <sstream>
#include <string>

#include "caadam/app.hpp"
#include "caadam/error.hpp"

struct caadam_network {
    caadam::Network net;
};

struct caadam_optimizer {
    caadam::Optimizer opt;
};

struct caadam_dataset {
    caadam::Dataset data;
};

namespace {

thread_local std::string g_last_error;

caadam_status fail(caadam_status status, std::string message) {
    g_last_error = std::move(message);
    return status;
}

// Runs `fn`, translating library exceptions into status codes.
template <class Fn>
caadam_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const caadam::ConfigError& e) {
        return fail(CAADAM_ERR_CONFIG, e.what());
    } catch (const caadam::DataError& e) {
        return fail(CAADAM_ERR_DATA, e.what());
    } catch (const caadam::ShapeError& e) {
        return fail(CAADAM_ERR_SHAPE, e.what());
    } catch (const caadam::NonFiniteError& e) {
        return fail(CAADAM_ERR_NON_FINITE, e.what());
    } catch (const caadam::StructuralError& e) {
        return fail(CAADAM_ERR_STRUCTURE, e.what());
    } catch (const caadam::IoError& e) {
        return fail(CAADAM_ERR_IO, e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(CAADAM_ERR_IO, e.what());
    } catch (const std::bad_alloc&) {
        return fail(CAADAM_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(CAADAM_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(CAADAM_ERR_INTERNAL, "unknown error");
    }
}

caadam_status null_argument(const char* name) {
    return fail(CAADAM_ERR_INVALID_ARGUMENT, std::string(name) + " must not be NULL");
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void set_summary(char** summary, const std::string& text) {
    if (summary) *summary = dup_string(text);
}

}  // namespace

extern "C" {

const char* caadam_version(void) { return "1.0.0"; }

const char* caadam_status_name(caadam_status status) {
    switch (status) {
        case CAADAM_OK: return "ok";
        case CAADAM_ERR_CONFIG: return "config error";
        case CAADAM_ERR_DATA: return "data error";
        case CAADAM_ERR_ALL_DIVERGED: return "all trials diverged";
        case CAADAM_ERR_SHAPE: return "shape error";
        case CAADAM_ERR_NON_FINITE: return "non-finite value";
        case CAADAM_ERR_STRUCTURE: return "structural error";
        case CAADAM_ERR_IO: return "i/o error";
        case CAADAM_ERR_INVALID_ARGUMENT: return "invalid argument";
        case CAADAM_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* caadam_last_error(void) { return g_last_error.c_str(); }

void caadam_string_free(char* s) { std::free(s); }

caadam_status caadam_network_create(size_t input_dim, const size_t* hidden_sizes, size_t num_hidden,
                                    size_t output_dim, int classification, uint64_t seed, caadam_network** out) {
    if (!out) return null_argument("out");
    if (num_hidden > 0 && !hidden_sizes) return null_argument("hidden_sizes");
    return guarded([&] {
        caadam::NetworkSpec spec;
        spec.input_dim = input_dim;
        spec.hidden_sizes.assign(hidden_sizes, hidden_sizes + num_hidden);
        spec.output_dim = output_dim;
        spec.head = classification ? caadam::OutputHead::softmax_classification
                                   : caadam::OutputHead::linear_regression;
        caadam::Rng rng(seed);
        *out = new caadam_network{caadam::Network(spec, rng)};
        return CAADAM_OK;
    });
}

void caadam_network_destroy(caadam_network* net) { delete net; }

caadam_status caadam_network_layer_count(const caadam_network* net, size_t* out) {
    if (!net) return null_argument("net");
    if (!out) return null_argument("out");
    *out = net->net.num_layers();
    return CAADAM_OK;
}

caadam_status caadam_network_connections(const caadam_network* net, size_t* out, size_t len) {
    if (!net) return null_argument("net");
    if (!out) return null_argument("out");
    if (len < net->net.num_layers()) return fail(CAADAM_ERR_INVALID_ARGUMENT, "output buffer too small");
    for (size_t i = 0; i < net->net.num_layers(); ++i) out[i] = net->net.layers()[i].weights.size();
    return CAADAM_OK;
}

caadam_status caadam_network_predict(const caadam_network* net, const double* x, size_t rows, size_t cols,
                                     double* out, size_t out_len) {
    if (!net) return null_argument("net");
    if (!x) return null_argument("x");
    if (!out) return null_argument("out");
    return guarded([&] {
        caadam::Matrix batch(rows, cols, std::vector<double>(x, x + rows * cols));
        const caadam::Matrix pred = caadam::predict(net->net, batch);
        if (out_len < pred.size()) return fail(CAADAM_ERR_INVALID_ARGUMENT, "output buffer too small");
        std::copy(pred.values().begin(), pred.values().end(), out);
        return CAADAM_OK;
    });
}

caadam_status caadam_scale_table(const size_t* connections, size_t num_layers, const char* strategy, double gamma,
                                 double* out) {
    if (!connections) return null_argument("connections");
    if (!strategy) return null_argument("strategy");
    if (!out) return null_argument("out");
    return guarded([&] {
        caadam::ScalingStrategy s;
        s.gamma = gamma;
        const std::string name = strategy;
        if (name == "multiplicative-unsigned") {
            s.kind = caadam::ScalingKind::multiplicative;
            s.sigma_mode = caadam::SigmaMode::unsigned_distance;
        } else if (auto kind = caadam::parse_scaling_kind(name)) {
            s.kind = *kind;
        } else {
            return fail(CAADAM_ERR_CONFIG, "unknown scaling strategy '" + name + "'");
        }
        const auto summary = caadam::summarize(std::span<const size_t>(connections, num_layers));
        const auto table = caadam::compute_scales(summary, s);
        std::copy(table.begin(), table.end(), out);
        return CAADAM_OK;
    });
}

caadam_status caadam_dataset_load_csv(const char* path, const char* target_column, int classification,
                                      caadam_dataset** out) {
    if (!path) return null_argument("path");
    if (!target_column) return null_argument("target_column");
    if (!out) return null_argument("out");
    return guarded([&] {
        caadam::CsvSchema schema{target_column,
                                 classification ? caadam::Task::classification : caadam::Task::regression};
        *out = new caadam_dataset{caadam::load_csv(path, schema)};
        return CAADAM_OK;
    });
}

caadam_status caadam_dataset_synth_regression(size_t n, size_t m, double noise_std, uint64_t seed,
                                              caadam_dataset** out) {
    if (!out) return null_argument("out");
    return guarded([&] {
        *out = new caadam_dataset{caadam::synth_regression(n, m, noise_std, seed)};
        return CAADAM_OK;
    });
}

caadam_status caadam_dataset_shape(const caadam_dataset* data, size_t* rows, size_t* features) {
    if (!data) return null_argument("data");
    if (rows) *rows = data->data.size();
    if (features) *features = data->data.num_features();
    return CAADAM_OK;
}

void caadam_dataset_destroy(caadam_dataset* data) { delete data; }

caadam_status caadam_optimizer_create(const char* config_json, const caadam_network* net, caadam_optimizer** out) {
    if (!config_json) return null_argument("config_json");
    if (!net) return null_argument("net");
    if (!out) return null_argument("out");
    return guarded([&] {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(config_json);
        } catch (const nlohmann::json::exception& e) {
            return fail(CAADAM_ERR_CONFIG, std::string("cannot parse optimizer config: ") + e.what());
        }
        *out = new caadam_optimizer{caadam::Optimizer(caadam::optimizer_config_from_json(j), net->net)};
        return CAADAM_OK;
    });
}

void caadam_optimizer_destroy(caadam_optimizer* opt) { delete opt; }

caadam_status caadam_optimizer_step_count(const caadam_optimizer* opt, uint64_t* out) {
    if (!opt) return null_argument("opt");
    if (!out) return null_argument("out");
    *out = opt->opt.steps();
    return CAADAM_OK;
}

caadam_status caadam_optimizer_scales(const caadam_optimizer* opt, double* out, size_t len) {
    if (!opt) return null_argument("opt");
    if (!out) return null_argument("out");
    const auto& scales = opt->opt.scales();
    if (len < scales.size()) return fail(CAADAM_ERR_INVALID_ARGUMENT, "output buffer too small");
    std::copy(scales.begin(), scales.end(), out);
    return CAADAM_OK;
}

caadam_status caadam_optimizer_save(const caadam_optimizer* opt, const char* path) {
    if (!opt) return null_argument("opt");
    if (!path) return null_argument("path");
    return guarded([&] {
        opt->opt.save(path);
        return CAADAM_OK;
    });
}

caadam_status caadam_optimizer_load(const char* path, caadam_optimizer** out) {
    if (!path) return null_argument("path");
    if (!out) return null_argument("out");
    return guarded([&] {
        *out = new caadam_optimizer{caadam::Optimizer::load(path)};
        return CAADAM_OK;
    });
}

caadam_status caadam_train(caadam_network* net, caadam_optimizer* opt, const caadam_dataset* data,
                           const char* train_json, uint64_t split_seed, const char* log_csv_path,
                           double* test_metric, size_t* epochs_run) {
    if (!net) return null_argument("net");
    if (!opt) return null_argument("opt");
    if (!data) return null_argument("data");
    return guarded([&] {
        caadam::TrainConfig cfg;
        cfg.initial_lr = opt->opt.config().learning_rate;
        if (train_json) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(train_json);
            } catch (const nlohmann::json::exception& e) {
                return fail(CAADAM_ERR_CONFIG, std::string("cannot parse train config: ") + e.what());
            }
            cfg = caadam::train_config_from_json(j, cfg);
        }
        const auto parts = caadam::split_standardize(data->data, caadam::kDefaultSplit, split_seed);
        const auto log = caadam::train(net->net, opt->opt, parts, cfg);
        if (log_csv_path) caadam::write_train_log_csv(log, log_csv_path);
        if (epochs_run) *epochs_run = log.epochs_run;
        if (log.stop_reason == caadam::StopReason::diverged) {
            return fail(CAADAM_ERR_NON_FINITE, "training diverged: " + log.diagnostics);
        }
        if (test_metric) *test_metric = caadam::evaluate(net->net, parts.test);
        return CAADAM_OK;
    });
}

caadam_status caadam_welch_t_test(const double* a, size_t na, const double* b, size_t nb, double* t, double* p) {
    if (!a || !b) return null_argument("samples");
    return guarded([&] {
        const auto r = caadam::welch_t_test(std::span<const double>(a, na), std::span<const double>(b, nb));
        if (t) *t = r.t;
        if (p) *p = r.p;
        return CAADAM_OK;
    });
}

caadam_status caadam_cmd_train(const char* config_path, const char* out_dir, char** summary) {
    if (!config_path) return null_argument("config_path");
    if (!out_dir) return null_argument("out_dir");
    return guarded([&] {
        const auto result = caadam::run_train_command(config_path, out_dir);
        std::ostringstream os;
        const auto& r = result.trial;
        os << "architecture " << caadam::architecture_label(r.architecture) << ", optimizer " << r.optimizer
           << ", seed " << r.seed << '\n'
           << "stop: " << caadam::to_string(r.stop_reason) << " after " << r.epochs_run << " epochs ("
           << result.log.wall_time_s << " s)\n"
           << r.metric_name << " (test): " << r.metric << '\n';
        set_summary(summary, os.str());
        if (r.stop_reason == caadam::StopReason::diverged) {
            return fail(CAADAM_ERR_ALL_DIVERGED, "training diverged: " + result.log.diagnostics);
        }
        return CAADAM_OK;
    });
}

caadam_status caadam_cmd_benchmark(const char* config_path, const char* out_dir, long trials_override,
                                   size_t parallel, char** summary) {
    if (!config_path) return null_argument("config_path");
    if (!out_dir) return null_argument("out_dir");
    return guarded([&] {
        std::optional<std::size_t> trials;
        if (trials_override > 0) trials = static_cast<std::size_t>(trials_override);
        const auto result = caadam::run_benchmark_command(config_path, out_dir, trials, parallel == 0 ? 1 : parallel);
        set_summary(summary, caadam::format_report_table(result.report));
        if (result.all_diverged) return fail(CAADAM_ERR_ALL_DIVERGED, "every trial diverged");
        return CAADAM_OK;
    });
}

caadam_status caadam_cmd_report(const char* trials_path, const char* baseline, const char* out_dir, char** summary) {
    if (!trials_path) return null_argument("trials_path");
    return guarded([&] {
        std::optional<std::filesystem::path> dir;
        if (out_dir) dir = out_dir;
        const auto report = caadam::run_report_command(trials_path, baseline ? baseline : "adam", dir);
        set_summary(summary, caadam::format_report_table(report));
        return CAADAM_OK;
    });
}

caadam_status caadam_cmd_curves(const char* logs_dir, const char* out_csv, size_t* files_merged) {
    if (!logs_dir) return null_argument("logs_dir");
    if (!out_csv) return null_argument("out_csv");
    return guarded([&] {
        const std::size_t n = caadam::merge_curves(logs_dir, out_csv);
        if (files_merged) *files_merged = n;
        return CAADAM_OK;
    });
}

}  // extern "C"
