// caadam command-line front end. Talks to the library exclusively through the
// C interface.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "caadam/caadam.h"

namespace {

// Exit codes: 0 success, 1 config error, 2 data error, 3 all trials diverged.
int exit_code(caadam_status status) {
    switch (status) {
        case CAADAM_OK: return 0;
        case CAADAM_ERR_DATA: return 2;
        case CAADAM_ERR_ALL_DIVERGED: return 3;
        default: return 1;
    }
}

int finish(caadam_status status, char*& summary) {
    if (summary) {
        std::fputs(summary, stdout);
        caadam_string_free(summary);
        summary = nullptr;
    }
    if (status != CAADAM_OK) {
        std::fprintf(stderr, "caadam: %s: %s\n", caadam_status_name(status), caadam_last_error());
    }
    return exit_code(status);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Connection-aware Adam optimizers: training and benchmarking"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(caadam_version()));

    std::string config;
    std::string out_dir;

    auto* train = app.add_subcommand("train", "Single training run; writes train_log.csv and metrics.json");
    train->add_option("--config", config, "Experiment JSON")->required()->check(CLI::ExistingFile);
    train->add_option("--out", out_dir, "Output directory")->required();

    long trials = 0;
    std::size_t parallel = 1;
    auto* bench = app.add_subcommand("benchmark", "Repeated trials over the full grid with a report against adam");
    bench->add_option("--config", config, "Experiment JSON")->required()->check(CLI::ExistingFile);
    bench->add_option("--out", out_dir, "Output directory")->required();
    bench->add_option("--trials", trials, "Override the trials per cell")->check(CLI::PositiveNumber);
    bench->add_option("--parallel", parallel, "Concurrent trials")->check(CLI::PositiveNumber);

    std::string trials_path;
    std::string baseline = "adam";
    std::string report_out;
    auto* report = app.add_subcommand("report", "Rebuild the comparison report from a trials file");
    report->add_option("--trials", trials_path, "trials.json from a benchmark run")->required();
    report->add_option("--baseline", baseline, "Baseline optimizer label")->capture_default_str();
    report->add_option("--out", report_out, "Directory for report.json / report.csv");

    std::string logs_dir;
    std::string curves_out;
    auto* curves = app.add_subcommand("curves", "Merge per-trial loss curves into one CSV");
    curves->add_option("--logs", logs_dir, "Directory of per-trial training logs")->required();
    curves->add_option("--out", curves_out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    char* summary = nullptr;
    caadam_status status;
    if (*train) {
        status = caadam_cmd_train(config.c_str(), out_dir.c_str(), &summary);
        return finish(status, summary);
    }
    if (*bench) {
        status = caadam_cmd_benchmark(config.c_str(), out_dir.c_str(), trials, parallel, &summary);
        return finish(status, summary);
    }
    if (*report) {
        const char* out = report_out.empty() ? nullptr : report_out.c_str();
        status = caadam_cmd_report(trials_path.c_str(), baseline.c_str(), out, &summary);
        return finish(status, summary);
    }
    std::size_t merged = 0;
    status = caadam_cmd_curves(logs_dir.c_str(), curves_out.c_str(), &merged);
    if (status == CAADAM_OK) std::printf("merged %zu training logs into %s\n", merged, curves_out.c_str());
    return finish(status, summary);
}
