// uabs-sim: command-line driver for the continual meta-RL experiments.
//
// Subcommands:
//   toy        alternating clockwise/counterclockwise perimeter tasks
//   urban      synthetic or trace-driven city-scale tasks
//   gen-tasks  write a directory of synthetic task manifests
//   summarize  aggregate a metrics CSV across seeds

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "uabs/config.hpp"
#include "uabs/harness.hpp"
#include "uabs/task_io.hpp"

namespace {

uabs::MetricsFormat parse_format(const std::string& name) {
    if (name == "csv") return uabs::MetricsFormat::csv;
    if (name == "json") return uabs::MetricsFormat::json;
    throw CLI::ValidationError("--format must be csv or json");
}

uabs::RunConfig load_config(uabs::RunConfig cfg, const std::string& config_file) {
    if (!config_file.empty()) {
        uabs::apply_config_file(cfg, config_file);
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"UABS trajectory optimization: conventional RL, transfer RL and CoMPS"};
    app.require_subcommand(1);

    std::string config_file;
    std::string out_file = "metrics.csv";
    std::string format_name = "csv";

    auto* toy = app.add_subcommand("toy", "Run the alternating-perimeter toy scenario");
    toy->add_option("--config", config_file, "Config file (flat key = value)");
    toy->add_option("--out", out_file, "Output metrics file");
    toy->add_option("--format", format_name, "Output format: csv or json");

    std::string traces_dir;
    std::uint64_t gen_seed = 0;
    auto* urban = app.add_subcommand("urban", "Run the urban scenario");
    urban->add_option("--config", config_file, "Config file (flat key = value)");
    auto* traces_opt = urban->add_option("--traces", traces_dir, "Directory of task manifests");
    auto* gen_opt = urban->add_option("--gen-seed", gen_seed, "Task generator seed");
    traces_opt->excludes(gen_opt);
    urban->add_option("--out", out_file, "Output metrics file");
    urban->add_option("--format", format_name, "Output format: csv or json");

    std::string tasks_dir;
    int gen_count = 50;
    std::uint64_t tasks_seed = 0;
    auto* gen_tasks = app.add_subcommand("gen-tasks", "Generate synthetic urban task manifests");
    gen_tasks->add_option("--out", tasks_dir, "Output directory")->required();
    gen_tasks->add_option("--k", gen_count, "Number of tasks");
    gen_tasks->add_option("--seed", tasks_seed, "Generator seed");
    gen_tasks->add_option("--config", config_file, "Config file (flat key = value)");

    std::string summarize_in;
    auto* summarize_cmd = app.add_subcommand("summarize", "Aggregate a metrics CSV across seeds");
    summarize_cmd->add_option("input", summarize_in, "Metrics CSV produced by toy/urban")->required();
    summarize_cmd->add_option("--out", out_file, "Output summary file");
    summarize_cmd->add_option("--format", format_name, "Output format: csv or json");

    CLI11_PARSE(app, argc, argv);

    try {
        const uabs::MetricsFormat format = parse_format(format_name);

        if (toy->parsed()) {
            const auto cfg = load_config(uabs::toy_config(), config_file);
            const auto table = uabs::run_toy(cfg);
            uabs::export_metrics(table, out_file, format);
            std::cout << "wrote " << table.rows.size() << " rows to " << out_file << '\n';
        } else if (urban->parsed()) {
            const auto cfg = load_config(uabs::urban_config(), config_file);
            std::optional<std::filesystem::path> traces;
            if (!traces_dir.empty()) traces = traces_dir;
            const auto table = uabs::run_urban(cfg, traces, gen_seed);
            uabs::export_metrics(table, out_file, format);
            std::cout << "wrote " << table.rows.size() << " rows to " << out_file << '\n';
        } else if (gen_tasks->parsed()) {
            auto cfg = load_config(uabs::urban_config(), config_file);
            cfg.tasks = gen_count;
            const auto tasks = uabs::generate_urban_tasks(cfg, tasks_seed);
            std::filesystem::create_directories(tasks_dir);
            for (std::size_t i = 0; i < tasks.size(); ++i) {
                char name[32];
                std::snprintf(name, sizeof(name), "task_%04zu.task", i);
                uabs::write_task_manifest(std::filesystem::path(tasks_dir) / name, tasks[i]);
            }
            std::cout << "wrote " << tasks.size() << " manifests to " << tasks_dir << '\n';
        } else if (summarize_cmd->parsed()) {
            const auto table = uabs::read_metrics_csv(summarize_in);
            const auto rows = uabs::summarize(table);
            uabs::export_summary(rows, table, out_file, format);
            std::cout << "wrote " << rows.size() << " summary rows to " << out_file << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
