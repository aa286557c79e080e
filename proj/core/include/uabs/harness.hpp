#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uabs/config.hpp"
#include "uabs/env.hpp"

namespace uabs {

inline constexpr char kVersionString[] = "1.0.0";

struct MetricsRow {
    Method method = Method::conventional;
    std::uint64_t seed = 0;
    int task_index = 0;
    double mean_packets = 0.0;  ///< mean of per-episode packet totals over the N episodes
    double std_packets = 0.0;   ///< population std of the same totals
};

struct MetricsTable {
    std::map<std::string, std::string> metadata;
    std::vector<MetricsRow> rows;  ///< deterministic (method, seed, task) order
};

/// Continual experiment over a fixed task sequence: every method and seed
/// walks the same K tasks. Conventional RL re-initializes per task, transfer
/// carries the previous task's final parameters, CoMPS carries the
/// meta-learned initialization and archive. Environment and action streams
/// are derived from (seed, task, episode) only, so at task 0 all methods see
/// bit-identical episodes and later differences are due to learning strategy.
MetricsTable run_continual(const RunConfig& cfg, const std::vector<TaskConfig>& tasks);

/// The alternating toy sequence: clockwise task at even indices,
/// counterclockwise at odd, with the config's altitude, horizon, speeds and
/// p_msg applied.
std::vector<TaskConfig> make_toy_sequence(const RunConfig& cfg);

/// K synthetic urban tasks drawn from the generator.
std::vector<TaskConfig> generate_urban_tasks(const RunConfig& cfg, std::uint64_t gen_seed);

MetricsTable run_toy(const RunConfig& cfg);

/// Urban run; tasks come from a directory of manifests when given, otherwise
/// from the synthetic generator seeded with `gen_seed`.
MetricsTable run_urban(const RunConfig& cfg, const std::optional<std::filesystem::path>& traces_dir,
                       std::uint64_t gen_seed);

enum class MetricsFormat { csv, json };

/// Write a metrics table. CSV carries the metadata as leading `# key=value`
/// lines before the `method,seed,task_index,mean_packets,std_packets` header;
/// JSON nests the same content. Throws on an empty table.
void export_metrics(const MetricsTable& table, const std::filesystem::path& path,
                    MetricsFormat format);

MetricsTable read_metrics_csv(const std::filesystem::path& path);

struct SummaryRow {
    Method method = Method::conventional;
    int task_index = 0;
    double mean_packets = 0.0;  ///< mean over seeds of the per-seed means
    double std_packets = 0.0;   ///< population std over seeds
};

/// Aggregate across seeds, one row per (method, task index).
std::vector<SummaryRow> summarize(const MetricsTable& table);

void export_summary(const std::vector<SummaryRow>& rows, const MetricsTable& source,
                    const std::filesystem::path& path, MetricsFormat format);

}  // namespace uabs
