#pragma once

#include <filesystem>
#include <istream>
#include <vector>

#include "uabs/config.hpp"
#include "uabs/env.hpp"

namespace uabs {

/// Read a mobility trace in the CSV format `gue_id,t,x,y` (header required,
/// rows sorted by (gue_id, t), per-GUE timestamps contiguous from the first).
/// The returned pattern plays positions back verbatim; a GUE is active exactly
/// on the recorded steps. Malformed rows, ordering violations and out-of-area
/// positions raise ParseError with the offending line number.
TrafficPattern ingest_trace(std::istream& in, const AreaSpec& area, double p_msg);
TrafficPattern ingest_trace_file(const std::filesystem::path& path, const AreaSpec& area,
                                 double p_msg);

void write_trace(std::ostream& out, const TrafficPattern& traffic);

/// Task manifest: a flat key-value file describing one episodic task (area,
/// altitude, UABS start/speed, p_msg, horizon) plus either waypoint GUE specs
/// (`gue<k>_path/speed/start`) or a `trace` key pointing at a trace CSV
/// relative to the manifest.
TaskConfig read_task_manifest(const std::filesystem::path& path);
void write_task_manifest(const std::filesystem::path& path, const TaskConfig& task);

/// All `*.task` manifests in a directory, sorted by filename. Throws if fewer
/// than `count` are present; reads exactly `count`.
std::vector<TaskConfig> load_task_manifests(const std::filesystem::path& dir, std::size_t count);

}  // namespace uabs
