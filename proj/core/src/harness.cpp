#include "uabs/harness.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "uabs/comps.hpp"
#include "uabs/task_io.hpp"

namespace uabs {

namespace {

std::string format_double(double v) {
    char buf[32];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

std::string iso_utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::map<std::string, std::string> build_metadata(const RunConfig& cfg) {
    std::map<std::string, std::string> md;
    std::istringstream canonical(canonical_config(cfg));
    std::string line;
    while (std::getline(canonical, line)) {
        const auto eq = line.find('=');
        md[line.substr(0, eq)] = line.substr(eq + 1);
    }
    md["config_hash"] = config_hash(cfg);
    md["version"] = kVersionString;
    md["generated_at"] = iso_utc_now();
    return md;
}

struct EpisodeStats {
    double mean = 0.0;
    double stddev = 0.0;
};

EpisodeStats reward_stats(const std::vector<int>& rewards) {
    EpisodeStats s;
    for (const int r : rewards) s.mean += r;
    s.mean /= static_cast<double>(rewards.size());
    double sq = 0.0;
    for (const int r : rewards) sq += (r - s.mean) * (r - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(rewards.size()));
    return s;
}

// One (method, seed) chain over the whole task sequence.
void run_chain(const RunConfig& cfg, const std::vector<TaskConfig>& tasks, Method method,
               std::uint64_t seed, MetricsRow* out) {
    const PolicyArch arch = cfg.arch();

    auto fresh_init = [&](int task_index) {
        Rng rng(derive_key(seed, "init", static_cast<std::uint64_t>(task_index)));
        return init_params(arch, rng);
    };

    PolicyParams carried;  // transfer
    MetaState meta;        // comps
    if (method == Method::comps) meta.theta0 = fresh_init(0);

    for (int i = 0; i < cfg.tasks; ++i) {
        Simulator sim(tasks[static_cast<std::size_t>(i)], cfg.channel, cfg.reward);
        const std::uint64_t env_stream = derive_key(seed, "env", static_cast<std::uint64_t>(i));
        const std::uint64_t act_stream = derive_key(seed, "act", static_cast<std::uint64_t>(i));

        std::vector<int> rewards;
        switch (method) {
            case Method::conventional: {
                rewards = train_task(fresh_init(i), sim, cfg.rl, cfg.encoder, env_stream,
                                     act_stream)
                              .episode_rewards;
                break;
            }
            case Method::transfer: {
                TrainResult res = train_task(i == 0 ? fresh_init(0) : carried, sim, cfg.rl,
                                             cfg.encoder, env_stream, act_stream);
                carried = std::move(res.theta_star);
                rewards = std::move(res.episode_rewards);
                break;
            }
            case Method::comps: {
                Rng meta_rng(derive_key(seed, "meta", static_cast<std::uint64_t>(i)));
                rewards = run_comps_step(meta, sim, cfg.rl, cfg.meta, cfg.encoder, env_stream,
                                         act_stream, meta_rng);
                break;
            }
        }

        // Each task's simulator serves exactly its own RL phase: one reset plus
        // horizon steps per episode. CoMPS meta-updates run after this point and
        // must not move the counter.
        const std::uint64_t expected_calls =
            static_cast<std::uint64_t>(cfg.rl.episodes) *
            (static_cast<std::uint64_t>(tasks[static_cast<std::size_t>(i)].horizon) + 1);
        if (sim.env_calls() != expected_calls) {
            throw std::logic_error("run_continual: unexpected simulator call count for task " +
                                   std::to_string(i));
        }

        const EpisodeStats stats = reward_stats(rewards);
        out[i] = MetricsRow{method, seed, i, stats.mean, stats.stddev};
    }
}

}  // namespace

MetricsTable run_continual(const RunConfig& cfg, const std::vector<TaskConfig>& tasks) {
    cfg.validate();
    if (std::cmp_not_equal(tasks.size(), cfg.tasks)) {
        throw std::invalid_argument("run_continual: task sequence length must equal k");
    }
    for (const TaskConfig& t : tasks) t.validate();

    MetricsTable table;
    table.metadata = build_metadata(cfg);
    table.rows.resize(cfg.methods.size() * cfg.seeds.size() * static_cast<std::size_t>(cfg.tasks));

    struct Job {
        Method method;
        std::uint64_t seed;
        std::size_t row_offset;
    };
    std::vector<Job> jobs;
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
            jobs.push_back({cfg.methods[m], cfg.seeds[s],
                            (m * cfg.seeds.size() + s) * static_cast<std::size_t>(cfg.tasks)});
        }
    }

    const unsigned hw = std::thread::hardware_concurrency();
    const std::size_t n_workers =
        std::min<std::size_t>(jobs.size(),
                              cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                              : (hw > 0 ? hw : 1));

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs.size()) return;
            try {
                run_chain(cfg, tasks, jobs[j].method, jobs[j].seed,
                          table.rows.data() + jobs[j].row_offset);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return table;
}

std::vector<TaskConfig> make_toy_sequence(const RunConfig& cfg) {
    auto [cw, ccw] = make_toy_tasks();
    for (TaskConfig* task : {&cw, &ccw}) {
        task->area.uabs_altitude = cfg.altitude;
        task->horizon = cfg.horizon;
        task->uabs_speed = cfg.uabs_speed_mps * cfg.t_step_s;
        task->traffic.p_msg = cfg.p_msg;
        for (GueSpec& g : task->traffic.gues) g.speed = cfg.gue_speed_mps * cfg.t_step_s;
    }
    std::vector<TaskConfig> tasks;
    tasks.reserve(static_cast<std::size_t>(cfg.tasks));
    for (int i = 0; i < cfg.tasks; ++i) tasks.push_back(i % 2 == 0 ? cw : ccw);
    return tasks;
}

std::vector<TaskConfig> generate_urban_tasks(const RunConfig& cfg, std::uint64_t gen_seed) {
    Rng rng(derive_key(gen_seed, "gen-tasks"));
    std::vector<TaskConfig> tasks;
    tasks.reserve(static_cast<std::size_t>(cfg.tasks));
    for (int i = 0; i < cfg.tasks; ++i) {
        tasks.push_back(gen_random_task(cfg.area(), cfg.g_min, cfg.g_max,
                                        cfg.gue_speed_mps * cfg.t_step_s, cfg.speed_jitter,
                                        cfg.horizon, cfg.uabs_speed_mps * cfg.t_step_s,
                                        cfg.p_msg, rng));
    }
    return tasks;
}

MetricsTable run_toy(const RunConfig& cfg) {
    return run_continual(cfg, make_toy_sequence(cfg));
}

MetricsTable run_urban(const RunConfig& cfg, const std::optional<std::filesystem::path>& traces_dir,
                       std::uint64_t gen_seed) {
    const auto tasks = traces_dir
                           ? load_task_manifests(*traces_dir, static_cast<std::size_t>(cfg.tasks))
                           : generate_urban_tasks(cfg, gen_seed);
    return run_continual(cfg, tasks);
}

namespace {

void write_metrics_csv(std::ostream& out, const MetricsTable& table) {
    for (const auto& [key, value] : table.metadata) {
        out << "# " << key << '=' << value << '\n';
    }
    out << "method,seed,task_index,mean_packets,std_packets\n";
    for (const MetricsRow& row : table.rows) {
        out << method_name(row.method) << ',' << row.seed << ',' << row.task_index << ','
            << format_double(row.mean_packets) << ',' << format_double(row.std_packets) << '\n';
    }
}

void write_metrics_json(std::ostream& out, const MetricsTable& table) {
    nlohmann::json doc;
    doc["metadata"] = table.metadata;
    doc["rows"] = nlohmann::json::array();
    for (const MetricsRow& row : table.rows) {
        doc["rows"].push_back({{"method", method_name(row.method)},
                               {"seed", row.seed},
                               {"task_index", row.task_index},
                               {"mean_packets", row.mean_packets},
                               {"std_packets", row.std_packets}});
    }
    out << doc.dump(2) << '\n';
}

}  // namespace

void export_metrics(const MetricsTable& table, const std::filesystem::path& path,
                    MetricsFormat format) {
    if (table.rows.empty()) throw std::invalid_argument("export_metrics: empty table");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("export_metrics: cannot open " + path.string());
    if (format == MetricsFormat::csv) {
        write_metrics_csv(out, table);
    } else {
        write_metrics_json(out, table);
    }
    if (!out) throw std::runtime_error("export_metrics: write failed for " + path.string());
}

MetricsTable read_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_metrics_csv: cannot open " + path.string());

    MetricsTable table;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line.starts_with("# ")) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ParseError(lineno, "bad metadata line");
            table.metadata[line.substr(2, eq - 2)] = line.substr(eq + 1);
            continue;
        }
        if (!header_seen) {
            if (line != "method,seed,task_index,mean_packets,std_packets") {
                throw ParseError(lineno, "unexpected header `" + line + "`");
            }
            header_seen = true;
            continue;
        }
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 5) throw ParseError(lineno, "expected 5 fields");
        MetricsRow row;
        try {
            row.method = method_from_name(fields[0]);
            row.seed = std::stoull(fields[1]);
            row.task_index = std::stoi(fields[2]);
            row.mean_packets = std::stod(fields[3]);
            row.std_packets = std::stod(fields[4]);
        } catch (const std::exception& e) {
            throw ParseError(lineno, e.what());
        }
        table.rows.push_back(row);
    }
    if (!header_seen) throw std::runtime_error("read_metrics_csv: missing header in " + path.string());
    return table;
}

std::vector<SummaryRow> summarize(const MetricsTable& table) {
    if (table.rows.empty()) throw std::invalid_argument("summarize: empty table");

    std::map<std::pair<int, int>, std::vector<double>> groups;  // (method, task) -> means
    for (const MetricsRow& row : table.rows) {
        groups[{static_cast<int>(row.method), row.task_index}].push_back(row.mean_packets);
    }
    std::vector<SummaryRow> out;
    out.reserve(groups.size());
    for (const auto& [key, values] : groups) {
        SummaryRow row;
        row.method = static_cast<Method>(key.first);
        row.task_index = key.second;
        for (const double v : values) row.mean_packets += v;
        row.mean_packets /= static_cast<double>(values.size());
        double sq = 0.0;
        for (const double v : values) sq += (v - row.mean_packets) * (v - row.mean_packets);
        row.std_packets = std::sqrt(sq / static_cast<double>(values.size()));
        out.push_back(row);
    }
    return out;
}

void export_summary(const std::vector<SummaryRow>& rows, const MetricsTable& source,
                    const std::filesystem::path& path, MetricsFormat format) {
    if (rows.empty()) throw std::invalid_argument("export_summary: empty summary");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("export_summary: cannot open " + path.string());
    if (format == MetricsFormat::csv) {
        for (const auto& [key, value] : source.metadata) {
            out << "# " << key << '=' << value << '\n';
        }
        out << "method,task_index,mean_packets,std_packets\n";
        for (const SummaryRow& row : rows) {
            out << method_name(row.method) << ',' << row.task_index << ','
                << format_double(row.mean_packets) << ',' << format_double(row.std_packets)
                << '\n';
        }
    } else {
        nlohmann::json doc;
        doc["metadata"] = source.metadata;
        doc["rows"] = nlohmann::json::array();
        for (const SummaryRow& row : rows) {
            doc["rows"].push_back({{"method", method_name(row.method)},
                                   {"task_index", row.task_index},
                                   {"mean_packets", row.mean_packets},
                                   {"std_packets", row.std_packets}});
        }
        out << doc.dump(2) << '\n';
    }
    if (!out) throw std::runtime_error("export_summary: write failed for " + path.string());
}

}  // namespace uabs
