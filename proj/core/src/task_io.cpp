#include "uabs/task_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace uabs {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(trim(item));
    return parts;
}

long parse_long(const std::string& s, int line, const char* what) {
    long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw ParseError(line, std::string("invalid ") + what + " `" + s + "`");
    }
    return v;
}

double parse_num(const std::string& s, int line, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, std::string("invalid ") + what + " `" + s + "`");
    }
}

}  // namespace

TrafficPattern ingest_trace(std::istream& in, const AreaSpec& area, double p_msg) {
    TrafficPattern traffic;
    traffic.mode = TrafficPattern::Mode::trace_playback;
    traffic.p_msg = p_msg;

    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) throw ParseError(1, "empty trace: no GUEs");
    ++lineno;
    if (trim(line) != "gue_id,t,x,y") {
        throw ParseError(lineno, "expected header `gue_id,t,x,y`");
    }

    long current_id = -1;
    int prev_t = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 4) throw ParseError(lineno, "expected 4 fields `gue_id,t,x,y`");

        const long id = parse_long(fields[0], lineno, "gue_id");
        const long t = parse_long(fields[1], lineno, "t");
        const Vec2 pos{parse_num(fields[2], lineno, "x"), parse_num(fields[3], lineno, "y")};

        if (id < 0) throw ParseError(lineno, "gue_id must be non-negative");
        if (t < 1) throw ParseError(lineno, "t must be >= 1");
        if (!area.contains(pos)) throw ParseError(lineno, "position outside the area");

        if (id != current_id) {
            if (id < current_id) {
                throw ParseError(lineno, "rows must be sorted by (gue_id, t)");
            }
            current_id = id;
            traffic.traces.push_back({static_cast<int>(t), {}});
        } else if (t != prev_t + 1) {
            throw ParseError(lineno, "non-contiguous timestamps for gue_id " +
                                         std::to_string(id));
        }
        traffic.traces.back().positions.push_back(pos);
        prev_t = static_cast<int>(t);
    }
    if (traffic.traces.empty()) throw ParseError(lineno, "empty trace: no GUEs");
    return traffic;
}

TrafficPattern ingest_trace_file(const std::filesystem::path& path, const AreaSpec& area,
                                 double p_msg) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace " + path.string());
    try {
        return ingest_trace(in, area, p_msg);
    } catch (const ParseError& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void write_trace(std::ostream& out, const TrafficPattern& traffic) {
    if (traffic.mode != TrafficPattern::Mode::trace_playback) {
        throw std::invalid_argument("write_trace: pattern is not in trace-playback mode");
    }
    out << "gue_id,t,x,y\n";
    for (std::size_t g = 0; g < traffic.traces.size(); ++g) {
        const auto& tr = traffic.traces[g];
        for (std::size_t k = 0; k < tr.positions.size(); ++k) {
            out << g << ',' << tr.first_step + static_cast<int>(k) << ','
                << tr.positions[k].x << ',' << tr.positions[k].y << '\n';
        }
    }
}

namespace {

std::vector<Vec2> parse_waypoints(const std::string& s, int line) {
    std::vector<Vec2> points;
    for (const std::string& pair : split(s, ';')) {
        const auto xy = split(pair, ',');
        if (xy.size() != 2) throw ParseError(line, "waypoint must be `x,y`: `" + pair + "`");
        points.push_back({parse_num(xy[0], line, "x"), parse_num(xy[1], line, "y")});
    }
    return points;
}

std::string format_num(double v) {
    char buf[32];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

}  // namespace

TaskConfig read_task_manifest(const std::filesystem::path& path) {
    const auto entries = parse_kv_file(path);

    TaskConfig task;
    task.traffic.mode = TrafficPattern::Mode::waypoint;
    std::string trace_file;
    std::map<int, GueSpec> gues;
    std::map<int, int> gue_lines;

    for (const KvEntry& e : entries) {
        if (e.key == "area_width") task.area.width = parse_num(e.value, e.line, "area_width");
        else if (e.key == "area_height") task.area.height = parse_num(e.value, e.line, "area_height");
        else if (e.key == "altitude") task.area.uabs_altitude = parse_num(e.value, e.line, "altitude");
        else if (e.key == "uabs_start_x") task.uabs_start.x = parse_num(e.value, e.line, "uabs_start_x");
        else if (e.key == "uabs_start_y") task.uabs_start.y = parse_num(e.value, e.line, "uabs_start_y");
        else if (e.key == "uabs_speed") task.uabs_speed = parse_num(e.value, e.line, "uabs_speed");
        else if (e.key == "p_msg") task.traffic.p_msg = parse_num(e.value, e.line, "p_msg");
        else if (e.key == "horizon") task.horizon = static_cast<int>(parse_long(e.value, e.line, "horizon"));
        else if (e.key == "trace") trace_file = e.value;
        else if (e.key.starts_with("gue")) {
            const auto under = e.key.find('_');
            if (under == std::string::npos) throw ParseError(e.line, "unknown key `" + e.key + "`");
            const std::string idx_str = e.key.substr(3, under - 3);
            const std::string field = e.key.substr(under + 1);
            const int idx = static_cast<int>(parse_long(idx_str, e.line, "GUE index"));
            gue_lines.try_emplace(idx, e.line);
            if (field == "path") gues[idx].path.points = parse_waypoints(e.value, e.line);
            else if (field == "speed") gues[idx].speed = parse_num(e.value, e.line, "speed");
            else if (field == "start") gues[idx].start_time = static_cast<int>(parse_long(e.value, e.line, "start"));
            else throw ParseError(e.line, "unknown key `" + e.key + "`");
        }
        else throw ParseError(e.line, "unknown key `" + e.key + "`");
    }

    if (!trace_file.empty() && !gues.empty()) {
        throw std::runtime_error(path.string() + ": manifest mixes `trace` with waypoint GUEs");
    }
    if (!trace_file.empty()) {
        task.traffic = ingest_trace_file(path.parent_path() / trace_file, task.area,
                                         task.traffic.p_msg);
    } else {
        int expected = 0;
        for (const auto& [idx, gue] : gues) {
            if (idx != expected++) {
                throw ParseError(gue_lines.at(idx), "GUE indices must be dense from 0");
            }
            task.traffic.gues.push_back(gue);
        }
    }
    task.validate();
    return task;
}

void write_task_manifest(const std::filesystem::path& path, const TaskConfig& task) {
    if (task.traffic.mode != TrafficPattern::Mode::waypoint) {
        throw std::invalid_argument("write_task_manifest: only waypoint tasks are writable");
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "area_width = " << format_num(task.area.width) << '\n'
        << "area_height = " << format_num(task.area.height) << '\n'
        << "altitude = " << format_num(task.area.uabs_altitude) << '\n'
        << "uabs_start_x = " << format_num(task.uabs_start.x) << '\n'
        << "uabs_start_y = " << format_num(task.uabs_start.y) << '\n'
        << "uabs_speed = " << format_num(task.uabs_speed) << '\n'
        << "p_msg = " << format_num(task.traffic.p_msg) << '\n'
        << "horizon = " << task.horizon << '\n';
    for (std::size_t g = 0; g < task.traffic.gues.size(); ++g) {
        const GueSpec& gue = task.traffic.gues[g];
        out << "gue" << g << "_path = ";
        for (std::size_t k = 0; k < gue.path.points.size(); ++k) {
            if (k) out << "; ";
            out << format_num(gue.path.points[k].x) << ',' << format_num(gue.path.points[k].y);
        }
        out << '\n'
            << "gue" << g << "_speed = " << format_num(gue.speed) << '\n'
            << "gue" << g << "_start = " << gue.start_time << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<TaskConfig> load_task_manifests(const std::filesystem::path& dir, std::size_t count) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".task") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.size() < count) {
        throw std::runtime_error(dir.string() + ": found " + std::to_string(files.size()) +
                                 " task manifests, need " + std::to_string(count));
    }
    std::vector<TaskConfig> tasks;
    tasks.reserve(count);
    for (std::size_t i = 0; i < count; ++i) tasks.push_back(read_task_manifest(files[i]));
    return tasks;
}

}  // namespace uabs
