#include "uabs/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uabs {

Vec2 action_direction(Action a) {
    constexpr double d = 0.70710678118654752440;  // 1/sqrt(2)
    switch (a) {
        case Action::hover:      return {0.0, 0.0};
        case Action::left:       return {-1.0, 0.0};
        case Action::up:         return {0.0, 1.0};
        case Action::right:      return {1.0, 0.0};
        case Action::down:       return {0.0, -1.0};
        case Action::up_left:    return {-d, d};
        case Action::up_right:   return {d, d};
        case Action::down_right: return {d, -d};
        case Action::down_left:  return {-d, -d};
    }
    throw std::invalid_argument("action_direction: invalid action");
}

double WaypointPath::length() const {
    double total = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        total += distance(points[i - 1], points[i]);
    }
    return total;
}

void WaypointPath::validate(const AreaSpec& area) const {
    if (points.size() < 2) {
        throw std::invalid_argument("WaypointPath: need at least two points");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!area.contains(points[i])) {
            throw std::invalid_argument("WaypointPath: point outside the area");
        }
        if (i > 0 && points[i] == points[i - 1]) {
            throw std::invalid_argument("WaypointPath: consecutive points must be distinct");
        }
    }
}

void TaskConfig::validate() const {
    area.validate();
    if (horizon < 1) throw std::invalid_argument("TaskConfig: horizon must be >= 1");
    if (!area.contains(uabs_start)) {
        throw std::invalid_argument("TaskConfig: UABS start outside the area");
    }
    if (!(uabs_speed > 0.0)) throw std::invalid_argument("TaskConfig: uabs_speed must be positive");
    if (traffic.gue_count() == 0) throw std::invalid_argument("TaskConfig: no GUEs");
    if (traffic.p_msg < 0.0 || traffic.p_msg > 1.0) {
        throw std::invalid_argument("TaskConfig: p_msg must be in [0, 1]");
    }
    if (traffic.mode == TrafficPattern::Mode::waypoint) {
        for (const GueSpec& g : traffic.gues) {
            g.path.validate(area);
            if (!(g.speed > 0.0)) throw std::invalid_argument("GueSpec: speed must be positive");
            if (g.start_time < 1 || g.start_time > horizon) {
                throw std::invalid_argument("GueSpec: start_time must be in [1, horizon]");
            }
        }
    }
}

namespace {

// Point at arc length s along the polyline, clamped to the endpoint.
Vec2 point_at_arc(const WaypointPath& path, double s) {
    for (std::size_t i = 1; i < path.points.size(); ++i) {
        const double seg = distance(path.points[i - 1], path.points[i]);
        if (s <= seg) {
            const double f = seg > 0.0 ? s / seg : 0.0;
            return path.points[i - 1] + (path.points[i] - path.points[i - 1]) * f;
        }
        s -= seg;
    }
    return path.points.back();
}

std::optional<Vec2> waypoint_position(const GueSpec& g, int t, int horizon) {
    if (t < g.start_time || t > horizon) return std::nullopt;
    const double total = g.path.length();
    const double s = g.speed * (t - g.start_time);
    if (t > g.start_time) {
        // If the endpoint was already reached at the previous step, the GUE
        // has left. The step that lands on the endpoint itself is active.
        const double prev = g.speed * (t - 1 - g.start_time);
        if (prev >= total) return std::nullopt;
    }
    return point_at_arc(g.path, std::min(s, total));
}

std::optional<Vec2> trace_position(const TrafficPattern::Trace& tr, int t, int horizon) {
    if (t > horizon || t < tr.first_step) return std::nullopt;
    const std::size_t idx = static_cast<std::size_t>(t - tr.first_step);
    if (idx >= tr.positions.size()) return std::nullopt;
    return tr.positions[idx];
}

}  // namespace

std::optional<Vec2> gue_position(const TrafficPattern& traffic, std::size_t g, int t, int horizon) {
    if (t < 0 || g >= traffic.gue_count()) return std::nullopt;
    if (traffic.mode == TrafficPattern::Mode::waypoint) {
        return waypoint_position(traffic.gues[g], t, horizon);
    }
    return trace_position(traffic.traces[g], t, horizon);
}

Vec2 uabs_move(Vec2 p, Action a, double uabs_speed, const AreaSpec& area) {
    if (a == Action::hover) return p;
    return area.clamp(p + action_direction(a) * uabs_speed);
}

namespace {

// Draw order is pinned for reproducibility: GUE packet flags in index order,
// then link states for packet holders in index order, then the overflow
// shuffle inside collect_reward.
std::vector<GueState> advance_gues(const TaskConfig& task, int t, Rng& rng) {
    const std::size_t n = task.traffic.gue_count();
    std::vector<GueState> gues(n);
    for (std::size_t g = 0; g < n; ++g) {
        if (const auto pos = gue_position(task.traffic, g, t, task.horizon)) {
            gues[g].position = *pos;
            gues[g].active = true;
            gues[g].has_packet = rng.bernoulli(task.traffic.p_msg);
        }
    }
    return gues;
}

}  // namespace

WorldState reset(const TaskConfig& task, Rng& rng) {
    WorldState s;
    s.t = 0;
    s.uabs_pos = task.uabs_start;
    s.gues = advance_gues(task, 0, rng);
    return s;
}

StepResult step(const WorldState& state, Action a, const TaskConfig& task,
                const ChannelParams& chan, const RewardParams& rew, Rng& rng) {
    if (state.t >= task.horizon) {
        throw std::logic_error("step: episode is already terminal (t == horizon)");
    }

    StepResult out;
    out.next.t = state.t + 1;
    out.next.uabs_pos = uabs_move(state.uabs_pos, a, task.uabs_speed, task.area);
    out.next.gues = advance_gues(task, out.next.t, rng);

    std::vector<int> eligible;
    for (std::size_t g = 0; g < out.next.gues.size(); ++g) {
        const GueState& gs = out.next.gues[g];
        if (!gs.active || !gs.has_packet) continue;
        const double snr = link_snr_db(chan, task.area, out.next.uabs_pos, gs.position, rng);
        if (covered(snr, chan.snr_th_db)) eligible.push_back(static_cast<int>(g));
    }

    CollectResult col = collect_reward(eligible, rew, rng);
    out.reward = col.reward;
    out.served = std::move(col.served);
    return out;
}

std::vector<double> encode_state(const WorldState& state, const TaskConfig& task,
                                 const EncoderConfig& enc) {
    std::vector<double> f(static_cast<std::size_t>(encoded_length(enc)), 0.0);
    const double w = task.area.width;
    const double h = task.area.height;
    f[0] = state.uabs_pos.x / w;
    f[1] = state.uabs_pos.y / h;

    std::vector<std::pair<double, std::size_t>> order;  // (distance, index)
    for (std::size_t g = 0; g < state.gues.size(); ++g) {
        if (state.gues[g].active) {
            order.emplace_back(distance(state.gues[g].position, state.uabs_pos), g);
        }
    }
    std::sort(order.begin(), order.end());

    const std::size_t slots = std::min(order.size(), static_cast<std::size_t>(enc.knn));
    for (std::size_t k = 0; k < slots; ++k) {
        const Vec2 rel = state.gues[order[k].second].position - state.uabs_pos;
        f[2 + 3 * k] = 1.0;
        f[3 + 3 * k] = rel.x / w;
        f[4 + 3 * k] = rel.y / h;
    }
    return f;
}

std::pair<TaskConfig, TaskConfig> make_toy_tasks() {
    const AreaSpec area{40.0, 40.0, kToyAltitudeM};
    const Vec2 corner{40.0, 0.0};

    WaypointPath clockwise{{corner, {0.0, 0.0}, {0.0, 40.0}, {40.0, 40.0}, corner}};
    WaypointPath counterclockwise{{corner, {40.0, 40.0}, {0.0, 40.0}, {0.0, 0.0}, corner}};

    auto make_task = [&](const WaypointPath& path) {
        TaskConfig task;
        task.area = area;
        task.uabs_start = {20.0, 0.0};
        task.uabs_speed = 1.0;
        task.horizon = 60;
        task.traffic.mode = TrafficPattern::Mode::waypoint;
        task.traffic.p_msg = 1.0;
        for (int g = 0; g < 3; ++g) {
            task.traffic.gues.push_back(GueSpec{path, 1.0, g + 1});
        }
        return task;
    };
    return {make_task(clockwise), make_task(counterclockwise)};
}

TaskConfig gen_random_task(const AreaSpec& area, int g_min, int g_max, double gue_speed,
                           double speed_jitter, int horizon, double uabs_speed,
                           double p_msg, Rng& rng) {
    if (g_min < 1 || g_max < g_min) {
        throw std::invalid_argument("gen_random_task: empty GUE count range");
    }
    TaskConfig task;
    task.area = area;
    task.horizon = horizon;
    task.uabs_speed = uabs_speed;
    task.traffic.mode = TrafficPattern::Mode::waypoint;
    task.traffic.p_msg = p_msg;

    const int g_count = rng.uniform_int(g_min, g_max);
    for (int g = 0; g < g_count; ++g) {
        GueSpec gue;
        const int n_points = rng.uniform_int(3, 8);
        for (int k = 0; k < n_points; ++k) {
            Vec2 p{rng.uniform(0.0, area.width), rng.uniform(0.0, area.height)};
            while (!gue.path.points.empty() && p == gue.path.points.back()) {
                p = {rng.uniform(0.0, area.width), rng.uniform(0.0, area.height)};
            }
            gue.path.points.push_back(p);
        }
        gue.speed = gue_speed * (1.0 + speed_jitter * rng.uniform(-1.0, 1.0));
        gue.start_time = rng.uniform_int(1, std::max(1, horizon / 2));
        task.traffic.gues.push_back(std::move(gue));
    }
    task.uabs_start = {rng.uniform(0.0, area.width), rng.uniform(0.0, area.height)};
    return task;
}

}  // namespace uabs
