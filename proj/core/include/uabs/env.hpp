#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "uabs/channel.hpp"
#include "uabs/geometry.hpp"
#include "uabs/rng.hpp"

namespace uabs {

inline constexpr int kNumActions = 9;

/// Hover plus the eight compass directions, in a stable 0..8 encoding.
enum class Action : int {
    hover = 0,
    left = 1,
    up = 2,
    right = 3,
    down = 4,
    up_left = 5,
    up_right = 6,
    down_right = 7,
    down_left = 8,
};

/// Unit displacement of an action (hover is the zero vector). Diagonals are
/// normalized so a step covers the same ground distance in every direction.
Vec2 action_direction(Action a);

/// Piece-wise linear ground track; at least two points, consecutive points
/// distinct, all inside the area.
struct WaypointPath {
    std::vector<Vec2> points;

    double length() const;
    void validate(const AreaSpec& area) const;
};

struct GueSpec {
    WaypointPath path;
    double speed = 1.0;  ///< meters per time step
    int start_time = 1;  ///< first active step, in [1, horizon]
};

/// Traffic pattern: either waypoint-driven GUEs or played-back trace rows.
struct TrafficPattern {
    enum class Mode { waypoint, trace_playback };

    struct Trace {
        int first_step = 1;
        std::vector<Vec2> positions;  ///< one per step from first_step on
    };

    Mode mode = Mode::waypoint;
    double p_msg = 1.0;            ///< per-step packet generation probability
    std::vector<GueSpec> gues;     ///< waypoint mode
    std::vector<Trace> traces;     ///< trace-playback mode

    std::size_t gue_count() const {
        return mode == Mode::waypoint ? gues.size() : traces.size();
    }
};

/// One episodic task: where the UABS starts, who moves on the ground, and for
/// how many decision steps.
struct TaskConfig {
    Vec2 uabs_start;
    TrafficPattern traffic;
    int horizon = 0;  ///< decision steps per episode (T)
    AreaSpec area;
    double uabs_speed = 1.0;  ///< meters per time step

    void validate() const;
};

struct GueState {
    Vec2 position;
    bool active = false;
    bool has_packet = false;
};

struct WorldState {
    int t = 0;
    Vec2 uabs_pos;
    std::vector<GueState> gues;
};

/// Position of GUE g at step t, or nullopt while inactive. Waypoint GUEs walk
/// their polyline at constant per-step arc length (crossing waypoints within a
/// step), stop on the endpoint and then leave; trace GUEs are active exactly
/// on the recorded steps. Activity always ends after the horizon.
std::optional<Vec2> gue_position(const TrafficPattern& traffic, std::size_t g, int t, int horizon);

/// One step of UABS kinematics, clamped componentwise to the area rectangle.
Vec2 uabs_move(Vec2 p, Action a, double uabs_speed, const AreaSpec& area);

/// Initial state: t = 0, UABS at its start position, GUE activity and packet
/// flags drawn for step 0.
WorldState reset(const TaskConfig& task, Rng& rng);

struct StepResult {
    WorldState next;
    int reward = 0;
    std::vector<int> served;  ///< GUEs whose packet was collected this step
};

/// One transition: move the UABS, advance the traffic, redraw packet flags,
/// and collect packets from covered GUEs against the post-move geometry.
/// Throws std::logic_error when called on a terminal state (t == horizon).
StepResult step(const WorldState& state, Action a, const TaskConfig& task,
                const ChannelParams& chan, const RewardParams& rew, Rng& rng);

struct EncoderConfig {
    int knn = 8;  ///< GUE slots in the feature vector
};

inline int encoded_length(const EncoderConfig& enc) { return 2 + 3 * enc.knn; }

/// Fixed-length policy features independent of G: normalized UABS position
/// followed by knn slots of (active, dx/W, dy/H) for the nearest active GUEs,
/// closest first (ties by index); unused slots are zero.
std::vector<double> encode_state(const WorldState& state, const TaskConfig& task,
                                 const EncoderConfig& enc);

/// Altitude of the shipped toy preset. The toy coverage threshold is tuned so
/// the LoS coverage ball has a ~15 m slant radius at this altitude.
inline constexpr double kToyAltitudeM = 10.0;

/// The two alternating tasks of the 40 m x 40 m toy world: three GUEs walking
/// the perimeter from the bottom-right corner, clockwise in the first task and
/// counterclockwise in the second.
std::pair<TaskConfig, TaskConfig> make_toy_tasks();

/// Random synthetic task: G uniform in [g_min, g_max] GUEs, each on a random
/// 3-8 waypoint polyline with a start time in [1, horizon/2]; per-GUE speed is
/// gue_speed jittered by +/- speed_jitter (fraction). UABS start is uniform
/// in the area.
TaskConfig gen_random_task(const AreaSpec& area, int g_min, int g_max, double gue_speed,
                           double speed_jitter, int horizon, double uabs_speed,
                           double p_msg, Rng& rng);

/// Environment instance with call accounting. The trainers interact with a
/// task only through one of these, so the counter tells exactly how often a
/// task's simulator has been exercised.
class Simulator {
public:
    Simulator(TaskConfig task, ChannelParams chan, RewardParams rew)
        : task_(std::move(task)), chan_(chan), rew_(rew) {}

    WorldState reset(Rng& rng) {
        ++calls_;
        return uabs::reset(task_, rng);
    }

    StepResult step(const WorldState& s, Action a, Rng& rng) {
        ++calls_;
        return uabs::step(s, a, task_, chan_, rew_, rng);
    }

    const TaskConfig& task() const { return task_; }
    std::uint64_t env_calls() const { return calls_; }

private:
    TaskConfig task_;
    ChannelParams chan_;
    RewardParams rew_;
    std::uint64_t calls_ = 0;
};

}  // namespace uabs
