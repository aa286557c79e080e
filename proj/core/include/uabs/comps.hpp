#pragma once

#include <cstdint>
#include <vector>

#include "uabs/reinforce.hpp"

namespace uabs {

/// Everything retained from a finished task: the full experience set (all N
/// episodes with behavior probabilities) and which of them is the skilled one.
/// Once stored, this is the only view of the task the learner ever gets again.
struct TaskArchiveEntry {
    int task_index = 0;
    std::vector<Episode> full_set;
    std::size_t skilled_index = 0;

    const Episode& skilled() const { return full_set[skilled_index]; }
};

/// Continually meta-learned state: the policy initialization plus the archive
/// of every completed task.
struct MetaState {
    PolicyParams theta0;
    std::vector<TaskArchiveEntry> archive;

    int completed_tasks() const { return static_cast<int>(archive.size()); }
};

enum class MetaGradMode {
    first_order,        ///< adapted parameters treated as constant w.r.t. theta0
    finite_difference,  ///< numeric differentiation through the adaptation (small nets)
};

struct MetaConfig {
    double kappa = 0.0001;    ///< meta learning rate
    double eta = 0.001;       ///< inner (adaptation) learning rate
    double gamma = 0.8;
    int b = 5;                ///< tasks sampled per meta-iteration
    int i_meta = 100;         ///< meta-iterations per task
    double ratio_clip = 10.0; ///< importance ratios clamped to [1/clip, clip]
    MetaGradMode meta_grad_mode = MetaGradMode::first_order;

    void validate() const;
};

/// One importance-weighted policy-gradient step from theta0 on an archived
/// episode, without touching any simulator:
///   theta* = theta0 + eta * sum_t clip(pi/b) * grad log pi(a_t|s_t) * G_t.
/// Throws std::runtime_error if a stored behavior probability is zero
/// (archive corruption).
PolicyParams off_policy_adapt(const PolicyParams& theta0, const Episode& e, const MetaConfig& cfg);

/// Behavioral cloning loss: negative log-likelihood of the skilled episode's
/// actions, with probabilities floored at kProbFloor.
double bc_loss(const PolicyParams& p, const Episode& skilled);

/// Gradient of bc_loss at p.
std::vector<double> bc_loss_grad(const PolicyParams& p, const Episode& skilled);

/// Meta-gradient of the cloning objective through one adaptation step on the
/// given episode of the entry. first_order evaluates the cloning gradient at
/// the adapted parameters; finite_difference differentiates the composed map
/// numerically and is intended as an oracle for small parameter counts.
std::vector<double> meta_gradient(const PolicyParams& theta0, const TaskArchiveEntry& entry,
                                  std::size_t episode_index, const MetaConfig& cfg);

/// As above with the episode drawn uniformly from the entry's full set.
std::vector<double> meta_gradient(const PolicyParams& theta0, const TaskArchiveEntry& entry,
                                  const MetaConfig& cfg, Rng& rng);

/// CoMPS meta-update: i_meta iterations, each sampling min(b, archive size)
/// distinct tasks, accumulating their meta-gradients in task-index order and
/// descending theta0 with step kappa / (archive size). Reads only the archive.
void meta_update(MetaState& state, const MetaConfig& cfg, Rng& rng);

/// One continual-learning round: train on the new task from the current
/// initialization, archive the experience, then meta-update the
/// initialization. Returns the per-episode reward curve of the RL phase.
std::vector<int> run_comps_step(MetaState& state, Simulator& sim, const RLConfig& rl_cfg,
                                const MetaConfig& meta_cfg, const EncoderConfig& enc,
                                std::uint64_t env_stream, std::uint64_t act_stream,
                                Rng& meta_rng);

}  // namespace uabs
