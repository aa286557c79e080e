#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "uabs/env.hpp"
#include "uabs/policy.hpp"

namespace uabs {

/// One recorded decision: features seen, action taken, reward obtained, and
/// the probability the behavior policy assigned to that action at collection
/// time.
struct StepRecord {
    std::vector<double> features;
    Action action = Action::hover;
    int reward = 0;
    double behavior_prob = 1.0;
};

struct Episode {
    std::vector<StepRecord> steps;
    int total_reward = 0;  ///< undiscounted sum of step rewards
};

struct RLConfig {
    int episodes = 50;    ///< N
    double gamma = 0.8;
    double eta = 0.001;

    void validate() const;
};

/// Discounted suffix sums: G[t] = r[t] + gamma * G[t+1].
std::vector<double> discounted_returns(std::span<const int> rewards, double gamma);

/// Policy-gradient estimate sum_t grad log pi(a_t|s_t) * G_t, with the score
/// term evaluated at the given (current) parameters.
std::vector<double> policy_gradient(const PolicyParams& p, const Episode& e, double gamma);

/// One ascent step theta' = theta + eta * policy_gradient(theta, e, gamma).
PolicyParams reinforce_update(const PolicyParams& p, const Episode& e, const RLConfig& cfg);

/// Roll one full episode under a fixed policy, recording the behavior
/// probability of every drawn action. Environment draws come from `env_rng`,
/// action draws from `act_rng`.
Episode rollout_episode(const PolicyParams& p, Simulator& sim, const EncoderConfig& enc,
                        Rng& env_rng, Rng& act_rng);

struct TrainResult {
    PolicyParams theta_star;          ///< parameters after the N updates
    std::vector<Episode> full_set;    ///< all N episodes with behavior probs
    std::size_t skilled_index = 0;    ///< argmax of total reward (lowest index on ties)
    std::vector<int> episode_rewards; ///< undiscounted totals, one per episode
    std::vector<double> theta_norms;  ///< L2 norm of theta after each update
};

/// Episodic policy-gradient training on one task: alternately roll an episode
/// and apply one update, N times. Per-episode streams are derived from the two
/// base keys, so a fixed (env_stream, act_stream) pair reproduces the run.
TrainResult train_task(const PolicyParams& theta0, Simulator& sim, const RLConfig& cfg,
                       const EncoderConfig& enc, std::uint64_t env_stream,
                       std::uint64_t act_stream);

/// Per-task training log: `episode,total_reward,theta_norm`.
void write_training_log(std::ostream& out, const TrainResult& result);

}  // namespace uabs
