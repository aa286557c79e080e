#include "uabs/reinforce.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace uabs {

void RLConfig::validate() const {
    if (episodes < 1) throw std::invalid_argument("RLConfig: episodes must be >= 1");
    if (!(gamma > 0.0) || gamma > 1.0) throw std::invalid_argument("RLConfig: gamma must be in (0, 1]");
    if (!(eta > 0.0)) throw std::invalid_argument("RLConfig: eta must be positive");
}

std::vector<double> discounted_returns(std::span<const int> rewards, double gamma) {
    if (rewards.empty()) throw std::invalid_argument("discounted_returns: empty reward sequence");
    std::vector<double> g(rewards.size());
    g.back() = rewards.back();
    for (std::size_t t = rewards.size() - 1; t-- > 0;) {
        g[t] = rewards[t] + gamma * g[t + 1];
    }
    return g;
}

namespace {

std::vector<int> step_rewards(const Episode& e) {
    std::vector<int> r(e.steps.size());
    for (std::size_t t = 0; t < e.steps.size(); ++t) r[t] = e.steps[t].reward;
    return r;
}

}  // namespace

std::vector<double> policy_gradient(const PolicyParams& p, const Episode& e, double gamma) {
    const auto returns = discounted_returns(step_rewards(e), gamma);
    std::vector<double> grad(p.theta.size(), 0.0);
    for (std::size_t t = 0; t < e.steps.size(); ++t) {
        if (returns[t] == 0.0) continue;
        const auto g = log_prob_grad(p, e.steps[t].features, e.steps[t].action);
        for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += g[j] * returns[t];
    }
    return grad;
}

PolicyParams reinforce_update(const PolicyParams& p, const Episode& e, const RLConfig& cfg) {
    const auto grad = policy_gradient(p, e, cfg.gamma);
    PolicyParams next = p;
    for (std::size_t j = 0; j < next.theta.size(); ++j) next.theta[j] += cfg.eta * grad[j];
    return next;
}

Episode rollout_episode(const PolicyParams& p, Simulator& sim, const EncoderConfig& enc,
                        Rng& env_rng, Rng& act_rng) {
    Episode e;
    e.steps.reserve(static_cast<std::size_t>(sim.task().horizon));
    WorldState state = sim.reset(env_rng);
    for (int t = 0; t < sim.task().horizon; ++t) {
        StepRecord rec;
        rec.features = encode_state(state, sim.task(), enc);
        const auto probs = action_probs(p, rec.features);
        const ActionSample sample = sample_action(act_rng, probs);
        rec.action = sample.action;
        rec.behavior_prob = sample.prob;
        StepResult res = sim.step(state, sample.action, env_rng);
        rec.reward = res.reward;
        e.total_reward += res.reward;
        e.steps.push_back(std::move(rec));
        state = std::move(res.next);
    }
    return e;
}

TrainResult train_task(const PolicyParams& theta0, Simulator& sim, const RLConfig& cfg,
                       const EncoderConfig& enc, std::uint64_t env_stream,
                       std::uint64_t act_stream) {
    cfg.validate();
    TrainResult out;
    out.theta_star = theta0;
    out.full_set.reserve(static_cast<std::size_t>(cfg.episodes));

    for (int n = 0; n < cfg.episodes; ++n) {
        Rng env_rng(derive_key(env_stream, "episode", static_cast<std::uint64_t>(n)));
        Rng act_rng(derive_key(act_stream, "episode", static_cast<std::uint64_t>(n)));
        Episode e = rollout_episode(out.theta_star, sim, enc, env_rng, act_rng);
        out.theta_star = reinforce_update(out.theta_star, e, cfg);

        double sq = 0.0;
        for (const double v : out.theta_star.theta) sq += v * v;
        out.theta_norms.push_back(std::sqrt(sq));
        out.episode_rewards.push_back(e.total_reward);
        // strict > keeps the lowest index on ties
        if (out.full_set.empty() ||
            e.total_reward > out.full_set[out.skilled_index].total_reward) {
            out.skilled_index = out.full_set.size();
        }
        out.full_set.push_back(std::move(e));
    }
    return out;
}

void write_training_log(std::ostream& out, const TrainResult& result) {
    out << "episode,total_reward,theta_norm\n";
    for (std::size_t n = 0; n < result.episode_rewards.size(); ++n) {
        out << n << ',' << result.episode_rewards[n] << ',' << result.theta_norms[n] << '\n';
    }
}

}  // namespace uabs
