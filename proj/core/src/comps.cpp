#include "uabs/comps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uabs {

void MetaConfig::validate() const {
    if (!(kappa > 0.0)) throw std::invalid_argument("MetaConfig: kappa must be positive");
    if (!(eta >= 0.0)) throw std::invalid_argument("MetaConfig: eta must be >= 0");
    if (!(gamma > 0.0) || gamma > 1.0) throw std::invalid_argument("MetaConfig: gamma must be in (0, 1]");
    if (b < 1) throw std::invalid_argument("MetaConfig: b must be >= 1");
    if (i_meta < 1) throw std::invalid_argument("MetaConfig: i_meta must be >= 1");
    if (!(ratio_clip >= 1.0)) throw std::invalid_argument("MetaConfig: ratio_clip must be >= 1");
}

PolicyParams off_policy_adapt(const PolicyParams& theta0, const Episode& e, const MetaConfig& cfg) {
    std::vector<int> rewards(e.steps.size());
    for (std::size_t t = 0; t < e.steps.size(); ++t) rewards[t] = e.steps[t].reward;
    const auto returns = discounted_returns(rewards, cfg.gamma);

    PolicyParams adapted = theta0;
    for (std::size_t t = 0; t < e.steps.size(); ++t) {
        const StepRecord& rec = e.steps[t];
        if (!(rec.behavior_prob > 0.0)) {
            throw std::runtime_error("off_policy_adapt: zero behavior probability (corrupt archive)");
        }
        double pi_a = 0.0;
        const auto grad = log_prob_grad(theta0, rec.features, rec.action, &pi_a);
        const double ratio =
            std::clamp(pi_a / rec.behavior_prob, 1.0 / cfg.ratio_clip, cfg.ratio_clip);
        const double coeff = cfg.eta * ratio * returns[t];
        if (coeff == 0.0) continue;
        for (std::size_t j = 0; j < adapted.theta.size(); ++j) {
            adapted.theta[j] += coeff * grad[j];
        }
    }
    return adapted;
}

double bc_loss(const PolicyParams& p, const Episode& skilled) {
    if (skilled.steps.empty()) throw std::invalid_argument("bc_loss: empty skilled episode");
    double loss = 0.0;
    for (const StepRecord& rec : skilled.steps) {
        const auto probs = action_probs(p, rec.features);
        loss -= std::log(std::max(probs[static_cast<std::size_t>(rec.action)], kProbFloor));
    }
    return loss;
}

std::vector<double> bc_loss_grad(const PolicyParams& p, const Episode& skilled) {
    if (skilled.steps.empty()) throw std::invalid_argument("bc_loss_grad: empty skilled episode");
    std::vector<double> grad(p.theta.size(), 0.0);
    for (const StepRecord& rec : skilled.steps) {
        const auto g = log_prob_grad(p, rec.features, rec.action);
        for (std::size_t j = 0; j < grad.size(); ++j) grad[j] -= g[j];
    }
    return grad;
}

std::vector<double> meta_gradient(const PolicyParams& theta0, const TaskArchiveEntry& entry,
                                  std::size_t episode_index, const MetaConfig& cfg) {
    if (entry.full_set.empty()) throw std::invalid_argument("meta_gradient: empty full set");
    const Episode& e = entry.full_set.at(episode_index);

    if (cfg.meta_grad_mode == MetaGradMode::first_order) {
        return bc_loss_grad(off_policy_adapt(theta0, e, cfg), entry.skilled());
    }

    // Central differences through the composed map theta0 -> adapt -> clone.
    constexpr double h = 1e-5;
    PolicyParams probe = theta0;
    std::vector<double> grad(theta0.theta.size(), 0.0);
    for (std::size_t j = 0; j < grad.size(); ++j) {
        const double orig = probe.theta[j];
        probe.theta[j] = orig + h;
        const double up = bc_loss(off_policy_adapt(probe, e, cfg), entry.skilled());
        probe.theta[j] = orig - h;
        const double down = bc_loss(off_policy_adapt(probe, e, cfg), entry.skilled());
        probe.theta[j] = orig;
        grad[j] = (up - down) / (2.0 * h);
    }
    return grad;
}

std::vector<double> meta_gradient(const PolicyParams& theta0, const TaskArchiveEntry& entry,
                                  const MetaConfig& cfg, Rng& rng) {
    if (entry.full_set.empty()) throw std::invalid_argument("meta_gradient: empty full set");
    return meta_gradient(theta0, entry, rng.below(entry.full_set.size()), cfg);
}

namespace {

// Distinct uniform draw of k task indices from [0, n), reported ascending so
// the gradient reduction order is fixed.
std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        std::swap(pool[i], pool[i + rng.below(n - i)]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace

void meta_update(MetaState& state, const MetaConfig& cfg, Rng& rng) {
    cfg.validate();
    if (state.archive.empty()) throw std::invalid_argument("meta_update: empty archive");

    const std::size_t available = state.archive.size();
    const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(cfg.b), available);
    const double step = cfg.kappa / static_cast<double>(available);

    for (int it = 0; it < cfg.i_meta; ++it) {
        const auto tasks = sample_distinct(available, batch, rng);
        std::vector<double> sum(state.theta0.theta.size(), 0.0);
        for (const std::size_t k : tasks) {
            const auto g = meta_gradient(state.theta0, state.archive[k], cfg, rng);
            for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += g[j];
        }
        for (std::size_t j = 0; j < sum.size(); ++j) {
            state.theta0.theta[j] -= step * sum[j];
        }
    }
}

std::vector<int> run_comps_step(MetaState& state, Simulator& sim, const RLConfig& rl_cfg,
                                const MetaConfig& meta_cfg, const EncoderConfig& enc,
                                std::uint64_t env_stream, std::uint64_t act_stream,
                                Rng& meta_rng) {
    TrainResult res = train_task(state.theta0, sim, rl_cfg, enc, env_stream, act_stream);

    TaskArchiveEntry entry;
    entry.task_index = state.completed_tasks();
    entry.full_set = std::move(res.full_set);
    entry.skilled_index = res.skilled_index;
    state.archive.push_back(std::move(entry));

    meta_update(state, meta_cfg, meta_rng);
    return res.episode_rewards;
}

}  // namespace uabs
