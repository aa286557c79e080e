#include <benchmark/benchmark.h>

#include "uabs/comps.hpp"
#include "uabs/config.hpp"
#include "uabs/env.hpp"
#include "uabs/harness.hpp"
#include "uabs/policy.hpp"
#include "uabs/reinforce.hpp"

namespace {

uabs::PolicyParams make_policy(int knn) {
    const uabs::PolicyArch arch{2 + 3 * knn, {64}, uabs::kNumActions};
    uabs::Rng rng(7);
    return uabs::init_params(arch, rng);
}

std::vector<double> make_features(int dim) {
    uabs::Rng rng(11);
    std::vector<double> f(static_cast<std::size_t>(dim));
    for (double& v : f) v = rng.uniform(-1.0, 1.0);
    return f;
}

void PolicyForward(benchmark::State& state) {
    const auto p = make_policy(8);
    const auto f = make_features(p.arch.input_dim);
    for (auto _ : state) {
        benchmark::DoNotOptimize(uabs::action_probs(p, f));
    }
}
BENCHMARK(PolicyForward);

void LogProbGrad(benchmark::State& state) {
    const auto p = make_policy(8);
    const auto f = make_features(p.arch.input_dim);
    for (auto _ : state) {
        benchmark::DoNotOptimize(uabs::log_prob_grad(p, f, uabs::Action::up));
    }
}
BENCHMARK(LogProbGrad);

void EnvStep(benchmark::State& state) {
    auto [cw, ccw] = uabs::make_toy_tasks();
    uabs::ChannelParams chan = uabs::toy_config().channel;
    uabs::Simulator sim(cw, chan, uabs::RewardParams{});
    uabs::Rng rng(3);
    uabs::WorldState ws = sim.reset(rng);
    for (auto _ : state) {
        auto res = sim.step(ws, uabs::Action::up_right, rng);
        benchmark::DoNotOptimize(res.reward);
        if (res.next.t >= sim.task().horizon) {
            ws = sim.reset(rng);
        } else {
            ws = std::move(res.next);
        }
    }
}
BENCHMARK(EnvStep);

void ToyEpisode(benchmark::State& state) {
    auto [cw, ccw] = uabs::make_toy_tasks();
    uabs::Simulator sim(cw, uabs::toy_config().channel, uabs::RewardParams{});
    const auto p = make_policy(8);
    std::uint64_t n = 0;
    for (auto _ : state) {
        uabs::Rng env_rng(uabs::derive_key(1, "env", n));
        uabs::Rng act_rng(uabs::derive_key(1, "act", n));
        ++n;
        benchmark::DoNotOptimize(
            uabs::rollout_episode(p, sim, uabs::EncoderConfig{}, env_rng, act_rng));
    }
}
BENCHMARK(ToyEpisode)->Unit(benchmark::kMicrosecond);

void OffPolicyAdapt(benchmark::State& state) {
    auto [cw, ccw] = uabs::make_toy_tasks();
    uabs::Simulator sim(cw, uabs::toy_config().channel, uabs::RewardParams{});
    const auto p = make_policy(8);
    uabs::Rng env_rng(uabs::derive_key(1, "env", 0));
    uabs::Rng act_rng(uabs::derive_key(1, "act", 0));
    const auto episode = uabs::rollout_episode(p, sim, uabs::EncoderConfig{}, env_rng, act_rng);
    const uabs::MetaConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(uabs::off_policy_adapt(p, episode, cfg));
    }
}
BENCHMARK(OffPolicyAdapt)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
