#pragma once

// Shared helpers for the test suites. The numeric differentiation here is the
// independent oracle for every analytic gradient in the library: it only ever
// calls the forward/loss path under test, never the backward code.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "uabs/policy.hpp"
#include "uabs/reinforce.hpp"
#include "uabs/rng.hpp"

namespace testsupport {

/// Central finite differences of a scalar function of a parameter vector.
inline std::vector<double> numeric_gradient(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> theta,
    double h = 1e-5) {
    std::vector<double> grad(theta.size());
    for (std::size_t j = 0; j < theta.size(); ++j) {
        const double orig = theta[j];
        theta[j] = orig + h;
        const double up = f(theta);
        theta[j] = orig - h;
        const double down = f(theta);
        theta[j] = orig;
        grad[j] = (up - down) / (2.0 * h);
    }
    return grad;
}

/// |a-b| relative to max(1, |a|, |b|); robust near zero.
inline double rel_err(double a, double b) {
    return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

inline double max_rel_err(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, rel_err(a[i], b[i]));
    return worst;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    const double na = std::sqrt(dot(a, a));
    const double nb = std::sqrt(dot(b, b));
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

/// Policy with every parameter (including biases) drawn uniformly, for
/// gradient checks at generic points.
inline uabs::PolicyParams random_policy(const uabs::PolicyArch& arch, uabs::Rng& rng,
                                        double scale = 0.5) {
    uabs::PolicyParams p{arch, std::vector<double>(static_cast<std::size_t>(arch.param_count()))};
    for (double& v : p.theta) v = rng.uniform(-scale, scale);
    return p;
}

inline std::vector<double> random_features(int dim, uabs::Rng& rng) {
    std::vector<double> f(static_cast<std::size_t>(dim));
    for (double& v : f) v = rng.uniform(-1.0, 1.0);
    return f;
}

/// Synthetic episode: random features and rewards, actions sampled from the
/// given policy with their true probabilities recorded, exactly as a rollout
/// would store them.
inline uabs::Episode random_episode(const uabs::PolicyParams& p, int steps, uabs::Rng& rng,
                                    int max_reward = 3) {
    uabs::Episode e;
    for (int t = 0; t < steps; ++t) {
        uabs::StepRecord rec;
        rec.features = random_features(p.arch.input_dim, rng);
        const auto probs = uabs::action_probs(p, rec.features);
        const auto sample = uabs::sample_action(rng, probs);
        rec.action = sample.action;
        rec.behavior_prob = sample.prob;
        rec.reward = rng.uniform_int(0, max_reward);
        e.total_reward += rec.reward;
        e.steps.push_back(std::move(rec));
    }
    return e;
}

/// Unique scratch file that removes itself.
class TempFile {
public:
    explicit TempFile(const std::string& stem) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                (stem + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    }
    ~TempFile() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace testsupport
