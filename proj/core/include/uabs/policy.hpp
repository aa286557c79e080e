#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "uabs/env.hpp"
#include "uabs/rng.hpp"

namespace uabs {

/// Probabilities are floored at this value before entering a logarithm in any
/// loss, so a near-deterministic policy cannot produce infinities.
inline constexpr double kProbFloor = 1e-30;

/// Feed-forward scorer shape: input -> tanh hidden layers -> softmax over the
/// nine actions.
struct PolicyArch {
    int input_dim = 0;
    std::vector<int> hidden = {64};
    int output_dim = kNumActions;

    /// [input_dim, hidden..., output_dim]
    std::vector<int> layer_sizes() const;
    int param_count() const;
    void validate() const;

    bool operator==(const PolicyArch&) const = default;
};

/// Flat parameter vector over the architecture. Layout per layer: weights
/// row-major (out x in), then biases.
struct PolicyParams {
    PolicyArch arch;
    std::vector<double> theta;
};

/// Fan-balanced uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
PolicyParams init_params(const PolicyArch& arch, Rng& rng);

/// Action distribution for a feature vector. Softmax with max-subtraction;
/// entries are positive and sum to one. Throws on dimension mismatch.
std::vector<double> action_probs(const PolicyParams& p, std::span<const double> features);

struct ActionSample {
    Action action;
    double prob;  ///< probability of the drawn action under the given policy
};

ActionSample sample_action(Rng& rng, std::span<const double> probs);

/// Exact gradient of log pi(a | features) with respect to every parameter.
/// When `action_prob` is non-null it receives pi(a | features) from the same
/// forward pass.
std::vector<double> log_prob_grad(const PolicyParams& p, std::span<const double> features,
                                  Action a, double* action_prob = nullptr);

/// Versioned little-endian checkpoint; round-trips bit-exactly.
void save_checkpoint(const PolicyParams& p, const std::filesystem::path& path);
PolicyParams load_checkpoint(const std::filesystem::path& path);

}  // namespace uabs
