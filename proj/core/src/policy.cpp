#include "uabs/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "binio.hpp"

namespace uabs {

std::vector<int> PolicyArch::layer_sizes() const {
    std::vector<int> sizes;
    sizes.reserve(hidden.size() + 2);
    sizes.push_back(input_dim);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(output_dim);
    return sizes;
}

int PolicyArch::param_count() const {
    const auto sizes = layer_sizes();
    int count = 0;
    for (std::size_t l = 1; l < sizes.size(); ++l) {
        count += sizes[l] * sizes[l - 1] + sizes[l];
    }
    return count;
}

void PolicyArch::validate() const {
    if (input_dim < 1) throw std::invalid_argument("PolicyArch: input_dim must be >= 1");
    if (output_dim != kNumActions) {
        throw std::invalid_argument("PolicyArch: output_dim must equal the action count");
    }
    for (const int w : hidden) {
        if (w < 1) throw std::invalid_argument("PolicyArch: hidden widths must be >= 1");
    }
}

PolicyParams init_params(const PolicyArch& arch, Rng& rng) {
    arch.validate();
    PolicyParams p{arch, std::vector<double>(static_cast<std::size_t>(arch.param_count()), 0.0)};
    const auto sizes = arch.layer_sizes();
    std::size_t off = 0;
    for (std::size_t l = 1; l < sizes.size(); ++l) {
        const int fan_in = sizes[l - 1];
        const int fan_out = sizes[l];
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (int i = 0; i < fan_out * fan_in; ++i) {
            p.theta[off++] = rng.uniform(-bound, bound);
        }
        off += static_cast<std::size_t>(fan_out);  // biases stay zero
    }
    return p;
}

namespace {

// Forward pass keeping every activation; acts.front() is the input copy and
// acts.back() holds the raw logits.
void forward(const PolicyParams& p, std::span<const double> features,
             std::vector<std::vector<double>>& acts) {
    const auto sizes = p.arch.layer_sizes();
    if (std::cmp_not_equal(features.size(), sizes.front())) {
        throw std::invalid_argument("policy: feature length does not match input_dim");
    }
    acts.assign(sizes.size(), {});
    acts[0].assign(features.begin(), features.end());

    std::size_t off = 0;
    for (std::size_t l = 1; l < sizes.size(); ++l) {
        const int n_in = sizes[l - 1];
        const int n_out = sizes[l];
        const double* w = p.theta.data() + off;
        const double* b = p.theta.data() + off + static_cast<std::size_t>(n_out) * n_in;
        acts[l].resize(static_cast<std::size_t>(n_out));
        for (int j = 0; j < n_out; ++j) {
            double z = b[j];
            const double* row = w + static_cast<std::size_t>(j) * n_in;
            const double* in = acts[l - 1].data();
            for (int i = 0; i < n_in; ++i) z += row[i] * in[i];
            acts[l][j] = (l + 1 < sizes.size()) ? std::tanh(z) : z;
        }
        off += static_cast<std::size_t>(n_out) * n_in + n_out;
    }
}

std::vector<double> softmax(const std::vector<double>& logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> probs(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - m);
        sum += probs[i];
    }
    for (double& v : probs) v /= sum;
    return probs;
}

}  // namespace

std::vector<double> action_probs(const PolicyParams& p, std::span<const double> features) {
    std::vector<std::vector<double>> acts;
    forward(p, features, acts);
    return softmax(acts.back());
}

ActionSample sample_action(Rng& rng, std::span<const double> probs) {
    const std::size_t idx = rng.categorical(probs);
    return {static_cast<Action>(idx), probs[idx]};
}

std::vector<double> log_prob_grad(const PolicyParams& p, std::span<const double> features,
                                  Action a, double* action_prob) {
    std::vector<std::vector<double>> acts;
    forward(p, features, acts);
    const auto sizes = p.arch.layer_sizes();
    const auto probs = softmax(acts.back());
    const auto a_idx = static_cast<std::size_t>(a);
    if (a_idx >= probs.size()) throw std::invalid_argument("log_prob_grad: invalid action");
    if (action_prob != nullptr) *action_prob = probs[a_idx];

    std::vector<double> grad(p.theta.size(), 0.0);

    // d log pi_a / d logits = onehot(a) - probs
    std::vector<double> delta(probs.size());
    for (std::size_t j = 0; j < probs.size(); ++j) {
        delta[j] = (j == a_idx ? 1.0 : 0.0) - probs[j];
    }

    // Layer parameter offsets, for walking backwards.
    std::vector<std::size_t> offsets(sizes.size(), 0);
    for (std::size_t l = 1; l + 1 < sizes.size(); ++l) {
        offsets[l + 1] = offsets[l] + static_cast<std::size_t>(sizes[l]) * sizes[l - 1] + sizes[l];
    }

    for (std::size_t l = sizes.size() - 1; l >= 1; --l) {
        const int n_in = sizes[l - 1];
        const int n_out = sizes[l];
        const std::size_t off = offsets[l];
        double* gw = grad.data() + off;
        double* gb = grad.data() + off + static_cast<std::size_t>(n_out) * n_in;
        const double* in = acts[l - 1].data();
        for (int j = 0; j < n_out; ++j) {
            double* row = gw + static_cast<std::size_t>(j) * n_in;
            for (int i = 0; i < n_in; ++i) row[i] = delta[static_cast<std::size_t>(j)] * in[i];
            gb[j] = delta[static_cast<std::size_t>(j)];
        }
        if (l == 1) break;

        const double* w = p.theta.data() + off;
        std::vector<double> prev(static_cast<std::size_t>(n_in), 0.0);
        for (int j = 0; j < n_out; ++j) {
            const double* row = w + static_cast<std::size_t>(j) * n_in;
            const double dj = delta[static_cast<std::size_t>(j)];
            for (int i = 0; i < n_in; ++i) prev[static_cast<std::size_t>(i)] += row[i] * dj;
        }
        for (int i = 0; i < n_in; ++i) {
            const double h = acts[l - 1][static_cast<std::size_t>(i)];
            prev[static_cast<std::size_t>(i)] *= 1.0 - h * h;  // tanh'
        }
        delta = std::move(prev);
    }
    return grad;
}

namespace {

constexpr char kCheckpointMagic[8] = {'U', 'A', 'B', 'S', 'P', 'O', 'L', '\0'};
constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

void save_checkpoint(const PolicyParams& p, const std::filesystem::path& path) {
    binio::Writer w;
    w.u32(static_cast<std::uint32_t>(p.arch.input_dim));
    w.u32(static_cast<std::uint32_t>(p.arch.hidden.size()));
    for (const int h : p.arch.hidden) w.u32(static_cast<std::uint32_t>(h));
    w.u32(static_cast<std::uint32_t>(p.arch.output_dim));
    w.u64(p.theta.size());
    for (const double v : p.theta) w.f64(v);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    binio::Writer hdr;
    hdr.u32(kCheckpointVersion);
    out.write(hdr.bytes().data(), static_cast<std::streamsize>(hdr.bytes().size()));
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path.string());
}

PolicyParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
    std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (data.size() < sizeof(kCheckpointMagic) + 4 ||
        std::memcmp(data.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
        throw std::runtime_error("load_checkpoint: not a policy checkpoint: " + path.string());
    }
    binio::Reader r(std::span<const char>(data).subspan(sizeof(kCheckpointMagic)));
    try {
        const std::uint32_t version = r.u32();
        if (version != kCheckpointVersion) {
            throw std::runtime_error("load_checkpoint: unsupported version " +
                                     std::to_string(version));
        }
        PolicyParams p;
        p.arch.input_dim = static_cast<int>(r.u32());
        p.arch.hidden.resize(r.u32());
        for (int& h : p.arch.hidden) h = static_cast<int>(r.u32());
        p.arch.output_dim = static_cast<int>(r.u32());
        p.theta.resize(r.u64());
        for (double& v : p.theta) v = r.f64();
        if (!r.exhausted() || std::cmp_not_equal(p.theta.size(), p.arch.param_count())) {
            throw std::runtime_error("load_checkpoint: corrupt checkpoint: " + path.string());
        }
        return p;
    } catch (const std::out_of_range&) {
        throw std::runtime_error("load_checkpoint: truncated checkpoint: " + path.string());
    }
}

}  // namespace uabs
