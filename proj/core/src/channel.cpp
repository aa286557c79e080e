#include "uabs/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace uabs {

void ChannelParams::validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0)) {
        throw std::invalid_argument("ChannelParams: alpha and beta must be positive");
    }
    if (!(fc_mhz > 0.0)) {
        throw std::invalid_argument("ChannelParams: carrier frequency must be positive");
    }
    if (!(eta_nlos_db >= eta_los_db) || !(eta_los_db >= 0.0)) {
        throw std::invalid_argument("ChannelParams: need eta_nlos >= eta_los >= 0");
    }
}

void RewardParams::validate() const {
    if (c_max < 1) throw std::invalid_argument("RewardParams: c_max must be >= 1");
}

double elevation_angle_deg(Vec2 uabs_pos, double altitude_m, Vec2 gue_pos) {
    const double horizontal = distance(uabs_pos, gue_pos);
    return std::atan2(altitude_m, horizontal) * 180.0 / std::numbers::pi;
}

double los_probability(double theta_deg, const ChannelParams& p) {
    return 1.0 / (1.0 + p.alpha * std::exp(-p.beta * (theta_deg - p.alpha)));
}

double path_loss_db(double fc_mhz, double distance_m, double eta_db) {
    if (!(distance_m > 0.0)) {
        throw std::invalid_argument("path_loss_db: distance must be positive");
    }
    return 20.0 * std::log10(fc_mhz) + 20.0 * std::log10(distance_m) - 27.55 + eta_db;
}

double snr_db(const ChannelParams& p, double path_loss_value_db) {
    return (p.ptx_dbm + p.gtx_db + p.grx_db - path_loss_value_db) - p.pnoise_dbm;
}

double excess_loss_db(Rng& rng, double p_los, const ChannelParams& p) {
    if (p.link_mode == LinkMode::expected) {
        return p_los * p.eta_los_db + (1.0 - p_los) * p.eta_nlos_db;
    }
    return rng.bernoulli(p_los) ? p.eta_los_db : p.eta_nlos_db;
}

double link_snr_db(const ChannelParams& p, const AreaSpec& area, Vec2 uabs_pos,
                   Vec2 gue_pos, Rng& rng) {
    const double theta = elevation_angle_deg(uabs_pos, area.uabs_altitude, gue_pos);
    const double eta = excess_loss_db(rng, los_probability(theta, p), p);
    const double slant = std::hypot(distance(uabs_pos, gue_pos), area.uabs_altitude);
    return snr_db(p, path_loss_db(p.fc_mhz, slant, eta));
}

CollectResult collect_reward(std::span<const int> eligible, const RewardParams& rew, Rng& rng) {
    CollectResult out;
    out.served.assign(eligible.begin(), eligible.end());
    if (std::cmp_greater(eligible.size(), rew.c_max)) {
        rng.shuffle(out.served);
        out.served.resize(static_cast<std::size_t>(rew.c_max));
        std::sort(out.served.begin(), out.served.end());
    }
    out.reward = static_cast<int>(out.served.size());
    return out;
}

}  // namespace uabs
