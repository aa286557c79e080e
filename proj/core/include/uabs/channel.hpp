#pragma once

#include <span>
#include <vector>

#include "uabs/geometry.hpp"
#include "uabs/rng.hpp"

namespace uabs {

/// How the LoS/NLoS state of a link is realized.
enum class LinkMode {
    sampled,   ///< independent Bernoulli(p_los) draw per (GUE, step)
    expected,  ///< deterministic excess loss p_los*eta_los + (1-p_los)*eta_nlos
};

/// Air-to-ground link budget. Defaults are the urban preset: alpha, beta and
/// the excess-loss pair are the usual dense-urban constants for elevation
/// dependent LoS models; power, gain and threshold entries follow the urban
/// simulation column.
struct ChannelParams {
    double alpha = 9.61;         ///< LoS-probability environment constant (dimensionless)
    double beta = 0.16;          ///< LoS-probability slope, per degree
    double eta_los_db = 1.0;     ///< excess path loss under LoS
    double eta_nlos_db = 20.0;   ///< excess path loss under NLoS
    double fc_mhz = 30000.0;     ///< carrier frequency
    double ptx_dbm = 20.0;       ///< GUE transmit power
    double gtx_db = 0.0;         ///< transmit gain
    double grx_db = 0.0;         ///< receive gain
    double pnoise_dbm = -100.0;  ///< noise power at the UABS
    double snr_th_db = -10.0;    ///< coverage threshold
    LinkMode link_mode = LinkMode::sampled;

    void validate() const;
};

/// Per-step packet collection cap.
struct RewardParams {
    int c_max = 10;

    void validate() const;
};

/// Elevation angle in degrees of the UABS as seen from a ground position;
/// 90 when the GUE is directly beneath the UABS.
double elevation_angle_deg(Vec2 uabs_pos, double altitude_m, Vec2 gue_pos);

/// LoS probability 1 / (1 + alpha * exp(-beta * (theta - alpha))).
double los_probability(double theta_deg, const ChannelParams& p);

/// Path loss in dB: 20 log10(f_c[MHz]) + 20 log10(d[m]) - 27.55 + eta.
/// Throws std::invalid_argument for non-positive distances.
double path_loss_db(double fc_mhz, double distance_m, double eta_db);

/// Link SNR in dB: (P_tx + G_tx + G_rx - L) - P_noise.
double snr_db(const ChannelParams& p, double path_loss_value_db);

/// Coverage test, boundary inclusive.
inline bool covered(double snr_value_db, double snr_threshold_db) {
    return snr_value_db >= snr_threshold_db;
}

/// Excess loss of one link realization. Sampled mode draws the LoS state from
/// `rng`; expected mode is deterministic and never touches it.
double excess_loss_db(Rng& rng, double p_los, const ChannelParams& p);

/// SNR of the UABS-GUE link for the given geometry. Distance is the 3-D slant
/// range between the UABS at `area.uabs_altitude` and the GUE on the ground.
double link_snr_db(const ChannelParams& p, const AreaSpec& area, Vec2 uabs_pos,
                   Vec2 gue_pos, Rng& rng);

struct CollectResult {
    int reward = 0;
    std::vector<int> served;  ///< ascending GUE indices, subset of eligible
};

/// Capped packet collection: all eligible GUEs are served when they fit under
/// c_max, otherwise a uniform random c_max-subset is drawn (seeded shuffle).
CollectResult collect_reward(std::span<const int> eligible, const RewardParams& rew, Rng& rng);

}  // namespace uabs
