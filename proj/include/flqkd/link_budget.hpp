#pragma once

#include <cmath>
#include <initializer_list>
#include <span>
#include <string>

#include "flqkd/error.hpp"

namespace flqkd {

/// Linear power transmissivity of a lossy element, 10^(-loss_db/10).
inline double transmissivity_from_db(double loss_db) {
    detail::require(loss_db >= 0.0, "transmissivity_from_db: loss must be nonnegative");
    return std::pow(10.0, -loss_db / 10.0);
}

/// Total transmissivity of elements in series. An empty chain is lossless.
inline double cascade(std::span<const double> transmissivities) {
    double total = 1.0;
    for (double t : transmissivities) {
        detail::require(t > 0.0 && t <= 1.0, "cascade: transmissivity must lie in (0, 1]");
        total *= t;
    }
    return total;
}

inline double cascade(std::initializer_list<double> transmissivities) {
    return cascade(std::span<const double>(transmissivities.begin(), transmissivities.size()));
}

enum class LinkDirection { AliceToBob, BobToAlice };

struct ChannelSpec {
    double loss_db = 10.0;
    LinkDirection label = LinkDirection::AliceToBob;

    double transmissivity() const { return transmissivity_from_db(loss_db); }
};

struct AmplifierSpec {
    double gain_db = 30.0;
    double spontaneous_emission_factor = 1.0;  // n_sp

    double gain_linear() const { return std::pow(10.0, gain_db / 10.0); }

    void validate() const {
        detail::require(gain_db >= 0.0, "AmplifierSpec: gain must be at least unity");
        detail::require(spontaneous_emission_factor >= 1.0, "AmplifierSpec: n_sp must be >= 1");
    }
};

/// ASE photons per mode added by a phase-insensitive amplifier, n_sp (G - 1).
inline double amplifier_ase_photons_per_mode(const AmplifierSpec& amp) {
    amp.validate();
    return amp.spontaneous_emission_factor * (amp.gain_linear() - 1.0);
}

/// One-parameter receiver model: SNR per transmitted photon plus a residual
/// error floor from phase noise and servo imperfections.
struct BerModelParams {
    double snr_per_photon = 0.0;   // kappa
    double impairment_floor = 0.0;

    void validate() const {
        detail::require(snr_per_photon > 0.0, "BerModelParams: snr_per_photon must be positive");
        detail::require(impairment_floor >= 0.0 && impairment_floor < 0.5,
                        "BerModelParams: impairment_floor must lie in [0, 0.5)");
    }
};

/// P_e = floor + (1 - 2 floor) erfc(sqrt(kappa n)) / 2.
inline double ber_model(double photons_per_bit, const BerModelParams& params) {
    detail::require(photons_per_bit >= 0.0, "ber_model: photons_per_bit must be nonnegative");
    params.validate();
    const double floor = params.impairment_floor;
    return floor + (1.0 - 2.0 * floor) * 0.5 *
                       std::erfc(std::sqrt(params.snr_per_photon * photons_per_bit));
}

/// Solves for kappa such that ber_model(anchor_n) == anchor_p_e. The model is
/// strictly decreasing in kappa, so bisection on a bracketing interval is
/// guaranteed to converge.
inline double calibrate_ber(double anchor_photons_per_bit, double anchor_p_e,
                            double impairment_floor = 0.0) {
    detail::require(anchor_photons_per_bit > 0.0, "calibrate_ber: anchor photons must be positive");
    detail::require(anchor_p_e > 0.0 && anchor_p_e < 0.5, "calibrate_ber: anchor P_e must lie in (0, 0.5)");
    detail::require(impairment_floor >= 0.0 && impairment_floor < 0.5,
                    "calibrate_ber: impairment_floor must lie in [0, 0.5)");
    if (anchor_p_e <= impairment_floor) {
        throw NoSolutionError("calibrate_ber: anchor P_e is at or below the impairment floor");
    }

    auto residual = [&](double kappa) {
        return impairment_floor + (1.0 - 2.0 * impairment_floor) * 0.5 *
                                      std::erfc(std::sqrt(kappa * anchor_photons_per_bit)) -
               anchor_p_e;
    };

    double lo = 0.0;
    double hi = 1.0 / anchor_photons_per_bit;
    while (residual(hi) > 0.0) {
        hi *= 2.0;
        if (!std::isfinite(hi) || hi > 1e300) {
            throw NoSolutionError("calibrate_ber: failed to bracket kappa");
        }
    }
    for (int i = 0; i < 400 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (residual(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace flqkd
