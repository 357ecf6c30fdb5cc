#pragma once

#include <cmath>
#include <string>

#include "flqkd/constants.hpp"
#include "flqkd/error.hpp"

namespace flqkd {

/// Below this bandwidth-to-bit-rate ratio a mode plan is flagged as
/// marginal: the multimode assumption M >> 1 no longer holds well.
inline constexpr double kMarginalModeRatio = 10.0;

/// Number of optical modes carried per bit, M = T W = W / R.
/// Kept real-valued; M is not rounded.
inline double modes_per_bit(double bandwidth_hz, double bit_rate_hz) {
    detail::require(bandwidth_hz > 0.0 && bit_rate_hz > 0.0,
                    "modes_per_bit: bandwidth and bit rate must be positive");
    detail::require(bandwidth_hz > bit_rate_hz,
                    "modes_per_bit: optical bandwidth must exceed the bit rate");
    return bandwidth_hz / bit_rate_hz;
}

/// Photons per second carried by an optical power at a given wavelength.
inline double photon_flux_from_power(double power_w, double wavelength_m) {
    detail::require(power_w >= 0.0, "photon_flux_from_power: negative power");
    detail::require(wavelength_m > 0.0, "photon_flux_from_power: wavelength must be positive");
    return power_w * wavelength_m / constants::planck_times_c_j_m;
}

/// Inverse of photon_flux_from_power.
inline double power_from_photon_flux(double photons_per_s, double wavelength_m) {
    detail::require(photons_per_s >= 0.0, "power_from_photon_flux: negative flux");
    detail::require(wavelength_m > 0.0, "power_from_photon_flux: wavelength must be positive");
    return photons_per_s * constants::planck_times_c_j_m / wavelength_m;
}

/// Mean photon number per optical mode.
inline double per_mode_brightness(double photons_per_bit, double modes_per_bit) {
    detail::require(modes_per_bit > 0.0, "per_mode_brightness: modes_per_bit must be positive");
    detail::require(photons_per_bit >= 0.0, "per_mode_brightness: negative photon number");
    return photons_per_bit / modes_per_bit;
}

/// Optical bandwidth W, bit rate R and the derived quantities T = 1/R and M = W/R.
class ModePlan {
public:
    ModePlan(double bandwidth_hz, double bit_rate_hz)
        : bandwidth_hz_(bandwidth_hz),
          bit_rate_hz_(bit_rate_hz),
          modes_per_bit_(flqkd::modes_per_bit(bandwidth_hz, bit_rate_hz)),
          bit_duration_s_(1.0 / bit_rate_hz) {}

    double bandwidth_hz() const noexcept { return bandwidth_hz_; }
    double bit_rate_hz() const noexcept { return bit_rate_hz_; }
    double bit_duration_s() const noexcept { return bit_duration_s_; }
    double modes_per_bit() const noexcept { return modes_per_bit_; }

    bool is_marginal() const noexcept { return modes_per_bit_ < kMarginalModeRatio; }

private:
    double bandwidth_hz_;
    double bit_rate_hz_;
    double modes_per_bit_;
    double bit_duration_s_;
};

/// Alice's transmitter: broadband ASE plus the SPDC pair source used by the
/// channel monitor.
struct SourceSpec {
    double ase_power_w = 0.0;         // ASE power in the beam launched toward Bob
    double spdc_pair_rate_hz = 0.0;   // generated signal-idler pairs per second
    double center_wavelength_m = 1550e-9;
    double photons_per_bit = 0.0;     // mean transmitted photons per bit duration

    /// Mean transmitted photons per bit implied by the ASE power.
    double implied_photons_per_bit(const ModePlan& plan) const {
        return photon_flux_from_power(ase_power_w, center_wavelength_m) * plan.bit_duration_s();
    }

    void validate() const {
        detail::require<ConfigError>(ase_power_w >= 0.0 && spdc_pair_rate_hz >= 0.0 &&
                                         center_wavelength_m > 0.0 && photons_per_bit >= 0.0,
                                     "SourceSpec: fields must be nonnegative");
    }

    /// Sets ase_power_w so that photons_per_bit and the power agree.
    static SourceSpec from_photons_per_bit(double photons_per_bit, const ModePlan& plan,
                                           double spdc_pair_rate_hz,
                                           double wavelength_m = 1550e-9) {
        SourceSpec s;
        s.photons_per_bit = photons_per_bit;
        s.spdc_pair_rate_hz = spdc_pair_rate_hz;
        s.center_wavelength_m = wavelength_m;
        s.ase_power_w = power_from_photon_flux(photons_per_bit * plan.bit_rate_hz(), wavelength_m);
        return s;
    }
};

}  // namespace flqkd
