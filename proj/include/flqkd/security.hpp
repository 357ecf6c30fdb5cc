#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "flqkd/error.hpp"

namespace flqkd {

/// h2(p) in bits; h2(0) = h2(1) = 0.
inline double binary_entropy(double p) {
    detail::require(p >= 0.0 && p <= 1.0, "binary_entropy: p must lie in [0, 1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    const double q = 1.0 - p;
    return -(p * std::log2(p) + q * std::log1p(-p) / std::log(2.0));
}

/// Alice-Bob mutual information per use of a binary symmetric channel.
inline double mutual_info_ab(double p_e) {
    detail::require(p_e >= 0.0 && p_e <= 0.5,
                    "mutual_info_ab: P_e must lie in [0, 0.5]; flip bits above 0.5");
    return 1.0 - binary_entropy(p_e);
}

/// Two pure BPSK states with overlap s = exp(-2 N_E), N_E = scale f_E n.
/// Holevo information h2((1 - s)/2).
struct PureStateBpskBound {
    /// Default scale puts the anchored SKR curve through 1.3 Gbit/s at 20
    /// photons per bit with P_e = 0.2433 when f_E^UB = 0.3%.
    static constexpr double kDefaultEvePhotonScale = 2.1205e-3;

    double eve_photon_scale = kDefaultEvePhotonScale;

    double operator()(double f_e, double photons_per_bit) const {
        const double eve_photons = eve_photon_scale * f_e * photons_per_bit;
        const double overlap = std::exp(-2.0 * eve_photons);
        if (overlap > 0.5) {
            return binary_entropy(std::clamp(-0.5 * std::expm1(-2.0 * eve_photons), 0.0, 0.5));
        }
        // 1 - h2((1 - s)/2) = [(1 + s) log(1 + s) + (1 - s) log(1 - s)] / (2 ln 2),
        // which stays accurate as the states become orthogonal (s -> 0).
        const double deficit =
            ((1.0 + overlap) * std::log1p(overlap) + (1.0 - overlap) * std::log1p(-overlap)) / (2.0 * std::log(2.0));
        return std::clamp(1.0 - deficit, 0.0, 1.0);
    }
};

/// Type-erased Holevo-bound model. Any implementation must return 0 at
/// f_E = 0, stay within [0, 1], and be nondecreasing in both arguments.
class ChiModel {
public:
    using Fn = std::function<double(double, double)>;

    ChiModel() : ChiModel(pure_state_bpsk()) {}
    ChiModel(std::string name, Fn fn, double scale = 0.0)
        : name_(std::move(name)), fn_(std::move(fn)), scale_(scale) {}

    static ChiModel pure_state_bpsk(double eve_photon_scale = PureStateBpskBound::kDefaultEvePhotonScale) {
        detail::require(eve_photon_scale >= 0.0, "pure_state_bpsk: scale must be nonnegative");
        return {"pure-state-bpsk", PureStateBpskBound{eve_photon_scale}, eve_photon_scale};
    }

    const std::string& name() const noexcept { return name_; }
    /// The model's single scale parameter, kept for config echo.
    double scale() const noexcept { return scale_; }
    double operator()(double f_e, double photons_per_bit) const { return fn_(f_e, photons_per_bit); }

private:
    std::string name_;
    Fn fn_;
    double scale_;
};

/// Upper bound on Eve's Holevo information, bits per use.
inline double chi_be(double f_e, double photons_per_bit, const ChiModel& model = {}) {
    detail::require(f_e >= 0.0 && f_e <= 1.0, "chi_be: f_E must lie in [0, 1]");
    detail::require(photons_per_bit >= 0.0, "chi_be: photons_per_bit must be nonnegative");
    if (f_e == 0.0) return 0.0;
    return model(f_e, photons_per_bit);
}

struct SecurityParams {
    double reconciliation_efficiency = 0.94;  // beta
    double bit_rate_hz = 7e9;                 // R
    double injection_bound = 0.003;           // f_E^UB
    ChiModel chi_model{};

    void validate() const {
        detail::require(reconciliation_efficiency > 0.0 && reconciliation_efficiency <= 1.0,
                        "SecurityParams: beta must lie in (0, 1]");
        detail::require(bit_rate_hz > 0.0, "SecurityParams: bit rate must be positive");
        detail::require(injection_bound >= 0.0 && injection_bound <= 1.0,
                        "SecurityParams: f_E^UB must lie in [0, 1]");
    }
};

/// -log2(1 - eta): repeaterless secret-key capacity per mode.
inline double rate_loss_bound_per_mode(double transmissivity) {
    detail::require(transmissivity > 0.0 && transmissivity < 1.0,
                    "rate_loss_bound_per_mode: transmissivity must lie in (0, 1)");
    return -std::log1p(-transmissivity) / std::log(2.0);
}

inline double bits_per_mode(double skr_bits_per_s, double bit_rate_hz, double modes_per_bit) {
    detail::require(bit_rate_hz > 0.0 && modes_per_bit > 0.0,
                    "bits_per_mode: bit rate and modes per bit must be positive");
    return skr_bits_per_s / (bit_rate_hz * modes_per_bit);
}

struct SkrReport {
    double photons_per_bit = 0.0;
    double p_e = 0.5;
    double i_ab = 0.0;
    double chi_be = 0.0;
    double skr_bits_per_s = 0.0;
    double skr_clamped_bits_per_s = 0.0;
    double bits_per_mode = 0.0;
    double rate_loss_bound_bits_per_mode = 0.0;

    bool respects_rate_loss_bound() const noexcept {
        return bits_per_mode <= rate_loss_bound_bits_per_mode;
    }
};

/// SKR = R (beta I_AB(P_e) - chi_BE(f_E^UB)). The raw value may be negative.
inline SkrReport skr(const SecurityParams& security, double p_e, double photons_per_bit,
                     double modes_per_bit, double transmissivity) {
    security.validate();
    SkrReport r;
    r.photons_per_bit = photons_per_bit;
    r.p_e = p_e;
    r.i_ab = mutual_info_ab(p_e);
    r.chi_be = chi_be(security.injection_bound, photons_per_bit, security.chi_model);
    r.skr_bits_per_s =
        security.bit_rate_hz * (security.reconciliation_efficiency * r.i_ab - r.chi_be);
    r.skr_clamped_bits_per_s = std::max(0.0, r.skr_bits_per_s);
    r.bits_per_mode = bits_per_mode(r.skr_clamped_bits_per_s, security.bit_rate_hz, modes_per_bit);
    r.rate_loss_bound_bits_per_mode = rate_loss_bound_per_mode(transmissivity);
    return r;
}

/// The bit error probability at which the SKR formula yields target_skr at
/// the given photon number. SKR is strictly decreasing in P_e on [0, 0.5].
inline double solve_error_probability_for_skr(const SecurityParams& security,
                                              double photons_per_bit, double target_skr) {
    security.validate();
    const double chi = chi_be(security.injection_bound, photons_per_bit, security.chi_model);
    auto rate = [&](double p) {
        return security.bit_rate_hz *
               (security.reconciliation_efficiency * mutual_info_ab(p) - chi);
    };
    if (target_skr > rate(0.0) || target_skr < rate(0.5)) {
        throw NoSolutionError("solve_error_probability_for_skr: target SKR is not attainable");
    }
    double lo = 0.0;
    double hi = 0.5;
    for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
        const double mid = 0.5 * (lo + hi);
        (rate(mid) > target_skr ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace flqkd
