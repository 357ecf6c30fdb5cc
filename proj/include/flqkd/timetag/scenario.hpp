#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "flqkd/core_model.hpp"
#include "flqkd/error.hpp"
#include "flqkd/link_budget.hpp"
#include "flqkd/monitor.hpp"

namespace flqkd::timetag {

enum Channel : std::uint8_t { kIdler = 0, kAliceTap = 1, kBobTap = 2 };
inline constexpr std::size_t kNumChannels = 3;

inline const char* channel_name(std::size_t ch) {
    static constexpr std::array<const char*, kNumChannels> names{"idler", "alice_tap", "bob_tap"};
    return ch < kNumChannels ? names[ch] : "unknown";
}

/// Single-photon detector. Dead time is non-paralyzable; a negative
/// dead_time_s selects the default 1 / max_count_rate_hz.
struct DetectorSpec {
    double quantum_efficiency = 0.4;
    double max_count_rate_hz = 4e6;
    double base_jitter_s = 50e-12;
    double saturation_jitter_factor = 0.0;
    double dead_time_s = -1.0;
    double dark_count_rate_hz = 0.0;

    double effective_dead_time_s() const noexcept {
        return dead_time_s >= 0.0 ? dead_time_s : 1.0 / max_count_rate_hz;
    }

    /// Gaussian timing jitter at a given incident rate; grows linearly toward
    /// saturation.
    double jitter_sigma_s(double incident_rate_hz) const noexcept {
        return base_jitter_s * (1.0 + saturation_jitter_factor * incident_rate_hz / max_count_rate_hz);
    }

    /// Fraction of incident events recorded by a non-paralyzable detector.
    double recorded_fraction(double incident_rate_hz) const noexcept {
        return 1.0 / (1.0 + incident_rate_hz * effective_dead_time_s());
    }

    void validate() const {
        flqkd::detail::require<ConfigError>(quantum_efficiency >= 0.0 && quantum_efficiency <= 1.0,
                                     "DetectorSpec: efficiency must lie in [0, 1]");
        flqkd::detail::require<ConfigError>(max_count_rate_hz > 0.0, "DetectorSpec: max count rate must be positive");
        flqkd::detail::require<ConfigError>(base_jitter_s >= 0.0 && saturation_jitter_factor >= 0.0,
                                     "DetectorSpec: jitter parameters must be nonnegative");
        flqkd::detail::require<ConfigError>(dark_count_rate_hz >= 0.0, "DetectorSpec: dark count rate must be nonnegative");
    }
};

/// Physical configuration of the three-detector channel monitor.
///
/// Signal photons leave the SPDC with transmission signal_transmission to the
/// point where they join the ASE. Alice then taps alice_tap_fraction toward
/// her monitor detector (through alice_tap_attenuation_db) and sends the rest
/// through channel_ab. Bob taps bob_tap_fraction of what arrives. Eve's light
/// enters at Bob's terminal and is uncorrelated with the idler.
struct ScenarioSpec {
    SourceSpec source{};
    ModePlan mode_plan{2.24e12, 7e9};
    ChannelSpec channel_ab{};
    double alice_tap_fraction = 0.02;
    double bob_tap_fraction = 0.01;
    double eve_injection_fraction = 0.0;
    std::array<DetectorSpec, kNumChannels> detectors{};
    double alice_tap_attenuation_db = 29.0;
    double bob_tap_attenuation_db = 20.0;
    double signal_transmission = 0.98;
    double idler_transmission = 1.0;
    double alice_delay_s = 12.5e-9;  // tap arrival relative to the idler
    double bob_delay_s = 37.5e-9;
    double duration_s = 1.0;
    double segment_s = 1.0;          // generation unit; fixes the RNG substream layout
    std::uint64_t seed = 1;

    double ase_flux_hz() const {
        return photon_flux_from_power(source.ase_power_w, source.center_wavelength_m);
    }

    void validate() const {
        source.validate();
        for (const auto& d : detectors) d.validate();
        auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
        flqkd::detail::require<ConfigError>(in_unit(alice_tap_fraction) && in_unit(bob_tap_fraction) &&
                                         in_unit(signal_transmission) && in_unit(idler_transmission),
                                     "ScenarioSpec: fractions must lie in [0, 1]");
        flqkd::detail::require<ConfigError>(eve_injection_fraction >= 0.0 && eve_injection_fraction < 1.0,
                                     "ScenarioSpec: injection fraction must lie in [0, 1)");
        flqkd::detail::require<ConfigError>(alice_tap_attenuation_db >= 0.0 && bob_tap_attenuation_db >= 0.0 &&
                                         channel_ab.loss_db >= 0.0,
                                     "ScenarioSpec: losses must be nonnegative");
        flqkd::detail::require<ConfigError>(duration_s > 0.0, "ScenarioSpec: duration must be positive");
        flqkd::detail::require<ConfigError>(segment_s > 0.0, "ScenarioSpec: segment length must be positive");
    }
};

/// Closed-form expected rates of a scenario, before any counting noise.
struct ExpectedRates {
    // Detection probabilities for one pair member reaching each detector.
    double idler_detect_prob = 0.0;
    double alice_signal_detect_prob = 0.0;
    double bob_signal_detect_prob = 0.0;

    // Path efficiencies (tap, attenuation, detector) for any photon in the beam.
    double alice_path_efficiency = 0.0;
    double bob_path_efficiency = 0.0;

    double pair_rate_hz = 0.0;
    double ase_flux_hz = 0.0;

    // Incident detection rates before dead time.
    std::array<double, kNumChannels> incident_hz{};
    double eve_rate_hz = 0.0;
    // Recorded singles after dead time.
    std::array<double, kNumChannels> recorded_hz{};
    std::array<double, kNumChannels> jitter_sigma_s{};

    // Recorded true-coincidence rates (both members survive dead time).
    double true_coincidences_alice_hz = 0.0;
    double true_coincidences_bob_hz = 0.0;

    /// Fraction of true coincidences inside a centered window of the given width.
    double window_capture(Channel data, double window_s) const {
        const double sigma = std::hypot(jitter_sigma_s[kIdler], jitter_sigma_s[data]);
        if (sigma == 0.0) return 1.0;
        return std::erf(0.5 * window_s / (sigma * std::sqrt(2.0)));
    }

    /// The six monitor observables for a coincidence window. With
    /// include_capture the true-coincidence terms are reduced by the jitter
    /// loss outside the window; duration_s is copied into the result.
    CountRates count_rates(double window_s, bool include_capture = false, double duration_s = 0.0) const {
        CountRates r;
        r.s_a = recorded_hz[kAliceTap];
        r.s_b = recorded_hz[kBobTap];
        r.c_ia_acc = recorded_hz[kIdler] * r.s_a * window_s;
        r.c_ib_acc = recorded_hz[kIdler] * r.s_b * window_s;
        const double cap_a = include_capture ? window_capture(kAliceTap, window_s) : 1.0;
        const double cap_b = include_capture ? window_capture(kBobTap, window_s) : 1.0;
        r.c_ia = r.c_ia_acc + true_coincidences_alice_hz * cap_a;
        r.c_ib = r.c_ib_acc + true_coincidences_bob_hz * cap_b;
        r.duration_s = duration_s;
        r.window_s = window_s;
        return r;
    }
};

/// Closed-form rate generator for a scenario; the oracle that Monte Carlo
/// output is compared against.
inline ExpectedRates expected_rates(const ScenarioSpec& sc) {
    sc.validate();
    ExpectedRates e;
    const auto& det = sc.detectors;
    e.pair_rate_hz = sc.source.spdc_pair_rate_hz;
    e.ase_flux_hz = sc.ase_flux_hz();

    e.alice_path_efficiency =
        sc.alice_tap_fraction * transmissivity_from_db(sc.alice_tap_attenuation_db) * det[kAliceTap].quantum_efficiency;
    e.bob_path_efficiency = (1.0 - sc.alice_tap_fraction) * sc.channel_ab.transmissivity() *
                            sc.bob_tap_fraction * transmissivity_from_db(sc.bob_tap_attenuation_db) *
                            det[kBobTap].quantum_efficiency;

    e.idler_detect_prob = sc.idler_transmission * det[kIdler].quantum_efficiency;
    e.alice_signal_detect_prob = sc.signal_transmission * e.alice_path_efficiency;
    e.bob_signal_detect_prob = sc.signal_transmission * e.bob_path_efficiency;

    const double legit_bob = (e.ase_flux_hz + e.pair_rate_hz * sc.signal_transmission) * e.bob_path_efficiency;
    const double phi = sc.eve_injection_fraction;
    e.eve_rate_hz = phi / (1.0 - phi) * legit_bob;

    e.incident_hz[kIdler] = e.pair_rate_hz * e.idler_detect_prob + det[kIdler].dark_count_rate_hz;
    e.incident_hz[kAliceTap] = (e.ase_flux_hz + e.pair_rate_hz * sc.signal_transmission) * e.alice_path_efficiency +
                               det[kAliceTap].dark_count_rate_hz;
    e.incident_hz[kBobTap] = legit_bob + e.eve_rate_hz + det[kBobTap].dark_count_rate_hz;

    std::array<double, kNumChannels> keep{};
    for (std::size_t ch = 0; ch < kNumChannels; ++ch) {
        const double rate = e.incident_hz[ch];
        if (rate > 10.0 * det[ch].max_count_rate_hz) {
            throw ConfigError(std::string("expected_rates: incident rate on ") + channel_name(ch) +
                              " exceeds 10x the detector maximum count rate");
        }
        keep[ch] = det[ch].recorded_fraction(rate);
        e.recorded_hz[ch] = rate * keep[ch];
        e.jitter_sigma_s[ch] = det[ch].jitter_sigma_s(rate);
    }

    e.true_coincidences_alice_hz =
        e.pair_rate_hz * e.idler_detect_prob * e.alice_signal_detect_prob * keep[kIdler] * keep[kAliceTap];
    e.true_coincidences_bob_hz =
        e.pair_rate_hz * e.idler_detect_prob * e.bob_signal_detect_prob * keep[kIdler] * keep[kBobTap];
    return e;
}

}  // namespace flqkd::timetag
