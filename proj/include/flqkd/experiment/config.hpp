#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flqkd/error.hpp"
#include "flqkd/link_budget.hpp"
#include "flqkd/security.hpp"
#include "flqkd/timetag/histogram.hpp"
#include "flqkd/timetag/scenario.hpp"

namespace flqkd::experiment {

using json = nlohmann::ordered_json;

/// How the receiver model is pinned down: an explicit kappa, an anchor
/// (photons per bit, P_e), or an anchor (photons per bit, SKR) whose P_e is
/// solved from the SKR formula first.
struct BerCalibration {
    std::optional<double> snr_per_photon;
    double impairment_floor = 0.0;
    std::optional<double> anchor_photons_per_bit;
    std::optional<double> anchor_p_e;
    std::optional<double> anchor_skr_bits_per_s;
};

struct CampaignSpec {
    std::size_t n_measurements = 54;
    double measurement_duration_s = 60.0;
    double sigma_multiplier = 3.0;
};

struct ReportSpec {
    double photons_per_bit = 20.0;
};

struct ExperimentConfig {
    timetag::ScenarioSpec scenario{};
    timetag::MonitorAnalysis analysis{};
    SecurityParams security{};
    BerCalibration ber{};
    std::vector<double> photons_per_bit_grid{20.0};
    std::vector<double> window_grid_s{3.2e-9};
    CampaignSpec campaign{};
    ReportSpec report{};
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    unsigned workers = 1;

    void validate() const {
        scenario.validate();
        security.validate();
        auto nonnegative = [](const std::vector<double>& v) {
            if (v.empty()) return false;
            for (double x : v) {
                if (!(x >= 0.0)) return false;
            }
            return true;
        };
        flqkd::detail::require<ConfigError>(nonnegative(photons_per_bit_grid), "config: photons_per_bit grid must be nonempty and nonnegative");
        flqkd::detail::require<ConfigError>(nonnegative(window_grid_s), "config: window grid must be nonempty and nonnegative");
        for (double w : window_grid_s) flqkd::detail::require<ConfigError>(w > 0.0, "config: windows must be positive");
        flqkd::detail::require<ConfigError>(campaign.measurement_duration_s > 0.0, "config: campaign duration must be positive");
        flqkd::detail::require<ConfigError>(campaign.sigma_multiplier > 0.0, "config: sigma multiplier must be positive");
    }
};

namespace internal {

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

template <typename T>
void read(const json& j, const char* key, std::optional<T>& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <typename T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

inline std::vector<double> read_grid(const json& j) {
    if (j.is_array()) return j.get<std::vector<double>>();
    if (j.is_object()) {
        const double start = j.at("start").get<double>();
        const double stop = j.at("stop").get<double>();
        const auto count = j.at("count").get<std::size_t>();
        flqkd::detail::require<ConfigError>(count >= 1, "config: grid count must be at least 1");
        std::vector<double> out(count);
        for (std::size_t i = 0; i < count; ++i) {
            out[i] = count == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
        }
        return out;
    }
    throw ConfigError("config: grid must be an array or {start, stop, count}");
}

inline json detector_to_json(const timetag::DetectorSpec& d) {
    return {{"quantum_efficiency", d.quantum_efficiency},
            {"max_count_rate_hz", d.max_count_rate_hz},
            {"base_jitter_s", d.base_jitter_s},
            {"saturation_jitter_factor", d.saturation_jitter_factor},
            {"dead_time_s", d.effective_dead_time_s()},
            {"dark_count_rate_hz", d.dark_count_rate_hz}};
}

inline void detector_from_json(const json& j, timetag::DetectorSpec& d) {
    read(j, "quantum_efficiency", d.quantum_efficiency);
    read(j, "max_count_rate_hz", d.max_count_rate_hz);
    read(j, "base_jitter_s", d.base_jitter_s);
    read(j, "saturation_jitter_factor", d.saturation_jitter_factor);
    read(j, "dead_time_s", d.dead_time_s);
    read(j, "dark_count_rate_hz", d.dark_count_rate_hz);
}

}  // namespace internal

inline json scenario_to_json(const timetag::ScenarioSpec& s) {
    using internal::detector_to_json;
    return {
        {"source",
         {{"ase_power_w", s.source.ase_power_w},
          {"spdc_pair_rate_hz", s.source.spdc_pair_rate_hz},
          {"center_wavelength_m", s.source.center_wavelength_m},
          {"photons_per_bit", s.source.photons_per_bit}}},
        {"mode_plan", {{"bandwidth_hz", s.mode_plan.bandwidth_hz()}, {"bit_rate_hz", s.mode_plan.bit_rate_hz()}}},
        {"channel_ab_loss_db", s.channel_ab.loss_db},
        {"alice_tap_fraction", s.alice_tap_fraction},
        {"bob_tap_fraction", s.bob_tap_fraction},
        {"eve_injection_fraction", s.eve_injection_fraction},
        {"alice_tap_attenuation_db", s.alice_tap_attenuation_db},
        {"bob_tap_attenuation_db", s.bob_tap_attenuation_db},
        {"signal_transmission", s.signal_transmission},
        {"idler_transmission", s.idler_transmission},
        {"alice_delay_s", s.alice_delay_s},
        {"bob_delay_s", s.bob_delay_s},
        {"duration_s", s.duration_s},
        {"segment_s", s.segment_s},
        {"seed", s.seed},
        {"detectors",
         {{"idler", detector_to_json(s.detectors[timetag::kIdler])},
          {"alice_tap", detector_to_json(s.detectors[timetag::kAliceTap])},
          {"bob_tap", detector_to_json(s.detectors[timetag::kBobTap])}}},
    };
}

inline timetag::ScenarioSpec scenario_from_json(const json& j) {
    using internal::read;
    timetag::ScenarioSpec s;
    if (j.contains("source")) {
        const auto& src = j.at("source");
        read(src, "ase_power_w", s.source.ase_power_w);
        read(src, "spdc_pair_rate_hz", s.source.spdc_pair_rate_hz);
        read(src, "center_wavelength_m", s.source.center_wavelength_m);
        read(src, "photons_per_bit", s.source.photons_per_bit);
        if (src.contains("spdc_power_w")) {
            s.source.spdc_pair_rate_hz =
                photon_flux_from_power(src.at("spdc_power_w").get<double>(), s.source.center_wavelength_m);
        }
    }
    if (j.contains("mode_plan")) {
        const auto& mp = j.at("mode_plan");
        s.mode_plan = ModePlan(mp.value("bandwidth_hz", s.mode_plan.bandwidth_hz()),
                               mp.value("bit_rate_hz", s.mode_plan.bit_rate_hz()));
    }
    read(j, "channel_ab_loss_db", s.channel_ab.loss_db);
    read(j, "alice_tap_fraction", s.alice_tap_fraction);
    read(j, "bob_tap_fraction", s.bob_tap_fraction);
    read(j, "eve_injection_fraction", s.eve_injection_fraction);
    read(j, "alice_tap_attenuation_db", s.alice_tap_attenuation_db);
    read(j, "bob_tap_attenuation_db", s.bob_tap_attenuation_db);
    read(j, "signal_transmission", s.signal_transmission);
    read(j, "idler_transmission", s.idler_transmission);
    read(j, "alice_delay_s", s.alice_delay_s);
    read(j, "bob_delay_s", s.bob_delay_s);
    read(j, "duration_s", s.duration_s);
    read(j, "segment_s", s.segment_s);
    read(j, "seed", s.seed);
    if (j.contains("detectors")) {
        const auto& d = j.at("detectors");
        if (d.contains("all")) {
            for (auto& det : s.detectors) internal::detector_from_json(d.at("all"), det);
        }
        if (d.contains("idler")) internal::detector_from_json(d.at("idler"), s.detectors[timetag::kIdler]);
        if (d.contains("alice_tap")) internal::detector_from_json(d.at("alice_tap"), s.detectors[timetag::kAliceTap]);
        if (d.contains("bob_tap")) internal::detector_from_json(d.at("bob_tap"), s.detectors[timetag::kBobTap]);
    }
    return s;
}

inline json to_json(const ExperimentConfig& c) {
    using internal::opt;
    const auto& a = c.analysis;
    return {
        {"seed", c.seed},
        {"workers", c.workers},
        {"output_dir", c.output_dir},
        {"scenario", scenario_to_json(c.scenario)},
        {"analysis",
         {{"bin_width_s", a.bin_width_s},
          {"range_s", a.range_s},
          {"window_s", a.window_s},
          {"accidental_offset_s", a.accidental_offset_s},
          {"peak_search_width_s", a.peak_search_width_s},
          {"peak_significance_sigmas", a.peak_significance_sigmas},
          {"alice_peak_s", opt(a.alice_peak_s)},
          {"bob_peak_s", opt(a.bob_peak_s)},
          {"min_signal_sigmas", a.estimator.min_signal_sigmas},
          {"min_signal_rate", a.estimator.min_signal_rate}}},
        {"security",
         {{"reconciliation_efficiency", c.security.reconciliation_efficiency},
          {"bit_rate_hz", c.security.bit_rate_hz},
          {"injection_bound", c.security.injection_bound},
          {"chi_model", {{"name", c.security.chi_model.name()}, {"eve_photon_scale", c.security.chi_model.scale()}}}}},
        {"ber",
         {{"snr_per_photon", opt(c.ber.snr_per_photon)},
          {"impairment_floor", c.ber.impairment_floor},
          {"anchor_photons_per_bit", opt(c.ber.anchor_photons_per_bit)},
          {"anchor_p_e", opt(c.ber.anchor_p_e)},
          {"anchor_skr_bits_per_s", opt(c.ber.anchor_skr_bits_per_s)}}},
        {"skr_sweep", {{"photons_per_bit", c.photons_per_bit_grid}}},
        {"window_sweep", {{"windows_s", c.window_grid_s}}},
        {"campaign",
         {{"n_measurements", c.campaign.n_measurements},
          {"measurement_duration_s", c.campaign.measurement_duration_s},
          {"sigma_multiplier", c.campaign.sigma_multiplier}}},
        {"report", {{"photons_per_bit", c.report.photons_per_bit}}},
    };
}

inline ExperimentConfig config_from_json(const json& j) {
    using internal::read;
    ExperimentConfig c;
    try {
        read(j, "seed", c.seed);
        read(j, "workers", c.workers);
        read(j, "output_dir", c.output_dir);
        if (j.contains("scenario")) c.scenario = scenario_from_json(j.at("scenario"));
        c.scenario.seed = c.seed;
        if (j.contains("analysis")) {
            const auto& a = j.at("analysis");
            read(a, "bin_width_s", c.analysis.bin_width_s);
            read(a, "range_s", c.analysis.range_s);
            read(a, "window_s", c.analysis.window_s);
            read(a, "accidental_offset_s", c.analysis.accidental_offset_s);
            read(a, "peak_search_width_s", c.analysis.peak_search_width_s);
            read(a, "peak_significance_sigmas", c.analysis.peak_significance_sigmas);
            read(a, "alice_peak_s", c.analysis.alice_peak_s);
            read(a, "bob_peak_s", c.analysis.bob_peak_s);
            read(a, "min_signal_sigmas", c.analysis.estimator.min_signal_sigmas);
            read(a, "min_signal_rate", c.analysis.estimator.min_signal_rate);
        }
        if (j.contains("security")) {
            const auto& s = j.at("security");
            read(s, "reconciliation_efficiency", c.security.reconciliation_efficiency);
            read(s, "bit_rate_hz", c.security.bit_rate_hz);
            read(s, "injection_bound", c.security.injection_bound);
            if (s.contains("chi_model")) {
                const auto& m = s.at("chi_model");
                const std::string name = m.value("name", std::string("pure-state-bpsk"));
                if (name != "pure-state-bpsk") throw ConfigError("config: unknown chi_model '" + name + "'");
                c.security.chi_model = ChiModel::pure_state_bpsk(
                    m.value("eve_photon_scale", PureStateBpskBound::kDefaultEvePhotonScale));
            }
        }
        if (j.contains("ber")) {
            const auto& b = j.at("ber");
            read(b, "snr_per_photon", c.ber.snr_per_photon);
            read(b, "impairment_floor", c.ber.impairment_floor);
            read(b, "anchor_photons_per_bit", c.ber.anchor_photons_per_bit);
            read(b, "anchor_p_e", c.ber.anchor_p_e);
            read(b, "anchor_skr_bits_per_s", c.ber.anchor_skr_bits_per_s);
        }
        if (j.contains("skr_sweep") && j.at("skr_sweep").contains("photons_per_bit")) {
            c.photons_per_bit_grid = internal::read_grid(j.at("skr_sweep").at("photons_per_bit"));
        }
        if (j.contains("window_sweep") && j.at("window_sweep").contains("windows_s")) {
            c.window_grid_s = internal::read_grid(j.at("window_sweep").at("windows_s"));
        }
        if (j.contains("campaign")) {
            const auto& k = j.at("campaign");
            read(k, "n_measurements", c.campaign.n_measurements);
            read(k, "measurement_duration_s", c.campaign.measurement_duration_s);
            read(k, "sigma_multiplier", c.campaign.sigma_multiplier);
        }
        if (j.contains("report")) read(j.at("report"), "photons_per_bit", c.report.photons_per_bit);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ConfigError("config: " + path + ": " + e.what());
    }
    return config_from_json(j);
}

}  // namespace flqkd::experiment
