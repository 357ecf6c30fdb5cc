#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "flqkd/timetag/histogram.hpp"

using namespace flqkd;
using namespace flqkd::timetag;

namespace {

ScenarioSpec moderate_scenario() {
    ScenarioSpec sc;
    sc.source.spdc_pair_rate_hz = 2e4;
    sc.source.ase_power_w = power_from_photon_flux(2e4, 1550e-9);
    sc.alice_tap_fraction = 0.3;
    sc.bob_tap_fraction = 0.5;
    sc.alice_tap_attenuation_db = 0.0;
    sc.bob_tap_attenuation_db = 0.0;
    sc.channel_ab.loss_db = 3.0;
    for (auto& d : sc.detectors) d.quantum_efficiency = 0.8;
    sc.duration_s = 2.0;
    sc.segment_s = 0.25;
    sc.seed = 11;
    return sc;
}

// Upper 1% point of the chi-square distribution (Wilson-Hilferty).
double chi_square_upper_1pct(double dof) {
    const double z = 2.326347874;
    const double a = 2.0 / (9.0 * dof);
    return dof * std::pow(1.0 - a + z * std::sqrt(a), 3.0);
}

double chi_square_poisson(const std::vector<Picoseconds>& ts, double duration_s, std::size_t bins) {
    std::vector<double> counts(bins, 0.0);
    const double bin_ps = duration_s * 1e12 / static_cast<double>(bins);
    for (auto t : ts) {
        const auto i = std::min(bins - 1, static_cast<std::size_t>(static_cast<double>(t) / bin_ps));
        counts[i] += 1.0;
    }
    const double mean = static_cast<double>(ts.size()) / static_cast<double>(bins);
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - mean) * (c - mean) / mean;
    return chi2;
}

}  // namespace

TEST(Engine, DeterministicAcrossWorkersAndRuns) {
    const ScenarioSpec sc = moderate_scenario();
    const auto a = generate_streams(sc, 1);
    const auto b = generate_streams(sc, 4);
    const auto c = generate_streams(sc, 1);
    for (std::size_t ch = 0; ch < kNumChannels; ++ch) {
        EXPECT_EQ(a.streams[ch].timestamps, b.streams[ch].timestamps);
        EXPECT_EQ(a.streams[ch].timestamps, c.streams[ch].timestamps);
        EXPECT_EQ(a.ledger.recorded[ch], b.ledger.recorded[ch]);
    }
    EXPECT_EQ(a.ledger.true_coincidences_alice, b.ledger.true_coincidences_alice);
    EXPECT_EQ(a.ledger.true_coincidences_bob, b.ledger.true_coincidences_bob);

    ScenarioSpec other = sc;
    other.seed = 12;
    EXPECT_NE(generate_streams(other).streams[kIdler].timestamps, a.streams[kIdler].timestamps);
}

TEST(Engine, StreamsStrictlyIncreasingWithinDuration) {
    ScenarioSpec sc = moderate_scenario();
    sc.duration_s = 1.3;
    sc.eve_injection_fraction = 0.2;
    const auto r = generate_streams(sc);
    const Picoseconds end = to_picoseconds(sc.duration_s);
    for (std::size_t ch = 0; ch < kNumChannels; ++ch) {
        const auto& ts = r.streams[ch].timestamps;
        ASSERT_FALSE(ts.empty());
        EXPECT_EQ(r.streams[ch].channel_id, ch);
        EXPECT_GE(ts.front(), 0);
        EXPECT_LE(ts.back(), end);
        for (std::size_t i = 1; i < ts.size(); ++i) ASSERT_LT(ts[i - 1], ts[i]);
        EXPECT_EQ(r.streams[ch].recorded_count(), r.ledger.recorded[ch]);
    }
}

TEST(Engine, RatesMatchClosedForm) {
    ScenarioSpec sc = moderate_scenario();
    sc.eve_injection_fraction = 0.1;
    sc.duration_s = 4.0;
    const auto r = generate_streams(sc);
    for (std::size_t ch = 0; ch < kNumChannels; ++ch) {
        const double expected = r.expected.recorded_hz[ch] * sc.duration_s;
        EXPECT_NEAR(static_cast<double>(r.ledger.recorded[ch]), expected, 5.0 * std::sqrt(expected)) << ch;
    }
    const double eve = r.expected.eve_rate_hz * sc.duration_s;
    EXPECT_NEAR(static_cast<double>(r.ledger.eve_events), eve, 5.0 * std::sqrt(eve));
    const double ta = r.expected.true_coincidences_alice_hz * sc.duration_s;
    const double tb = r.expected.true_coincidences_bob_hz * sc.duration_s;
    EXPECT_NEAR(static_cast<double>(r.ledger.true_coincidences_alice), ta, 5.0 * std::sqrt(ta));
    EXPECT_NEAR(static_cast<double>(r.ledger.true_coincidences_bob), tb, 5.0 * std::sqrt(tb));
}

TEST(Engine, NoPairsGivesAseOnlyTapsAndFlatHistogram) {
    ScenarioSpec sc;
    sc.source.spdc_pair_rate_hz = 0.0;
    sc.source.ase_power_w = power_from_photon_flux(2e7, 1550e-9);
    sc.alice_tap_attenuation_db = 0.0;
    sc.bob_tap_attenuation_db = 0.0;
    sc.detectors[kIdler].dark_count_rate_hz = 5e4;
    sc.duration_s = 1.0;
    const auto r = generate_streams(sc);
    EXPECT_EQ(r.ledger.true_coincidences_alice, 0u);
    EXPECT_EQ(r.ledger.true_coincidences_bob, 0u);
    const double ase_a = r.expected.ase_flux_hz * r.expected.alice_path_efficiency;
    EXPECT_DOUBLE_EQ(r.expected.incident_hz[kAliceTap], ase_a);
    EXPECT_NEAR(r.streams[kAliceTap].rate_hz(), r.expected.recorded_hz[kAliceTap], 5.0 * std::sqrt(ase_a));

    const auto h = cross_correlate(r.streams[kAliceTap], r.streams[kIdler], 1e-9, 200e-9);
    const double mean = r.streams[kAliceTap].rate_hz() * r.streams[kIdler].rate_hz() * sc.duration_s * 1e-9;
    double chi2 = 0.0;
    for (auto c : h.counts) chi2 += (static_cast<double>(c) - mean) * (static_cast<double>(c) - mean) / mean;
    EXPECT_LT(chi2, chi_square_upper_1pct(static_cast<double>(h.size())));
    EXPECT_THROW(locate_peak(h, 2e-9), PeakNotFoundError);
}

TEST(Engine, UncorrelatedStreamsPassChiSquarePoissonTest) {
    ScenarioSpec sc;
    sc.source.spdc_pair_rate_hz = 0.0;
    sc.source.ase_power_w = power_from_photon_flux(1e8, 1550e-9);
    sc.alice_tap_attenuation_db = 10.0;
    sc.bob_tap_attenuation_db = 0.0;
    sc.eve_injection_fraction = 0.3;
    for (auto& d : sc.detectors) d.dead_time_s = 0.0;
    sc.duration_s = 2.0;
    sc.segment_s = 0.5;
    const auto r = generate_streams(sc);
    constexpr std::size_t bins = 2000;
    for (std::size_t ch : {kAliceTap, kBobTap}) {
        const auto& s = r.streams[ch];
        ASSERT_GT(s.recorded_count(), 20 * bins);
        EXPECT_LT(chi_square_poisson(s.timestamps, sc.duration_s, bins), chi_square_upper_1pct(bins - 1.0)) << ch;
    }
}

TEST(Engine, NonParalyzableDeadTime) {
    for (double rate : {1e6, 4e6, 1.6e7, 3.9e7}) {
        ScenarioSpec sc;
        sc.source.spdc_pair_rate_hz = rate;
        sc.detectors[kIdler].quantum_efficiency = 1.0;
        sc.duration_s = 0.25;
        const auto r = generate_streams(sc);
        const double tau = sc.detectors[kIdler].effective_dead_time_s();
        const double recorded = r.streams[kIdler].rate_hz();
        EXPECT_NEAR(recorded, rate / (1.0 + rate * tau), 0.02 * rate / (1.0 + rate * tau)) << rate;
        EXPECT_LE(recorded, 1.0 / tau + 1.0 / sc.duration_s);
        const auto& ts = r.streams[kIdler].timestamps;
        const Picoseconds dead = to_picoseconds(tau);
        for (std::size_t i = 1; i < ts.size(); ++i) ASSERT_GE(ts[i] - ts[i - 1], dead);
    }
}

TEST(Engine, PureSpdcLimit) {
    ScenarioSpec sc = moderate_scenario();
    sc.source.ase_power_w = 0.0;
    sc.duration_s = 2.0;
    const auto r = generate_streams(sc);
    MonitorAnalysis a;
    const auto m = build_histograms(r.streams, a);
    EXPECT_NEAR(m.alice_peak_s, sc.alice_delay_s, 0.1e-9);
    EXPECT_NEAR(m.bob_peak_s, sc.bob_delay_s, 0.1e-9);
    const auto rates = extract_rates(m, a.window_s, a.accidental_offset_s);
    EXPECT_LT(rates.c_ia_acc, 0.01 * rates.c_ia);
    EXPECT_LT(rates.c_ib_acc, 0.01 * rates.c_ib);
    const double f = estimate_injection_fraction(rates);
    EXPECT_LT(std::abs(f), 3.0 * predicted_std_error(rates, sc.duration_s));
}

TEST(Engine, LedgerMatchesWindowedExcess) {
    ScenarioSpec sc = moderate_scenario();
    sc.duration_s = 3.0;
    sc.detectors[kIdler].base_jitter_s = 100e-12;
    sc.detectors[kBobTap].base_jitter_s = 150e-12;
    sc.detectors[kBobTap].saturation_jitter_factor = 2.0;
    sc.source.ase_power_w = power_from_photon_flux(5e5, 1550e-9);
    const auto r = generate_streams(sc);
    MonitorAnalysis a;
    a.alice_peak_s = sc.alice_delay_s;
    a.bob_peak_s = sc.bob_delay_s;
    const auto m = build_histograms(r.streams, a);
    const double sigma_b = std::hypot(r.expected.jitter_sigma_s[kIdler], r.expected.jitter_sigma_s[kBobTap]);
    for (double w : {8.0 * sigma_b, 3.2e-9, 6.4e-9}) {
        const auto rates = extract_rates(m, w, a.accidental_offset_s);
        const double T = sc.duration_s;
        const double excess_a = rates.true_coincidences_alice() * T;
        const double excess_b = rates.true_coincidences_bob() * T;
        const double sigma_a = std::sqrt((rates.c_ia + rates.c_ia_acc) * T);
        const double sigma_bc = std::sqrt((rates.c_ib + rates.c_ib_acc) * T);
        EXPECT_NEAR(excess_a, static_cast<double>(r.ledger.true_coincidences_alice), 3.0 * sigma_a) << w;
        EXPECT_NEAR(excess_b, static_cast<double>(r.ledger.true_coincidences_bob), 3.0 * sigma_bc) << w;
    }
}

TEST(Engine, PaperLikeRatesMatchClosedForm) {
    ScenarioSpec sc;
    sc.source.spdc_pair_rate_hz = photon_flux_from_power(1.28e-12, 1550e-9);
    sc.source.ase_power_w = 4.45e-8;
    sc.duration_s = 0.5;
    sc.segment_s = 0.25;
    const auto r = generate_streams(sc);
    for (std::size_t ch = 0; ch < kNumChannels; ++ch) {
        EXPECT_GT(r.expected.incident_hz[ch], 1e6);
        EXPECT_NEAR(r.streams[ch].rate_hz(), r.expected.recorded_hz[ch], 0.01 * r.expected.recorded_hz[ch]) << ch;
    }
    MonitorAnalysis a;
    a.alice_peak_s = sc.alice_delay_s;
    a.bob_peak_s = sc.bob_delay_s;
    const auto rates = measure_rates(r.streams, a);
    const auto model = r.expected.count_rates(a.window_s);
    EXPECT_NEAR(rates.c_ia_acc, model.c_ia_acc, 0.03 * model.c_ia_acc);
    EXPECT_NEAR(rates.c_ib_acc, model.c_ib_acc, 0.03 * model.c_ib_acc);
}
