#include <gtest/gtest.h>

#include <cmath>

#include "flqkd/timetag/histogram.hpp"

using namespace flqkd;
using namespace flqkd::timetag;

// Pair flux from 1.28 pW at 1550 nm, 2% and 1% taps behind 29 dB and 20 dB,
// a 10 dB channel and detectors driven near their 4 Mcounts/s maximum. The
// 60 s record is simulated as consecutive 1 s acquisitions whose histograms
// are summed, which keeps memory bounded.
TEST(PaperScale, SixtySecondMeasurementWithoutInjection) {
    ScenarioSpec sc;
    sc.source.spdc_pair_rate_hz = photon_flux_from_power(1.28e-12, 1550e-9);
    sc.source.ase_power_w = 4.45e-8;
    sc.eve_injection_fraction = 0.0;
    sc.duration_s = 1.0;
    const auto model = expected_rates(sc);
    for (double r : model.incident_hz) EXPECT_GT(r, 1e6);

    MonitorAnalysis a;
    a.alice_peak_s = sc.alice_delay_s;
    a.bob_peak_s = sc.bob_delay_s;

    MonitorHistograms total;
    for (std::uint64_t k = 0; k < 60; ++k) {
        ScenarioSpec part = sc;
        part.seed = derive_seed(2024, 60, k);
        const auto sim = generate_streams(part);
        const auto m = build_histograms(sim.streams, a);
        if (k == 0) {
            total = m;
        } else {
            accumulate(total, m);
        }
    }
    ASSERT_NEAR(total.duration_s, 60.0, 1e-9);

    const auto rates = extract_rates(total, a.window_s, a.accidental_offset_s);
    const double se = predicted_std_error(rates, total.duration_s);
    double f = 0.0;
    ASSERT_NO_THROW(f = estimate_injection_fraction(rates, a.estimator))
        << "C_IA - C~_IA = " << rates.true_coincidences_alice() << " /s against a Poisson sigma of "
        << rates.difference_sigma(rates.c_ia, rates.c_ia_acc) << " /s";
    EXPECT_LE(std::abs(f), 3.0 * se) << "f_E " << f << " std error " << se;
}
