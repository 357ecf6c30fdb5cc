#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "flqkd/link_budget.hpp"

using namespace flqkd;

TEST(Transmissivity, FromDb) {
    EXPECT_NEAR(transmissivity_from_db(10.0), 0.1, 1e-15);
    EXPECT_EQ(transmissivity_from_db(0.0), 1.0);
    EXPECT_NEAR(transmissivity_from_db(3.0103), 0.5, 1e-4);
    EXPECT_THROW(transmissivity_from_db(-0.1), DomainError);
}

TEST(Transmissivity, DbAddsUnderProduct) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> db(0.0, 40.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = db(rng);
        const double b = db(rng);
        const double lhs = transmissivity_from_db(a) * transmissivity_from_db(b);
        EXPECT_NEAR(lhs, transmissivity_from_db(a + b), 1e-12 * lhs);
    }
}

TEST(Cascade, Examples) {
    // 10 dB fiber plus 4.7 dB insertion loss = 14.7 dB.
    EXPECT_NEAR(cascade({0.1, std::pow(10.0, -0.47)}), 0.0339, 1e-3);
    EXPECT_NEAR(cascade({0.1, std::pow(10.0, -0.47)}), transmissivity_from_db(14.7), 1e-15);
    EXPECT_EQ(cascade({1.0, 1.0}), 1.0);
    EXPECT_EQ(cascade({0.5, 0.5}), 0.25);
    EXPECT_EQ(cascade(std::span<const double>{}), 1.0);
    EXPECT_THROW(cascade({0.5, 0.0}), DomainError);
    EXPECT_THROW(cascade({1.5}), DomainError);
}

TEST(Cascade, OrderIndependent) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> t(1e-3, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(8);
        for (auto& x : v) x = t(rng);
        const double forward = cascade(v);
        std::shuffle(v.begin(), v.end(), rng);
        EXPECT_NEAR(cascade(v), forward, 1e-15);
    }
}

TEST(Amplifier, AsePhotonsPerMode) {
    EXPECT_NEAR(amplifier_ase_photons_per_mode({30.0, 1.0}), 999.0, 1e-9);
    EXPECT_EQ(amplifier_ase_photons_per_mode({0.0, 1.0}), 0.0);
    EXPECT_EQ(amplifier_ase_photons_per_mode({0.0, 3.7}), 0.0);
    EXPECT_NEAR(amplifier_ase_photons_per_mode({3.0103, 2.0}), 2.0, 1e-3);
    EXPECT_THROW(amplifier_ase_photons_per_mode({10.0, 0.5}), DomainError);
}

TEST(BerModel, Endpoints) {
    EXPECT_EQ(ber_model(0.0, {0.5, 0.0}), 0.5);
    EXPECT_EQ(ber_model(0.0, {0.01, 0.1}), 0.5);
    EXPECT_LT(ber_model(1e6, {1.0, 0.0}), 1e-300);
    EXPECT_NEAR(ber_model(1e6, {1.0, 0.02}), 0.02, 1e-15);
    EXPECT_THROW(ber_model(-1.0, {1.0, 0.0}), DomainError);
    EXPECT_THROW(ber_model(1.0, {0.0, 0.0}), DomainError);
    EXPECT_THROW(ber_model(1.0, {1.0, 0.5}), DomainError);
}

// Oracle: scipy 0.5*erfc(sqrt(0.01186*20)) = 0.245484948.
TEST(BerModel, OperatingPointValue) {
    EXPECT_NEAR(ber_model(20.0, {0.01186, 0.0}), 0.245484948, 1e-8);
    EXPECT_NEAR(ber_model(1.0, {1.0, 0.0}), 0.0786496035, 1e-9);
}

TEST(BerModel, StrictlyDecreasingInPhotons) {
    for (const BerModelParams p : {BerModelParams{0.012, 0.0}, BerModelParams{0.5, 0.03}, BerModelParams{3.0, 0.2}}) {
        double prev = ber_model(0.0, p);
        for (int i = 1; i <= 100; ++i) {
            const double pe = ber_model(0.05 * i, p);
            EXPECT_LT(pe, prev);
            EXPECT_GT(pe, 0.0);
            EXPECT_LE(pe, 0.5);
            prev = pe;
        }
    }
}

// Oracles: scipy erfcinv(2 p)^2 / n.
TEST(CalibrateBer, Examples) {
    EXPECT_NEAR(calibrate_ber(20.0, 0.2433, 0.0), 0.0121008911, 1e-9);
    EXPECT_NEAR(calibrate_ber(1.0, 0.0786, 0.0), 1.0, 1e-3);
    EXPECT_NEAR(calibrate_ber(1.0, 0.0786, 0.0), 1.00047815, 1e-7);
}

TEST(CalibrateBer, ApproachesZeroNearHalf) {
    double prev = calibrate_ber(5.0, 0.49, 0.0);
    for (double eps : {1e-3, 1e-5, 1e-7}) {
        const double k = calibrate_ber(5.0, 0.5 - eps, 0.0);
        EXPECT_LT(k, prev);
        prev = k;
    }
    EXPECT_LT(prev, 1e-12);
}

TEST(CalibrateBer, Errors) {
    EXPECT_THROW(calibrate_ber(20.0, 0.05, 0.05), NoSolutionError);
    EXPECT_THROW(calibrate_ber(20.0, 0.05, 0.1), NoSolutionError);
    EXPECT_THROW(calibrate_ber(0.0, 0.2, 0.0), DomainError);
    EXPECT_THROW(calibrate_ber(20.0, 0.5, 0.0), DomainError);
    EXPECT_THROW(calibrate_ber(20.0, 0.0, 0.0), DomainError);
}

TEST(CalibrateBer, RoundTripRandomAnchors) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> n(0.1, 500.0);
    std::uniform_real_distribution<double> floor(0.0, 0.2);
    std::uniform_real_distribution<double> u(0.02, 0.98);
    for (int i = 0; i < 500; ++i) {
        const double n0 = n(rng);
        const double f = floor(rng);
        const double p0 = f + (0.5 - f) * u(rng);
        const double k = calibrate_ber(n0, p0, f);
        EXPECT_NEAR(ber_model(n0, {k, f}), p0, 1e-8);
        EXPECT_NEAR(ber_model(n0, {k, f}), p0, 1e-9 * p0);
    }
}
