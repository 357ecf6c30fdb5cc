#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "flqkd/error.hpp"

namespace flqkd {

/// The six channel-monitor observables, all in counts per second.
///
/// duration_s is the integration time behind the rates; 0 marks noise-free
/// expected rates (e.g. from the closed-form rate model).
struct CountRates {
    double s_a = 0.0;       // singles at Alice's tap
    double s_b = 0.0;       // singles at Bob's tap
    double c_ia = 0.0;      // idler-Alice coincidences, time-aligned
    double c_ia_acc = 0.0;  // idler-Alice coincidences, time-misaligned
    double c_ib = 0.0;
    double c_ib_acc = 0.0;
    double duration_s = 0.0;
    double window_s = 0.0;

    double true_coincidences_alice() const noexcept { return c_ia - c_ia_acc; }
    double true_coincidences_bob() const noexcept { return c_ib - c_ib_acc; }

    /// Poisson standard deviation of an aligned-minus-misaligned difference,
    /// in counts/s. Zero for noise-free rates.
    double difference_sigma(double aligned, double misaligned) const noexcept {
        if (duration_s <= 0.0) return 0.0;
        return std::sqrt(std::max(0.0, aligned + misaligned) / duration_s);
    }

    /// Soft consistency check: aligned coincidences should not fall below the
    /// accidentals by more than 3 sigma. Violations are flagged, not rejected.
    std::vector<std::string> warnings() const {
        std::vector<std::string> out;
        if (c_ia < c_ia_acc - 3.0 * difference_sigma(c_ia, c_ia_acc)) {
            out.emplace_back("C_IA below accidental level C~_IA");
        }
        if (c_ib < c_ib_acc - 3.0 * difference_sigma(c_ib, c_ib_acc)) {
            out.emplace_back("C_IB below accidental level C~_IB");
        }
        return out;
    }

    void validate() const {
        detail::require(s_a >= 0.0 && s_b >= 0.0 && c_ia >= 0.0 && c_ia_acc >= 0.0 && c_ib >= 0.0 &&
                            c_ib_acc >= 0.0,
                        "CountRates: rates must be nonnegative");
        detail::require(duration_s >= 0.0, "CountRates: duration must be nonnegative");
    }
};

struct EstimatorOptions {
    /// Alice's true-coincidence rate must exceed this many Poisson sigmas.
    double min_signal_sigmas = 5.0;
    /// Absolute floor on C_IA - C~_IA in counts/s, applied in addition.
    double min_signal_rate = 0.0;
};

/// Eve's injection fraction from the monitor rates:
///   f_E = 1 - [(C_IB - C~_IB) / (C_IA - C~_IA)] (S_A / S_B).
/// Not clamped: statistical fluctuations legitimately give small negative values.
inline double estimate_injection_fraction(const CountRates& rates, const EstimatorOptions& opts = {}) {
    rates.validate();
    detail::require(rates.s_b > 0.0, "estimate_injection_fraction: S_B must be positive");
    const double signal_a = rates.true_coincidences_alice();
    const double floor = std::max(opts.min_signal_rate,
                                  opts.min_signal_sigmas * rates.difference_sigma(rates.c_ia, rates.c_ia_acc));
    if (!(signal_a > floor) || signal_a == 0.0) {
        throw DegenerateSignalError(
            "estimate_injection_fraction: no usable SPDC coincidence signal at Alice's tap; "
            "channel cannot be certified");
    }
    return 1.0 - (rates.true_coincidences_bob() / signal_a) * (rates.s_a / rates.s_b);
}

/// Running mean and variance (Welford) that can be merged with another
/// accumulator, so partial pools from different workers combine exactly.
class PoolAccumulator {
public:
    void add(double x) noexcept {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }

    void merge(const PoolAccumulator& other) noexcept {
        if (other.n_ == 0) return;
        if (n_ == 0) {
            *this = other;
            return;
        }
        const double n = static_cast<double>(n_ + other.n_);
        const double delta = other.mean_ - mean_;
        mean_ += delta * static_cast<double>(other.n_) / n;
        m2_ += other.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(other.n_) / n;
        n_ += other.n_;
    }

    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    double sample_variance() const noexcept {
        return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
    }
    double sample_stddev() const noexcept { return std::sqrt(sample_variance()); }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct MonitorEstimate {
    double f_e_mean = 0.0;
    double std_error = 0.0;
    std::size_t n_measurements = 0;
    double f_e_upper_bound = 0.0;
    double sigma_multiplier = 0.0;
};

inline MonitorEstimate pool_measurements(const PoolAccumulator& acc) {
    if (acc.count() < 2) {
        throw InsufficientDataError("pool_measurements: at least two measurements are required");
    }
    MonitorEstimate e;
    e.f_e_mean = acc.mean();
    e.std_error = acc.sample_stddev() / std::sqrt(static_cast<double>(acc.count()));
    e.n_measurements = acc.count();
    return e;
}

/// Mean and standard error (sample standard deviation / sqrt(n)).
inline MonitorEstimate pool_measurements(std::span<const double> estimates) {
    PoolAccumulator acc;
    for (double x : estimates) acc.add(x);
    return pool_measurements(acc);
}

/// max(0, mean + k * std_error), at full precision.
inline double upper_bound(const MonitorEstimate& estimate, double k) {
    detail::require(k > 0.0, "upper_bound: sigma multiplier must be positive");
    return std::max(0.0, estimate.f_e_mean + k * estimate.std_error);
}

/// Fills f_e_upper_bound and sigma_multiplier.
inline MonitorEstimate with_upper_bound(MonitorEstimate estimate, double k) {
    estimate.f_e_upper_bound = upper_bound(estimate, k);
    estimate.sigma_multiplier = k;
    return estimate;
}

/// Presentation rounding: round up to one significant figure (0.00251 -> 0.003).
inline double round_up_one_significant_figure(double x) {
    if (x <= 0.0 || !std::isfinite(x)) return x;
    const double scale = std::pow(10.0, std::floor(std::log10(x)));
    const double mantissa = x / scale;
    return std::ceil(mantissa - 1e-9) * scale;
}

/// Counting-noise variance of a single f_E estimate, times the integration time.
///
/// Every raw count N = r T is treated as an independent Poisson variable, so
/// a rate estimate r has variance r / T. Write g = 1 - f_E = D_B S_A / (D_A S_B)
/// with D_X = C_IX - C~_IX, so var(D_X) = (C_IX + C~_IX) / T. First-order
/// (delta-method) propagation gives
///
///   var(f_E) = var(g)
///            = (S_A / (D_A S_B))^2 var(D_B)
///              + g^2 [ var(D_A)/D_A^2 + var(S_A)/S_A^2 + var(S_B)/S_B^2 ]
///            = (1/T) { (S_A / (D_A S_B))^2 (C_IB + C~_IB)
///                      + g^2 [ (C_IA + C~_IA)/D_A^2 + 1/S_A + 1/S_B ] }.
///
/// The braced term is returned; var(f_E) = K / T.
inline double monitor_variance_coefficient(const CountRates& rates) {
    rates.validate();
    const double d_a = rates.true_coincidences_alice();
    detail::require(d_a > 0.0 && rates.s_a > 0.0 && rates.s_b > 0.0,
                    "monitor_variance_coefficient: Alice's true-coincidence rate and both singles rates "
                    "must be positive");
    const double slope = rates.s_a / (d_a * rates.s_b);
    const double g = rates.true_coincidences_bob() * slope;
    return slope * slope * (rates.c_ib + rates.c_ib_acc) +
           g * g * ((rates.c_ia + rates.c_ia_acc) / (d_a * d_a) + 1.0 / rates.s_a + 1.0 / rates.s_b);
}

/// Predicted standard deviation of one f_E estimate after integrating for duration_s.
inline double predicted_std_error(const CountRates& rates, double duration_s) {
    detail::require(duration_s > 0.0, "predicted_std_error: duration must be positive");
    return std::sqrt(monitor_variance_coefficient(rates) / duration_s);
}

/// Integration time for one f_E estimate to reach target_std_error.
inline double required_measurement_time(const CountRates& rates, double target_std_error) {
    if (!(target_std_error > 0.0)) {
        throw UnreachableTargetError("required_measurement_time: target must be positive");
    }
    return monitor_variance_coefficient(rates) / (target_std_error * target_std_error);
}

}  // namespace flqkd
