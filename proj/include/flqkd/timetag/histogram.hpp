#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "flqkd/monitor.hpp"
#include "flqkd/timetag/engine.hpp"

namespace flqkd::timetag {

/// Histogram of t_data - t_sync. Bin i covers
/// [origin_s + i * bin_width_s, origin_s + (i + 1) * bin_width_s).
struct CoincidenceHistogram {
    double bin_width_s = 0.0;
    double origin_s = 0.0;
    std::vector<std::uint64_t> counts;
    std::uint8_t sync_channel_id = 0;
    std::uint8_t data_channel_id = 0;
    double duration_s = 0.0;

    std::size_t size() const noexcept { return counts.size(); }
    double offset_s(std::size_t i) const noexcept { return origin_s + static_cast<double>(i) * bin_width_s; }
    double bin_center_s(std::size_t i) const noexcept { return offset_s(i) + 0.5 * bin_width_s; }
    double end_s() const noexcept { return offset_s(counts.size()); }

    std::uint64_t total() const noexcept {
        std::uint64_t n = 0;
        for (auto c : counts) n += c;
        return n;
    }

    /// Counts in [lo_s, hi_s); partially covered bins contribute their
    /// overlapping fraction.
    double integrate(double lo_s, double hi_s) const {
        flqkd::detail::require(lo_s >= origin_s - 1e-15 && hi_s <= end_s() + 1e-15 && lo_s <= hi_s,
                        "CoincidenceHistogram::integrate: range outside the histogram");
        const auto first = static_cast<std::size_t>(std::max(0.0, std::floor((lo_s - origin_s) / bin_width_s)));
        double sum = 0.0;
        for (std::size_t i = first; i < counts.size(); ++i) {
            const double a = offset_s(i);
            if (a >= hi_s) break;
            const double b = a + bin_width_s;
            const double overlap = std::min(b, hi_s) - std::max(a, lo_s);
            if (overlap > 0.0) sum += static_cast<double>(counts[i]) * overlap / bin_width_s;
        }
        return sum;
    }

    double integrate_centered(double center_s, double width_s) const {
        return integrate(center_s - 0.5 * width_s, center_s + 0.5 * width_s);
    }

    /// Adds the counts of a histogram with identical binning, e.g. from a
    /// later acquisition; durations add.
    CoincidenceHistogram& operator+=(const CoincidenceHistogram& other) {
        flqkd::detail::require(other.bin_width_s == bin_width_s && other.origin_s == origin_s &&
                                   other.counts.size() == counts.size(),
                               "CoincidenceHistogram: cannot add histograms with different binning");
        for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
        duration_s += other.duration_s;
        return *this;
    }
};

/// Start-stop histogram of every (sync, data) pair within +/- range_s, built
/// with a two-pointer sweep over the sorted streams: O(N + matches).
inline CoincidenceHistogram cross_correlate(const TimeTagStream& data, const TimeTagStream& sync, double bin_width_s,
                                            double range_s) {
    flqkd::detail::require(bin_width_s > 0.0 && range_s > 0.0, "cross_correlate: bin width and range must be positive");
    const Picoseconds bin_ps = std::max<Picoseconds>(1, to_picoseconds(bin_width_s));
    const auto half_bins = static_cast<Picoseconds>(std::ceil(range_s / (static_cast<double>(bin_ps) * 1e-12) - 1e-9));
    const Picoseconds range_ps = half_bins * bin_ps;

    CoincidenceHistogram h;
    h.bin_width_s = static_cast<double>(bin_ps) * 1e-12;
    h.origin_s = -static_cast<double>(range_ps) * 1e-12;
    h.counts.assign(static_cast<std::size_t>(2 * half_bins), 0);
    h.sync_channel_id = sync.channel_id;
    h.data_channel_id = data.channel_id;
    h.duration_s = std::min(data.duration_s, sync.duration_s);

    const auto& d = data.timestamps;
    std::size_t lo = 0;
    for (const Picoseconds ts : sync.timestamps) {
        while (lo < d.size() && d[lo] < ts - range_ps) ++lo;
        for (std::size_t j = lo; j < d.size(); ++j) {
            const Picoseconds dt = d[j] - ts;
            if (dt >= range_ps) break;
            ++h.counts[static_cast<std::size_t>((dt + range_ps) / bin_ps)];
        }
    }
    return h;
}

/// Median bin content: a robust estimate of the accidental floor per bin.
inline double accidental_floor_per_bin(const CoincidenceHistogram& h) {
    if (h.counts.empty()) return 0.0;
    std::vector<std::uint64_t> sorted(h.counts);
    const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    return static_cast<double>(*mid);
}

/// Excess, in sigmas, that the best of n_windows independent windows must
/// show to keep the false-alarm probability of a single sigmas-level test.
inline double trials_corrected_sigmas(double sigmas, double n_windows) {
    const double p_single = 0.5 * std::erfc(sigmas / std::sqrt(2.0));
    const double p_each = -std::expm1(std::log1p(-p_single) / std::max(1.0, n_windows));
    double lo = 0.0;
    double hi = 40.0;
    for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(mid / std::sqrt(2.0)) > p_each ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Finds the coincidence peak: the search_width_s stretch with the most
/// counts, refined to the floor-subtracted centroid of its neighbourhood.
/// The floor is the mean bin content away from that neighbourhood. Throws
/// PeakNotFoundError unless the stretch clears the floor by
/// significance_sigmas, corrected for the number of places searched.
inline double locate_peak(const CoincidenceHistogram& h, double search_width_s, double significance_sigmas = 3.0) {
    if (h.counts.empty()) throw PeakNotFoundError("locate_peak: empty histogram");
    const std::size_t n = h.counts.size();
    const std::size_t k =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(search_width_s / h.bin_width_s)), 1, n);

    double running = 0.0;
    for (std::size_t i = 0; i < k; ++i) running += static_cast<double>(h.counts[i]);
    double best = running;
    std::size_t best_start = 0;
    for (std::size_t i = k; i < n; ++i) {
        running += static_cast<double>(h.counts[i]) - static_cast<double>(h.counts[i - k]);
        if (running > best) {
            best = running;
            best_start = i - k + 1;
        }
    }

    const std::size_t lo = best_start >= k ? best_start - k : 0;
    const std::size_t hi = std::min(n, best_start + 2 * k);
    double near = 0.0;
    for (std::size_t i = lo; i < hi; ++i) near += static_cast<double>(h.counts[i]);
    const double floor = hi - lo < n ? (static_cast<double>(h.total()) - near) / static_cast<double>(n - (hi - lo))
                                     : accidental_floor_per_bin(h);
    const double expected = floor * static_cast<double>(k);
    const double needed = trials_corrected_sigmas(significance_sigmas, static_cast<double>(n) / static_cast<double>(k));
    if (best - expected < needed * std::sqrt(std::max(expected, 1.0))) {
        throw PeakNotFoundError("locate_peak: no coincidence peak above the accidental floor");
    }

    double weight = 0.0;
    double moment = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        const double w = std::max(0.0, static_cast<double>(h.counts[i]) - floor);
        weight += w;
        moment += w * h.bin_center_s(i);
    }
    return weight > 0.0 ? moment / weight : h.bin_center_s(best_start) + 0.5 * (k - 1) * h.bin_width_s;
}

/// Settings for turning streams into monitor rates.
struct MonitorAnalysis {
    double bin_width_s = 256e-12;
    double range_s = 200e-9;
    double window_s = 3.2e-9;
    double accidental_offset_s = 64e-9;
    double peak_search_width_s = 2e-9;
    double peak_significance_sigmas = 3.0;
    /// Calibrated peak positions; located from the data when absent.
    std::optional<double> alice_peak_s;
    std::optional<double> bob_peak_s;
    EstimatorOptions estimator{};
};

/// Idler-referenced histograms of both taps plus their peak positions.
struct MonitorHistograms {
    CoincidenceHistogram alice;
    CoincidenceHistogram bob;
    double alice_peak_s = 0.0;
    double bob_peak_s = 0.0;
    double s_a = 0.0;
    double s_b = 0.0;
    double duration_s = 0.0;
};

inline MonitorHistograms build_histograms(const std::array<TimeTagStream, kNumChannels>& streams,
                                          const MonitorAnalysis& a) {
    MonitorHistograms m;
    m.alice = cross_correlate(streams[kAliceTap], streams[kIdler], a.bin_width_s, a.range_s);
    m.bob = cross_correlate(streams[kBobTap], streams[kIdler], a.bin_width_s, a.range_s);
    m.alice_peak_s = a.alice_peak_s ? *a.alice_peak_s
                                    : locate_peak(m.alice, a.peak_search_width_s, a.peak_significance_sigmas);
    m.bob_peak_s =
        a.bob_peak_s ? *a.bob_peak_s : locate_peak(m.bob, a.peak_search_width_s, a.peak_significance_sigmas);
    m.s_a = streams[kAliceTap].rate_hz();
    m.s_b = streams[kBobTap].rate_hz();
    m.duration_s = m.alice.duration_s;
    return m;
}

/// Folds a further acquisition into m. Peak positions are kept from m;
/// singles become duration-weighted averages.
inline void accumulate(MonitorHistograms& m, const MonitorHistograms& more) {
    const double total = m.duration_s + more.duration_s;
    flqkd::detail::require(total > 0.0, "accumulate: histograms have no duration");
    m.alice += more.alice;
    m.bob += more.bob;
    m.s_a = (m.s_a * m.duration_s + more.s_a * more.duration_s) / total;
    m.s_b = (m.s_b * m.duration_s + more.s_b * more.duration_s) / total;
    m.duration_s = total;
}

/// Aligned coincidences integrate a window centered on each peak; misaligned
/// ones integrate an equal window displaced by accidental_offset_s.
inline CountRates extract_rates(const MonitorHistograms& m, double window_s, double accidental_offset_s) {
    flqkd::detail::require(window_s > 0.0, "extract_rates: window must be positive");
    flqkd::detail::require(accidental_offset_s >= 5.0 * window_s,
                    "extract_rates: accidental offset must be at least 5 windows from the peak");
    flqkd::detail::require(m.duration_s > 0.0, "extract_rates: histograms have no duration");
    CountRates r;
    r.s_a = m.s_a;
    r.s_b = m.s_b;
    r.c_ia = m.alice.integrate_centered(m.alice_peak_s, window_s) / m.duration_s;
    r.c_ia_acc = m.alice.integrate_centered(m.alice_peak_s + accidental_offset_s, window_s) / m.duration_s;
    r.c_ib = m.bob.integrate_centered(m.bob_peak_s, window_s) / m.duration_s;
    r.c_ib_acc = m.bob.integrate_centered(m.bob_peak_s + accidental_offset_s, window_s) / m.duration_s;
    r.duration_s = m.duration_s;
    r.window_s = window_s;
    return r;
}

/// Streams to monitor rates using the analysis' default window.
inline CountRates measure_rates(const std::array<TimeTagStream, kNumChannels>& streams, const MonitorAnalysis& a) {
    return extract_rates(build_histograms(streams, a), a.window_s, a.accidental_offset_s);
}

struct WindowPoint {
    double window_s = 0.0;
    double f_e = 0.0;
    double std_error = 0.0;
    CountRates rates{};
};

/// f_E versus coincidence window. The histograms are built once; each
/// window only re-integrates them. std_error is the counting-noise
/// prediction for one measurement of this duration.
inline std::vector<WindowPoint> sweep_window(const std::array<TimeTagStream, kNumChannels>& streams,
                                             std::span<const double> windows, const MonitorAnalysis& a) {
    flqkd::detail::require(!windows.empty(), "sweep_window: window list is empty");
    const MonitorHistograms m = build_histograms(streams, a);
    std::vector<WindowPoint> out;
    out.reserve(windows.size());
    for (double w : windows) {
        WindowPoint p;
        p.window_s = w;
        p.rates = extract_rates(m, w, a.accidental_offset_s);
        p.f_e = estimate_injection_fraction(p.rates, a.estimator);
        p.std_error = predicted_std_error(p.rates, m.duration_s);
        out.push_back(p);
    }
    return out;
}

}  // namespace flqkd::timetag
