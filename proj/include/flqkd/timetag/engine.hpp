#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "flqkd/parallel.hpp"
#include "flqkd/timetag/rng.hpp"
#include "flqkd/timetag/scenario.hpp"

namespace flqkd::timetag {

using Picoseconds = std::int64_t;

inline Picoseconds to_picoseconds(double seconds) {
    return static_cast<Picoseconds>(std::llround(seconds * constants::picoseconds_per_second));
}

/// Detection times of one detector channel, strictly increasing, in [0, duration].
struct TimeTagStream {
    std::uint8_t channel_id = 0;
    std::vector<Picoseconds> timestamps;
    double duration_s = 0.0;

    std::size_t recorded_count() const noexcept { return timestamps.size(); }
    double rate_hz() const noexcept {
        return duration_s > 0.0 ? static_cast<double>(timestamps.size()) / duration_s : 0.0;
    }
};

/// Ground truth kept alongside the simulated streams.
struct SimulationLedger {
    std::uint64_t true_coincidences_alice = 0;  // pairs with both members recorded
    std::uint64_t true_coincidences_bob = 0;
    std::array<std::uint64_t, kNumChannels> incident{};  // events before dead time
    std::array<std::uint64_t, kNumChannels> recorded{};
    std::uint64_t eve_events = 0;
    double duration_s = 0.0;

    double true_rate_alice_hz() const noexcept { return true_coincidences_alice / duration_s; }
    double true_rate_bob_hz() const noexcept { return true_coincidences_bob / duration_s; }
};

struct SimulationResult {
    std::array<TimeTagStream, kNumChannels> streams;
    SimulationLedger ledger;
    ExpectedRates expected;
};

namespace detail {

struct TaggedEvent {
    Picoseconds t;
    std::uint64_t tag;  // 0 for events with no pair partner

    friend bool operator<(const TaggedEvent& a, const TaggedEvent& b) noexcept {
        return a.t != b.t ? a.t < b.t : a.tag < b.tag;
    }
};

enum Process : std::uint64_t {
    kPairIdlerAlice,
    kPairIdlerBob,
    kPairIdlerOnly,
    kPairAliceOnly,
    kPairBobOnly,
    kAseAlice,
    kAseBob,
    kEve,
    kDarkIdler,
    kDarkAlice,
    kDarkBob,
    kNumProcesses
};

struct SegmentEvents {
    std::array<std::vector<TaggedEvent>, kNumChannels> by_channel;
    std::uint64_t eve_events = 0;
};

/// Calls emit(t) for each arrival of a homogeneous Poisson process on [0, length).
template <typename Emit>
void poisson_arrivals(Engine& rng, double rate_hz, double length_s, Emit&& emit) {
    if (rate_hz <= 0.0) return;
    std::exponential_distribution<double> gap(rate_hz);
    for (double t = gap(rng); t < length_s; t += gap(rng)) emit(t);
}

inline SegmentEvents generate_segment(const ScenarioSpec& sc, const ExpectedRates& e, std::uint64_t segment,
                                      double start_s, double length_s) {
    SegmentEvents out;
    const Picoseconds start_ps = to_picoseconds(start_s);
    const std::array<double, kNumChannels> delay{0.0, sc.alice_delay_s, sc.bob_delay_s};

    auto engine_for = [&](Process p) { return Engine(derive_seed(sc.seed, segment, p)); };
    auto stamp = [&](double t) { return start_ps + to_picoseconds(t); };
    auto reserve = [&](Channel ch, double rate) {
        out.by_channel[ch].reserve(out.by_channel[ch].size() + static_cast<std::size_t>(rate * length_s * 1.1) + 16);
    };
    for (std::size_t ch = 0; ch < kNumChannels; ++ch) {
        reserve(static_cast<Channel>(ch), e.incident_hz[ch]);
    }

    const double pairs = e.pair_rate_hz;
    const double q_i = e.idler_detect_prob;
    const double q_a = e.alice_signal_detect_prob;
    const double q_b = e.bob_signal_detect_prob;

    // Each signal photon reaches at most one tap detector, so a pair falls
    // into exactly one detection category; by Poisson splitting the
    // categories are independent Poisson processes.
    auto correlated = [&](Process p, Channel data, double rate) {
        Engine rng = engine_for(p);
        std::normal_distribution<double> jitter_idler(0.0, e.jitter_sigma_s[kIdler]);
        std::normal_distribution<double> jitter_data(0.0, e.jitter_sigma_s[data]);
        std::uint64_t index = 0;
        const std::uint64_t tag_base = (segment << 36) | (static_cast<std::uint64_t>(p) << 32);
        poisson_arrivals(rng, rate, length_s, [&](double t) {
            const std::uint64_t tag = tag_base | ++index;
            out.by_channel[kIdler].push_back({stamp(t + jitter_idler(rng)), tag});
            out.by_channel[data].push_back({stamp(t + delay[data] + jitter_data(rng)), tag});
        });
    };
    correlated(kPairIdlerAlice, kAliceTap, pairs * q_i * q_a);
    correlated(kPairIdlerBob, kBobTap, pairs * q_i * q_b);

    // Uncorrelated components carry no timing information relative to the
    // idler, so their jitter is not drawn.
    auto single = [&](Process p, Channel ch, double rate, std::uint64_t* counter = nullptr) {
        Engine rng = engine_for(p);
        poisson_arrivals(rng, rate, length_s, [&](double t) {
            out.by_channel[ch].push_back({stamp(t + delay[ch]), 0});
            if (counter) ++*counter;
        });
    };
    single(kPairIdlerOnly, kIdler, pairs * q_i * (1.0 - q_a - q_b));
    single(kPairAliceOnly, kAliceTap, pairs * (1.0 - q_i) * q_a);
    single(kPairBobOnly, kBobTap, pairs * (1.0 - q_i) * q_b);
    single(kAseAlice, kAliceTap, e.ase_flux_hz * e.alice_path_efficiency);
    single(kAseBob, kBobTap, e.ase_flux_hz * e.bob_path_efficiency);
    single(kEve, kBobTap, e.eve_rate_hz, &out.eve_events);
    single(kDarkIdler, kIdler, sc.detectors[kIdler].dark_count_rate_hz);
    single(kDarkAlice, kAliceTap, sc.detectors[kAliceTap].dark_count_rate_hz);
    single(kDarkBob, kBobTap, sc.detectors[kBobTap].dark_count_rate_hz);

    return out;
}

/// Non-paralyzable dead time plus the observation-window cut. Returns the
/// pair tags of recorded correlated events, sorted.
inline std::vector<std::uint64_t> record(std::vector<TaggedEvent>& events, Picoseconds duration_ps,
                                         Picoseconds dead_ps, TimeTagStream& stream) {
    std::sort(events.begin(), events.end());
    std::vector<std::uint64_t> tags;
    stream.timestamps.clear();
    stream.timestamps.reserve(events.size());
    Picoseconds last = 0;
    bool any = false;
    for (const auto& ev : events) {
        if (ev.t < 0 || ev.t > duration_ps) continue;
        if (any && (ev.t <= last || ev.t - last < dead_ps)) continue;
        stream.timestamps.push_back(ev.t);
        if (ev.tag != 0) tags.push_back(ev.tag);
        last = ev.t;
        any = true;
    }
    std::sort(tags.begin(), tags.end());
    return tags;
}

inline std::uint64_t count_common(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
    std::uint64_t n = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

}  // namespace detail

/// Simulates the idler, Alice-tap and Bob-tap detection streams.
///
/// The duration is cut into segment_s pieces; each (segment, process) pair
/// draws from its own seed-derived substream, so the output depends only on
/// the scenario and seed, never on the number of workers.
inline SimulationResult generate_streams(const ScenarioSpec& sc, unsigned workers = 1) {
    SimulationResult result;
    result.expected = expected_rates(sc);
    const auto& e = result.expected;

    const auto n_segments = static_cast<std::size_t>(std::ceil(sc.duration_s / sc.segment_s - 1e-12));
    std::vector<detail::SegmentEvents> segments(n_segments);
    parallel_for(n_segments, workers, [&](std::size_t k) {
        const double start = static_cast<double>(k) * sc.segment_s;
        const double length = std::min(sc.segment_s, sc.duration_s - start);
        segments[k] = detail::generate_segment(sc, e, k, start, length);
    });

    const Picoseconds duration_ps = to_picoseconds(sc.duration_s);
    std::array<std::vector<std::uint64_t>, kNumChannels> tags;
    for (std::size_t ch = 0; ch < kNumChannels; ++ch) {
        std::vector<detail::TaggedEvent> events;
        std::size_t total = 0;
        for (const auto& seg : segments) total += seg.by_channel[ch].size();
        events.reserve(total);
        for (auto& seg : segments) {
            events.insert(events.end(), seg.by_channel[ch].begin(), seg.by_channel[ch].end());
            std::vector<detail::TaggedEvent>().swap(seg.by_channel[ch]);
        }
        auto& stream = result.streams[ch];
        stream.channel_id = static_cast<std::uint8_t>(ch);
        stream.duration_s = sc.duration_s;
        result.ledger.incident[ch] = events.size();
        const Picoseconds dead_ps = to_picoseconds(sc.detectors[ch].effective_dead_time_s());
        tags[ch] = detail::record(events, duration_ps, dead_ps, stream);
        result.ledger.recorded[ch] = stream.timestamps.size();
    }
    for (const auto& seg : segments) result.ledger.eve_events += seg.eve_events;
    result.ledger.true_coincidences_alice = detail::count_common(tags[kIdler], tags[kAliceTap]);
    result.ledger.true_coincidences_bob = detail::count_common(tags[kIdler], tags[kBobTap]);
    result.ledger.duration_s = sc.duration_s;
    return result;
}

}  // namespace flqkd::timetag
