#pragma once

#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "flqkd/experiment/config.hpp"
#include "flqkd/monitor.hpp"
#include "flqkd/parallel.hpp"
#include "flqkd/timetag/engine.hpp"
#include "flqkd/timetag/histogram.hpp"

namespace flqkd::experiment {

/// `%.10g`, the numeric format of every CSV this module writes.
inline std::string fmt_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

struct CalibrationResult {
    BerModelParams ber{};
    std::optional<double> anchor_photons_per_bit;
    std::optional<double> anchor_p_e;
};

/// Resolves the receiver model from the config; an SKR anchor is first
/// converted to the P_e that produces it.
inline CalibrationResult calibrate(const ExperimentConfig& c) {
    CalibrationResult out;
    out.ber.impairment_floor = c.ber.impairment_floor;
    if (c.ber.snr_per_photon) {
        out.ber.snr_per_photon = *c.ber.snr_per_photon;
        out.ber.validate();
        return out;
    }
    if (!c.ber.anchor_photons_per_bit || (!c.ber.anchor_p_e && !c.ber.anchor_skr_bits_per_s)) {
        throw ConfigError("calibration missing: set ber.snr_per_photon or an anchor (photons per bit with P_e or SKR)");
    }
    const double n0 = *c.ber.anchor_photons_per_bit;
    const double p0 = c.ber.anchor_p_e ? *c.ber.anchor_p_e
                                       : solve_error_probability_for_skr(c.security, n0, *c.ber.anchor_skr_bits_per_s);
    out.ber.snr_per_photon = calibrate_ber(n0, p0, c.ber.impairment_floor);
    out.anchor_photons_per_bit = n0;
    out.anchor_p_e = p0;
    return out;
}

inline double modes_per_bit_of(const ExperimentConfig& c) {
    return modes_per_bit(c.scenario.mode_plan.bandwidth_hz(), c.security.bit_rate_hz);
}

struct SkrSweepResult {
    CalibrationResult calibration;
    double modes_per_bit = 0.0;
    double transmissivity = 0.0;
    std::vector<SkrReport> rows;
};

inline SkrReport operating_point(const ExperimentConfig& c, const CalibrationResult& cal, double photons_per_bit) {
    return skr(c.security, ber_model(photons_per_bit, cal.ber), photons_per_bit, modes_per_bit_of(c),
               c.scenario.channel_ab.transmissivity());
}

/// SKR curve versus transmitted photons per bit.
inline SkrSweepResult run_skr_sweep(const ExperimentConfig& c) {
    SkrSweepResult r;
    r.calibration = calibrate(c);
    r.modes_per_bit = modes_per_bit_of(c);
    r.transmissivity = c.scenario.channel_ab.transmissivity();
    r.rows.resize(c.photons_per_bit_grid.size());
    parallel_for(r.rows.size(), c.workers,
                 [&](std::size_t i) { r.rows[i] = operating_point(c, r.calibration, c.photons_per_bit_grid[i]); });
    return r;
}

inline void write_csv(std::ostream& os, const SkrSweepResult& r) {
    os << "photons_per_bit,i_ab,chi_be,skr_bits_per_s,p_e,skr_clamped_bits_per_s,bits_per_mode,"
          "rate_loss_bound_bits_per_mode\n";
    for (const auto& row : r.rows) {
        os << fmt_number(row.photons_per_bit) << ',' << fmt_number(row.i_ab) << ',' << fmt_number(row.chi_be) << ','
           << fmt_number(row.skr_bits_per_s) << ',' << fmt_number(row.p_e) << ','
           << fmt_number(row.skr_clamped_bits_per_s) << ',' << fmt_number(row.bits_per_mode) << ','
           << fmt_number(row.rate_loss_bound_bits_per_mode) << '\n';
    }
}

struct WindowSweepResult {
    std::vector<timetag::WindowPoint> rows;
    timetag::SimulationLedger ledger;
};

/// Simulates the scenario once and evaluates f_E for every window.
inline WindowSweepResult run_window_sweep(const ExperimentConfig& c) {
    const auto sim = timetag::generate_streams(c.scenario, c.workers);
    WindowSweepResult r;
    r.rows = timetag::sweep_window(sim.streams, c.window_grid_s, c.analysis);
    r.ledger = sim.ledger;
    return r;
}

inline void write_csv(std::ostream& os, const WindowSweepResult& r) {
    os << "window_s,f_e,std_error\n";
    for (const auto& p : r.rows) {
        os << fmt_number(p.window_s) << ',' << fmt_number(p.f_e) << ',' << fmt_number(p.std_error) << '\n';
    }
}

struct CampaignMeasurement {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    double f_e = 0.0;
    CountRates rates{};
};

struct CampaignResult {
    MonitorEstimate estimate{};
    std::vector<CampaignMeasurement> measurements;
};

/// Seed of measurement i of a campaign.
inline std::uint64_t measurement_seed(std::uint64_t campaign_seed, std::size_t i) {
    return timetag::derive_seed(campaign_seed, 0x63616d70u, i);
}

/// n independent seeded measurements, pooled, with a k-sigma upper bound.
inline CampaignResult run_monitor_campaign(const ExperimentConfig& c) {
    if (c.campaign.n_measurements < 2) {
        throw InsufficientDataError("campaign: at least two measurements are required");
    }
    CampaignResult r;
    r.measurements.resize(c.campaign.n_measurements);
    parallel_for(r.measurements.size(), c.workers, [&](std::size_t i) {
        timetag::ScenarioSpec sc = c.scenario;
        sc.duration_s = c.campaign.measurement_duration_s;
        sc.seed = measurement_seed(c.seed, i);
        const auto sim = timetag::generate_streams(sc, 1);
        auto& m = r.measurements[i];
        m.index = i;
        m.seed = sc.seed;
        m.rates = timetag::measure_rates(sim.streams, c.analysis);
        m.f_e = estimate_injection_fraction(m.rates, c.analysis.estimator);
    });
    PoolAccumulator acc;
    for (const auto& m : r.measurements) acc.add(m.f_e);
    r.estimate = with_upper_bound(pool_measurements(acc), c.campaign.sigma_multiplier);
    return r;
}

inline void write_measurements_csv(std::ostream& os, const CampaignResult& r) {
    os << "index,seed,f_e,s_a,s_b,c_ia,c_ia_acc,c_ib,c_ib_acc\n";
    for (const auto& m : r.measurements) {
        os << m.index << ',' << m.seed << ',' << fmt_number(m.f_e) << ',' << fmt_number(m.rates.s_a) << ','
           << fmt_number(m.rates.s_b) << ',' << fmt_number(m.rates.c_ia) << ',' << fmt_number(m.rates.c_ia_acc) << ','
           << fmt_number(m.rates.c_ib) << ',' << fmt_number(m.rates.c_ib_acc) << '\n';
    }
}

inline void write_summary_csv(std::ostream& os, const MonitorEstimate& e) {
    os << "mean,std_error,n_measurements,sigma_multiplier,upper_bound,upper_bound_display\n";
    os << fmt_number(e.f_e_mean) << ',' << fmt_number(e.std_error) << ',' << e.n_measurements << ','
       << fmt_number(e.sigma_multiplier) << ',' << fmt_number(e.f_e_upper_bound) << ','
       << fmt_number(round_up_one_significant_figure(e.f_e_upper_bound)) << '\n';
}

inline MonitorEstimate read_summary_csv(std::istream& is) {
    std::string header;
    std::string row;
    if (!std::getline(is, header) || !std::getline(is, row) ||
        header != "mean,std_error,n_measurements,sigma_multiplier,upper_bound,upper_bound_display") {
        throw FormatError("read_summary_csv: not a campaign summary");
    }
    std::istringstream ss(row);
    std::vector<std::string> cells;
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 6) throw FormatError("read_summary_csv: expected 6 columns");
    MonitorEstimate e;
    try {
        e.f_e_mean = std::stod(cells[0]);
        e.std_error = std::stod(cells[1]);
        e.n_measurements = std::stoul(cells[2]);
        e.sigma_multiplier = std::stod(cells[3]);
        e.f_e_upper_bound = std::stod(cells[4]);
    } catch (const std::exception&) {
        throw FormatError("read_summary_csv: malformed number");
    }
    return e;
}

struct ReportOutcome {
    std::string text;
    std::string csv;
    bool certified = false;
    int exit_code = 1;
};

/// Plain-text and CSV summary of an operating point and an optional monitor
/// result. The channel counts as certified when the monitor's upper bound
/// does not exceed the injection bound assumed in the SKR. Exit code 0 iff
/// the clamped SKR is positive and the channel is certified.
inline ReportOutcome report(const SkrReport& point, const std::optional<MonitorEstimate>& monitor,
                            double injection_bound) {
    ReportOutcome out;
    out.certified = monitor.has_value() && monitor->f_e_upper_bound <= injection_bound;
    const bool positive = point.skr_clamped_bits_per_s > 0.0;
    out.exit_code = positive && out.certified ? 0 : 1;

    std::ostringstream t;
    t << "operating point\n";
    t << "  photons per bit        " << fmt_number(point.photons_per_bit) << '\n';
    t << "  P_e                    " << fmt_number(point.p_e) << '\n';
    t << "  I_AB (bits/use)        " << fmt_number(point.i_ab) << '\n';
    t << "  chi_BE (bits/use)      " << fmt_number(point.chi_be) << '\n';
    t << "  SKR (bits/s)           " << fmt_number(point.skr_clamped_bits_per_s) << '\n';
    t << "  SKR raw (bits/s)       " << fmt_number(point.skr_bits_per_s) << '\n';
    t << "  bits per mode          " << fmt_number(point.bits_per_mode) << '\n';
    t << "  rate-loss bound        " << fmt_number(point.rate_loss_bound_bits_per_mode) << '\n';
    t << "  bound respected        " << (point.respects_rate_loss_bound() ? "yes" : "no") << '\n';
    t << "channel monitor\n";
    if (monitor) {
        t << "  f_E mean               " << fmt_number(monitor->f_e_mean) << '\n';
        t << "  f_E std error          " << fmt_number(monitor->std_error) << '\n';
        t << "  measurements           " << monitor->n_measurements << '\n';
        t << "  f_E upper bound        " << fmt_number(monitor->f_e_upper_bound) << " (display "
          << fmt_number(round_up_one_significant_figure(monitor->f_e_upper_bound)) << ")\n";
        t << "  assumed bound          " << fmt_number(injection_bound) << '\n';
    }
    t << "  channel                " << (out.certified ? "certified" : "uncertified") << '\n';
    t << "verdict                  " << (out.exit_code == 0 ? "secure key" : "no certified key") << '\n';
    out.text = t.str();

    std::ostringstream c;
    c << "photons_per_bit,p_e,i_ab,chi_be,skr_bits_per_s,bits_per_mode,rate_loss_bound_bits_per_mode,"
         "bound_respected,f_e_mean,f_e_std_error,f_e_upper_bound,channel\n";
    c << fmt_number(point.photons_per_bit) << ',' << fmt_number(point.p_e) << ',' << fmt_number(point.i_ab) << ','
      << fmt_number(point.chi_be) << ',' << fmt_number(point.skr_clamped_bits_per_s) << ','
      << fmt_number(point.bits_per_mode) << ',' << fmt_number(point.rate_loss_bound_bits_per_mode) << ','
      << (point.respects_rate_loss_bound() ? 1 : 0) << ',';
    if (monitor) {
        c << fmt_number(monitor->f_e_mean) << ',' << fmt_number(monitor->std_error) << ','
          << fmt_number(monitor->f_e_upper_bound) << ',';
    } else {
        c << ",,,";
    }
    c << (out.certified ? "certified" : "uncertified") << '\n';
    out.csv = c.str();
    return out;
}

}  // namespace flqkd::experiment
