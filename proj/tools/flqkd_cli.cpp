// Command-line front end: SKR sweeps, window sweeps, monitor campaigns,
// BER calibration, reports and time-tag export.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "flqkd/experiment/config.hpp"
#include "flqkd/experiment/studies.hpp"
#include "flqkd/timetag/io.hpp"

namespace fs = std::filesystem;
using namespace flqkd;
using namespace flqkd::experiment;

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<unsigned> workers;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Override the config seed");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
}

ExperimentConfig resolve(const CommonOptions& o) {
    ExperimentConfig c = o.config_path.empty() ? config_from_json(json::object()) : load_config(o.config_path);
    if (o.seed) {
        c.seed = *o.seed;
        c.scenario.seed = *o.seed;
    }
    if (o.workers) c.workers = *o.workers;
    if (!o.out.empty()) {
        c.output_dir = o.out;
    } else if (const char* root = std::getenv("FLQKD_OUTPUT_ROOT"); root && *root) {
        c.output_dir = (fs::path(root) / c.output_dir).string();
    }
    return c;
}

fs::path prepare_output(const ExperimentConfig& c) {
    const fs::path dir(c.output_dir);
    fs::create_directories(dir);
    // Workers do not affect results, so they are left out of the echo.
    json resolved = to_json(c);
    resolved.erase("workers");
    std::ofstream(dir / "config.resolved.json") << resolved.dump(2) << '\n';
    return dir;
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path.string());
    writer(os);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Floodlight QKD channel-monitor and secret-key-rate toolkit"};
    app.require_subcommand(1);

    CommonOptions opts;
    std::string format = "csv";
    std::string monitor_path;

    auto* skr_cmd = app.add_subcommand("skr-sweep", "SKR, I_AB and chi_BE versus photons per bit");
    auto* window_cmd = app.add_subcommand("window-sweep", "Injection-fraction estimate versus coincidence window");
    auto* campaign_cmd = app.add_subcommand("campaign", "Repeated monitor measurements pooled into an upper bound");
    auto* calibrate_cmd = app.add_subcommand("calibrate", "Solve the receiver model from its anchor");
    auto* report_cmd = app.add_subcommand("report", "Operating-point report; exit 0 iff certified positive SKR");
    auto* export_cmd = app.add_subcommand("export-tags", "Simulate the scenario and write its time tags");
    for (auto* cmd : {skr_cmd, window_cmd, campaign_cmd, calibrate_cmd, report_cmd, export_cmd}) add_common(cmd, opts);
    report_cmd->add_option("--monitor", monitor_path, "Campaign summary CSV")->check(CLI::ExistingFile);
    export_cmd->add_option("--format", format, "csv or binary")->check(CLI::IsMember({"csv", "binary"}));

    CLI11_PARSE(app, argc, argv);

    try {
        const ExperimentConfig c = resolve(opts);
        const fs::path dir = prepare_output(c);

        if (*skr_cmd) {
            const auto r = run_skr_sweep(c);
            write_file(dir / "skr_sweep.csv", [&](std::ostream& os) { write_csv(os, r); });
            std::cout << "kappa " << fmt_number(r.calibration.ber.snr_per_photon) << ", " << r.rows.size()
                      << " points -> " << (dir / "skr_sweep.csv").string() << '\n';
        } else if (*window_cmd) {
            const auto r = run_window_sweep(c);
            write_file(dir / "window_sweep.csv", [&](std::ostream& os) { write_csv(os, r); });
            for (const auto& p : r.rows) {
                std::cout << "window " << fmt_number(p.window_s * 1e9) << " ns  f_E " << fmt_number(p.f_e) << " +/- "
                          << fmt_number(p.std_error) << '\n';
            }
        } else if (*campaign_cmd) {
            const auto r = run_monitor_campaign(c);
            write_file(dir / "campaign_measurements.csv", [&](std::ostream& os) { write_measurements_csv(os, r); });
            write_file(dir / "campaign_summary.csv", [&](std::ostream& os) { write_summary_csv(os, r.estimate); });
            std::cout << "f_E = " << fmt_number(r.estimate.f_e_mean) << " +/- " << fmt_number(r.estimate.std_error)
                      << " (n=" << r.estimate.n_measurements << "), upper bound "
                      << fmt_number(r.estimate.f_e_upper_bound) << '\n';
        } else if (*calibrate_cmd) {
            const auto cal = calibrate(c);
            json j{{"snr_per_photon", cal.ber.snr_per_photon}, {"impairment_floor", cal.ber.impairment_floor}};
            if (cal.anchor_photons_per_bit) j["anchor_photons_per_bit"] = *cal.anchor_photons_per_bit;
            if (cal.anchor_p_e) j["anchor_p_e"] = *cal.anchor_p_e;
            write_file(dir / "calibration.json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
            std::cout << j.dump(2) << '\n';
        } else if (*report_cmd) {
            const auto cal = calibrate(c);
            const auto point = operating_point(c, cal, c.report.photons_per_bit);
            std::optional<MonitorEstimate> monitor;
            if (!monitor_path.empty()) {
                std::ifstream in(monitor_path);
                monitor = read_summary_csv(in);
            }
            const auto out = report(point, monitor, c.security.injection_bound);
            write_file(dir / "report.txt", [&](std::ostream& os) { os << out.text; });
            write_file(dir / "report.csv", [&](std::ostream& os) { os << out.csv; });
            std::cout << out.text;
            return out.exit_code;
        } else if (*export_cmd) {
            const auto sim = timetag::generate_streams(c.scenario, c.workers);
            const auto records = timetag::merge_streams(sim.streams);
            if (format == "csv") {
                write_file(dir / "tags.csv", [&](std::ostream& os) { timetag::write_csv(os, records); });
            } else {
                write_file(dir / "tags.bin", [&](std::ostream& os) { timetag::write_binary(os, records); });
            }
            std::cout << records.size() << " events written\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
