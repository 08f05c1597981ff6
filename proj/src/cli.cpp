#include "coems/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include "coems/actuation.hpp"
#include "coems/config.hpp"
#include "coems/error.hpp"
#include "coems/fitting.hpp"
#include "coems/io.hpp"
#include "coems/microscopy.hpp"
#include "coems/synth.hpp"

namespace coems::cli {
namespace {

namespace fs = std::filesystem;
using io::json;

struct RunConfig {
    std::string command;
    fs::path config_path;
    fs::path out_dir = ".";
    std::optional<std::uint64_t> seed;
    Config cfg;

    io::Provenance provenance() const { return {command, cfg.digest(), seed}; }
};

std::string quoted(std::string_view text) {
    std::string out = "\"";
    for (char c : text) {
        if (c == '"' || c == '\\') out += '\\';
        out += (c == '\n') ? ' ' : c;
    }
    return out + "\"";
}

void write_json(const fs::path& path, const json& j) { io::write_text_file(path, j.dump(2) + "\n"); }

std::uint64_t required_seed(const RunConfig& rc) {
    if (!rc.seed) throw Error(ErrorKind::Usage, "stochastic synthesis needs --seed N or synth.seed");
    return *rc.seed;
}

int cmd_synth(const RunConfig& rc, std::ostream& out) {
    const SpectrumModel model = model_from_config(rc.cfg);
    const auto grid = uniform_grid(rc.cfg.get_double("synth.f_start_hz"), rc.cfg.get_double("synth.f_stop_hz"),
                                   rc.cfg.get_double("synth.f_step_hz"));
    const auto averages = static_cast<std::size_t>(rc.cfg.get_int("synth.averages", 100));
    const std::uint64_t seed = required_seed(rc);
    const std::string kind = rc.cfg.get_string("synth.kind", "thermal");

    SpectrumData data;
    if (kind == "thermal") {
        data = synth_thermal_spectrum(model, grid, averages, seed, rc.cfg.get_double("synth.rbw_hz", 0.0));
    } else if (kind == "driven") {
        const auto forces = rc.cfg.get_doubles("synth.modal_forces_n");
        data = driven_response(model, forces, grid, rc.cfg.get_double("synth.rbw_hz"));
        apply_periodogram_fluctuations(data, averages, seed);
    } else {
        throw Error(ErrorKind::InvalidArgument, "synth.kind must be thermal or driven");
    }

    const auto prov = rc.provenance();
    io::write_text_file(rc.out_dir / "spectrum.csv", io::spectrum_to_csv(data, &prov));
    write_json(rc.out_dir / "spectrum.json", io::spectrum_to_json(data, &prov));
    out << "wrote " << data.size() << " bins to " << (rc.out_dir / "spectrum.csv").string() << "\n";
    return kExitOk;
}

int cmd_fit(const RunConfig& rc, std::ostream& out) {
    const SpectrumData data = io::load_spectrum(rc.cfg.get_string("fit.input"));
    const Environment env{rc.cfg.get_double("model.temperature_k", reference_temperature)};
    const auto n_modes = static_cast<std::size_t>(rc.cfg.get_int("fit.n_modes", 3));
    const FitResult fit = fit_spectrum(data, n_modes, env);

    const auto prov = rc.provenance();
    write_json(rc.out_dir / "fit.json", io::fit_to_json(fit, env, &prov));
    const std::string table = io::fit_table(fit);
    io::write_text_file(rc.out_dir / "fit_table.txt",
                        "# coems fit config_digest=" + prov.config_digest + "\n" + table);
    out << table;
    return kExitOk;
}

MechanicalMode force_mode(const RunConfig& rc) {
    const int index = static_cast<int>(rc.cfg.get_int("force.mode", 3));
    if (auto fit_path = rc.cfg.get("force.fit")) {
        const FitResult fit = io::fit_from_json(json::parse(io::read_text_file(*fit_path)));
        if (index < 1 || static_cast<std::size_t>(index) > fit.modes.size()) {
            throw Error(ErrorKind::InvalidArgument, "force.mode is not a mode of the fit");
        }
        const auto& m = fit.modes[static_cast<std::size_t>(index - 1)];
        return {index, m.mass, m.omega_m, m.gamma};
    }
    return model_from_config(rc.cfg).mode(index);
}

int cmd_force(const RunConfig& rc, std::ostream& out) {
    const MechanicalMode mode = force_mode(rc);
    const double peak = rc.cfg.get_double("force.peak_amp_m_per_rthz");
    const ForceCalibration cal = force_from_peak(mode, peak, rc.cfg.find_double("force.rbw_hz"));
    const auto prov = rc.provenance();
    write_json(rc.out_dir / "force.json", io::force_to_json(cal, &prov));
    char line[160];
    std::snprintf(line, sizeof line, "F_rms = %.4g N (%.4g uN), F_pp = %.4g N (%.4g uN), RBW = %.6g Hz\n", cal.f_rms,
                  cal.f_rms * 1e6, cal.f_pp, cal.f_pp * 1e6, cal.rbw_hz);
    out << line;
    return kExitOk;
}

int cmd_scan(const RunConfig& rc, std::ostream& out) {
    const SpectrumModel model = model_from_config(rc.cfg);
    const DipoleModel dipole = dipole_from_config(rc.cfg);
    const int index = static_cast<int>(rc.cfg.get_int("scan.mode", 2));
    const MechanicalMode& mode = model.mode(index);

    ModeShape shape;
    shape.kind = rc.cfg.contains("scan.shape") ? shape_from_string(rc.cfg.get_string("scan.shape")) : mode.shape();
    shape.major_radius = rc.cfg.get_double("scan.major_radius_m", shape.major_radius);
    shape.minor_sigma = rc.cfg.get_double("scan.minor_sigma_m", shape.minor_sigma);

    ForceFootprint fp;
    fp.height = dipole.probe_height;
    fp.width = rc.cfg.get_double("scan.footprint_width_m", dipole.probe_height);

    ScanDrive drive;
    drive.mode_index = index;
    drive.angular_frequency = mode.omega_m();
    drive.v_rf = rc.cfg.get_double("drive.v_rf_v", dipole.reference_rf);
    drive.v_dc = rc.cfg.get_double("drive.v_dc_v", dipole.reference_dc);
    const auto rbw = rc.cfg.find_double("scan.rbw_hz");
    const auto fallback_rbw = rc.cfg.find_double("force.rbw_hz");
    if (!rbw && !fallback_rbw) throw Error(ErrorKind::MissingRBW, "scan needs scan.rbw_hz (or force.rbw_hz)");
    drive.rbw_hz = rbw ? *rbw : *fallback_rbw;

    const ScanGrid grid = ScanGrid::square(rc.cfg.get_double("scan.half_extent_m", 45e-6),
                                           static_cast<std::size_t>(rc.cfg.get_int("scan.points", 41)));
    const ScanImage img = simulate_scan(shape, fp, model, dipole, drive, grid);

    const auto prov = rc.provenance();
    io::write_text_file(rc.out_dir / "scan.csv", io::scan_to_csv(img, &prov));
    io::write_text_file(rc.out_dir / "scan.pgm", io::scan_to_pgm(img, &prov));
    io::write_text_file(rc.out_dir / "scan_cross_section.csv", io::cross_section_to_csv(img, 0.0, &prov));
    json meta{{"mode_index", img.mode_index},
              {"drive_frequency_hz", img.drive_frequency_hz},
              {"drive_amplitude_v", img.drive_amplitude_v},
              {"rbw_hz", drive.rbw_hz},
              {"footprint_width_m", fp.width},
              {"max_value_m_per_rthz", img.max_value()},
              {"quadrature_error_m_per_rthz", img.quadrature_error},
              {"nx", img.xs.size()},
              {"ny", img.ys.size()}};
    meta["provenance"] = {{"command", prov.command}, {"config_digest", prov.config_digest}, {"seed", nullptr}};
    write_json(rc.out_dir / "scan.json", meta);
    out << "scan " << img.xs.size() << "x" << img.ys.size() << ", max " << img.max_value() << " m/rtHz\n";
    return kExitOk;
}

int cmd_calibrate(const RunConfig& rc, std::ostream& out) {
    const SpectrumData raw = io::load_spectrum(rc.cfg.get_string("calibrate.input"));
    const ReferenceTone tone{rc.cfg.get_double("calibrate.reference_freq_hz"),
                             rc.cfg.get_double("calibrate.reference_disp_m")};
    const CalibrationResult cal = calibrate_displacement(raw, tone);
    const SpectrumData calibrated = apply_calibration(raw, cal);
    const auto prov = rc.provenance();
    write_json(rc.out_dir / "calibration.json", io::calibration_to_json(cal, &prov));
    io::write_text_file(rc.out_dir / "calibrated.csv", io::spectrum_to_csv(calibrated, &prov));
    write_json(rc.out_dir / "calibrated.json", io::spectrum_to_json(calibrated, &prov));
    out << "scale_factor = " << io::format_double(cal.scale_factor) << "\n";
    return kExitOk;
}

int cmd_report(const RunConfig& rc, std::ostream& out) {
    const SpectrumModel model = model_from_config(rc.cfg);
    std::ostringstream text;
    json j;
    char line[200];

    j["noise_floor_amp_m_per_rthz"] = std::sqrt(model.noise_floor());
    j["modes"] = json::array();
    text << "Zero-point peaks\n";
    for (const auto& m : model.modes()) {
        const SpectralPeak zp = zero_point_peak(m);
        json entry{{"index", m.index()},
                   {"resonance_hz", m.resonance_hz()},
                   {"zero_point_m2_per_hz", zp.power},
                   {"zero_point_amp_m_per_rthz", zp.amplitude},
                   {"quantum_temperature_k", quantum_temperature(m)}};
        std::snprintf(line, sizeof line, "  j=%d  f_m = %.4g MHz  S_zp^1/2 = %.3g m/rtHz  T_q = %.3g mK", m.index(),
                      m.resonance_hz() * 1e-6, zp.amplitude, quantum_temperature(m) * 1e3);
        text << line;
        if (model.noise_floor() > 0.0) {
            const double ratio = noise_to_zp_ratio(model, m.index());
            entry["noise_to_zp_ratio"] = ratio;
            std::snprintf(line, sizeof line, "  S_N/S_zp = %.1f", ratio);
            text << line;
        }
        text << "\n";
        j["modes"].push_back(entry);
    }

    const double f_q = rc.cfg.get_double("report.quantum_freq_hz", 5.5e6);
    const double t_q = quantum_temperature(constants::two_pi * f_q);
    j["quantum_temperature"] = {{"frequency_hz", f_q}, {"temperature_k", t_q}};
    std::snprintf(line, sizeof line, "Quantum regime scale hbar*w/k_B at %.3g MHz: %.3g mK\n", f_q * 1e-6, t_q * 1e3);
    text << line;

    // Force and radiation-pressure comparison.
    const double f_pp_ref = rc.cfg.get_double("report.reference_fpp_n", 0.40e-6);
    double f_rms = f_pp_ref / (2.0 * std::sqrt(2.0));
    std::string source = "reference F_pp";
    const auto peak = rc.cfg.find_double("force.peak_amp_m_per_rthz");
    if (peak && rc.cfg.contains("force.rbw_hz") && !model.modes().empty()) {
        const auto& m = model.mode(static_cast<int>(rc.cfg.get_int("force.mode", 3)));
        const ForceCalibration cal = force_from_peak(m, *peak, rc.cfg.find_double("force.rbw_hz"));
        j["force"] = io::force_to_json(cal);
        f_rms = cal.f_rms;
        source = "force calibration";
        std::snprintf(line, sizeof line, "Force from peak: F_rms = %.4g uN, F_pp = %.4g uN (RBW %.6g Hz)\n",
                      cal.f_rms * 1e6, cal.f_pp * 1e6, cal.rbw_hz);
        text << line;
    }
    if (peak && !model.modes().empty()) {
        const auto& m = model.mode(static_cast<int>(rc.cfg.get_int("force.mode", 3)));
        const double rbw = rbw_for_peak_force(m, *peak, f_pp_ref);
        j["back_solved_rbw_hz"] = rbw;
        std::snprintf(line, sizeof line, "RBW reproducing F_pp = %.3g uN from the peak (derived): %.6g Hz\n",
                      f_pp_ref * 1e6, rbw);
        text << line;
    }
    const double power = radiation_pressure_power(f_rms);
    j["radiation_pressure"] = {{"f_rms_n", f_rms},
                               {"f_rms_source", source},
                               {"power_w", power},
                               {"formula", "c*F_rms/pi"},
                               {"quoted_power_w", 36.0},
                               {"note", "c*F_rms/pi at F_rms = F_pp/(2 sqrt 2) does not reproduce the quoted 36 W; "
                                        "the formula is evaluated as written"}};
    std::snprintf(line, sizeof line,
                  "Radiation-pressure equivalent power c*F_rms/pi = %.3g W (F_rms = %.4g N, %s); quoted value 36 W "
                  "is not reproduced by this formula\n",
                  power, f_rms, source.c_str());
    text << line;

    const auto prov = rc.provenance();
    j["provenance"] = {{"command", prov.command}, {"config_digest", prov.config_digest}, {"seed", nullptr}};
    write_json(rc.out_dir / "report.json", j);
    io::write_text_file(rc.out_dir / "report.txt", "# coems report config_digest=" + prov.config_digest + "\n" + text.str());
    out << text.str();
    return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cavity opto-electromechanical spectra, force calibration and scan simulation", "coems"};
    app.require_subcommand(1);

    RunConfig rc;
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::vector<std::string> sets;
    std::vector<std::string> positional;

    const char* names[] = {"synth", "fit", "force", "scan", "calibrate", "report"};
    const char* blurbs[] = {"emit a synthetic spectrum (CSV + JSON)",
                            "fit a spectrum, emit FitResult JSON and a mode table",
                            "force calibration from a driven peak",
                            "simulate a scanning-probe image (CSV + PGM)",
                            "calibrate a raw spectrum with a reference tone",
                            "zero-point peaks, noise ratios, quantum temperature, radiation-pressure power"};
    for (std::size_t i = 0; i < std::size(names); ++i) {
        CLI::App* sub = app.add_subcommand(names[i], blurbs[i]);
        sub->add_option("--config", config_path, "configuration file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "RNG seed");
        sub->add_option("--set", sets, "override section.key=value");
        sub->add_option("overrides", positional, "section.key=value overrides");
    }

    if (args.empty()) {
        err << app.help();
        err << "coems: error=usage message=\"no command given\"\n";
        return kExitUsage;
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "coems: error=usage message=" << quoted(e.what()) << "\n";
        return kExitUsage;
    }

    try {
        rc.command = app.get_subcommands().front()->get_name();
        rc.config_path = config_path;
        rc.out_dir = out_dir;
        rc.cfg = Config::load(rc.config_path);
        for (const auto& s : sets) rc.cfg.apply_override(s);
        for (const auto& s : positional) rc.cfg.apply_override(s);
        rc.seed = seed;
        if (!rc.seed && rc.cfg.contains("synth.seed")) {
            rc.seed = static_cast<std::uint64_t>(rc.cfg.get_int("synth.seed", 0));
        }
        if (rc.seed) rc.cfg.set("run.seed", std::to_string(*rc.seed));

        if (rc.command == "synth") return cmd_synth(rc, out);
        if (rc.command == "fit") return cmd_fit(rc, out);
        if (rc.command == "force") return cmd_force(rc, out);
        if (rc.command == "scan") return cmd_scan(rc, out);
        if (rc.command == "calibrate") return cmd_calibrate(rc, out);
        return cmd_report(rc, out);
    } catch (const Error& e) {
        err << "coems: error=" << to_string(e.kind()) << " message=" << quoted(e.what()) << "\n";
        return e.kind() == ErrorKind::Usage ? kExitUsage : kExitData;
    } catch (const std::exception& e) {
        err << "coems: error=data message=" << quoted(e.what()) << "\n";
        return kExitData;
    }
}

}  // namespace coems::cli
