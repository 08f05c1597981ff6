#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <regex>
#include <sstream>

#include "coems/cli.hpp"
#include "coems/fitting.hpp"
#include "coems/io.hpp"
#include "coems/synth.hpp"

using namespace coems;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

const std::string kConfig = std::string(COEMS_CONFIG_DIR) + "/reference.ini";

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run_command(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("coems_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const std::regex kDiagnostic(R"(^coems: error=[a-z_]+ message="[^"\n]*"\n$)");

}  // namespace

TEST_CASE("usage errors exit 2 with a diagnostic") {
    const auto none = run({});
    CHECK(none.code == 2);
    CHECK(none.err.find("Usage") != std::string::npos);

    for (const auto& args : std::vector<std::vector<std::string>>{
             {"frobnicate", "--config", kConfig}, {"synth"}, {"fit", "--config"}, {"synth", "--config", kConfig}}) {
        const auto r = run(args);
        CHECK(r.code == 2);
        CHECK(std::regex_match(r.err, kDiagnostic));
    }
}

TEST_CASE("data errors exit 1 with a diagnostic") {
    const auto dir = scratch("data");
    // An empty value is not a number.
    const auto empty_rbw =
        run({"force", "--config", kConfig, "--out", dir.string(), "--set", "force.rbw_hz=", "force.mode=3"});
    CHECK(empty_rbw.code == 1);
    CHECK(empty_rbw.err.find("error=invalid_argument") != std::string::npos);
    CHECK(std::regex_match(empty_rbw.err, kDiagnostic));

    const auto bad_input = run({"fit", "--config", kConfig, "--out", dir.string(), "fit.input=/nonexistent.csv"});
    CHECK(bad_input.code == 1);
    CHECK(bad_input.err.find("error=io") != std::string::npos);

    const auto no_config = run({"report", "--config", "/nonexistent.ini"});
    CHECK(no_config.code == 1);
}

TEST_CASE("missing resolution bandwidth") {
    const fs::path dir = scratch("norbw");
    const fs::path cfg = dir / "c.ini";
    io::write_text_file(cfg, io::read_text_file(kConfig));
    std::string text = io::read_text_file(cfg);
    text.erase(text.find("rbw_hz = "), text.find('\n', text.find("rbw_hz = ")) - text.find("rbw_hz = ") + 1);
    io::write_text_file(cfg, text);
    const auto r = run({"force", "--config", cfg.string(), "--out", dir.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("error=missing_rbw") != std::string::npos);
    CHECK(std::regex_match(r.err, kDiagnostic));
}

TEST_CASE("synth then fit reproduces the reference table") {
    const auto dir = scratch("pipeline");
    const std::string out = dir.string();
    REQUIRE(run({"synth", "--config", kConfig, "--out", out, "--seed", "5"}).code == 0);
    const auto fit = run({"fit", "--config", kConfig, "--out", out, "fit.input=" + out + "/spectrum.csv"});
    REQUIRE(fit.code == 0);
    CHECK(fit.out.find("m (ug)") != std::string::npos);

    const auto j = io::json::parse(io::read_text_file(dir / "fit.json"));
    CHECK(j["converged"] == true);
    const double masses_by_freq[] = {410e-9, 280e-9, 33e-9};
    for (int i = 0; i < 3; ++i) CHECK(j["modes"][i]["mass_kg"].get<double>() == Approx(masses_by_freq[i]).epsilon(0.05));
    CHECK(fs::exists(dir / "fit_table.txt"));
    CHECK(j["provenance"]["config_digest"].get<std::string>().size() == 16);

    // JSON input path works as well.
    CHECK(run({"fit", "--config", kConfig, "--out", out, "fit.input=" + out + "/spectrum.json"}).code == 0);
}

TEST_CASE("outputs are byte-identical for identical config and seed") {
    const auto a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
    REQUIRE(run({"synth", "--config", kConfig, "--out", a.string(), "--seed", "9"}).code == 0);
    REQUIRE(run({"synth", "--config", kConfig, "--out", b.string(), "--seed", "9"}).code == 0);
    REQUIRE(run({"synth", "--config", kConfig, "--out", c.string(), "--seed", "10"}).code == 0);
    for (const char* f : {"spectrum.csv", "spectrum.json"}) {
        CHECK(io::read_text_file(a / f) == io::read_text_file(b / f));
        CHECK(io::read_text_file(a / f) != io::read_text_file(c / f));
    }
    const std::string head = io::read_text_file(a / "spectrum.csv").substr(0, 80);
    CHECK(head.find("config_digest=") != std::string::npos);
    CHECK(head.find("seed=9") != std::string::npos);
    const auto j = io::json::parse(io::read_text_file(a / "spectrum.json"));
    CHECK(j["seed"] == 9);
    CHECK(j["provenance"]["seed"] == 9);
}

TEST_CASE("force reports 0.40 uN with the shipped bandwidth") {
    const auto dir = scratch("force");
    const auto r = run({"force", "--config", kConfig, "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto j = io::json::parse(io::read_text_file(dir / "force.json"));
    CHECK(j["f_pp_un"].get<double>() == Approx(0.40).epsilon(1e-9));
    CHECK(j["f_pp_n"].get<double>() / j["f_rms_n"].get<double>() == Approx(2 * std::sqrt(2.0)));
    CHECK(j["inputs"]["peak_amplitude_density_m_per_rthz"] == 2.4e-14);
    CHECK(j.contains("provenance"));

    // From a fit file instead of the model section.
    const fs::path fit_dir = scratch("force_fit");
    REQUIRE(run({"synth", "--config", kConfig, "--out", fit_dir.string(), "--seed", "1"}).code == 0);
    REQUIRE(run({"fit", "--config", kConfig, "--out", fit_dir.string(),
                 "fit.input=" + (fit_dir / "spectrum.csv").string()})
                .code == 0);
    const auto r2 = run({"force", "--config", kConfig, "--out", fit_dir.string(),
                         "force.fit=" + (fit_dir / "fit.json").string()});
    CHECK(r2.code == 0);
    const auto j2 = io::json::parse(io::read_text_file(fit_dir / "force.json"));
    CHECK(j2["f_pp_un"].get<double>() == Approx(0.40).epsilon(0.05));
}

TEST_CASE("report") {
    const auto dir = scratch("report");
    const auto r = run({"report", "--config", kConfig, "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto j = io::json::parse(io::read_text_file(dir / "report.json"));
    CHECK(j["quantum_temperature"]["temperature_k"].get<double>() == Approx(2.64e-4).epsilon(0.002));
    CHECK(j["radiation_pressure"]["power_w"].get<double>() == Approx(13.5).epsilon(0.005));
    CHECK(j["radiation_pressure"]["quoted_power_w"] == 36.0);
    CHECK(j["modes"][2]["noise_to_zp_ratio"].get<double>() == Approx(32.6).epsilon(0.005));
    const std::string txt = io::read_text_file(dir / "report.txt");
    CHECK(txt.find("36 W") != std::string::npos);
    CHECK(txt.find("13.5 W") != std::string::npos);
    CHECK(txt.find("0.264 mK") != std::string::npos);
}

TEST_CASE("scan outputs") {
    const auto dir = scratch("scan");
    const auto r = run({"scan", "--config", kConfig, "--out", dir.string(), "scan.points=21"});
    REQUIRE(r.code == 0);
    for (const char* f : {"scan.csv", "scan.pgm", "scan_cross_section.csv", "scan.json"}) CHECK(fs::exists(dir / f));
    CHECK(io::read_text_file(dir / "scan.pgm").rfind("P2\n# coems scan config_digest=", 0) == 0);
    const auto crown = run({"scan", "--config", kConfig, "--out", dir.string(), "scan.mode=1", "scan.points=21"});
    CHECK(crown.code == 0);
}

TEST_CASE("calibrate") {
    const auto dir = scratch("calibrate");
    auto raw = synth_thermal_spectrum(reference_spectrum_model(), uniform_grid(4.0e6, 6.0e6, 200.0), 1000, 4);
    add_tone(raw, 4.2e6, 1e-15);
    for (auto& v : raw.values) v *= 1e30;
    raw.kind = SpectrumKind::RawUncalibrated;
    io::write_text_file(dir / "raw.json", io::spectrum_to_json(raw).dump());
    const auto r = run({"calibrate", "--config", kConfig, "--out", dir.string(),
                        "calibrate.input=" + (dir / "raw.json").string(), "calibrate.reference_freq_hz=4.2e6",
                        "calibrate.reference_disp_m=1e-15"});
    REQUIRE(r.code == 0);
    const auto j = io::json::parse(io::read_text_file(dir / "calibration.json"));
    CHECK(j["scale_factor"].get<double>() == Approx(1e-30).epsilon(1e-3));
    CHECK(fs::exists(dir / "calibrated.csv"));

    const auto miss = run({"calibrate", "--config", kConfig, "--out", dir.string(),
                           "calibrate.input=" + (dir / "raw.json").string(), "calibrate.reference_freq_hz=4.3e6",
                           "calibrate.reference_disp_m=1e-15"});
    CHECK(miss.code == 1);
    CHECK(miss.err.find("error=tone_not_found") != std::string::npos);
}
