#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "coems/config.hpp"
#include "coems/error.hpp"
#include "coems/io.hpp"
#include "coems/synth.hpp"

using namespace coems;
using doctest::Approx;

TEST_CASE("spectrum CSV and JSON round trips are exact") {
    const auto data = synth_thermal_spectrum(reference_spectrum_model(), uniform_grid(5.0e6, 5.1e6, 1e3), 10, 3);
    const io::Provenance prov{"synth", "0123456789abcdef", 3};

    const std::string csv = io::spectrum_to_csv(data, &prov);
    CHECK(csv.rfind("# coems synth config_digest=0123456789abcdef seed=3\nfrequency_hz,psd_m2_per_hz\n", 0) == 0);
    const auto back = io::spectrum_from_csv(csv);
    CHECK(back.frequencies_hz == data.frequencies_hz);
    CHECK(back.values == data.values);

    const auto j = io::spectrum_to_json(data, &prov);
    CHECK(j["kind"] == "thermal");
    CHECK(j["averages"] == 10);
    CHECK(j["seed"] == 3);
    CHECK(j["provenance"]["config_digest"] == "0123456789abcdef");
    const auto jb = io::spectrum_from_json(io::json::parse(j.dump()));
    CHECK(jb.values == data.values);
    CHECK(jb.averages == 10);
    CHECK(jb.rbw_hz == data.rbw_hz);
    CHECK(jb.seed == data.seed);
}

TEST_CASE("malformed inputs are Io errors") {
    auto kind_of = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Usage;
    };
    CHECK(kind_of([] { io::spectrum_from_csv("frequency_hz,psd\n1,2\n2,abc\n"); }) == ErrorKind::Io);
    CHECK(kind_of([] { io::spectrum_from_csv("1 2\n"); }) == ErrorKind::Io);
    CHECK(kind_of([] { io::spectrum_from_json(io::json{{"kind", "thermal"}}); }) == ErrorKind::Io);
    CHECK(kind_of([] { io::read_text_file("/nonexistent/nowhere.csv"); }) == ErrorKind::Io);
    CHECK_THROWS_AS(io::spectrum_from_csv("1,2\n1,3\n"), Error);  // not increasing
}

TEST_CASE("fit JSON and table") {
    FitResult fit;
    fit.modes.push_back({33e-9, 3.5e7, 2 * constants::pi * 6.8e3, 1e-10, 10.0, 50.0});
    fit.noise_floor = 2.25e-36;
    fit.converged = true;
    fit.iterations = 7;
    const auto j = io::fit_to_json(fit, Environment{});
    const auto back = io::fit_from_json(j);
    CHECK(back.modes.size() == 1);
    CHECK(back.modes[0].mass == fit.modes[0].mass);
    CHECK(back.modes[0].gamma_sigma == fit.modes[0].gamma_sigma);
    CHECK(back.noise_floor == fit.noise_floor);
    CHECK(j["modes"][0]["linewidth_hz"].get<double>() == Approx(6.8e3));

    const std::string table = io::fit_table(fit);
    CHECK(table.find("m (ug)") != std::string::npos);
    CHECK(table.find("33.0") != std::string::npos);
    CHECK(table.find("6.80") != std::string::npos);
    CHECK(table.find("S_N^1/2 = 1.500e-18") != std::string::npos);
}

TEST_CASE("scan exports") {
    ScanImage img;
    img.xs = {-1e-6, 0.0, 1e-6};
    img.ys = {-1e-6, 1e-6};
    img.values = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
    const io::Provenance prov{"scan", "abc", std::nullopt};
    const std::string pgm = io::scan_to_pgm(img, &prov);
    std::istringstream in(pgm);
    std::string magic, comment;
    std::getline(in, magic);
    std::getline(in, comment);
    CHECK(magic == "P2");
    CHECK(comment == "# coems scan config_digest=abc seed=none");
    int w, h, maxval, first, last = 0;
    in >> w >> h >> maxval >> first;
    for (int i = 1; i < 6; ++i) in >> last;
    CHECK(w == 3);
    CHECK(h == 2);
    CHECK(maxval == 65535);
    CHECK(first == 0);
    CHECK(last == 65535);

    const std::string csv = io::scan_to_csv(img, &prov);
    CHECK(csv.find("x_m,y_m,value_m_per_rthz\n") != std::string::npos);
    CHECK(csv.find("1e-06,1e-06,5\n") != std::string::npos);
    const std::string xs = io::cross_section_to_csv(img, 1e-6);
    CHECK(xs.find("0,4\n") != std::string::npos);
}

TEST_CASE("config parsing and model construction") {
    const auto cfg = Config::parse(R"(
; comment
[model]
temperature_k = 300
noise_floor_amp_m_per_rthz = 1.5e-18
modes = 3

[mode.3]
mass_kg = 33e-9
gamma_hz = 6.8e3
zp_amp_m_per_rthz = 4.6e-20
shape = crown:3
)");
    const auto model = model_from_config(cfg);
    REQUIRE(model.modes().size() == 1);
    CHECK(model.mode(3).mass() == 33e-9);
    CHECK(model.mode(3).resonance_hz() == Approx(5.63e6).epsilon(0.005));
    CHECK(std::get<Crown>(model.mode(3).shape()).order == 3);
    CHECK(model.noise_floor() == Approx(2.25e-36));

    auto c2 = cfg;
    CHECK(c2.digest() == cfg.digest());
    c2.apply_override("model.temperature_k=4");
    CHECK(c2.digest() != cfg.digest());
    CHECK(model_from_config(c2).environment().temperature_k == 4.0);
    CHECK_THROWS_AS(c2.apply_override("no_equals_sign"), Error);
    c2.apply_override("mode.3.mass_kg=oops");
    CHECK_THROWS_AS(model_from_config(c2), Error);
    CHECK_THROWS_AS(shape_from_string("torus"), Error);
    CHECK(std::holds_alternative<RadialFlexural>(shape_from_string("radial")));
}
