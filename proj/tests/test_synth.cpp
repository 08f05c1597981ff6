#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "coems/error.hpp"
#include "coems/synth.hpp"
#include "oracles.hpp"

using namespace coems;
using doctest::Approx;

namespace {

double sample_variance(const std::vector<double>& x) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    double s = 0.0;
    for (double v : x) s += (v - mean) * (v - mean);
    return s / (x.size() - 1);
}

TimeSeries tone(double fs, std::size_t n, double f, double amp, double phase = 0.3) {
    TimeSeries ts;
    ts.sample_rate = fs;
    ts.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) ts.samples[i] = amp * std::cos(2 * constants::pi * f * i / fs + phase);
    return ts;
}

}  // namespace

TEST_CASE("langevin preconditions") {
    const MechanicalMode m = reference_mechanical_modes()[2];
    const double fm = m.resonance_hz();
    const double tau = 1.0 / m.linewidth_hz();
    CHECK_THROWS_AS(langevin_trajectory(m, Environment{}, 20 * tau, 9 * fm, 1), Error);
    CHECK_THROWS_AS(langevin_trajectory(m, Environment{}, 5 * tau, 12 * fm, 1), Error);
    CHECK_NOTHROW(langevin_trajectory(m, Environment{}, 11 * tau, 12 * fm, 1));
}

TEST_CASE("langevin at zero temperature stays at rest") {
    const MechanicalMode m = reference_mechanical_modes()[0];
    const auto ts = langevin_trajectory(m, Environment(0.0), 12 / m.linewidth_hz(), 12 * m.resonance_hz(), 3);
    CHECK(std::all_of(ts.samples.begin(), ts.samples.end(), [](double x) { return x == 0.0; }));
}

TEST_CASE("langevin is reproducible and seed dependent") {
    const MechanicalMode m = reference_mechanical_modes()[1];
    const double dur = 12 / m.linewidth_hz();
    const auto a = langevin_trajectory(m, Environment{}, dur, 12 * m.resonance_hz(), 42);
    const auto b = langevin_trajectory(m, Environment{}, dur, 12 * m.resonance_hz(), 42);
    const auto c = langevin_trajectory(m, Environment{}, dur, 12 * m.resonance_hz(), 43);
    CHECK(a.samples == b.samples);
    CHECK(a.seed == 42);
    REQUIRE(a.samples.size() == c.samples.size());
    // Independent runs: sample correlation near zero.
    double sab = 0, saa = 0, scc = 0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        sab += a.samples[i] * c.samples[i];
        saa += a.samples[i] * a.samples[i];
        scc += c.samples[i] * c.samples[i];
    }
    CHECK(std::abs(sab / std::sqrt(saa * scc)) < 0.3);
}

TEST_CASE("langevin variance obeys equipartition (j=3)") {
    const auto ref = oracle::reference_modes();
    const MechanicalMode m(3, ref[2].m, ref[2].w, ref[2].g);
    const auto ts = langevin_trajectory(m, Environment{}, 0.25, 11 * m.resonance_hz(), 2024);
    const double expected = oracle::kB * 300.0 / (ref[2].m * ref[2].w * ref[2].w);
    CHECK(expected == Approx(1.0e-28).epsilon(0.05));
    CHECK(sample_variance(ts.samples) == Approx(expected).epsilon(0.05));
}

TEST_CASE("welch: tone power and constant input") {
    const double fs = 1000.0;
    const auto ts = tone(fs, 1 << 16, 123.4, 0.7);
    const auto psd = welch_psd(ts, 4096);
    CHECK(integrated_power(psd) == Approx(0.7 * 0.7 / 2).epsilon(0.01));
    CHECK(psd.rbw_hz == Approx(1.5 * fs / 4096).epsilon(1e-9));  // Hann ENBW is 1.5 bins
    CHECK(psd.kind == SpectrumKind::Thermal);

    TimeSeries dc;
    dc.sample_rate = fs;
    dc.samples.assign(8192, 2.0);
    const auto flat = welch_psd(dc, 1024);
    const double total = integrated_power(flat);
    // Hann leaks DC into bin 1 only.
    const double low = (flat.values[0] + 2 * flat.values[1]) * bin_width(flat);
    CHECK(total == Approx(4.0).epsilon(1e-9));
    CHECK(low / total == Approx(1.0).epsilon(1e-12));

    const auto rect = welch_psd(tone(fs, 1 << 14, 125.0, 1.0), 1024, 0.0, Window::Rectangular);
    CHECK(integrated_power(rect) == Approx(0.5).epsilon(1e-9));
}

TEST_CASE("welch: white noise is flat with total power sigma^2") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.3);
    TimeSeries ts;
    ts.sample_rate = 2000.0;
    ts.samples.resize(1 << 18);
    for (auto& x : ts.samples) x = n(rng);
    const auto psd = welch_psd(ts, 1024);
    CHECK(integrated_power(psd) == Approx(1.69).epsilon(0.02));
    const double expected = 1.69 / ts.sample_rate;  // double-sided density
    double mean = 0;
    for (std::size_t i = 1; i + 1 < psd.size(); ++i) mean += psd.values[i];
    mean /= (psd.size() - 2);
    CHECK(mean == Approx(expected).epsilon(0.02));
}

TEST_CASE("welch: errors and equivalent averages") {
    TimeSeries empty;
    CHECK_THROWS_AS(welch_psd(empty, 4), Error);
    const auto ts = tone(100.0, 64, 10.0, 1.0);
    CHECK_THROWS_AS(welch_psd(ts, 128), Error);
    CHECK_THROWS_AS(welch_psd(ts, 16, 1.0), Error);
    CHECK(welch_segment_count(1000, 100, 0.5) == 19);
    CHECK(welch_equivalent_averages(10, 256, 0.0, Window::Hann) == Approx(10.0));
    // Hann at 50% overlap: rho_1^2 = 1/36.
    const double k = 10;
    CHECK(welch_equivalent_averages(10, 256, 0.5, Window::Hann) ==
          Approx(k / (1 + 2 * (1 - 1 / k) / 36.0)).epsilon(1e-9));
}

TEST_CASE("welch of a langevin trajectory matches the thermal lineshape") {
    const auto ref = oracle::reference_modes();
    const MechanicalMode m(3, ref[2].m, ref[2].w, ref[2].g);
    const double fs = 11 * m.resonance_hz();
    const auto ts = langevin_trajectory(m, Environment{}, 0.1, fs, 77);
    const std::size_t L = 1 << 17;
    const auto psd = welch_psd(ts, L);
    const double k_eff = welch_equivalent_averages(psd.averages, L, 0.5, Window::Hann);
    std::size_t in_band = 0, inside = 0;
    for (std::size_t b = 0; b < psd.size(); ++b) {
        const double w = 2 * constants::pi * psd.frequencies_hz[b];
        if (std::abs(w - ref[2].w) > 5 * ref[2].g) continue;
        ++in_band;
        const double model = oracle::lorentz_psd(ref[2], 300.0, w);
        if (std::abs(psd.values[b] - model) <= 3 * model / std::sqrt(k_eff)) ++inside;
    }
    CHECK(in_band > 50);
    CHECK(static_cast<double>(inside) / in_band >= 0.95);
}

TEST_CASE("synth_thermal_spectrum statistics") {
    const SpectrumModel model = reference_spectrum_model();
    const auto grid = uniform_grid(4.5e6, 5.8e6, 500.0);

    const auto many = synth_thermal_spectrum(model, grid, 1000000, 9);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double truth = total_psd(model, 2 * constants::pi * grid[i]);
        CHECK(many.values[i] == Approx(truth).epsilon(0.005));
    }
    CHECK(many.rbw_hz == Approx(500.0));
    CHECK(many.averages == 1000000);

    // One average: exponential statistics, relative sd about 1.
    const SpectrumModel flat({}, 1.0, Environment{});
    const auto big = uniform_grid(0.0, 2e5, 1.0);
    const auto one = synth_thermal_spectrum(flat, big, 1, 10);
    double mean = 0, sq = 0;
    for (double v : one.values) mean += v, sq += v * v;
    mean /= one.size();
    const double sd = std::sqrt(sq / one.size() - mean * mean);
    CHECK(mean == Approx(1.0).epsilon(0.01));
    CHECK(sd == Approx(1.0).epsilon(0.02));

    const auto again = synth_thermal_spectrum(model, grid, 100, 123);
    CHECK(again.values == synth_thermal_spectrum(model, grid, 100, 123).values);
    CHECK(again.values != synth_thermal_spectrum(model, grid, 100, 124).values);
    CHECK(again.seed == 123u);
}

TEST_CASE("driven response") {
    const auto modes = reference_mechanical_modes();
    const double rbw = 100.0;

    SUBCASE("single mode on resonance") {
        const SpectrumModel one({modes[2]}, 0.0, Environment(0.0));
        const double f = 1e-9;
        const std::vector<double> grid{modes[2].resonance_hz()};
        const std::vector<double> forces{f};
        const auto r = driven_response(one, forces, grid, rbw);
        const double x = f / (modes[2].mass() * modes[2].gamma() * modes[2].omega_m());
        CHECK(r.values[0] == Approx(x * x / rbw).epsilon(1e-12));
        CHECK(r.kind == SpectrumKind::Driven);
        CHECK(r.rbw_hz == rbw);
    }

    SUBCASE("tone reaching the largest observed peak density") {
        const SpectrumModel model = reference_spectrum_model();
        const auto& j3 = model.mode(3);
        const double target = 2.4e-14;
        const double x = target * std::sqrt(rbw);
        const double f = x * j3.mass() * j3.gamma() * j3.omega_m();
        const std::vector<double> forces{0.0, 0.0, f};
        const std::vector<double> grid{j3.resonance_hz()};
        const auto r = driven_response(model, forces, grid, rbw);
        CHECK(std::sqrt(r.values[0]) == Approx(target).epsilon(1e-4));
    }

    SUBCASE("linearity in the drive") {
        const SpectrumModel model({modes[0], modes[1]}, 0.0, Environment(0.0));
        const auto grid = uniform_grid(4.6e6, 5.2e6, 1e3);
        const std::vector<double> f1{1e-9, -0.7e-9};
        const std::vector<double> f3{3e-9, -2.1e-9};
        const auto a = driven_response(model, f1, grid, rbw);
        const auto b = driven_response(model, f3, grid, rbw);
        for (std::size_t i = 0; i < grid.size(); ++i) CHECK(b.values[i] == Approx(9 * a.values[i]).epsilon(1e-12));
    }

    SUBCASE("interference: where the modal contributions cancel") {
        // Re chi changes sign at each resonance, so between two resonances
        // equal-sign forces cancel and opposite-sign forces add; outside
        // both resonances it is the other way round.
        const SpectrumModel model({modes[0], modes[1]}, 0.0, Environment(0.0));
        const double f = 1e-9;
        const double lo = std::min(modes[0].omega_m(), modes[1].omega_m());
        const double hi = std::max(modes[0].omega_m(), modes[1].omega_m());
        auto dip_count = [&](double sign, double w0, double w1) {
            int below = 0;
            for (int i = 1; i < 4000; ++i) {
                const double w = w0 + (w1 - w0) * i / 4000.0;
                const double s1 = std::abs(coherent_amplitude(model, {w, {f, 0.0}}));
                const double s2 = std::abs(coherent_amplitude(model, {w, {0.0, sign * f}}));
                const double both = std::abs(coherent_amplitude(model, {w, {f, sign * f}}));
                const double ref = std::abs(f * oracle::chi({modes[0].mass(), modes[0].omega_m(), modes[0].gamma()}, w) +
                                            sign * f * oracle::chi({modes[1].mass(), modes[1].omega_m(), modes[1].gamma()}, w));
                CHECK(both == Approx(ref).epsilon(1e-12));
                if (both < std::min(s1, s2)) ++below;
            }
            return below;
        };
        CHECK(dip_count(+1.0, lo, hi) > 0);
        CHECK(dip_count(-1.0, lo, hi) == 0);
        CHECK(dip_count(-1.0, 0.9 * lo, lo) > 0);
    }

    CHECK_THROWS_AS(DriveTone({1.0, {0.0, 0.0}}).validate(2), Error);
}
