#include "coems/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "coems/error.hpp"

namespace coems {
namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

constexpr std::uint64_t kTrajectoryStream = 1;
constexpr std::uint64_t kSpectrumStream = 2;

}  // namespace

void TimeSeries::validate() const {
    require(sample_rate > 0.0 && std::isfinite(sample_rate), ErrorKind::InvalidArgument,
            "sample rate must be > 0");
    for (double x : samples) require(std::isfinite(x), ErrorKind::InvalidArgument, "time series has non-finite sample");
}

TimeSeries langevin_trajectory(const MechanicalMode& mode, const Environment& env, double duration_s,
                               double sample_rate_hz, std::uint64_t seed, LangevinOptions options) {
    require(sample_rate_hz > 10.0 * mode.resonance_hz(), ErrorKind::InvalidArgument,
            "sample rate must exceed 10 f_m");
    require(duration_s * mode.linewidth_hz() > 10.0, ErrorKind::InvalidArgument,
            "duration must span more than 10 correlation times (duration * Gamma/2pi > 10)");

    const double dt = 1.0 / sample_rate_hz;
    const double w0 = mode.omega_m();
    const double half_gamma = 0.5 * mode.gamma();
    const double w1 = std::sqrt(w0 * w0 - half_gamma * half_gamma);
    const double decay = std::exp(-half_gamma * dt);
    const double c = std::cos(w1 * dt);
    const double s = std::sin(w1 * dt);

    // Propagator in normalized coordinates u = x / sigma_x, v = xdot / sigma_v
    // with sigma_v / sigma_x = w0; the stationary covariance is the identity.
    const double a11 = decay * (c + half_gamma / w1 * s);
    const double a12 = decay * (s / w1) * w0;
    const double a21 = -decay * (w0 * w0 / w1) * s / w0;
    const double a22 = decay * (c - half_gamma / w1 * s);

    // Q = I - A A^T, factored as L L^T.
    const double q11 = 1.0 - (a11 * a11 + a12 * a12);
    const double q12 = -(a11 * a21 + a12 * a22);
    const double q22 = 1.0 - (a21 * a21 + a22 * a22);
    const double l11 = std::sqrt(std::max(q11, 0.0));
    const double l21 = l11 > 0.0 ? q12 / l11 : 0.0;
    const double l22 = std::sqrt(std::max(q22 - l21 * l21, 0.0));

    const double sigma_x = std::sqrt(equipartition_variance(mode, env));
    const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));

    TimeSeries ts;
    ts.sample_rate = sample_rate_hz;
    ts.seed = seed;
    ts.samples.resize(n);

    auto engine = make_engine(seed, kTrajectoryStream);
    std::normal_distribution<double> normal(0.0, 1.0);
    double u = 0.0;
    double v = 0.0;
    if (options.start_in_equilibrium) {
        u = normal(engine);
        v = normal(engine);
    }
    for (std::size_t i = 0; i < n; ++i) {
        ts.samples[i] = sigma_x * u;
        const double z1 = normal(engine);
        const double z2 = normal(engine);
        const double un = a11 * u + a12 * v + l11 * z1;
        const double vn = a21 * u + a22 * v + l21 * z1 + l22 * z2;
        u = un;
        v = vn;
    }
    return ts;
}

void apply_periodogram_fluctuations(SpectrumData& data, std::size_t averages, std::uint64_t seed) {
    require(averages >= 1, ErrorKind::InvalidArgument, "averages must be >= 1");
    const double k = static_cast<double>(averages);
    auto engine = make_engine(seed, kSpectrumStream);
    std::gamma_distribution<double> fluctuation(k, 1.0 / k);
    for (double& v : data.values) v *= fluctuation(engine);
    data.averages = averages;
    data.seed = seed;
}

SpectrumData synth_thermal_spectrum(const SpectrumModel& model, std::span<const double> freq_grid_hz,
                                    std::size_t averages, std::uint64_t seed, double rbw_hz) {
    require(averages >= 1, ErrorKind::InvalidArgument, "averages must be >= 1");
    SpectrumData out;
    out.kind = SpectrumKind::Thermal;
    out.frequencies_hz.assign(freq_grid_hz.begin(), freq_grid_hz.end());
    std::vector<double> omega(freq_grid_hz.size());
    std::transform(freq_grid_hz.begin(), freq_grid_hz.end(), omega.begin(),
                   [](double f) { return constants::two_pi * f; });
    out.values.resize(omega.size());
    total_psd(model, omega, out.values);
    if (rbw_hz <= 0.0) rbw_hz = out.size() >= 2 ? bin_width(out) : 1.0;
    out.rbw_hz = rbw_hz;
    apply_periodogram_fluctuations(out, averages, seed);
    out.validate();
    return out;
}

void DriveTone::validate(std::size_t mode_count) const {
    require(angular_frequency >= 0.0, ErrorKind::Domain, "drive frequency must be >= 0");
    require(modal_forces.size() == mode_count, ErrorKind::InvalidArgument, "one modal force per mode required");
    require(std::any_of(modal_forces.begin(), modal_forces.end(), [](double f) { return f != 0.0; }),
            ErrorKind::InvalidArgument, "drive tone needs at least one nonzero modal force");
}

std::complex<double> coherent_amplitude(const SpectrumModel& model, const DriveTone& tone) {
    tone.validate(model.modes().size());
    std::complex<double> x{0.0, 0.0};
    for (std::size_t j = 0; j < model.modes().size(); ++j) {
        x += tone.modal_forces[j] * susceptibility(model.modes()[j], tone.angular_frequency);
    }
    return x;
}

SpectrumData driven_response(const SpectrumModel& model, std::span<const double> modal_forces,
                             std::span<const double> freq_grid_hz, double rbw_hz) {
    require(!model.modes().empty(), ErrorKind::InvalidArgument, "driven response needs at least one mode");
    require(rbw_hz > 0.0, ErrorKind::MissingRBW, "driven response needs a resolution bandwidth > 0");
    SpectrumData out;
    out.kind = SpectrumKind::Driven;
    out.rbw_hz = rbw_hz;
    out.frequencies_hz.assign(freq_grid_hz.begin(), freq_grid_hz.end());
    out.values.resize(freq_grid_hz.size());

    std::vector<double> omega(freq_grid_hz.size());
    std::transform(freq_grid_hz.begin(), freq_grid_hz.end(), omega.begin(),
                   [](double f) { return constants::two_pi * f; });
    total_psd(model, omega, out.values);

    DriveTone tone{0.0, std::vector<double>(modal_forces.begin(), modal_forces.end())};
    for (std::size_t i = 0; i < omega.size(); ++i) {
        tone.angular_frequency = omega[i];
        out.values[i] += std::norm(coherent_amplitude(model, tone)) / rbw_hz;
    }
    out.validate();
    return out;
}

}  // namespace coems
