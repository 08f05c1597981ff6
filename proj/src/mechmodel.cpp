#include "coems/mechmodel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <string>

#include "coems/error.hpp"
#include "coems/simd/kernels.hpp"

namespace coems {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid_argument";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::NotConverged: return "not_converged";
        case ErrorKind::DegenerateData: return "degenerate_data";
        case ErrorKind::ToneNotFound: return "tone_not_found";
        case ErrorKind::MissingRBW: return "missing_rbw";
        case ErrorKind::NoSwitchOff: return "no_switch_off";
        case ErrorKind::QuadratureNotConverged: return "quadrature_not_converged";
        case ErrorKind::Io: return "io";
        case ErrorKind::Usage: return "usage";
    }
    return "unknown";
}

MechanicalMode::MechanicalMode(int index, double effective_mass_kg, double resonance_angular_frequency,
                               double damping_rate, ShapeKind shape)
    : index_(index),
      mass_(effective_mass_kg),
      omega_m_(resonance_angular_frequency),
      gamma_(damping_rate),
      shape_(shape) {
    require(std::isfinite(mass_) && mass_ > 0.0, ErrorKind::InvalidArgument,
            "mode effective mass must be positive");
    require(std::isfinite(omega_m_) && omega_m_ > 0.0, ErrorKind::InvalidArgument,
            "mode resonance frequency must be positive");
    require(std::isfinite(gamma_) && gamma_ > 0.0, ErrorKind::InvalidArgument,
            "mode damping rate must be positive");
    require(gamma_ < omega_m_, ErrorKind::InvalidArgument, "mode must be underdamped (gamma < omega_m)");
    if (const auto* crown = std::get_if<Crown>(&shape_)) {
        require(crown->order >= 1, ErrorKind::InvalidArgument, "crown azimuthal order must be >= 1");
    }
}

MechanicalMode MechanicalMode::from_hz(int index, double effective_mass_kg, double resonance_hz,
                                       double linewidth_hz, ShapeKind shape) {
    return {index, effective_mass_kg, constants::two_pi * resonance_hz, constants::two_pi * linewidth_hz,
            shape};
}

Environment::Environment(double temperature) : temperature_k(temperature) {
    require(std::isfinite(temperature) && temperature >= 0.0, ErrorKind::InvalidArgument,
            "temperature must be >= 0");
}

SpectrumModel::SpectrumModel(std::vector<MechanicalMode> modes, double noise_floor, Environment env)
    : modes_(std::move(modes)), noise_floor_(noise_floor), env_(env) {
    require(std::isfinite(noise_floor_) && noise_floor_ >= 0.0, ErrorKind::InvalidArgument,
            "noise floor must be >= 0");
    std::set<int> seen;
    for (const auto& m : modes_) {
        require(seen.insert(m.index()).second, ErrorKind::InvalidArgument, "mode indices must be unique");
    }
}

const MechanicalMode& SpectrumModel::mode(int index) const {
    for (const auto& m : modes_) {
        if (m.index() == index) return m;
    }
    throw Error(ErrorKind::InvalidArgument, "no mode with index " + std::to_string(index));
}

std::complex<double> susceptibility(const MechanicalMode& mode, double omega) {
    require(omega >= 0.0, ErrorKind::Domain, "susceptibility requires omega >= 0");
    const std::complex<double> denom{mode.omega_m() * mode.omega_m() - omega * omega, -mode.gamma() * omega};
    return 1.0 / (mode.mass() * denom);
}

double thermal_psd(const MechanicalMode& mode, const Environment& env, double omega) {
    const double chi = std::abs(susceptibility(mode, omega));
    return 2.0 * env.thermal_energy() * mode.gamma() * mode.mass() * chi * chi;
}

double total_psd(const SpectrumModel& model, double omega) {
    double sum = model.noise_floor();
    for (const auto& m : model.modes()) sum += thermal_psd(m, model.environment(), omega);
    return sum;
}

void total_psd(const SpectrumModel& model, std::span<const double> omega, std::span<double> out) {
    require(omega.size() == out.size(), ErrorKind::InvalidArgument, "grid/output size mismatch");
    for (double w : omega) require(w >= 0.0, ErrorKind::Domain, "total_psd requires omega >= 0");
    std::fill(out.begin(), out.end(), model.noise_floor());
    const auto& k = simd::active_kernels();
    const double kt = model.environment().thermal_energy();
    for (const auto& m : model.modes()) {
        // 2 k_B T Gamma m |chi|^2 = (2 k_B T Gamma / m) / |w_m^2 - w^2 - i Gamma w|^2
        const double coeff = 2.0 * kt * m.gamma() / m.mass();
        k.lorentzian_accumulate(omega, out, coeff, m.omega_m() * m.omega_m(), m.gamma() * m.gamma());
    }
}

SpectralPeak zero_point_peak(const MechanicalMode& mode) {
    const double power = constants::hbar / (mode.mass() * mode.gamma() * mode.omega_m());
    return {power, std::sqrt(power)};
}

SpectralPeak thermal_peak(const MechanicalMode& mode, const Environment& env) {
    const double power = thermal_psd(mode, env, mode.omega_m());
    return {power, std::sqrt(power)};
}

double noise_to_zp_ratio(const SpectrumModel& model, int mode_index) {
    require(model.noise_floor() > 0.0, ErrorKind::InvalidArgument, "noise floor must be > 0");
    const auto& m = model.mode(mode_index);
    return std::sqrt(model.noise_floor()) / zero_point_peak(m).amplitude;
}

double quantum_temperature(double omega) {
    require(omega >= 0.0, ErrorKind::Domain, "quantum_temperature requires omega >= 0");
    return constants::hbar * omega / constants::boltzmann;
}

double quantum_temperature(const MechanicalMode& mode) { return quantum_temperature(mode.omega_m()); }

double equipartition_variance(const MechanicalMode& mode, const Environment& env) {
    return env.thermal_energy() / (mode.mass() * mode.omega_m() * mode.omega_m());
}

double omega_from_zero_point(double mass, double damping_rate, double zero_point_amplitude) {
    require(mass > 0.0 && damping_rate > 0.0 && zero_point_amplitude > 0.0, ErrorKind::InvalidArgument,
            "zero-point inversion needs positive inputs");
    return constants::hbar / (mass * damping_rate * zero_point_amplitude * zero_point_amplitude);
}

std::span<const ReferenceMode> reference_modes() {
    static const std::array<ReferenceMode, 3> table{{
        {1, 280e-9, 9.5e3, 1.4e-20, 107.0, Crown{2}},
        {2, 410e-9, 11.5e3, 1.1e-20, 136.0, RadialFlexural{}},
        {3, 33e-9, 6.8e3, 4.6e-20, 32.0, Crown{3}},
    }};
    return table;
}

std::vector<MechanicalMode> reference_mechanical_modes() {
    std::vector<MechanicalMode> out;
    for (const auto& r : reference_modes()) {
        const double gamma = constants::two_pi * r.linewidth_hz;
        out.emplace_back(r.index, r.mass_kg, omega_from_zero_point(r.mass_kg, gamma, r.zero_point_amplitude),
                         gamma, r.shape);
    }
    return out;
}

SpectrumModel reference_spectrum_model() {
    return {reference_mechanical_modes(), reference_noise_floor_amplitude * reference_noise_floor_amplitude,
            Environment{reference_temperature}};
}

}  // namespace coems
