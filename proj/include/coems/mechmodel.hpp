#pragma once

// Closed-form physics of damped mechanical modes.
//
// Spectral convention: S_x(w) is a double-sided density in angular
// frequency, so <x^2> = integral of S_x dw/2pi over the whole real line.
// Numerically this is the same value as a double-sided density per Hz, which
// is how SpectrumData stores it.

#include <complex>
#include <span>
#include <variant>
#include <vector>

namespace coems {

namespace constants {
inline constexpr double boltzmann = 1.380649e-23;        // J/K
inline constexpr double hbar = 1.054572e-34;             // J s
inline constexpr double speed_of_light = 2.99792458e8;   // m/s
inline constexpr double vacuum_permittivity = 8.8541878e-12;  // F/m
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;
}  // namespace constants

struct RadialFlexural {
    bool operator==(const RadialFlexural&) const = default;
};
struct Crown {
    int order = 2;  // azimuthal order n >= 1
    bool operator==(const Crown&) const = default;
};
using ShapeKind = std::variant<RadialFlexural, Crown>;

// One resonator mode. Rates are stored in rad/s; damping_rate is the FWHM of
// the power spectrum.
class MechanicalMode {
public:
    MechanicalMode(int index, double effective_mass_kg, double resonance_angular_frequency,
                   double damping_rate, ShapeKind shape = RadialFlexural{});

    // Convenience for values quoted as f_m and Gamma/2pi in Hz.
    static MechanicalMode from_hz(int index, double effective_mass_kg, double resonance_hz,
                                  double linewidth_hz, ShapeKind shape = RadialFlexural{});

    int index() const noexcept { return index_; }
    double mass() const noexcept { return mass_; }
    double omega_m() const noexcept { return omega_m_; }
    double gamma() const noexcept { return gamma_; }
    const ShapeKind& shape() const noexcept { return shape_; }
    double quality_factor() const noexcept { return omega_m_ / gamma_; }
    double resonance_hz() const noexcept { return omega_m_ / constants::two_pi; }
    double linewidth_hz() const noexcept { return gamma_ / constants::two_pi; }

private:
    int index_;
    double mass_;
    double omega_m_;
    double gamma_;
    ShapeKind shape_;
};

struct Environment {
    double temperature_k = 300.0;

    static constexpr double boltzmann = constants::boltzmann;
    static constexpr double hbar = constants::hbar;
    static constexpr double speed_of_light = constants::speed_of_light;
    static constexpr double vacuum_permittivity = constants::vacuum_permittivity;

    explicit Environment(double temperature = 300.0);
    double thermal_energy() const noexcept { return boltzmann * temperature_k; }
};

class SpectrumModel {
public:
    SpectrumModel(std::vector<MechanicalMode> modes, double noise_floor, Environment env);

    const std::vector<MechanicalMode>& modes() const noexcept { return modes_; }
    double noise_floor() const noexcept { return noise_floor_; }
    const Environment& environment() const noexcept { return env_; }

    // Throws InvalidArgument if no mode carries this index.
    const MechanicalMode& mode(int index) const;

private:
    std::vector<MechanicalMode> modes_;
    double noise_floor_;
    Environment env_;
};

struct SpectralPeak {
    double power;      // m^2/Hz
    double amplitude;  // m/sqrt(Hz)
};

std::complex<double> susceptibility(const MechanicalMode& mode, double omega);

double thermal_psd(const MechanicalMode& mode, const Environment& env, double omega);

double total_psd(const SpectrumModel& model, double omega);

// Vectorized total_psd over an angular-frequency grid.
void total_psd(const SpectrumModel& model, std::span<const double> omega, std::span<double> out);

SpectralPeak zero_point_peak(const MechanicalMode& mode);

// On-resonance thermal peak 2 k_B T / (m Gamma w_m^2).
SpectralPeak thermal_peak(const MechanicalMode& mode, const Environment& env);

// Amplitude-density ratio sqrt(S_N) / sqrt(S_zp).
double noise_to_zp_ratio(const SpectrumModel& model, int mode_index);

double quantum_temperature(double omega);
double quantum_temperature(const MechanicalMode& mode);

// k_B T / (m w_m^2)
double equipartition_variance(const MechanicalMode& mode, const Environment& env);

// Inverts S_zp = hbar / (m Gamma w_m) for w_m given an amplitude density.
double omega_from_zero_point(double mass, double damping_rate, double zero_point_amplitude);

// Measured mode parameters (masses, linewidths, zero-point amplitudes) with
// resonance frequencies back-solved from the zero-point relation.
struct ReferenceMode {
    int index;
    double mass_kg;
    double linewidth_hz;
    double zero_point_amplitude;  // m/sqrt(Hz)
    double quoted_noise_ratio;
    ShapeKind shape;
};

inline constexpr double reference_noise_floor_amplitude = 1.5e-18;  // m/sqrt(Hz)
inline constexpr double reference_temperature = 300.0;              // K

std::span<const ReferenceMode> reference_modes();
std::vector<MechanicalMode> reference_mechanical_modes();
SpectrumModel reference_spectrum_model();

}  // namespace coems
