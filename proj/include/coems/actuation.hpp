#pragma once

// Gradient-force actuation: driven-oscillator amplitudes, force extraction
// from a driven spectral peak, and the separable dipole force model.

#include <optional>

#include "coems/mechmodel.hpp"

namespace coems {

// Displacement amplitude f0 |chi(w)| of the steady state under f0 cos(w t).
double steady_state_amplitude(const MechanicalMode& mode, double force_amplitude, double omega);

struct ForceCalibration {
    double f_rms;  // N
    double f_pp;   // N, always 2 sqrt(2) f_rms
    double mass;
    double omega_m;
    double gamma;
    double peak_amplitude_density;  // m/sqrt(Hz)
    double rbw_hz;
};

// F_rms = (2/sqrt(pi)) m Gamma w_m sqrt(S_max) sqrt(RBW). Throws MissingRBW
// when no resolution bandwidth is supplied.
ForceCalibration force_from_peak(const MechanicalMode& mode, double peak_amplitude_density,
                                 std::optional<double> rbw_hz);

// Inverse of force_from_peak: the peak amplitude density displayed for an
// on-resonance drive of the given rms force.
double peak_density_from_force(const MechanicalMode& mode, double f_rms, double rbw_hz);

// Resolution bandwidth at which the measured peak corresponds to the given
// peak-to-peak force.
double rbw_for_peak_force(const MechanicalMode& mode, double peak_amplitude_density, double f_pp);

// Separable dipole force model anchored at a reference state:
//   F = F_ref * (V_rf / V_rf_ref) * (p_int + a V_dc) / (p_int + a V_ref) * (z_ref / z)^3
struct DipoleModel {
    double intrinsic_dipole = 1e-18;     // C m
    double induced_coefficient = 2e-19;  // C m / V
    double probe_height = 15e-6;         // m
    double probe_tip_diameter = 2e-6;    // m
    double reference_force = 0.40e-6;    // N (tone amplitude at the reference state)
    double reference_height = 15e-6;     // m
    double reference_dc = 0.0;           // V
    double reference_rf = 3.0;           // V rms

    void validate() const;
    double net_dipole(double v_dc) const { return intrinsic_dipole + induced_coefficient * v_dc; }
};

double response_amplitude(const DipoleModel& dipole, double v_dc, double v_rf, double z);

// V* = -p_int / a; throws NoSwitchOff when a == 0.
double switch_off_voltage(const DipoleModel& dipole);

// On-axis field of a z-dipole, p_z / (2 pi eps0 z^3).
double dipole_axial_field(double p_z, double z);

// P = c F_rms / pi
double radiation_pressure_power(double f_rms);

}  // namespace coems
