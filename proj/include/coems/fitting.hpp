#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "coems/mechmodel.hpp"
#include "coems/spectrum.hpp"

namespace coems {

struct ModeEstimate {
    double mass = 0.0;       // kg
    double omega_m = 0.0;    // rad/s
    double gamma = 0.0;      // rad/s
    double mass_sigma = 0.0;
    double omega_m_sigma = 0.0;
    double gamma_sigma = 0.0;
};

struct FitResult {
    std::vector<ModeEstimate> modes;  // ascending omega_m
    double noise_floor = 0.0;         // m^2/Hz
    double noise_floor_sigma = 0.0;
    double residual_norm = 0.0;       // sqrt of the weighted sum of squares
    double reduced_chi_square = 0.0;
    bool converged = false;
    int iterations = 0;

    // Modes are indexed 1..n in ascending frequency.
    SpectrumModel to_model(const Environment& env) const;
};

struct ModeGuess {
    double mass;
    double omega_m;
    double gamma;
};

struct FitGuess {
    std::vector<ModeGuess> modes;
    double noise_floor;
};

struct FitOptions {
    int max_iterations = 200;
    double relative_step = 1e-6;
    double tolerance = 1e-8;
    // Extra passes that refresh the inverse-variance weights from the current
    // model (only when the data carries an averages count).
    int reweight_passes = 2;
};

// Peak seeding: smoothed local maxima >= 3x the median level, widths from the
// half-maximum crossing, floor from the median. Throws DegenerateData when
// fewer than n_modes distinct peaks exist.
FitGuess seed_peaks(const SpectrumData& data, std::size_t n_modes, const Environment& env);

// Least squares of the multi-mode thermal model plus flat floor against the
// data, over log-parameters. Throws NotConverged if the iteration cap is hit.
FitResult fit_spectrum(const SpectrumData& data, std::size_t n_modes, const Environment& env,
                       const std::optional<FitGuess>& initial_guess = std::nullopt,
                       const FitOptions& options = {});

struct ReferenceTone {
    double frequency_hz;
    double displacement_m;  // tone amplitude
};

struct CalibrationResult {
    double scale_factor;  // (m^2/Hz) per raw unit
    double reference_frequency_hz;
    double reference_displacement_m;
    double raw_tone_power;
    double raw_local_floor;
};

CalibrationResult calibrate_displacement(const SpectrumData& raw, const ReferenceTone& tone);

SpectrumData apply_calibration(const SpectrumData& raw, const CalibrationResult& cal);

// Adds a coherent tone of amplitude x to the nearest bin so that its
// full-line integrated power is x^2/2.
void add_tone(SpectrumData& data, double frequency_hz, double amplitude);

struct PowerLawFit {
    double exponent;
    double prefactor;
    double exponent_uncertainty;
};

PowerLawFit fit_power_law(std::span<const std::pair<double, double>> samples);

struct DissipationSlope {
    double slope_hz_per_db;
    double slope_stderr;
    double ci_low;
    double ci_high;
    double intercept_hz;
    std::vector<double> linewidths_hz;
    std::vector<double> linewidth_sigmas_hz;
};

DissipationSlope dissipation_slope(std::span<const double> drive_levels_db, std::span<const SpectrumData> spectra,
                                   const Environment& env = Environment{}, double confidence = 0.95);

}  // namespace coems
