#pragma once

// Synthetic data: thermally driven trajectories, Welch spectrum estimates,
// averaged-periodogram-like thermal spectra and coherently driven responses.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "coems/mechmodel.hpp"
#include "coems/spectrum.hpp"

namespace coems {

struct TimeSeries {
    double sample_rate = 1.0;  // Hz
    std::vector<double> samples;
    std::uint64_t seed = 0;

    void validate() const;
};

struct LangevinOptions {
    // Draw the initial state from the stationary distribution instead of
    // starting at rest.
    bool start_in_equilibrium = false;
};

// Integrates m x'' + m Gamma x' + m w_m^2 x = F_T(t) with white Gaussian
// force of double-sided density 2 k_B T Gamma m. Uses the exact discrete
// propagator of the linear SDE, so the sampled process has the correct
// statistics for any step that resolves the oscillation.
TimeSeries langevin_trajectory(const MechanicalMode& mode, const Environment& env, double duration_s,
                               double sample_rate_hz, std::uint64_t seed, LangevinOptions options = {});

enum class Window { Hann, Rectangular };

std::vector<double> make_window(Window window, std::size_t length);

// Averaged windowed periodogram. Output bins are 0 .. fs/2 and hold the
// double-sided density; rbw_hz is the window's equivalent noise bandwidth.
SpectrumData welch_psd(const TimeSeries& ts, std::size_t segment_length, double overlap_fraction = 0.5,
                       Window window = Window::Hann, SpectrumKind kind = SpectrumKind::Thermal);

// Number of independent periodograms a Welch average over `segments`
// overlapping segments is worth (1 / normalized variance of the estimate).
double welch_equivalent_averages(std::size_t segments, std::size_t segment_length, double overlap_fraction,
                                 Window window);

std::size_t welch_segment_count(std::size_t length, std::size_t segment_length, double overlap_fraction);

// Multiplies each bin by an independent Gamma(k = averages, mean 1) draw,
// the exact distribution of an averaged periodogram of Gaussian noise.
void apply_periodogram_fluctuations(SpectrumData& data, std::size_t averages, std::uint64_t seed);

// total_psd on the grid with averaged-periodogram fluctuations.
// rbw_hz <= 0 selects the grid spacing.
SpectrumData synth_thermal_spectrum(const SpectrumModel& model, std::span<const double> freq_grid_hz,
                                    std::size_t averages, std::uint64_t seed, double rbw_hz = 0.0);

struct DriveTone {
    double angular_frequency;           // rad/s
    std::vector<double> modal_forces;   // N, signed, one per model mode

    void validate(std::size_t mode_count) const;
};

// X(w) = sum_j f_j chi_j(w)
std::complex<double> coherent_amplitude(const SpectrumModel& model, const DriveTone& tone);

// Swept coherent drive on top of the incoherent background:
// total_psd(w) + |X(w)|^2 / rbw.
SpectrumData driven_response(const SpectrumModel& model, std::span<const double> modal_forces,
                             std::span<const double> freq_grid_hz, double rbw_hz);

}  // namespace coems
