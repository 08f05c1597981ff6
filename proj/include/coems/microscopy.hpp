#pragma once

// Scanning-probe imaging of mode structure: parametric mode shapes on the
// toroid, a Gaussian gradient-force footprint, modal overlap forces and
// simulated XY scans at a fixed drive frequency.

#include <cstddef>
#include <span>
#include <vector>

#include "coems/actuation.hpp"
#include "coems/mechmodel.hpp"

namespace coems {

// Radial flexural: (r/R)^2 inside the major radius, Gaussian roll-off of
// width minor_sigma outside. Crown{n}: exp(-(r-R)^2 / 2 sigma^2) cos(n theta).
// Both peak at |u| = 1 on the rim.
struct ModeShape {
    ShapeKind kind = RadialFlexural{};
    double major_radius = 30e-6;  // m
    double minor_sigma = 3e-6;    // m

    void validate() const;
    // Radius beyond which |u| < 1e-14.
    double support_radius() const { return major_radius + 8.0 * minor_sigma; }
};

double mode_displacement(const ModeShape& shape, double x, double y);

struct ForceFootprint {
    double center_x = 0.0;
    double center_y = 0.0;
    double height = 15e-6;  // m
    double width = 15e-6;   // m, Gaussian sigma per axis

    void validate() const;
};

// Isotropic Gaussian normalized to unit integral over the plane.
double footprint_weight(const ForceFootprint& fp, double x, double y);

struct QuadratureOptions {
    int points_per_scale = 8;   // nodes per min(width, minor_sigma)
    double tolerance = 1e-4;    // step-halving change, relative to force_scale
    int max_refinements = 4;
};

struct ModalForce {
    double value;           // N
    double error_estimate;  // |I(h) - I(h/2)| in N
    std::size_t nodes_per_axis;
};

// force_scale * integral of footprint_weight * mode_displacement over the
// plane, on a tensor grid refined by step halving until converged. Throws
// QuadratureNotConverged.
ModalForce effective_modal_force(const ModeShape& shape, const ForceFootprint& fp, double force_scale,
                                 const QuadratureOptions& options = {});

struct ScanGrid {
    std::vector<double> xs;
    std::vector<double> ys;

    static ScanGrid square(double half_extent, std::size_t points_per_axis);
};

struct ScanDrive {
    int mode_index = 1;
    double angular_frequency = 0.0;  // must equal the mode's w_m
    double v_rf = 3.0;               // V rms
    double v_dc = 0.0;               // V
    double rbw_hz = 1.0;
};

struct ScanImage {
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> values;  // row-major, values[iy * xs.size() + ix], m/sqrt(Hz)
    double drive_frequency_hz = 0.0;
    double drive_amplitude_v = 0.0;
    int mode_index = 0;
    double quadrature_error = 0.0;  // largest per-pixel step-halving change, m/sqrt(Hz)

    double at(std::size_t ix, std::size_t iy) const { return values[iy * xs.size() + ix]; }
    double max_value() const;
    // Row through the y grid point closest to y.
    std::vector<double> cross_section(double y = 0.0) const;
};

ScanImage simulate_scan(const ModeShape& shape, const ForceFootprint& fp_template, const SpectrumModel& model,
                        const DipoleModel& dipole, const ScanDrive& drive, const ScanGrid& grid,
                        const QuadratureOptions& options = {});

}  // namespace coems
