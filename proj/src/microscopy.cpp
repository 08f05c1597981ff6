#include "coems/microscopy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "coems/error.hpp"
#include "coems/simd/kernels.hpp"

namespace coems {
namespace {

constexpr double kFootprintSpan = 6.0;     // footprint sigmas covered by the local grid
constexpr std::size_t kMaxGlobalNodes = 4096;

std::vector<double> axis_nodes(double center, double half_span, double h, double lo, double hi) {
    const auto k_max = static_cast<long>(std::floor(half_span / h));
    std::vector<double> nodes;
    for (long k = -k_max; k <= k_max; ++k) {
        const double x = center + static_cast<double>(k) * h;
        if (x >= lo && x <= hi) nodes.push_back(x);
    }
    return nodes;
}

// Rows of quadrature weights h * N(x_i; c, w) for each center c.
std::vector<std::vector<double>> gaussian_rows(std::span<const double> centers, std::span<const double> nodes,
                                               double width, double h) {
    const double norm = h / (std::sqrt(constants::two_pi) * width);
    const double inv2w2 = 1.0 / (2.0 * width * width);
    std::vector<std::vector<double>> rows(centers.size(), std::vector<double>(nodes.size()));
    for (std::size_t p = 0; p < centers.size(); ++p) {
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double d = nodes[i] - centers[p];
            rows[p][i] = norm * std::exp(-d * d * inv2w2);
        }
    }
    return rows;
}

// Overlap integrals of the mode with footprints centered on every
// (cx[p], cy[q]) using a tensor grid of spacing h. Result is row-major in q.
std::vector<double> overlap_grid(const ModeShape& shape, std::span<const double> cx, std::span<const double> cy,
                                 std::span<const double> xs, std::span<const double> ys, double width, double h) {
    std::vector<double> out(cx.size() * cy.size(), 0.0);
    if (xs.empty() || ys.empty()) return out;

    std::vector<std::vector<double>> field(ys.size(), std::vector<double>(xs.size()));
    for (std::size_t j = 0; j < ys.size(); ++j) {
        for (std::size_t i = 0; i < xs.size(); ++i) field[j][i] = mode_displacement(shape, xs[i], ys[j]);
    }
    const auto gx = gaussian_rows(cx, xs, width, h);
    const auto gy = gaussian_rows(cy, ys, width, h);
    const auto& k = simd::active_kernels();

    std::vector<double> column(ys.size());
    for (std::size_t p = 0; p < cx.size(); ++p) {
        for (std::size_t j = 0; j < ys.size(); ++j) column[j] = k.dot(gx[p], field[j]);
        for (std::size_t q = 0; q < cy.size(); ++q) out[q * cx.size() + p] = k.dot(gy[q], column);
    }
    return out;
}

double base_step(const ModeShape& shape, double width, const QuadratureOptions& options) {
    require(options.points_per_scale >= 1, ErrorKind::InvalidArgument, "points_per_scale must be >= 1");
    return std::min(width, shape.minor_sigma) / options.points_per_scale;
}

}  // namespace

void ModeShape::validate() const {
    require(major_radius > 0.0, ErrorKind::InvalidArgument, "major radius must be > 0");
    require(minor_sigma > 0.0, ErrorKind::InvalidArgument, "minor radius scale must be > 0");
    if (const auto* crown = std::get_if<Crown>(&kind)) {
        require(crown->order >= 1, ErrorKind::InvalidArgument, "crown azimuthal order must be >= 1");
    }
}

double mode_displacement(const ModeShape& shape, double x, double y) {
    const double r = std::hypot(x, y);
    const double R = shape.major_radius;
    const double rim = [&] {
        const double d = r - R;
        return std::exp(-d * d / (2.0 * shape.minor_sigma * shape.minor_sigma));
    }();
    if (std::holds_alternative<RadialFlexural>(shape.kind)) {
        return r <= R ? (r / R) * (r / R) : rim;
    }
    if (r == 0.0) return 0.0;
    const int n = std::get<Crown>(shape.kind).order;
    return rim * std::cos(n * std::atan2(y, x));
}

void ForceFootprint::validate() const {
    require(height > 0.0, ErrorKind::Domain, "footprint height must be > 0");
    require(width > 0.0, ErrorKind::InvalidArgument, "footprint width must be > 0");
}

double footprint_weight(const ForceFootprint& fp, double x, double y) {
    const double dx = x - fp.center_x;
    const double dy = y - fp.center_y;
    const double w2 = fp.width * fp.width;
    return std::exp(-(dx * dx + dy * dy) / (2.0 * w2)) / (constants::two_pi * w2);
}

ModalForce effective_modal_force(const ModeShape& shape, const ForceFootprint& fp, double force_scale,
                                 const QuadratureOptions& options) {
    shape.validate();
    fp.validate();
    const double support = shape.support_radius();
    const double span = kFootprintSpan * fp.width;
    const double cx[] = {fp.center_x};
    const double cy[] = {fp.center_y};

    auto integrate = [&](double h, std::size_t& nodes) {
        const auto xs = axis_nodes(fp.center_x, span, h, -support, support);
        const auto ys = axis_nodes(fp.center_y, span, h, -support, support);
        nodes = static_cast<std::size_t>(2.0 * std::floor(span / h) + 1.0);
        return overlap_grid(shape, cx, cy, xs, ys, fp.width, h)[0];
    };

    double h = base_step(shape, fp.width, options);
    std::size_t nodes = 0;
    double coarse = integrate(h, nodes);
    for (int r = 0; r < options.max_refinements; ++r) {
        h *= 0.5;
        const double fine = integrate(h, nodes);
        const double err = std::abs(fine - coarse);
        if (err <= options.tolerance) return {force_scale * fine, std::abs(force_scale) * err, nodes};
        coarse = fine;
    }
    throw Error(ErrorKind::QuadratureNotConverged, "modal force quadrature did not converge after " +
                                                       std::to_string(options.max_refinements) + " refinements");
}

ScanGrid ScanGrid::square(double half_extent, std::size_t points_per_axis) {
    require(half_extent > 0.0 && points_per_axis >= 2, ErrorKind::InvalidArgument, "invalid scan grid");
    ScanGrid g;
    g.xs.resize(points_per_axis);
    for (std::size_t i = 0; i < points_per_axis; ++i) {
        g.xs[i] = -half_extent + 2.0 * half_extent * static_cast<double>(i) / static_cast<double>(points_per_axis - 1);
    }
    g.ys = g.xs;
    return g;
}

double ScanImage::max_value() const {
    return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

std::vector<double> ScanImage::cross_section(double y) const {
    require(!ys.empty(), ErrorKind::InvalidArgument, "empty scan image");
    std::size_t row = 0;
    for (std::size_t q = 1; q < ys.size(); ++q) {
        if (std::abs(ys[q] - y) < std::abs(ys[row] - y)) row = q;
    }
    return {values.begin() + static_cast<std::ptrdiff_t>(row * xs.size()),
            values.begin() + static_cast<std::ptrdiff_t>((row + 1) * xs.size())};
}

ScanImage simulate_scan(const ModeShape& shape, const ForceFootprint& fp_template, const SpectrumModel& model,
                        const DipoleModel& dipole, const ScanDrive& drive, const ScanGrid& grid,
                        const QuadratureOptions& options) {
    shape.validate();
    fp_template.validate();
    require(!grid.xs.empty() && !grid.ys.empty(), ErrorKind::InvalidArgument, "scan grid is empty");
    const MechanicalMode& mode = model.mode(drive.mode_index);
    require(std::abs(drive.angular_frequency - mode.omega_m()) <= 1e-9 * mode.omega_m(), ErrorKind::InvalidArgument,
            "scan drive frequency must coincide with the target mode's resonance");
    require(drive.rbw_hz > 0.0, ErrorKind::MissingRBW, "scan needs a resolution bandwidth > 0");

    const double force_scale = response_amplitude(dipole, drive.v_dc, drive.v_rf, fp_template.height);
    const double support = shape.support_radius();

    double h = base_step(shape, fp_template.width, options);

    auto image_at = [&](double step) {
        if (2.0 * support / step <= static_cast<double>(kMaxGlobalNodes)) {
            const auto nodes = axis_nodes(0.0, support, step, -support, support);
            return overlap_grid(shape, grid.xs, grid.ys, nodes, nodes, fp_template.width, step);
        }
        // Narrow footprints: local grids per pixel.
        std::vector<double> out(grid.xs.size() * grid.ys.size());
        const double span = kFootprintSpan * fp_template.width;
        for (std::size_t q = 0; q < grid.ys.size(); ++q) {
            for (std::size_t p = 0; p < grid.xs.size(); ++p) {
                const double cx[] = {grid.xs[p]};
                const double cy[] = {grid.ys[q]};
                const auto xs = axis_nodes(grid.xs[p], span, step, -support, support);
                const auto ys = axis_nodes(grid.ys[q], span, step, -support, support);
                out[q * grid.xs.size() + p] = overlap_grid(shape, cx, cy, xs, ys, fp_template.width, step)[0];
            }
        }
        return out;
    };

    std::vector<double> coarse = image_at(h);
    std::vector<double> fine;
    double err = 0.0;
    bool converged = false;
    for (int r = 0; r < options.max_refinements; ++r) {
        h *= 0.5;
        fine = image_at(h);
        err = 0.0;
        for (std::size_t i = 0; i < fine.size(); ++i) err = std::max(err, std::abs(fine[i] - coarse[i]));
        if (err <= options.tolerance) {
            converged = true;
            break;
        }
        coarse = fine;
    }
    if (!converged) throw Error(ErrorKind::QuadratureNotConverged, "scan quadrature did not converge");

    // Overlap * force_scale is the tone amplitude f0 on the mode; its rms
    // value f0/sqrt(2) maps to the displayed peak density.
    const double density_per_unit_overlap =
        peak_density_from_force(mode, std::abs(force_scale) / std::sqrt(2.0), drive.rbw_hz);

    ScanImage img;
    img.xs = grid.xs;
    img.ys = grid.ys;
    img.drive_frequency_hz = drive.angular_frequency / constants::two_pi;
    img.drive_amplitude_v = drive.v_rf;
    img.mode_index = drive.mode_index;
    img.values.resize(fine.size());
    for (std::size_t i = 0; i < fine.size(); ++i) img.values[i] = std::abs(fine[i]) * density_per_unit_overlap;
    img.quadrature_error = err * density_per_unit_overlap;
    return img;
}

}  // namespace coems
