#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace coems {

enum class SpectrumKind { Thermal, Driven, RawUncalibrated };

std::string_view to_string(SpectrumKind kind);
SpectrumKind spectrum_kind_from_string(std::string_view text);

// Sampled spectral density on non-negative frequencies. Values are
// double-sided densities per Hz (m^2/Hz once calibrated); the negative
// frequency half is implied by symmetry.
struct SpectrumData {
    std::vector<double> frequencies_hz;
    std::vector<double> values;
    SpectrumKind kind = SpectrumKind::Thermal;
    std::size_t averages = 0;  // 0 = unknown
    double rbw_hz = 1.0;
    std::optional<std::uint64_t> seed;

    std::size_t size() const noexcept { return values.size(); }

    // Throws InvalidArgument when an invariant is violated.
    void validate() const;
};

// Power integrated over the full real frequency line, i.e. twice the
// positive-frequency sum (a bin at exactly 0 Hz is counted once).
double integrated_power(const SpectrumData& data);

// Mean bin spacing of the grid.
double bin_width(const SpectrumData& data);

std::vector<double> uniform_grid(double start, double stop, double step);

}  // namespace coems
