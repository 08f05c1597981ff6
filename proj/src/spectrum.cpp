#include "coems/spectrum.hpp"

#include <cmath>
#include <string>

#include "coems/error.hpp"

namespace coems {

std::string_view to_string(SpectrumKind kind) {
    switch (kind) {
        case SpectrumKind::Thermal: return "thermal";
        case SpectrumKind::Driven: return "driven";
        case SpectrumKind::RawUncalibrated: return "raw-uncalibrated";
    }
    return "thermal";
}

SpectrumKind spectrum_kind_from_string(std::string_view text) {
    if (text == "thermal") return SpectrumKind::Thermal;
    if (text == "driven") return SpectrumKind::Driven;
    if (text == "raw-uncalibrated" || text == "raw") return SpectrumKind::RawUncalibrated;
    throw Error(ErrorKind::InvalidArgument, "unknown spectrum kind '" + std::string(text) + "'");
}

void SpectrumData::validate() const {
    require(frequencies_hz.size() == values.size(), ErrorKind::InvalidArgument,
            "spectrum frequency and value arrays differ in length");
    require(rbw_hz > 0.0 && std::isfinite(rbw_hz), ErrorKind::InvalidArgument, "resolution bandwidth must be > 0");
    for (std::size_t i = 0; i < values.size(); ++i) {
        require(std::isfinite(values[i]) && values[i] >= 0.0, ErrorKind::InvalidArgument,
                "spectral density values must be finite and >= 0");
        require(std::isfinite(frequencies_hz[i]) && frequencies_hz[i] >= 0.0, ErrorKind::InvalidArgument,
                "frequencies must be finite and >= 0");
        if (i > 0) {
            require(frequencies_hz[i] > frequencies_hz[i - 1], ErrorKind::InvalidArgument,
                    "frequencies must be strictly increasing");
        }
    }
}

double bin_width(const SpectrumData& data) {
    require(data.size() >= 2, ErrorKind::InvalidArgument, "bin width needs at least two bins");
    return (data.frequencies_hz.back() - data.frequencies_hz.front()) / static_cast<double>(data.size() - 1);
}

double integrated_power(const SpectrumData& data) {
    const double df = bin_width(data);
    double sum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        sum += (data.frequencies_hz[i] == 0.0 ? 1.0 : 2.0) * data.values[i];
    }
    return sum * df;
}

std::vector<double> uniform_grid(double start, double stop, double step) {
    require(step > 0.0 && stop >= start, ErrorKind::InvalidArgument, "invalid grid specification");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) grid[i] = start + step * static_cast<double>(i);
    return grid;
}

}  // namespace coems
