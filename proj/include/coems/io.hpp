#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>

#include "coems/actuation.hpp"
#include "coems/fitting.hpp"
#include "coems/microscopy.hpp"
#include "coems/spectrum.hpp"

namespace coems::io {

using nlohmann::json;

// Embedded in every output file.
struct Provenance {
    std::string command;
    std::string config_digest;
    std::optional<std::uint64_t> seed;
};

// Shortest round-trip decimal form.
std::string format_double(double value);

// Columns frequency_hz, psd_m2_per_hz; optional leading '#' provenance line.
std::string spectrum_to_csv(const SpectrumData& data, const Provenance* prov = nullptr);
SpectrumData spectrum_from_csv(std::string_view text);

// Metadata (kind, averages, rbw_hz, seed) plus the sampled arrays.
json spectrum_to_json(const SpectrumData& data, const Provenance* prov = nullptr);
SpectrumData spectrum_from_json(const json& j);

// Dispatches on extension: .json or anything else as CSV.
SpectrumData load_spectrum(const std::filesystem::path& path);

json fit_to_json(const FitResult& fit, const Environment& env, const Provenance* prov = nullptr);
FitResult fit_from_json(const json& j);

// mode | m (ug) | Gamma/2pi (kHz) | S_zp^1/2 (m/rtHz) | S_N/S_zp
std::string fit_table(const FitResult& fit);

json force_to_json(const ForceCalibration& cal, const Provenance* prov = nullptr);

json calibration_to_json(const CalibrationResult& cal, const Provenance* prov = nullptr);

std::string scan_to_csv(const ScanImage& img, const Provenance* prov = nullptr);
std::string cross_section_to_csv(const ScanImage& img, double y = 0.0, const Provenance* prov = nullptr);
// Plain (ASCII, P2) PGM, row-major from the first y row, values mapped
// linearly from [min, max] onto 0..65535.
std::string scan_to_pgm(const ScanImage& img, const Provenance* prov = nullptr);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace coems::io
