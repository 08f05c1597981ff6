#pragma once

// Flat key=value configuration with [section] headers. Keys are addressed
// as "section.key"; every physical quantity carries its unit in the key
// name (mass_kg, gamma_hz, ...).

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coems/actuation.hpp"
#include "coems/mechmodel.hpp"
#include "coems/microscopy.hpp"

namespace coems {

class Config {
public:
    static Config parse(std::string_view text);
    static Config load(const std::filesystem::path& path);

    // "section.key=value"; later calls win.
    void apply_override(std::string_view assignment);
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    bool contains(const std::string& key) const { return values_.count(key) != 0; }
    std::optional<std::string> get(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::optional<double> find_double(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;

    // Sorted key=value lines; the digest is FNV-1a 64 over this text.
    std::string canonical() const;
    std::string digest() const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

// [model] temperature_k, noise_floor_amp_m_per_rthz | noise_floor_m2_per_hz,
// modes = 1,2,3 and one [mode.N] section per listed mode with mass_kg,
// gamma_hz (linewidth) and either freq_hz or zp_amp_m_per_rthz (resonance
// back-solved from the zero-point amplitude), plus shape = radial | crown:N.
SpectrumModel model_from_config(const Config& cfg);

ShapeKind shape_from_string(std::string_view text);

// [drive] section.
DipoleModel dipole_from_config(const Config& cfg);

}  // namespace coems
