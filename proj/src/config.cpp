#include "coems/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <sstream>

#include "coems/error.hpp"

namespace coems {
namespace {

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

double to_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const std::string t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size()) {
        throw Error(ErrorKind::InvalidArgument, "config key '" + key + "' is not a number: '" + text + "'");
    }
    return v;
}

}  // namespace

Config Config::parse(std::string_view text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in{std::string(text)};
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("config parse error: ") + e.what());
    }
    Config cfg;
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            cfg.values_[section] = trim(body.data());
            continue;
        }
        for (const auto& [key, value] : body) cfg.values_[section + "." + key] = trim(value.data());
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (f == nullptr) throw Error(ErrorKind::Io, "cannot open config " + path.string());
    std::string text;
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, n);
    std::fclose(f);
    return parse(text);
}

void Config::apply_override(std::string_view assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw Error(ErrorKind::Usage, "override must look like section.key=value, got '" + std::string(assignment) + "'");
    }
    values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

std::optional<std::string> Config::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string Config::get_string(const std::string& key) const {
    auto v = get(key);
    if (!v) throw Error(ErrorKind::InvalidArgument, "missing config key '" + key + "'");
    return *v;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double Config::get_double(const std::string& key) const { return to_double(key, get_string(key)); }

double Config::get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    return v ? to_double(key, *v) : fallback;
}

std::optional<double> Config::find_double(const std::string& key) const {
    auto v = get(key);
    if (!v) return std::nullopt;
    return to_double(key, *v);
}

long long Config::get_int(const std::string& key, long long fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    const double d = to_double(key, *v);
    if (d != static_cast<double>(static_cast<long long>(d))) {
        throw Error(ErrorKind::InvalidArgument, "config key '" + key + "' must be an integer");
    }
    return static_cast<long long>(d);
}

std::vector<double> Config::get_doubles(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(get_string(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!trim(item).empty()) out.push_back(to_double(key, item));
    }
    return out;
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
}

std::string Config::digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ShapeKind shape_from_string(std::string_view text) {
    const std::string t = trim(text);
    if (t == "radial" || t == "radial_flexural") return RadialFlexural{};
    if (t.rfind("crown", 0) == 0) {
        const std::size_t colon = t.find(':');
        if (colon == std::string::npos) return Crown{2};
        int n = 0;
        const auto [ptr, ec] = std::from_chars(t.data() + colon + 1, t.data() + t.size(), n);
        if (ec != std::errc{} || ptr != t.data() + t.size() || n < 1) {
            throw Error(ErrorKind::InvalidArgument, "bad crown order in shape '" + t + "'");
        }
        return Crown{n};
    }
    throw Error(ErrorKind::InvalidArgument, "unknown mode shape '" + t + "'");
}

SpectrumModel model_from_config(const Config& cfg) {
    const Environment env{cfg.get_double("model.temperature_k", reference_temperature)};
    double floor = 0.0;
    if (auto amp = cfg.find_double("model.noise_floor_amp_m_per_rthz")) {
        floor = *amp * *amp;
    } else {
        floor = cfg.get_double("model.noise_floor_m2_per_hz", 0.0);
    }

    std::vector<MechanicalMode> modes;
    if (cfg.contains("model.modes")) {
        for (double idx : cfg.get_doubles("model.modes")) {
            const int index = static_cast<int>(idx);
            const std::string sec = "mode." + std::to_string(index) + ".";
            const double mass = cfg.get_double(sec + "mass_kg");
            const double gamma = constants::two_pi * cfg.get_double(sec + "gamma_hz");
            double omega = 0.0;
            if (auto f = cfg.find_double(sec + "freq_hz")) {
                omega = constants::two_pi * *f;
            } else {
                omega = omega_from_zero_point(mass, gamma, cfg.get_double(sec + "zp_amp_m_per_rthz"));
            }
            modes.emplace_back(index, mass, omega, gamma, shape_from_string(cfg.get_string(sec + "shape", "radial")));
        }
    }
    return {std::move(modes), floor, env};
}

DipoleModel dipole_from_config(const Config& cfg) {
    DipoleModel d;
    d.intrinsic_dipole = cfg.get_double("drive.intrinsic_dipole_cm", d.intrinsic_dipole);
    d.induced_coefficient = cfg.get_double("drive.induced_coeff_cm_per_v", d.induced_coefficient);
    d.probe_height = cfg.get_double("drive.height_m", d.probe_height);
    d.probe_tip_diameter = cfg.get_double("drive.tip_diameter_m", d.probe_tip_diameter);
    d.reference_force = cfg.get_double("drive.reference_force_n", d.reference_force);
    d.reference_height = cfg.get_double("drive.reference_height_m", d.reference_height);
    d.reference_dc = cfg.get_double("drive.reference_dc_v", d.reference_dc);
    d.reference_rf = cfg.get_double("drive.reference_rf_v", d.reference_rf);
    d.validate();
    return d;
}

}  // namespace coems
