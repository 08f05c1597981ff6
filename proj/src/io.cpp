#include "coems/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <sstream>

#include "coems/error.hpp"

namespace coems::io {
namespace {

std::string provenance_comment(const Provenance* prov) {
    if (prov == nullptr) return {};
    std::string line = "# coems " + prov->command + " config_digest=" + prov->config_digest;
    line += " seed=" + (prov->seed ? std::to_string(*prov->seed) : std::string("none"));
    return line + "\n";
}

void attach(json& j, const Provenance* prov) {
    if (prov == nullptr) return;
    j["provenance"] = {{"command", prov->command}, {"config_digest", prov->config_digest}};
    j["provenance"]["seed"] = prov->seed ? json(*prov->seed) : json(nullptr);
}

double parse_double(std::string_view field) {
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw Error(ErrorKind::Io, "cannot parse number '" + std::string(field) + "'");
    }
    return v;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

std::string spectrum_to_csv(const SpectrumData& data, const Provenance* prov) {
    std::string out = provenance_comment(prov);
    out += "frequency_hz,psd_m2_per_hz\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        out += format_double(data.frequencies_hz[i]);
        out += ',';
        out += format_double(data.values[i]);
        out += '\n';
    }
    return out;
}

SpectrumData spectrum_from_csv(std::string_view text) {
    SpectrumData data;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (line.empty() || line.front() == '#' || line == "\r") continue;
        if (!header_seen && line.find("frequency") != std::string_view::npos) {
            header_seen = true;
            continue;
        }
        const std::size_t comma = line.find(',');
        if (comma == std::string_view::npos) throw Error(ErrorKind::Io, "spectrum CSV row lacks a comma");
        data.frequencies_hz.push_back(parse_double(line.substr(0, comma)));
        data.values.push_back(parse_double(line.substr(comma + 1)));
    }
    if (data.size() >= 2) data.rbw_hz = bin_width(data);
    data.validate();
    return data;
}

json spectrum_to_json(const SpectrumData& data, const Provenance* prov) {
    json j;
    j["kind"] = std::string(to_string(data.kind));
    j["averages"] = data.averages;
    j["rbw_hz"] = data.rbw_hz;
    j["seed"] = data.seed ? json(*data.seed) : json(nullptr);
    j["frequency_hz"] = data.frequencies_hz;
    j["psd_m2_per_hz"] = data.values;
    attach(j, prov);
    return j;
}

SpectrumData spectrum_from_json(const json& j) {
    try {
        SpectrumData data;
        data.kind = spectrum_kind_from_string(j.at("kind").get<std::string>());
        data.averages = j.value("averages", std::size_t{0});
        data.rbw_hz = j.at("rbw_hz").get<double>();
        if (j.contains("seed") && !j.at("seed").is_null()) data.seed = j.at("seed").get<std::uint64_t>();
        data.frequencies_hz = j.at("frequency_hz").get<std::vector<double>>();
        data.values = j.at("psd_m2_per_hz").get<std::vector<double>>();
        data.validate();
        return data;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Io, std::string("malformed spectrum JSON: ") + e.what());
    }
}

SpectrumData load_spectrum(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    if (path.extension() == ".json") {
        try {
            return spectrum_from_json(json::parse(text));
        } catch (const json::parse_error& e) {
            throw Error(ErrorKind::Io, std::string("cannot parse ") + path.string() + ": " + e.what());
        }
    }
    return spectrum_from_csv(text);
}

json fit_to_json(const FitResult& fit, const Environment& env, const Provenance* prov) {
    json j;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["residual_norm"] = fit.residual_norm;
    j["reduced_chi_square"] = fit.reduced_chi_square;
    j["temperature_k"] = env.temperature_k;
    j["noise_floor_m2_per_hz"] = fit.noise_floor;
    j["noise_floor_sigma_m2_per_hz"] = fit.noise_floor_sigma;
    j["modes"] = json::array();
    int index = 1;
    for (const auto& m : fit.modes) {
        j["modes"].push_back({
            {"index", index++},
            {"mass_kg", m.mass},
            {"mass_sigma_kg", m.mass_sigma},
            {"omega_m_rad_per_s", m.omega_m},
            {"omega_m_sigma_rad_per_s", m.omega_m_sigma},
            {"gamma_rad_per_s", m.gamma},
            {"gamma_sigma_rad_per_s", m.gamma_sigma},
            {"resonance_hz", m.omega_m / constants::two_pi},
            {"linewidth_hz", m.gamma / constants::two_pi},
        });
    }
    attach(j, prov);
    return j;
}

FitResult fit_from_json(const json& j) {
    try {
        FitResult fit;
        fit.converged = j.at("converged").get<bool>();
        fit.iterations = j.value("iterations", 0);
        fit.residual_norm = j.value("residual_norm", 0.0);
        fit.reduced_chi_square = j.value("reduced_chi_square", 0.0);
        fit.noise_floor = j.at("noise_floor_m2_per_hz").get<double>();
        fit.noise_floor_sigma = j.value("noise_floor_sigma_m2_per_hz", 0.0);
        for (const auto& m : j.at("modes")) {
            ModeEstimate e;
            e.mass = m.at("mass_kg").get<double>();
            e.mass_sigma = m.value("mass_sigma_kg", 0.0);
            e.omega_m = m.at("omega_m_rad_per_s").get<double>();
            e.omega_m_sigma = m.value("omega_m_sigma_rad_per_s", 0.0);
            e.gamma = m.at("gamma_rad_per_s").get<double>();
            e.gamma_sigma = m.value("gamma_sigma_rad_per_s", 0.0);
            fit.modes.push_back(e);
        }
        return fit;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Io, std::string("malformed fit JSON: ") + e.what());
    }
}

std::string fit_table(const FitResult& fit) {
    std::ostringstream os;
    char line[160];
    // Fitted modes are numbered by ascending resonance frequency.
    std::snprintf(line, sizeof line, "%-6s %10s %10s %16s %20s %10s\n", "Mode", "f_m (MHz)", "m (ug)",
                  "Gamma/2pi (kHz)", "S_zp^1/2 (m/rtHz)", "S_N/S_zp");
    os << line;
    const double floor_amp = std::sqrt(fit.noise_floor);
    int index = 1;
    for (const auto& m : fit.modes) {
        const double zp = std::sqrt(constants::hbar / (m.mass * m.gamma * m.omega_m));
        std::snprintf(line, sizeof line, "%-6d %10.4f %10.1f %16.2f %20.2e %10.1f\n", index++,
                      m.omega_m / constants::two_pi * 1e-6, m.mass * 1e9, m.gamma / constants::two_pi * 1e-3, zp,
                      floor_amp / zp);
        os << line;
    }
    std::snprintf(line, sizeof line, "S_N^1/2 = %.3e m/rtHz\n", floor_amp);
    os << line;
    return os.str();
}

json force_to_json(const ForceCalibration& cal, const Provenance* prov) {
    json j;
    j["inputs"] = {
        {"mass_kg", cal.mass},
        {"omega_m_rad_per_s", cal.omega_m},
        {"gamma_rad_per_s", cal.gamma},
        {"peak_amplitude_density_m_per_rthz", cal.peak_amplitude_density},
        {"rbw_hz", cal.rbw_hz},
    };
    j["f_rms_n"] = cal.f_rms;
    j["f_pp_n"] = cal.f_pp;
    j["f_rms_un"] = cal.f_rms * 1e6;
    j["f_pp_un"] = cal.f_pp * 1e6;
    j["rbw_hz"] = cal.rbw_hz;
    attach(j, prov);
    return j;
}

json calibration_to_json(const CalibrationResult& cal, const Provenance* prov) {
    json j{
        {"scale_factor", cal.scale_factor},
        {"reference_frequency_hz", cal.reference_frequency_hz},
        {"reference_displacement_m", cal.reference_displacement_m},
        {"raw_tone_power", cal.raw_tone_power},
        {"raw_local_floor", cal.raw_local_floor},
    };
    attach(j, prov);
    return j;
}

std::string scan_to_csv(const ScanImage& img, const Provenance* prov) {
    std::string out = provenance_comment(prov);
    out += "x_m,y_m,value_m_per_rthz\n";
    for (std::size_t q = 0; q < img.ys.size(); ++q) {
        for (std::size_t p = 0; p < img.xs.size(); ++p) {
            out += format_double(img.xs[p]) + ',' + format_double(img.ys[q]) + ',' + format_double(img.at(p, q)) + '\n';
        }
    }
    return out;
}

std::string cross_section_to_csv(const ScanImage& img, double y, const Provenance* prov) {
    std::string out = provenance_comment(prov);
    out += "x_m,value_m_per_rthz\n";
    const auto row = img.cross_section(y);
    for (std::size_t p = 0; p < img.xs.size(); ++p) out += format_double(img.xs[p]) + ',' + format_double(row[p]) + '\n';
    return out;
}

std::string scan_to_pgm(const ScanImage& img, const Provenance* prov) {
    const auto [lo_it, hi_it] = std::minmax_element(img.values.begin(), img.values.end());
    const double lo = img.values.empty() ? 0.0 : *lo_it;
    const double hi = img.values.empty() ? 0.0 : *hi_it;
    const double span = hi - lo;
    std::string out = "P2\n" + provenance_comment(prov);
    out += std::to_string(img.xs.size()) + ' ' + std::to_string(img.ys.size()) + "\n65535\n";
    for (std::size_t q = 0; q < img.ys.size(); ++q) {
        for (std::size_t p = 0; p < img.xs.size(); ++p) {
            const double t = span > 0.0 ? (img.at(p, q) - lo) / span : 0.0;
            out += std::to_string(static_cast<long>(std::lround(t * 65535.0)));
            out += p + 1 == img.xs.size() ? '\n' : ' ';
        }
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace coems::io
