#include "coems/fitting.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <string>

#include "coems/error.hpp"
#include "coems/simd/kernels.hpp"
#include "levmar.hpp"

namespace coems {
namespace {

double median(std::vector<double> v) {
    require(!v.empty(), ErrorKind::DegenerateData, "median of empty range");
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

// Parameter layout: [log m_1, log w_1, log G_1, ..., log S_N].
class SpectrumObjective {
public:
    SpectrumObjective(const SpectrumData& data, std::size_t n_modes, double thermal_energy)
        : data_(data.values), n_modes_(n_modes), kt_(thermal_energy), weights_(data.size(), 1.0) {
        omega_.resize(data.size());
        std::transform(data.frequencies_hz.begin(), data.frequencies_hz.end(), omega_.begin(),
                       [](double f) { return constants::two_pi * f; });
        model_.resize(data.size());
    }

    void evaluate_model(const Eigen::VectorXd& p, std::span<double> out) const {
        const double floor = std::exp(p[static_cast<Eigen::Index>(3 * n_modes_)]);
        std::fill(out.begin(), out.end(), floor);
        const auto& k = simd::active_kernels();
        for (std::size_t j = 0; j < n_modes_; ++j) {
            const auto base = static_cast<Eigen::Index>(3 * j);
            const double m = std::exp(p[base]);
            const double w = std::exp(p[base + 1]);
            const double g = std::exp(p[base + 2]);
            k.lorentzian_accumulate(omega_, out, 2.0 * kt_ * g / m, w * w, g * g);
        }
    }

    void residuals(const Eigen::VectorXd& p, Eigen::VectorXd& r) {
        evaluate_model(p, model_);
        simd::active_kernels().weighted_residual(data_, model_, weights_, {r.data(), static_cast<std::size_t>(r.size())});
    }

    // sigma_i = level_i / sqrt(averages)
    void set_relative_weights(std::span<const double> level, double averages) {
        const double root_k = std::sqrt(averages);
        double smallest = std::numeric_limits<double>::infinity();
        for (double v : level) {
            if (v > 0.0) smallest = std::min(smallest, v);
        }
        for (std::size_t i = 0; i < level.size(); ++i) {
            weights_[i] = root_k / std::max(level[i], smallest);
        }
    }

    void set_uniform_weights(double scale) { std::fill(weights_.begin(), weights_.end(), 1.0 / scale); }

    std::size_t size() const { return data_.size(); }

private:
    std::span<const double> data_;
    std::size_t n_modes_;
    double kt_;
    std::vector<double> omega_;
    std::vector<double> weights_;
    std::vector<double> model_;
};

Eigen::VectorXd pack(const FitGuess& guess) {
    Eigen::VectorXd p(static_cast<Eigen::Index>(3 * guess.modes.size() + 1));
    for (std::size_t j = 0; j < guess.modes.size(); ++j) {
        const auto& g = guess.modes[j];
        require(g.mass > 0.0 && g.omega_m > 0.0 && g.gamma > 0.0, ErrorKind::InvalidArgument,
                "initial guess parameters must be positive");
        p[static_cast<Eigen::Index>(3 * j)] = std::log(g.mass);
        p[static_cast<Eigen::Index>(3 * j + 1)] = std::log(g.omega_m);
        p[static_cast<Eigen::Index>(3 * j + 2)] = std::log(g.gamma);
    }
    require(guess.noise_floor > 0.0, ErrorKind::InvalidArgument, "initial noise floor guess must be positive");
    p[p.size() - 1] = std::log(guess.noise_floor);
    return p;
}

}  // namespace

SpectrumModel FitResult::to_model(const Environment& env) const {
    std::vector<MechanicalMode> out;
    int index = 1;
    for (const auto& m : modes) out.emplace_back(index++, m.mass, m.omega_m, m.gamma);
    return {std::move(out), noise_floor, env};
}

FitGuess seed_peaks(const SpectrumData& data, std::size_t n_modes, const Environment& env) {
    data.validate();
    require(data.size() >= 3, ErrorKind::DegenerateData, "spectrum too short to seed a fit");
    const std::size_t n = data.size();
    const double level = median(data.values);

    constexpr std::size_t half = 2;
    std::vector<double> smooth(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(n - 1, i + half);
        double s = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) s += data.values[k];
        smooth[i] = s / static_cast<double>(hi - lo + 1);
    }

    FitGuess guess;
    guess.noise_floor = level > 0.0 ? level : std::max(*std::max_element(data.values.begin(), data.values.end()), 1e-300);

    std::vector<double> excess(n);
    std::transform(smooth.begin(), smooth.end(), excess.begin(), [&](double v) { return v - level; });
    std::vector<bool> masked(n, false);

    for (std::size_t j = 0; j < n_modes; ++j) {
        std::size_t peak = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (masked[i]) continue;
            if (peak == n || excess[i] > excess[peak]) peak = i;
        }
        if (peak == n || excess[peak] + level < 3.0 * level || excess[peak] <= 0.0) {
            throw Error(ErrorKind::DegenerateData, "found " + std::to_string(j) + " distinct peaks, need " +
                                                       std::to_string(n_modes));
        }
        const double height = excess[peak];
        auto crossing = [&](int dir) {
            std::ptrdiff_t i = static_cast<std::ptrdiff_t>(peak);
            while (i + dir >= 0 && i + dir < static_cast<std::ptrdiff_t>(n) && excess[static_cast<std::size_t>(i)] > 0.5 * height) i += dir;
            const auto a = static_cast<std::size_t>(i);
            const auto b = static_cast<std::size_t>(i - dir);
            if (a == b || excess[b] == excess[a]) return data.frequencies_hz[a];
            const double t = (0.5 * height - excess[a]) / (excess[b] - excess[a]);
            return data.frequencies_hz[a] + t * (data.frequencies_hz[b] - data.frequencies_hz[a]);
        };
        const double f0 = data.frequencies_hz[peak];
        const double fwhm = std::max(crossing(+1) - crossing(-1), data.frequencies_hz[1] - data.frequencies_hz[0]);
        const double omega = constants::two_pi * std::max(f0, fwhm);
        const double gamma = std::min(constants::two_pi * fwhm, 0.5 * omega);
        const double kt = env.thermal_energy();
        require(kt > 0.0, ErrorKind::InvalidArgument, "mode fitting needs a temperature > 0");
        guess.modes.push_back({2.0 * kt / (height * gamma * omega * omega), omega, gamma});

        const double hw = 0.5 * fwhm;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = (data.frequencies_hz[i] - f0) / hw;
            excess[i] -= height / (1.0 + d * d);
            if (std::abs(d) < 3.0) masked[i] = true;
        }
    }
    return guess;
}

FitResult fit_spectrum(const SpectrumData& data, std::size_t n_modes, const Environment& env,
                       const std::optional<FitGuess>& initial_guess, const FitOptions& options) {
    data.validate();
    const std::size_t np = 3 * n_modes + 1;
    require(data.size() > np, ErrorKind::DegenerateData, "fewer bins than free parameters");
    if (n_modes > 0) require(env.temperature_k > 0.0, ErrorKind::InvalidArgument, "mode fitting needs T > 0");

    FitGuess guess = initial_guess ? *initial_guess : seed_peaks(data, n_modes, env);
    require(guess.modes.size() == n_modes, ErrorKind::InvalidArgument, "initial guess has wrong number of modes");
    std::sort(guess.modes.begin(), guess.modes.end(),
              [](const ModeGuess& a, const ModeGuess& b) { return a.omega_m < b.omega_m; });

    SpectrumObjective objective(data, n_modes, env.thermal_energy());
    const bool weighted = data.averages > 0;
    const double k = static_cast<double>(data.averages);
    if (weighted) {
        objective.set_relative_weights(data.values, k);
    } else {
        const double scale = median(data.values);
        objective.set_uniform_weights(scale > 0.0 ? scale : 1.0);
    }

    detail::LmOptions lm;
    lm.max_iterations = options.max_iterations;
    lm.jacobian_step = options.relative_step;
    lm.tolerance = options.tolerance;
    const auto fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) { objective.residuals(p, r); };
    const auto nres = static_cast<Eigen::Index>(data.size());

    detail::LmResult res = detail::levenberg_marquardt(fn, pack(guess), nres, lm);
    int total_iterations = res.iterations;
    if (weighted) {
        std::vector<double> model(data.size());
        for (int pass = 0; pass < options.reweight_passes && res.converged; ++pass) {
            objective.evaluate_model(res.params, model);
            objective.set_relative_weights(model, k);
            res = detail::levenberg_marquardt(fn, res.params, nres, lm);
            total_iterations += res.iterations;
        }
    }
    if (!res.converged) {
        throw Error(ErrorKind::NotConverged,
                    "spectrum fit hit the iteration cap (" + std::to_string(options.max_iterations) + ")");
    }

    FitResult out;
    out.converged = true;
    out.iterations = total_iterations;
    out.residual_norm = std::sqrt(res.cost);
    const double dof = static_cast<double>(data.size() - np);
    out.reduced_chi_square = res.cost / dof;

    Eigen::MatrixXd cov = res.jtj.completeOrthogonalDecomposition().pseudoInverse() * out.reduced_chi_square;
    auto sigma_of = [&](Eigen::Index i, double value) {
        return value * std::sqrt(std::max(cov(i, i), 0.0));
    };
    for (std::size_t j = 0; j < n_modes; ++j) {
        const auto b = static_cast<Eigen::Index>(3 * j);
        ModeEstimate m;
        m.mass = std::exp(res.params[b]);
        m.omega_m = std::exp(res.params[b + 1]);
        m.gamma = std::exp(res.params[b + 2]);
        m.mass_sigma = sigma_of(b, m.mass);
        m.omega_m_sigma = sigma_of(b + 1, m.omega_m);
        m.gamma_sigma = sigma_of(b + 2, m.gamma);
        out.modes.push_back(m);
    }
    const auto last = static_cast<Eigen::Index>(np - 1);
    out.noise_floor = std::exp(res.params[last]);
    out.noise_floor_sigma = sigma_of(last, out.noise_floor);
    std::sort(out.modes.begin(), out.modes.end(),
              [](const ModeEstimate& a, const ModeEstimate& b) { return a.omega_m < b.omega_m; });
    return out;
}

void add_tone(SpectrumData& data, double frequency_hz, double amplitude) {
    require(data.size() >= 2, ErrorKind::InvalidArgument, "spectrum too short for a tone");
    const double df = bin_width(data);
    const auto it = std::lower_bound(data.frequencies_hz.begin(), data.frequencies_hz.end(), frequency_hz);
    std::size_t k = static_cast<std::size_t>(it - data.frequencies_hz.begin());
    if (k == data.size() || (k > 0 && frequency_hz - data.frequencies_hz[k - 1] < data.frequencies_hz[k] - frequency_hz)) {
        k = k == 0 ? 0 : k - 1;
    }
    const double sides = data.frequencies_hz[k] == 0.0 ? 1.0 : 2.0;
    data.values[k] += amplitude * amplitude / (2.0 * sides * df);
}

CalibrationResult calibrate_displacement(const SpectrumData& raw, const ReferenceTone& tone) {
    raw.validate();
    require(tone.displacement_m > 0.0, ErrorKind::InvalidArgument, "reference displacement must be > 0");
    require(raw.size() >= 16, ErrorKind::InvalidArgument, "spectrum too short for calibration");
    const std::size_t n = raw.size();
    const auto& f = raw.frequencies_hz;
    const auto& y = raw.values;

    const auto it = std::lower_bound(f.begin(), f.end(), tone.frequency_hz);
    std::size_t k0 = static_cast<std::size_t>(it - f.begin());
    if (k0 == n) k0 = n - 1;
    if (k0 > 0 && tone.frequency_hz - f[k0 - 1] < f[k0] - tone.frequency_hz) --k0;

    const std::size_t lo = k0 >= 2 ? k0 - 2 : 0;
    const std::size_t hi = std::min(n - 1, k0 + 2);
    std::size_t peak = lo;
    for (std::size_t i = lo; i <= hi; ++i) {
        if (y[i] > y[peak]) peak = i;
    }
    const bool left_ok = peak == 0 || y[peak] > y[peak - 1];
    const bool right_ok = peak == n - 1 || y[peak] > y[peak + 1];
    if (!(left_ok && right_ok)) throw Error(ErrorKind::ToneNotFound, "no local peak near the reference frequency");

    constexpr std::size_t kInner = 6;
    constexpr std::size_t kOuter = 40;
    std::vector<double> neighbours;
    for (std::size_t d = kInner; d <= kOuter; ++d) {
        if (peak >= d) neighbours.push_back(y[peak - d]);
        if (peak + d < n) neighbours.push_back(y[peak + d]);
    }
    require(!neighbours.empty(), ErrorKind::ToneNotFound, "no off-tone bins to estimate the local floor");
    const double floor = median(neighbours);
    if (!(y[peak] >= 10.0 * floor)) {
        throw Error(ErrorKind::ToneNotFound, "reference tone is not 10x above the local floor");
    }

    constexpr std::size_t kTone = 4;
    const double df = bin_width(raw);
    double power = 0.0;
    for (std::size_t i = peak >= kTone ? peak - kTone : 0; i <= std::min(n - 1, peak + kTone); ++i) {
        power += (f[i] == 0.0 ? 1.0 : 2.0) * (y[i] - floor) * df;
    }
    require(power > 0.0, ErrorKind::ToneNotFound, "reference tone carries no power above the floor");

    const double target = 0.5 * tone.displacement_m * tone.displacement_m;
    return {target / power, tone.frequency_hz, tone.displacement_m, power, floor};
}

SpectrumData apply_calibration(const SpectrumData& raw, const CalibrationResult& cal) {
    require(cal.scale_factor > 0.0, ErrorKind::InvalidArgument, "calibration scale factor must be > 0");
    SpectrumData out = raw;
    for (double& v : out.values) v *= cal.scale_factor;
    out.kind = SpectrumKind::Thermal;
    return out;
}

PowerLawFit fit_power_law(std::span<const std::pair<double, double>> samples) {
    require(samples.size() >= 3, ErrorKind::InvalidArgument, "power-law fit needs at least 3 points");
    const double n = static_cast<double>(samples.size());
    double sx = 0.0;
    double sy = 0.0;
    for (const auto& [z, v] : samples) {
        require(z > 0.0 && v > 0.0, ErrorKind::Domain, "power-law fit needs positive z and response");
        sx += std::log(z);
        sy += std::log(v);
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& [z, v] : samples) {
        const double dx = std::log(z) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(v) - my);
    }
    require(sxx > 0.0, ErrorKind::DegenerateData, "power-law fit needs distinct z values");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double rss = 0.0;
    for (const auto& [z, v] : samples) {
        const double e = std::log(v) - (intercept + slope * std::log(z));
        rss += e * e;
    }
    const double se = std::sqrt(rss / (n - 2.0) / sxx);
    return {slope, std::exp(intercept), se};
}

DissipationSlope dissipation_slope(std::span<const double> drive_levels_db, std::span<const SpectrumData> spectra,
                                   const Environment& env, double confidence) {
    require(drive_levels_db.size() == spectra.size(), ErrorKind::InvalidArgument,
            "drive levels and spectra differ in count");
    require(spectra.size() >= 3, ErrorKind::InvalidArgument, "dissipation regression needs at least 3 spectra");
    require(confidence > 0.0 && confidence < 1.0, ErrorKind::InvalidArgument, "confidence must be in (0, 1)");

    DissipationSlope out{};
    for (const auto& s : spectra) {
        const FitResult fit = fit_spectrum(s, 1, env);
        out.linewidths_hz.push_back(fit.modes[0].gamma / constants::two_pi);
        out.linewidth_sigmas_hz.push_back(fit.modes[0].gamma_sigma / constants::two_pi);
    }

    const double n = static_cast<double>(spectra.size());
    const double mx = std::accumulate(drive_levels_db.begin(), drive_levels_db.end(), 0.0) / n;
    const double my = std::accumulate(out.linewidths_hz.begin(), out.linewidths_hz.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < spectra.size(); ++i) {
        const double dx = drive_levels_db[i] - mx;
        sxx += dx * dx;
        sxy += dx * (out.linewidths_hz[i] - my);
    }
    require(sxx > 0.0, ErrorKind::DegenerateData, "drive levels must not all be equal");
    out.slope_hz_per_db = sxy / sxx;
    out.intercept_hz = my - out.slope_hz_per_db * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < spectra.size(); ++i) {
        const double e = out.linewidths_hz[i] - (out.intercept_hz + out.slope_hz_per_db * drive_levels_db[i]);
        rss += e * e;
    }
    out.slope_stderr = std::sqrt(rss / (n - 2.0) / sxx);
    const boost::math::students_t dist(n - 2.0);
    const double t = boost::math::quantile(boost::math::complement(dist, 0.5 * (1.0 - confidence)));
    out.ci_low = out.slope_hz_per_db - t * out.slope_stderr;
    out.ci_high = out.slope_hz_per_db + t * out.slope_stderr;
    return out;
}

}  // namespace coems
