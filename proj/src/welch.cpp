#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>

#include "coems/error.hpp"
#include "coems/simd/kernels.hpp"
#include "coems/synth.hpp"

namespace coems {
namespace {

// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

class RealFft {
public:
    explicit RealFft(std::size_t n)
        : n_(n),
          in_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
          out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
        require(in_ && out_, ErrorKind::InvalidArgument, "FFT buffer allocation failed");
        std::lock_guard lock(planner_mutex());
        plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE);
    }
    ~RealFft() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::span<double> input() { return {in_.get(), n_}; }
    std::span<const double> execute() {
        fftw_execute(plan_);
        return {reinterpret_cast<const double*>(out_.get()), 2 * (n_ / 2 + 1)};
    }

private:
    std::size_t n_;
    std::unique_ptr<double, FftwFree> in_;
    std::unique_ptr<fftw_complex, FftwFree> out_;
    fftw_plan plan_{};
};

std::size_t segment_step(std::size_t segment_length, double overlap_fraction) {
    const auto overlap = static_cast<std::size_t>(std::llround(overlap_fraction * static_cast<double>(segment_length)));
    return std::max<std::size_t>(1, segment_length - overlap);
}

}  // namespace

std::vector<double> make_window(Window window, std::size_t length) {
    std::vector<double> w(length, 1.0);
    if (window == Window::Hann) {
        // periodic (DFT-even) Hann
        for (std::size_t n = 0; n < length; ++n) {
            w[n] = 0.5 - 0.5 * std::cos(constants::two_pi * static_cast<double>(n) / static_cast<double>(length));
        }
    }
    return w;
}

std::size_t welch_segment_count(std::size_t length, std::size_t segment_length, double overlap_fraction) {
    if (segment_length == 0 || segment_length > length) return 0;
    return (length - segment_length) / segment_step(segment_length, overlap_fraction) + 1;
}

SpectrumData welch_psd(const TimeSeries& ts, std::size_t segment_length, double overlap_fraction, Window window,
                       SpectrumKind kind) {
    require(!ts.samples.empty(), ErrorKind::InvalidArgument, "welch_psd on empty series");
    ts.validate();
    require(segment_length >= 2 && segment_length <= ts.samples.size(), ErrorKind::InvalidArgument,
            "segment length must be in [2, series length]");
    require(overlap_fraction >= 0.0 && overlap_fraction < 1.0, ErrorKind::InvalidArgument,
            "overlap fraction must be in [0, 1)");

    const auto& k = simd::active_kernels();
    const std::vector<double> w = make_window(window, segment_length);
    double sum_w = 0.0;
    double sum_w2 = 0.0;
    for (double x : w) {
        sum_w += x;
        sum_w2 += x * x;
    }

    const std::size_t step = segment_step(segment_length, overlap_fraction);
    const std::size_t segments = welch_segment_count(ts.samples.size(), segment_length, overlap_fraction);
    const std::size_t bins = segment_length / 2 + 1;

    RealFft fft(segment_length);
    std::vector<double> acc(bins, 0.0);
    for (std::size_t s = 0; s < segments; ++s) {
        const std::span<const double> seg(ts.samples.data() + s * step, segment_length);
        k.multiply(seg, w, fft.input());
        k.power_accumulate(fft.execute(), acc);
    }

    SpectrumData out;
    out.kind = kind;
    out.averages = segments;
    out.seed = ts.seed;
    out.rbw_hz = ts.sample_rate * sum_w2 / (sum_w * sum_w);
    out.frequencies_hz.resize(bins);
    out.values.resize(bins);
    const double norm = 1.0 / (static_cast<double>(segments) * ts.sample_rate * sum_w2);
    for (std::size_t b = 0; b < bins; ++b) {
        out.frequencies_hz[b] = ts.sample_rate * static_cast<double>(b) / static_cast<double>(segment_length);
        out.values[b] = acc[b] * norm;
    }
    return out;
}

double welch_equivalent_averages(std::size_t segments, std::size_t segment_length, double overlap_fraction,
                                 Window window) {
    require(segments >= 1, ErrorKind::InvalidArgument, "need at least one segment");
    const std::vector<double> w = make_window(window, segment_length);
    double sum_w2 = 0.0;
    for (double x : w) sum_w2 += x * x;
    const std::size_t step = segment_step(segment_length, overlap_fraction);
    const double kseg = static_cast<double>(segments);
    double ratio = 1.0;
    for (std::size_t j = 1; j < segments && j * step < segment_length; ++j) {
        double corr = 0.0;
        for (std::size_t n = 0; n + j * step < segment_length; ++n) corr += w[n] * w[n + j * step];
        const double rho = corr / sum_w2;
        ratio += 2.0 * (1.0 - static_cast<double>(j) / kseg) * rho * rho;
    }
    return kseg / ratio;
}

}  // namespace coems
