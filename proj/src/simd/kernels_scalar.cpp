#include "coems/simd/kernels.hpp"

#include <cassert>

namespace coems::simd {
namespace {

void lorentzian_accumulate(std::span<const double> omega, std::span<double> out, double coeff,
                           double omega_m_sq, double gamma_sq) {
    assert(omega.size() == out.size());
    for (std::size_t i = 0; i < omega.size(); ++i) {
        const double w2 = omega[i] * omega[i];
        const double detune = omega_m_sq - w2;
        out[i] += coeff / (detune * detune + gamma_sq * w2);
    }
}

void power_accumulate(std::span<const double> interleaved, std::span<double> out) {
    assert(interleaved.size() == 2 * out.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double re = interleaved[2 * k];
        const double im = interleaved[2 * k + 1];
        out[k] += re * re + im * im;
    }
}

void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    assert(a.size() == b.size() && a.size() == out.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
}

double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

void weighted_residual(std::span<const double> data, std::span<const double> model,
                       std::span<const double> weight, std::span<double> out) {
    assert(data.size() == model.size() && data.size() == weight.size() && data.size() == out.size());
    for (std::size_t i = 0; i < data.size(); ++i) out[i] = (data[i] - model[i]) * weight[i];
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{
        "scalar", lorentzian_accumulate, power_accumulate, multiply, dot, weighted_residual,
    };
    return table;
}

}  // namespace coems::simd
