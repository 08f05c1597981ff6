#pragma once

// Data-parallel inner loops used by the spectral model, the Welch estimator
// and the scan quadrature. Every kernel has a scalar reference
// implementation; vectorized variants are selected once at runtime and must
// agree with the reference to within rounding (see tests/test_kernels.cpp).

#include <cstddef>
#include <span>
#include <string_view>

namespace coems::simd {

struct KernelTable {
    std::string_view name;

    // out[i] += coeff / ((omega_m_sq - w^2)^2 + gamma_sq * w^2), w = omega[i]
    void (*lorentzian_accumulate)(std::span<const double> omega, std::span<double> out,
                                  double coeff, double omega_m_sq, double gamma_sq);

    // out[k] += re^2 + im^2 for interleaved complex input of length 2*out.size()
    void (*power_accumulate)(std::span<const double> interleaved, std::span<double> out);

    // out[i] = a[i] * b[i]
    void (*multiply)(std::span<const double> a, std::span<const double> b, std::span<double> out);

    double (*dot)(std::span<const double> a, std::span<const double> b);

    // out[i] = (data[i] - model[i]) * weight[i]
    void (*weighted_residual)(std::span<const double> data, std::span<const double> model,
                              std::span<const double> weight, std::span<double> out);
};

const KernelTable& scalar_kernels();

// nullptr when the binary was built without AVX2 support or the CPU lacks
// AVX2+FMA.
const KernelTable* avx2_kernels();

// Best available table. COEMS_FORCE_SCALAR=1 in the environment pins the
// scalar reference.
const KernelTable& active_kernels();

}  // namespace coems::simd
