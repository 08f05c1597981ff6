// Compiled with -mavx2 -mfma -ffp-contract=off. Element-wise kernels use the
// same operation order as the scalar reference and are bit-identical to it;
// only dot() reassociates its reduction.

#include "coems/simd/kernels.hpp"

#include <cassert>

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace coems::simd {
namespace {

void lorentzian_accumulate(std::span<const double> omega, std::span<double> out, double coeff,
                           double omega_m_sq, double gamma_sq) {
    assert(omega.size() == out.size());
    const std::size_t n = omega.size();
    const std::size_t n4 = n & ~std::size_t{3};
    const __m256d vcoeff = _mm256_set1_pd(coeff);
    const __m256d vwm2 = _mm256_set1_pd(omega_m_sq);
    const __m256d vg2 = _mm256_set1_pd(gamma_sq);
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        const __m256d w = _mm256_loadu_pd(omega.data() + i);
        const __m256d w2 = _mm256_mul_pd(w, w);
        const __m256d detune = _mm256_sub_pd(vwm2, w2);
        const __m256d denom = _mm256_add_pd(_mm256_mul_pd(detune, detune), _mm256_mul_pd(vg2, w2));
        const __m256d acc = _mm256_loadu_pd(out.data() + i);
        _mm256_storeu_pd(out.data() + i, _mm256_add_pd(acc, _mm256_div_pd(vcoeff, denom)));
    }
    for (; i < n; ++i) {
        const double w2 = omega[i] * omega[i];
        const double detune = omega_m_sq - w2;
        out[i] += coeff / (detune * detune + gamma_sq * w2);
    }
}

void power_accumulate(std::span<const double> interleaved, std::span<double> out) {
    assert(interleaved.size() == 2 * out.size());
    const std::size_t n = out.size();
    const std::size_t n4 = n & ~std::size_t{3};
    const double* src = interleaved.data();
    std::size_t k = 0;
    for (; k < n4; k += 4) {
        // [re0 im0 re1 im1] [re2 im2 re3 im3]
        const __m256d lo = _mm256_loadu_pd(src + 2 * k);
        const __m256d hi = _mm256_loadu_pd(src + 2 * k + 4);
        const __m256d lo2 = _mm256_mul_pd(lo, lo);
        const __m256d hi2 = _mm256_mul_pd(hi, hi);
        // hadd gives [lo0+lo1, hi0+hi1, lo2+lo3, hi2+hi3] = bins [0, 2, 1, 3]
        const __m256d sums = _mm256_hadd_pd(lo2, hi2);
        const __m256d ordered = _mm256_permute4x64_pd(sums, _MM_SHUFFLE(3, 1, 2, 0));
        const __m256d acc = _mm256_loadu_pd(out.data() + k);
        _mm256_storeu_pd(out.data() + k, _mm256_add_pd(acc, ordered));
    }
    for (; k < n; ++k) {
        const double re = src[2 * k];
        const double im = src[2 * k + 1];
        out[k] += re * re + im * im;
    }
}

void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    assert(a.size() == b.size() && a.size() == out.size());
    const std::size_t n = a.size();
    const std::size_t n4 = n & ~std::size_t{3};
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        _mm256_storeu_pd(out.data() + i,
                         _mm256_mul_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i)));
    }
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    const std::size_t n = a.size();
    const std::size_t n8 = n & ~std::size_t{7};
    __m256d s0 = _mm256_setzero_pd();
    __m256d s1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i < n8; i += 8) {
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), s0);
        s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i + 4), _mm256_loadu_pd(b.data() + i + 4), s1);
    }
    const __m256d s = _mm256_add_pd(s0, s1);
    const __m128d pair = _mm_add_pd(_mm256_castpd256_pd128(s), _mm256_extractf128_pd(s, 1));
    double sum = _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

void weighted_residual(std::span<const double> data, std::span<const double> model,
                       std::span<const double> weight, std::span<double> out) {
    assert(data.size() == model.size() && data.size() == weight.size() && data.size() == out.size());
    const std::size_t n = data.size();
    const std::size_t n4 = n & ~std::size_t{3};
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        const __m256d d = _mm256_loadu_pd(data.data() + i);
        const __m256d m = _mm256_loadu_pd(model.data() + i);
        const __m256d w = _mm256_loadu_pd(weight.data() + i);
        _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(_mm256_sub_pd(d, m), w));
    }
    for (; i < n; ++i) out[i] = (data[i] - model[i]) * weight[i];
}

}  // namespace

const KernelTable* avx2_kernels() {
    static const KernelTable table{
        "avx2", lorentzian_accumulate, power_accumulate, multiply, dot, weighted_residual,
    };
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? &table : nullptr;
}

}  // namespace coems::simd

#else

namespace coems::simd {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace coems::simd

#endif
