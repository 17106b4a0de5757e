#include "ordfuse/kernels.hpp"

#include <immintrin.h>

// Lanes run over independent outputs and every lane accumulates in the same
// order as the scalar loop, with no fused multiply-adds, so results match the
// scalar kernels bit for bit.

namespace ordfuse::kernels::avx2 {

void continuation_expectation(const double* pis, std::size_t n_pi, const double* a,
                              const double* b, std::size_t n_q, const double* j_grid,
                              std::size_t n_grid, double* out) {
    const __m256d scale = _mm256_set1_pd(static_cast<double>(n_grid - 1));
    const __m128i last = _mm_set1_epi32(static_cast<int>(n_grid) - 2);
    const __m128i one = _mm_set1_epi32(1);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d ones = _mm256_set1_pd(1.0);
    std::size_t p = 0;
    for (; p + 4 <= n_pi; p += 4) {
        const __m256d pi = _mm256_loadu_pd(pis + p);
        const __m256d qi = _mm256_sub_pd(ones, pi);
        __m256d acc = zero;
        for (std::size_t q = 0; q < n_q; ++q) {
            const __m256d pa = _mm256_mul_pd(pi, _mm256_set1_pd(a[q]));
            const __m256d mass = _mm256_add_pd(pa, _mm256_mul_pd(qi, _mm256_set1_pd(b[q])));
            const __m256d live = _mm256_cmp_pd(mass, zero, _CMP_NEQ_OQ);
            const __m256d post = _mm256_blendv_pd(zero, _mm256_div_pd(pa, mass), live);
            const __m256d idx = _mm256_mul_pd(post, scale);
            __m128i i = _mm256_cvttpd_epi32(idx);
            i = _mm_min_epi32(i, last);
            const __m256d t = _mm256_sub_pd(idx, _mm256_cvtepi32_pd(i));
            const __m256d lo = _mm256_i32gather_pd(j_grid, i, 8);
            const __m256d hi = _mm256_i32gather_pd(j_grid, _mm_add_epi32(i, one), 8);
            const __m256d v = _mm256_add_pd(lo, _mm256_mul_pd(t, _mm256_sub_pd(hi, lo)));
            const __m256d next = _mm256_add_pd(acc, _mm256_mul_pd(mass, v));
            acc = _mm256_blendv_pd(acc, next, live);
        }
        _mm256_storeu_pd(out + p, acc);
    }
    if (p < n_pi)
        scalar::continuation_expectation(pis + p, n_pi - p, a, b, n_q, j_grid, n_grid, out + p);
}

void quadratic_llr(const double* x, std::size_t n, std::size_t m, const double* qa,
                   const double* qb, const double* qc, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        __m256d s2 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
        for (std::size_t r = 0; r < n; ++r) {
            const __m256d v = _mm256_loadu_pd(x + r * m + i);
            s2 = _mm256_add_pd(s2, _mm256_mul_pd(v, v));
            s1 = _mm256_add_pd(s1, v);
        }
        const __m256d lin = _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(qa + i), s2),
                                          _mm256_mul_pd(_mm256_loadu_pd(qb + i), s1));
        _mm256_storeu_pd(out + i, _mm256_add_pd(lin, _mm256_loadu_pd(qc + i)));
    }
    for (; i < m; ++i) {
        double s2 = 0.0, s1 = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double v = x[r * m + i];
            s2 = s2 + v * v;
            s1 = s1 + v;
        }
        out[i] = (qa[i] * s2 + qb[i] * s1) + qc[i];
    }
}

} // namespace ordfuse::kernels::avx2
