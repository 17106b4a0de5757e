#include "ordfuse/kernels.hpp"

namespace ordfuse::kernels::scalar {

void continuation_expectation(const double* pis, std::size_t n_pi, const double* a,
                              const double* b, std::size_t n_q, const double* j_grid,
                              std::size_t n_grid, double* out) {
    const double scale = static_cast<double>(n_grid - 1);
    const int last = static_cast<int>(n_grid) - 2;
    for (std::size_t p = 0; p < n_pi; ++p) {
        const double pi = pis[p];
        const double qi = 1.0 - pi;
        double acc = 0.0;
        for (std::size_t q = 0; q < n_q; ++q) {
            const double pa = pi * a[q];
            const double mass = pa + qi * b[q];
            if (mass == 0.0) continue;
            const double idx = (pa / mass) * scale;
            int i = static_cast<int>(idx);
            if (i > last) i = last;
            const double t = idx - static_cast<double>(i);
            const double lo = j_grid[i];
            const double v = lo + t * (j_grid[i + 1] - lo);
            acc = acc + mass * v;
        }
        out[p] = acc;
    }
}

void quadratic_llr(const double* x, std::size_t n, std::size_t m, const double* qa,
                   const double* qb, const double* qc, double* out) {
    for (std::size_t i = 0; i < m; ++i) {
        double s2 = 0.0, s1 = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double v = x[r * m + i];
            s2 = s2 + v * v;
            s1 = s1 + v;
        }
        out[i] = (qa[i] * s2 + qb[i] * s1) + qc[i];
    }
}

} // namespace ordfuse::kernels::scalar
