#pragma once

#include <cstddef>
#include <string>

namespace ordfuse::kernels {

enum class Isa { Scalar, Avx2 };

// Best variant this CPU supports, unless overridden by ORDFUSE_ISA=scalar|avx2
// or force_isa().
Isa active_isa();
void force_isa(Isa isa);
void reset_isa();
bool isa_supported(Isa isa);
std::string isa_name(Isa isa);

// For each belief p in pis:
//   out[p] = sum_q mass_pq * J(post_pq),  mass_pq = p a_q + (1 - p) b_q,
//   post_pq = p a_q / mass_pq,
// with J given on a uniform grid over [0, 1] and interpolated linearly. Terms
// with zero mass contribute nothing.
void continuation_expectation(const double* pis, std::size_t n_pi, const double* a,
                              const double* b, std::size_t n_q, const double* j_grid,
                              std::size_t n_grid, double* out);

// out[i] = qa[i] * sum_n x[n][i]^2 + qb[i] * sum_n x[n][i] + qc[i], with the
// samples stored row-major as x[n * m + i].
void quadratic_llr(const double* x, std::size_t n, std::size_t m, const double* qa,
                   const double* qb, const double* qc, double* out);

namespace scalar {
void continuation_expectation(const double* pis, std::size_t n_pi, const double* a,
                              const double* b, std::size_t n_q, const double* j_grid,
                              std::size_t n_grid, double* out);
void quadratic_llr(const double* x, std::size_t n, std::size_t m, const double* qa,
                   const double* qb, const double* qc, double* out);
} // namespace scalar

namespace avx2 {
void continuation_expectation(const double* pis, std::size_t n_pi, const double* a,
                              const double* b, std::size_t n_q, const double* j_grid,
                              std::size_t n_grid, double* out);
void quadratic_llr(const double* x, std::size_t n, std::size_t m, const double* qa,
                   const double* qb, const double* qc, double* out);
} // namespace avx2

} // namespace ordfuse::kernels
