#include "ordfuse/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace ordfuse::kernels {

namespace {

Isa detect() {
    if (const char* env = std::getenv("ORDFUSE_ISA")) {
        const std::string_view v(env);
        if (v == "scalar") return Isa::Scalar;
        if (v == "avx2" && isa_supported(Isa::Avx2)) return Isa::Avx2;
    }
    return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<int> forced{-1};

} // namespace

bool isa_supported(Isa isa) {
    if (isa == Isa::Scalar) return true;
#if defined(ORDFUSE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

Isa active_isa() {
    const int f = forced.load(std::memory_order_relaxed);
    if (f >= 0) return static_cast<Isa>(f);
    static const Isa detected = detect();
    return detected;
}

void force_isa(Isa isa) { forced.store(isa_supported(isa) ? static_cast<int>(isa) : 0); }

void reset_isa() { forced.store(-1); }

std::string isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void continuation_expectation(const double* pis, std::size_t n_pi, const double* a,
                              const double* b, std::size_t n_q, const double* j_grid,
                              std::size_t n_grid, double* out) {
#ifdef ORDFUSE_HAVE_AVX2
    if (active_isa() == Isa::Avx2)
        return avx2::continuation_expectation(pis, n_pi, a, b, n_q, j_grid, n_grid, out);
#endif
    scalar::continuation_expectation(pis, n_pi, a, b, n_q, j_grid, n_grid, out);
}

void quadratic_llr(const double* x, std::size_t n, std::size_t m, const double* qa,
                   const double* qb, const double* qc, double* out) {
#ifdef ORDFUSE_HAVE_AVX2
    if (active_isa() == Isa::Avx2) return avx2::quadratic_llr(x, n, m, qa, qb, qc, out);
#endif
    scalar::quadratic_llr(x, n, m, qa, qb, qc, out);
}

} // namespace ordfuse::kernels
