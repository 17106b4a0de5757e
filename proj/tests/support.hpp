#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "ordfuse/llr_law.hpp"

namespace testing {

// Boost's own adaptive Gauss-Kronrod integrator, used as the independent
// quadrature oracle throughout the tests.
inline double gk_integrate(const std::function<double(double)>& f, double a, double b,
                           double tol = 1e-13) {
    double err = 0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, tol, &err);
}

// Finite intervals go to tanh-sinh, which copes with the square-root behaviour
// of the densities at the edge of their support.
inline double quad(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
    if (!std::isfinite(a) || !std::isfinite(b)) return gk_integrate(f, a, b, tol);
    static boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate([&f](double x) { return f(x); }, a, b, tol);
}

// Integral over the support of `law`, split where the ranked densities have kinks.
inline double integrate_over_support(const std::function<double(double)>& f,
                                     const ordfuse::LlrLaw& law) {
    const double hi = law.upper_cap(1e-16);
    const double lo = law.family() == ordfuse::LawFamily::EnergyChiSquare ? -law.shift()
                                                                          : law.lower_cap(1e-16);
    double total = 0;
    double prev = lo;
    for (double b : law.breakpoints()) {
        if (b <= prev || b >= hi) continue;
        total += quad(f, prev, b);
        prev = b;
    }
    return total + quad(f, prev, hi);
}

inline bool close(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

} // namespace testing
