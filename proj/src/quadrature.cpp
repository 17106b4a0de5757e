#include "ordfuse/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ordfuse/errors.hpp"

namespace ordfuse {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
using Gauss = boost::math::quadrature::gauss<double, 7>;

struct Panel {
    double kronrod, gauss;
    double x[15], fx[15];
};

Panel evaluate(const std::function<double(double)>& f, double a, double b) {
    const auto& kx = Kronrod::abscissa();
    const auto& kw = Kronrod::weights();
    const auto& gw = Gauss::weights();
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    Panel p{};
    int n = 0;
    for (std::size_t i = 0; i < kx.size(); ++i) {
        for (double sign : {-1.0, 1.0}) {
            if (i == 0 && sign > 0) continue;
            const double x = mid + sign * half * kx[i];
            const double v = f(x);
            p.x[n] = x;
            p.fx[n] = v;
            ++n;
            p.kronrod += kw[i] * v;
            if (i % 2 == 0) p.gauss += gw[i / 2] * v;
        }
    }
    p.kronrod *= half;
    p.gauss *= half;
    return p;
}

void refine(const std::function<double(double)>& f, double a, double b, int depth,
            const AdaptiveOptions& opt, NodeSet& out, bool& converged) {
    const Panel p = evaluate(f, a, b);
    const bool too_wide = opt.max_width > 0 && (b - a) > opt.max_width;
    const bool accurate = std::fabs(p.kronrod - p.gauss) <= opt.panel_tol;
    if ((accurate && !too_wide) || depth >= opt.max_depth) {
        if (!accurate) converged = false;
        const auto& kx = Kronrod::abscissa();
        const auto& kw = Kronrod::weights();
        const double half = 0.5 * (b - a);
        int n = 0;
        for (std::size_t i = 0; i < kx.size(); ++i) {
            for (double sign : {-1.0, 1.0}) {
                if (i == 0 && sign > 0) continue;
                out.x.push_back(p.x[n++]);
                out.w.push_back(half * kw[i]);
            }
        }
        return;
    }
    const double mid = 0.5 * (a + b);
    refine(f, a, mid, depth + 1, opt, out, converged);
    refine(f, mid, b, depth + 1, opt, out, converged);
}

} // namespace

NodeSet adaptive_nodes(const std::function<double(double)>& f, const std::vector<double>& breaks,
                       const AdaptiveOptions& options, bool* converged) {
    require(breaks.size() >= 2, "adaptive_nodes needs at least two break points");
    require(std::is_sorted(breaks.begin(), breaks.end()), "break points must be sorted");
    NodeSet out;
    bool ok = true;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] > breaks[i]) refine(f, breaks[i], breaks[i + 1], 0, options, out, ok);
    }
    if (converged) *converged = ok;
    return out;
}

double integrate(const NodeSet& nodes, const std::function<double(double)>& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += nodes.w[i] * f(nodes.x[i]);
    return s;
}

} // namespace ordfuse
