#pragma once

#include <functional>
#include <vector>

namespace ordfuse {

// Quadrature rule as explicit nodes and weights, so one node set can integrate
// many integrands that share the same density factor.
struct NodeSet {
    std::vector<double> x, w;
    std::size_t size() const { return x.size(); }
};

struct AdaptiveOptions {
    double panel_tol = 1e-12;   // |K15 - G7| accepted per panel
    double max_width = 0.0;     // panels wider than this are always split (0: no limit)
    int max_depth = 40;
};

// Adaptive Gauss-Kronrod (7/15) panels over [breaks[0], breaks.back()], never
// straddling an interior break; returns the Kronrod nodes of every leaf panel.
// `converged` is cleared when some panel hit max_depth first.
NodeSet adaptive_nodes(const std::function<double(double)>& f, const std::vector<double>& breaks,
                       const AdaptiveOptions& options, bool* converged = nullptr);

double integrate(const NodeSet& nodes, const std::function<double(double)>& f);

} // namespace ordfuse
