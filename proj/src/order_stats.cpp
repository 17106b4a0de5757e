#include "ordfuse/order_stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/binomial.hpp>

#include "ordfuse/errors.hpp"

namespace ordfuse {

namespace {

double choose(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return boost::math::binomial_coefficient<double>(static_cast<unsigned>(n),
                                                     static_cast<unsigned>(k));
}

// Integer power that keeps 0^0 = 1.
double ipow(double x, int n) { return n == 0 ? 1.0 : std::pow(x, n); }

struct Masses {
    std::vector<double> tail;     // beta_v(y)
    std::vector<double> central;  // 1 - beta_v(y)
};

Masses masses_at(double y, Hypothesis h, const SensorEnsemble& ens) {
    Masses out;
    const double a = std::fabs(y);
    out.tail.reserve(ens.size());
    out.central.reserve(ens.size());
    for (const auto& law : ens.laws()) {
        out.tail.push_back(law.magnitude_tail(a, h));
        out.central.push_back(law.central_mass(a, h));
    }
    return out;
}

// Coefficient m_sub of prod over non-excluded v of (in_v x + out_v).
double subset_sum(int m_sub, const std::vector<double>& in, const std::vector<double>& out,
                  const std::vector<int>& excluded) {
    std::vector<double> e(m_sub + 1, 0.0);
    e[0] = 1.0;
    int used = 0;
    for (std::size_t v = 0; v < in.size(); ++v) {
        if (std::find(excluded.begin(), excluded.end(), static_cast<int>(v)) != excluded.end())
            continue;
        ++used;
        for (int m = std::min(used, m_sub); m >= 1; --m) e[m] = e[m] * out[v] + e[m - 1] * in[v];
        e[0] *= out[v];
    }
    return e[m_sub];
}

std::vector<double> pdfs_at(double y, Hypothesis h, const SensorEnsemble& ens) {
    std::vector<double> f;
    f.reserve(ens.size());
    for (const auto& law : ens.laws()) f.push_back(law.pdf(y, h));
    return f;
}

} // namespace

SensorEnsemble::SensorEnsemble(std::vector<LlrLaw> laws, Evaluation evaluation)
    : laws_(std::move(laws)), evaluation_(evaluation) {
    require(!laws_.empty(), "sensor ensemble needs at least one law");
    identical_ = std::all_of(laws_.begin(), laws_.end(),
                             [&](const LlrLaw& l) { return l == laws_.front(); });
}

SensorEnsemble SensorEnsemble::from_config(const ScenarioConfig& config, Evaluation evaluation) {
    std::vector<LlrLaw> laws;
    for (int i = 0; i < config.M; ++i) laws.push_back(sensor_law(config, i));
    return SensorEnsemble(std::move(laws), evaluation);
}

std::vector<double> subset_coefficients(const std::vector<double>& in, const std::vector<double>& out,
                                        int max_size) {
    require(in.size() == out.size(), "subset_coefficients needs matching weight lists");
    require(max_size >= 0, "subset_coefficients needs max_size >= 0");
    std::vector<double> e(max_size + 1, 0.0);
    e[0] = 1.0;
    for (std::size_t v = 0; v < in.size(); ++v) {
        const int top = std::min(static_cast<int>(v) + 1, max_size);
        for (int m = top; m >= 1; --m) e[m] = e[m] * out[v] + e[m - 1] * in[v];
        e[0] *= out[v];
    }
    return e;
}

double subset_weight_sum(int m_sub, Hypothesis h, double hi_arg, double lo_arg,
                         const std::vector<int>& excluded, const SensorEnsemble& ensemble) {
    int excluded_count = 0;
    for (int v : excluded) {
        require(v >= 0 && v < ensemble.size(), "excluded sensor index out of range");
        ++excluded_count;
    }
    require(m_sub >= 0 && m_sub <= ensemble.size() - excluded_count, "m_sub out of range");
    const Masses hi = masses_at(hi_arg, h, ensemble);
    const Masses lo = masses_at(lo_arg, h, ensemble);
    return subset_sum(m_sub, hi.tail, lo.central, excluded);
}

double ranked_pdf(int m, double y, Hypothesis h, const SensorEnsemble& ensemble) {
    const int M = ensemble.size();
    require(m >= 1 && m <= M, "rank out of range");
    if (ensemble.use_closed_form()) {
        const LlrLaw& law = ensemble.law(0);
        const double f = law.pdf(y, h);
        if (f == 0.0) return 0.0;
        const double a = std::fabs(y);
        return M * f * choose(M - 1, m - 1) * ipow(law.magnitude_tail(a, h), m - 1) *
               ipow(law.central_mass(a, h), M - m);
    }
    const Masses ms = masses_at(y, h, ensemble);
    const std::vector<double> f = pdfs_at(y, h, ensemble);
    double sum = 0.0;
    for (int i = 0; i < M; ++i) {
        if (f[i] == 0.0) continue;
        sum += f[i] * subset_sum(m - 1, ms.tail, ms.central, {i});
    }
    return sum;
}

std::vector<double> ranked_pdf_all(double y, Hypothesis h, const SensorEnsemble& ensemble) {
    const int M = ensemble.size();
    std::vector<double> out(M, 0.0);
    if (ensemble.use_closed_form()) {
        const LlrLaw& law = ensemble.law(0);
        const double f = law.pdf(y, h);
        if (f == 0.0) return out;
        const double a = std::fabs(y);
        const double beta = law.magnitude_tail(a, h), central = law.central_mass(a, h);
        for (int m = 1; m <= M; ++m)
            out[m - 1] = M * f * choose(M - 1, m - 1) * ipow(beta, m - 1) * ipow(central, M - m);
        return out;
    }
    const Masses ms = masses_at(y, h, ensemble);
    const std::vector<double> f = pdfs_at(y, h, ensemble);
    for (int i = 0; i < M; ++i) {
        if (f[i] == 0.0) continue;
        std::vector<double> in, rest;
        for (int v = 0; v < M; ++v) {
            if (v == i) continue;
            in.push_back(ms.tail[v]);
            rest.push_back(ms.central[v]);
        }
        const auto e = subset_coefficients(in, rest, M - 1);
        for (int m = 1; m <= M; ++m) out[m - 1] += f[i] * e[m - 1];
    }
    return out;
}

double joint_consecutive_pdf(int m, double alpha, double gamma, Hypothesis h,
                             const SensorEnsemble& ensemble) {
    const int M = ensemble.size();
    require(m >= 2 && m <= M, "joint_consecutive_pdf needs 2 <= m <= M");
    if (std::fabs(alpha) > std::fabs(gamma)) return 0.0;
    if (ensemble.use_closed_form()) {
        const LlrLaw& law = ensemble.law(0);
        const double fa = law.pdf(alpha, h), fg = law.pdf(gamma, h);
        if (fa == 0.0 || fg == 0.0) return 0.0;
        return static_cast<double>(M) * (M - 1) * fa * fg * choose(M - 2, m - 2) *
               ipow(law.magnitude_tail(gamma, h), m - 2) *
               ipow(law.central_mass(std::fabs(alpha), h), M - m);
    }
    const Masses at_gamma = masses_at(gamma, h, ensemble);
    const Masses at_alpha = masses_at(alpha, h, ensemble);
    const std::vector<double> fg = pdfs_at(gamma, h, ensemble);
    const std::vector<double> fa = pdfs_at(alpha, h, ensemble);
    double sum = 0.0;
    for (int i = 0; i < M; ++i) {
        if (fg[i] == 0.0) continue;
        for (int j = 0; j < M; ++j) {
            if (j == i || fa[j] == 0.0) continue;
            sum += fg[i] * fa[j] * subset_sum(m - 2, at_gamma.tail, at_alpha.central, {i, j});
        }
    }
    return sum;
}

double conditional_pdf(int m, double alpha, double gamma, Hypothesis h,
                       const SensorEnsemble& ensemble) {
    const double marginal = ranked_pdf(m - 1, gamma, h, ensemble);
    if (!(marginal > 0.0) || !std::isfinite(marginal))
        throw UndefinedConditionalError("rank-" + std::to_string(m - 1) +
                                        " density vanishes at the conditioning value");
    if (ensemble.use_closed_form())
        return conditional_pdf_identical(m, ensemble.size(), alpha, gamma, h, ensemble.law(0));
    return joint_consecutive_pdf(m, alpha, gamma, h, ensemble) / marginal;
}

double conditional_pdf_identical(int m, int M, double alpha, double gamma, Hypothesis h,
                                 const LlrLaw& law) {
    require(m >= 2 && m <= M, "conditional_pdf_identical needs 2 <= m <= M");
    if (std::fabs(alpha) > std::fabs(gamma)) return 0.0;
    const double cg = law.central_mass(std::fabs(gamma), h);
    if (!(cg > 0.0)) throw UndefinedConditionalError("no mass below the conditioning magnitude");
    const double fa = law.pdf(alpha, h);
    if (fa == 0.0) return 0.0;
    const double ca = law.central_mass(std::fabs(alpha), h);
    return (M + 1 - m) * fa * ipow(ca, M - m) / ipow(cg, M - m + 1);
}

} // namespace ordfuse
