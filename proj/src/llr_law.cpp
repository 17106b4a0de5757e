#include "ordfuse/llr_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

#include "ordfuse/errors.hpp"

namespace ordfuse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

} // namespace

LlrLaw LlrLaw::energy(int dof, double snr) {
    require(dof >= 1, "energy law needs dof >= 1");
    require(snr > 0 && std::isfinite(snr), "energy law needs a positive finite snr");
    LlrLaw law;
    law.family_ = LawFamily::EnergyChiSquare;
    law.dof_ = dof;
    law.scale0_ = snr / (2.0 * (snr + 1.0));
    law.scale1_ = snr / 2.0;
    law.shift_ = 0.5 * dof * std::log1p(snr);
    law.llr_valued_ = true;
    return law;
}

LlrLaw LlrLaw::gaussian(double mean0, double mean1, double sd) {
    require(sd > 0 && std::isfinite(sd), "gaussian law needs sd > 0");
    require(mean0 != mean1, "gaussian law needs distinct means");
    LlrLaw law;
    law.family_ = LawFamily::Gaussian;
    law.mean0_ = mean0;
    law.mean1_ = mean1;
    law.sd_ = sd;
    return law;
}

LlrLaw LlrLaw::gaussian_llr(double separation2) {
    require(separation2 > 0, "gaussian LLR law needs positive separation");
    LlrLaw law = gaussian(-0.5 * separation2, 0.5 * separation2, std::sqrt(separation2));
    law.llr_valued_ = true;
    return law;
}

double LlrLaw::pdf(double y, Hypothesis h) const {
    if (family_ == LawFamily::Gaussian) {
        const double z = (y - mean(h)) / sd_;
        return std::exp(-0.5 * z * z) / (sd_ * std::sqrt(2.0 * M_PI));
    }
    const double s = scale(h);
    const double u = (y + shift_) / s;
    if (u < 0) return 0.0;
    if (u == 0) return dof_ == 2 ? 0.5 / s : (dof_ == 1 ? kInf : 0.0);
    // chi-square(dof) density at u is gamma_p_derivative(dof/2, u/2) / 2
    return 0.5 * boost::math::gamma_p_derivative(0.5 * dof_, 0.5 * u) / s;
}

double LlrLaw::cdf(double y, Hypothesis h) const {
    if (family_ == LawFamily::Gaussian) return normal_cdf((y - mean(h)) / sd_);
    if (y == kInf) return 1.0;
    const double u = (y + shift_) / scale(h);
    if (u <= 0) return 0.0;
    return boost::math::gamma_p(0.5 * dof_, 0.5 * u);
}

double LlrLaw::upper_tail(double y, Hypothesis h) const {
    if (family_ == LawFamily::Gaussian) return normal_sf((y - mean(h)) / sd_);
    if (y == kInf) return 0.0;
    const double u = (y + shift_) / scale(h);
    if (u <= 0) return 1.0;
    return boost::math::gamma_q(0.5 * dof_, 0.5 * u);
}

double LlrLaw::magnitude_tail(double y, Hypothesis h) const {
    const double a = std::fabs(y);
    if (a == kInf) return 0.0;
    return upper_tail(a, h) + cdf(-a, h);
}

namespace {

// Short symmetric intervals well inside the support: integrate the density
// directly, the CDF difference would cancel.
bool use_direct_mass(const LlrLaw& law, double y) {
    if (law.family() == LawFamily::Gaussian) return y <= law.sd();
    return y <= 0.5 * law.shift();
}

double direct_mass(const LlrLaw& law, double y, Hypothesis h) {
    auto f = [&](double x) { return law.pdf(x, h); };
    return boost::math::quadrature::gauss<double, 20>::integrate(f, -y, y);
}

} // namespace

double LlrLaw::central_mass(double y, Hypothesis h) const {
    require(y >= 0, "central_mass needs y >= 0");
    if (y == 0) return 0.0;
    if (use_direct_mass(*this, y)) return direct_mass(*this, y, h);
    return 1.0 - magnitude_tail(y, h);
}

double LlrLaw::log_ratio(double y) const {
    if (llr_valued_) return y;
    const double d = mean1_ - mean0_;
    return d / (sd_ * sd_) * (y - 0.5 * (mean0_ + mean1_));
}

double LlrLaw::support_lower() const {
    return family_ == LawFamily::EnergyChiSquare ? -shift_ : -kInf;
}

double LlrLaw::upper_cap(double mass) const {
    require(mass > 0 && mass < 0.5, "tail mass must lie in (0, 0.5)");
    if (family_ == LawFamily::EnergyChiSquare) {
        const double u = 2.0 * boost::math::gamma_q_inv(0.5 * dof_, mass);
        return std::max(scale0_, scale1_) * u - shift_;
    }
    const double z = std::sqrt(2.0) * boost::math::erfc_inv(2.0 * mass);
    return std::max(mean0_, mean1_) + sd_ * z;
}

double LlrLaw::lower_cap(double mass) const {
    if (family_ == LawFamily::EnergyChiSquare) return -shift_;
    require(mass > 0 && mass < 0.5, "tail mass must lie in (0, 0.5)");
    const double z = std::sqrt(2.0) * boost::math::erfc_inv(2.0 * mass);
    return std::min(mean0_, mean1_) - sd_ * z;
}

std::vector<double> LlrLaw::breakpoints() const {
    if (family_ == LawFamily::EnergyChiSquare) return {-shift_, 0.0, shift_};
    return {0.0};
}

LlrLaw sensor_law(const ScenarioConfig& config, int sensor) {
    require(sensor >= 0 && sensor < config.M, "sensor index out of range");
    if (config.model == MeasurementModel::EnergyChiSquare)
        return LlrLaw::energy(config.N, config.snr(sensor));
    const double mu = config.mu.at(sensor);
    return LlrLaw::gaussian_llr(config.N * mu * mu / config.sigma2);
}

double llr_pdf(double y, Hypothesis h, const LlrLaw& law) { return law.pdf(y, h); }

double llr_cdf(double y, Hypothesis h, const LlrLaw& law) { return law.cdf(y, h); }

double beta_tail(double b, Hypothesis h, const LlrLaw& law) { return law.magnitude_tail(b, h); }

double rho(double y, const LlrLaw& law) {
    require(y >= 0, "rho needs y >= 0");
    if (y == 0) return law.log_ratio(0.0);
    if (y == kInf) return 0.0;
    if (use_direct_mass(law, y)) {
        return std::log(direct_mass(law, y, Hypothesis::H1)) -
               std::log(direct_mass(law, y, Hypothesis::H0));
    }
    return std::log1p(-law.magnitude_tail(y, Hypothesis::H1)) -
           std::log1p(-law.magnitude_tail(y, Hypothesis::H0));
}

namespace {

// Brent search for a minimum of sign*f inside [lo, hi].
std::pair<double, double> refine(const LlrLaw& law, double lo, double hi, double sign) {
    auto f = [&](double y) { return sign * rho(y, law); };
    auto [x, v] = boost::math::tools::brent_find_minima(f, lo, hi, 45);
    return {x, sign * v};
}

} // namespace

RhoRange rho_extrema(double y_max, const LlrLaw& law) {
    require(y_max >= 0, "rho_extrema needs y_max >= 0");
    RhoRange out;
    out.min = out.max = rho(0.0, law);
    if (y_max == 0) return out;

    constexpr int kGrid = 512;
    std::vector<double> ys(kGrid), vs(kGrid);
    for (int i = 0; i < kGrid; ++i) {
        ys[i] = y_max * i / (kGrid - 1);
        vs[i] = rho(ys[i], law);
    }
    ys.back() = y_max;

    for (double sign : {1.0, -1.0}) {
        // cells holding a discrete local extremum of sign*rho, best first
        std::vector<int> cells;
        for (int i = 1; i + 1 < kGrid; ++i) {
            const double a = sign * vs[i - 1], b = sign * vs[i], c = sign * vs[i + 1];
            if (b < a && b <= c) cells.push_back(i);
        }
        std::sort(cells.begin(), cells.end(),
                  [&](int l, int r) { return sign * vs[l] < sign * vs[r]; });
        if (cells.size() > 3) cells.resize(3);

        double best = sign * vs[0], arg = ys[0];
        for (int i = 1; i < kGrid; ++i) {
            if (sign * vs[i] < best) best = sign * vs[i], arg = ys[i];
        }
        for (int i : cells) {
            auto [x, v] = refine(law, ys[i - 1], ys[i + 1], sign);
            if (sign * v < best) best = sign * v, arg = x;
        }
        if (sign > 0) out.min = best, out.argmin = arg;
        else out.max = -best, out.argmax = arg;
    }
    return out;
}

double rho_bar(double y, int k, const ScenarioConfig& config, const LlrLaw& law) {
    require(k >= 1 && k <= config.K, "rho_bar needs 1 <= k <= K");
    const int unreported = config.M - config.K;
    const int pending = config.K - k;
    double value = 0.0;
    if (unreported > 0) value += unreported * rho(std::fabs(y), law);
    if (pending > 0) value += pending * law.log_ratio(y);
    return value;
}

RhoEnvelope::RhoEnvelope(const LlrLaw& law, int scan_points) : law_(law) {
    require(scan_points >= 16, "RhoEnvelope needs at least 16 scan points");
    rho0_ = rho(0.0, law_);
    const double y_hi = std::max(law_.upper_cap(1e-15), -law_.lower_cap(1e-15));
    std::vector<double> ys(scan_points), vs(scan_points);
    for (int i = 0; i < scan_points; ++i) {
        ys[i] = y_hi * i / (scan_points - 1);
        vs[i] = rho(ys[i], law_);
    }
    for (double sign : {1.0, -1.0}) {
        auto& list = sign > 0 ? minima_ : maxima_;
        for (int i = 1; i + 1 < scan_points; ++i) {
            const double a = sign * vs[i - 1], b = sign * vs[i], c = sign * vs[i + 1];
            if (!(b < a && b <= c)) continue;
            auto [x, v] = refine(law_, ys[i - 1], ys[i + 1], sign);
            list.push_back({x, v});
        }
        std::sort(list.begin(), list.end(),
                  [](const Extremum& l, const Extremum& r) { return l.y < r.y; });
        for (std::size_t i = 1; i < list.size(); ++i) {
            list[i].prefix = sign > 0 ? std::min(list[i].prefix, list[i - 1].prefix)
                                      : std::max(list[i].prefix, list[i - 1].prefix);
        }
    }
}

double RhoEnvelope::best_before(const std::vector<Extremum>& list, double a, double fallback,
                                bool minimum) {
    auto it = std::upper_bound(list.begin(), list.end(), a,
                               [](double v, const Extremum& e) { return v < e.y; });
    if (it == list.begin()) return fallback;
    const double p = std::prev(it)->prefix;
    return minimum ? std::min(fallback, p) : std::max(fallback, p);
}

RhoRange RhoEnvelope::over(double a) const {
    require(a >= 0, "RhoEnvelope::over needs a >= 0");
    const double end = rho(a, law_);
    RhoRange r;
    r.min = best_before(minima_, a, std::min(rho0_, end), true);
    r.max = best_before(maxima_, a, std::max(rho0_, end), false);
    r.argmin = r.min == end ? a : 0.0;
    r.argmax = r.max == end ? a : 0.0;
    return r;
}

} // namespace ordfuse
