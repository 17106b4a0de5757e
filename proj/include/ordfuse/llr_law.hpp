#pragma once

#include <random>
#include <vector>

#include "ordfuse/scenario.hpp"

namespace ordfuse {

enum class LawFamily {
    EnergyChiSquare,  // Y = scale_H * chi2(dof) - shift
    Gaussian          // Y ~ Normal(mean_H, sd^2)
};

// Conditional law of the value a sensor reports, under either hypothesis.
// For the energy detector the reported value is the LLR itself; a Gaussian law
// may describe either a mean-shift LLR or a raw (non-LLR) statistic.
class LlrLaw {
public:
    // LLR of N real samples whose variance grows by a factor (1 + snr) under H1.
    static LlrLaw energy(int dof, double snr);
    static LlrLaw gaussian(double mean0, double mean1, double sd);
    // LLR of a Gaussian mean-shift test with separation d^2 = N (mu1-mu0)^2 / sigma^2:
    // Normal(-d^2/2, d^2) under H0 and Normal(+d^2/2, d^2) under H1.
    static LlrLaw gaussian_llr(double separation2);

    LawFamily family() const { return family_; }
    int dof() const { return dof_; }
    double scale(Hypothesis h) const { return h == Hypothesis::H0 ? scale0_ : scale1_; }
    double shift() const { return shift_; }
    double mean(Hypothesis h) const { return h == Hypothesis::H0 ? mean0_ : mean1_; }
    double sd() const { return sd_; }

    double pdf(double y, Hypothesis h) const;
    double cdf(double y, Hypothesis h) const;
    double upper_tail(double y, Hypothesis h) const;    // Pr(Y > y | h)
    double central_mass(double y, Hypothesis h) const;  // Pr(|Y| <= y | h), y >= 0
    double magnitude_tail(double y, Hypothesis h) const;  // Pr(|Y| > |y| | h)

    // log f(y|H1) / f(y|H0). Equals y whenever the reported value is itself an LLR.
    double log_ratio(double y) const;
    bool llr_valued() const { return llr_valued_; }

    double support_lower() const;  // -shift for the energy family, -inf otherwise
    // Points beyond which each tail carries less than `mass` under both hypotheses.
    double upper_cap(double mass) const;
    double lower_cap(double mass) const;
    // Interior points where densities or |y|-masses lose smoothness.
    std::vector<double> breakpoints() const;

    template <class Urbg>
    double sample(Hypothesis h, Urbg& rng) const {
        if (family_ == LawFamily::EnergyChiSquare) {
            std::chi_squared_distribution<double> chi2(dof_);
            return scale(h) * chi2(rng) - shift_;
        }
        std::normal_distribution<double> normal(mean(h), sd_);
        return normal(rng);
    }

    bool operator==(const LlrLaw&) const = default;

private:
    LawFamily family_ = LawFamily::EnergyChiSquare;
    int dof_ = 1;
    double scale0_ = 0, scale1_ = 0, shift_ = 0;
    double mean0_ = 0, mean1_ = 0, sd_ = 1;
    bool llr_valued_ = false;  // reported value is itself the LLR
};

// Law of sensor `sensor`'s LLR under the scenario's measurement model.
LlrLaw sensor_law(const ScenarioConfig& config, int sensor);

double llr_pdf(double y, Hypothesis h, const LlrLaw& law);
double llr_cdf(double y, Hypothesis h, const LlrLaw& law);

// Pr(|Y| > |b| | h).
double beta_tail(double b, Hypothesis h, const LlrLaw& law);

// Correction term log[Pr(|Y|<=y | H1) / Pr(|Y|<=y | H0)], y >= 0.
// The y -> 0 limit is the density ratio at 0, returned exactly.
double rho(double y, const LlrLaw& law);

struct RhoRange {
    double min = 0, max = 0;
    double argmin = 0, argmax = 0;
};

// Extrema of rho over [0, y_max]: 512-point grid, then Brent refinement around the
// best cells.
RhoRange rho_extrema(double y_max, const LlrLaw& law);

// (M-K) rho(y) + (K-k) log f(y|H1)/f(y|H0), for 1 <= k <= K.
double rho_bar(double y, int k, const ScenarioConfig& config, const LlrLaw& law);

// Running extrema of rho over [0, a] for arbitrary a, answered with a single rho
// evaluation. Local extrema of rho are located once at construction; since
// the extrema over nested intervals are monotone in a, the answer is the best of
// rho(0), rho(a) and the precomputed local extrema lying in [0, a].
class RhoEnvelope {
public:
    explicit RhoEnvelope(const LlrLaw& law, int scan_points = 4096);

    RhoRange over(double a) const;
    double at(double y) const { return rho(y, law_); }

private:
    struct Extremum {
        double y;
        double prefix;  // running min (or max) of rho over extrema with location <= y
    };
    static double best_before(const std::vector<Extremum>& list, double a, double fallback,
                              bool minimum);

    LlrLaw law_;
    double rho0_ = 0;
    std::vector<Extremum> minima_, maxima_;
};

} // namespace ordfuse
