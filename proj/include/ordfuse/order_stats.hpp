#pragma once

#include <vector>

#include "ordfuse/llr_law.hpp"

namespace ordfuse {

// Per-sensor LLR laws of the network. Densities of magnitude-ranked LLRs are
// evaluated in closed form when every sensor follows the same law, unless the
// general subset-sum formulas are forced.
class SensorEnsemble {
public:
    enum class Evaluation { Auto, General };

    explicit SensorEnsemble(std::vector<LlrLaw> laws, Evaluation evaluation = Evaluation::Auto);
    static SensorEnsemble from_config(const ScenarioConfig& config,
                                      Evaluation evaluation = Evaluation::Auto);

    int size() const { return static_cast<int>(laws_.size()); }
    const LlrLaw& law(int i) const { return laws_.at(i); }
    const std::vector<LlrLaw>& laws() const { return laws_; }
    bool identical() const { return identical_; }
    bool use_closed_form() const { return identical_ && evaluation_ == Evaluation::Auto; }

private:
    std::vector<LlrLaw> laws_;
    Evaluation evaluation_;
    bool identical_ = false;
};

// Coefficients e_0..e_{max_size} of prod_v (in_v x + out_v): e_m sums, over all
// subsets S of size m, prod_{v in S} in_v * prod_{v not in S} out_v.
std::vector<double> subset_coefficients(const std::vector<double>& in, const std::vector<double>& out,
                                        int max_size);

// Sum over subsets S of size m_sub of the non-excluded sensors of
// prod_{v in S} beta_v(hi_arg) * prod_{v not in S} (1 - beta_v(lo_arg)).
double subset_weight_sum(int m_sub, Hypothesis h, double hi_arg, double lo_arg,
                         const std::vector<int>& excluded, const SensorEnsemble& ensemble);

// Density of the m-th largest-magnitude LLR, 1 <= m <= M.
double ranked_pdf(int m, double y, Hypothesis h, const SensorEnsemble& ensemble);

// All M ranked densities at y in one pass.
std::vector<double> ranked_pdf_all(double y, Hypothesis h, const SensorEnsemble& ensemble);

// Joint density of (Y[m], Y[m-1]) at (alpha, gamma), m >= 2; zero when |alpha| > |gamma|.
double joint_consecutive_pdf(int m, double alpha, double gamma, Hypothesis h,
                             const SensorEnsemble& ensemble);

// Density of Y[m] = alpha given Y[m-1] = gamma. Throws UndefinedConditionalError
// when the rank-(m-1) density vanishes at gamma.
double conditional_pdf(int m, double alpha, double gamma, Hypothesis h,
                       const SensorEnsemble& ensemble);

// Closed form for M identical sensors with law `law`.
double conditional_pdf_identical(int m, int M, double alpha, double gamma, Hypothesis h,
                                 const LlrLaw& law);

} // namespace ordfuse
