#include "ordfuse/bs_detector.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>

#include "ordfuse/errors.hpp"

namespace ordfuse {

namespace {

// Intermediate stops need S_k to clear a threshold by this much, so that rounding
// in the rho extrema can never stop a slot the block rule would decide the other
// way. The final stage is exact.
double stop_margin(double threshold) {
    return std::isfinite(threshold) ? 1e-9 * std::max(1.0, std::fabs(threshold)) : 0.0;
}

template <class RhoOver>
StageThresholds stage_thresholds(int k, double y_k, const ScenarioConfig& config,
                                 RhoOver rho_over) {
    require(k >= 1 && k <= config.K, "stage out of range");
    const double lp = config.log_prior_odds();
    const double a = std::fabs(y_k);
    const int unreported = config.M - config.K;
    if (k == config.K) {
        const double t = unreported > 0 ? lp - unreported * rho_over(a, true).min : lp;
        return {t, t};
    }
    RhoRange r;
    if (unreported > 0) r = rho_over(a, false);
    const double spread = (config.K - k) * a;
    return {lp - spread - unreported * r.max, lp + spread - unreported * r.min};
}

template <class RhoAt>
Hypothesis final_decision(double metric, double y_last, const ScenarioConfig& config, RhoAt rho_at) {
    const int unreported = config.M - config.K;
    const double total = unreported > 0 ? metric + unreported * rho_at(std::fabs(y_last)) : metric;
    return total >= config.log_prior_odds() ? Hypothesis::H1 : Hypothesis::H0;
}

template <class RhoOver, class RhoAt>
DecisionOutcome sequential(std::span<const double> ordered, const ScenarioConfig& config,
                           RhoOver rho_over, RhoAt rho_at) {
    require(static_cast<int>(ordered.size()) >= config.K, "detector needs at least K ordered reports");
    double sum = 0.0;
    for (int k = 1; k <= config.K; ++k) {
        const double y = ordered[k - 1];
        sum += y;
        if (k == config.K) return make_outcome(final_decision(sum, y, config, rho_at), k, config);
        const auto t = stage_thresholds(k, y, config, rho_over);
        if (sum < t.low - stop_margin(t.low)) return make_outcome(Hypothesis::H0, k, config);
        if (sum > t.high + stop_margin(t.high)) return make_outcome(Hypothesis::H1, k, config);
    }
    return {};  // unreachable
}

template <class RhoOver, class RhoAt>
DecisionOutcome sequential_generalized(std::span<const double> ordered, const ScenarioConfig& config,
                                       const LlrLaw& law, RhoOver rho_over, RhoAt rho_at) {
    require(static_cast<int>(ordered.size()) >= config.K, "detector needs at least K ordered reports");
    const double lp = config.log_prior_odds();
    const int unreported = config.M - config.K;
    double metric = 0.0;
    for (int k = 1; k <= config.K; ++k) {
        const double y = ordered[k - 1];
        metric += law.log_ratio(y);
        if (k == config.K) return make_outcome(final_decision(metric, y, config, rho_at), k, config);
        const double a = std::fabs(y);
        // log_ratio is affine for both supported families, so its extrema over
        // [-a, a] sit at the endpoints
        const double g_lo = law.log_ratio(-a), g_hi = law.log_ratio(a);
        const double g_min = std::min(g_lo, g_hi), g_max = std::max(g_lo, g_hi);
        RhoRange r;
        if (unreported > 0) r = rho_over(a, false);
        const double low = lp - (config.K - k) * g_max - unreported * r.max;
        const double high = lp - (config.K - k) * g_min - unreported * r.min;
        if (metric < low - stop_margin(low)) return make_outcome(Hypothesis::H0, k, config);
        if (metric > high + stop_margin(high)) return make_outcome(Hypothesis::H1, k, config);
    }
    return {};
}

auto exact_over(const LlrLaw& law) {
    return [&law](double a, bool point) {
        if (point) {
            const double v = rho(a, law);
            return RhoRange{v, v, a, a};
        }
        return rho_extrema(a, law);
    };
}

auto exact_at(const LlrLaw& law) {
    return [&law](double a) { return rho(a, law); };
}

const RhoEnvelope& cached_envelope(const LlrLaw& law) {
    struct Entry {
        LlrLaw law;
        std::unique_ptr<RhoEnvelope> envelope;
    };
    thread_local std::deque<Entry> cache;
    for (const auto& e : cache)
        if (e.law == law) return *e.envelope;
    if (cache.size() >= 16) cache.pop_front();
    cache.push_back({law, std::make_unique<RhoEnvelope>(law)});
    return *cache.back().envelope;
}

auto envelope_over(const RhoEnvelope& env) {
    return [&env](double a, bool point) {
        if (point) {
            const double v = env.at(a);
            return RhoRange{v, v, a, a};
        }
        return env.over(a);
    };
}

} // namespace

DecisionOutcome make_outcome(Hypothesis declared, int stage, const ScenarioConfig& config) {
    DecisionOutcome out;
    out.declared = declared;
    out.stage = stage;
    out.sensing_time = config.sensing_time(stage);
    return out;
}

DecisionOutcome prior_only_decision(const ScenarioConfig& config) {
    DecisionOutcome out =
        make_outcome(0.0 >= config.log_prior_odds() ? Hypothesis::H1 : Hypothesis::H0, 0, config);
    out.prior_only = true;
    return out;
}

StageThresholds thresholds_at_stage(int k, double y_k, const ScenarioConfig& config,
                                    const LlrLaw& law) {
    return stage_thresholds(k, y_k, config, exact_over(law));
}

Hypothesis map_block_decision(std::span<const double> ordered_top_k, const ScenarioConfig& config,
                              const LlrLaw& law) {
    require(static_cast<int>(ordered_top_k.size()) >= config.K, "block rule needs K reports");
    double metric = 0.0;
    for (int m = 0; m < config.K; ++m) metric += law.log_ratio(ordered_top_k[m]);
    return final_decision(metric, ordered_top_k[config.K - 1], config, exact_at(law));
}

DecisionOutcome run_detector(std::span<const double> ordered, const ScenarioConfig& config,
                             const LlrLaw& law) {
    return sequential(ordered, config, envelope_over(cached_envelope(law)), exact_at(law));
}

DecisionOutcome run_detector_generalized(std::span<const double> ordered,
                                         const ScenarioConfig& config, const LlrLaw& law) {
    return sequential_generalized(ordered, config, law, envelope_over(cached_envelope(law)),
                                  exact_at(law));
}

OrderedSequentialDetector::OrderedSequentialDetector(const ScenarioConfig& config, const LlrLaw& law)
    : config_(config), law_(law), envelope_(law) {
    config_.validate();
}

StageThresholds OrderedSequentialDetector::thresholds(int k, double y_k) const {
    return stage_thresholds(k, y_k, config_, envelope_over(envelope_));
}

DecisionOutcome OrderedSequentialDetector::run(std::span<const double> ordered) const {
    return sequential(
        ordered, config_, [this](double a, bool) { return envelope_.over(a); },
        [this](double a) { return envelope_.at(a); });
}

DecisionOutcome OrderedSequentialDetector::run_generalized(std::span<const double> ordered) const {
    return sequential_generalized(
        ordered, config_, law_, [this](double a, bool) { return envelope_.over(a); },
        [this](double a) { return envelope_.at(a); });
}

Hypothesis OrderedSequentialDetector::block_decision(std::span<const double> ordered_top_k) const {
    return map_block_decision(ordered_top_k, config_, law_);
}

} // namespace ordfuse
