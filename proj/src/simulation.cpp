#include "ordfuse/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "ordfuse/errors.hpp"

namespace ordfuse {

std::string detector_name(DetectorKind kind) {
    switch (kind) {
    case DetectorKind::BS: return "bs";
    case DetectorKind::BSGeneralized: return "bs-generalized";
    case DetectorKind::DP: return "dp";
    case DetectorKind::OneThreshold: return "one-threshold";
    case DetectorKind::BlockMAP: return "block-map";
    case DetectorKind::Genie: return "genie";
    case DetectorKind::PriorOnly: return "prior-only";
    }
    return "?";
}

SimMetrics::SimMetrics(const ScenarioConfig& config, const CostModel& costs)
    : K_(config.K),
      tau_s_(config.tau_s),
      tau_N_(config.tau_N),
      tau_(config.tau),
      R_s_(costs.R_s),
      R_p_(costs.R_p),
      eta_s_(costs.eta_s),
      eta_p_(costs.eta_p),
      delta_s_(costs.delta_s),
      delta_p_(costs.delta_p),
      counts_(static_cast<std::size_t>(config.K + 1) * 4, 0) {}

std::size_t SimMetrics::index(int stage, Hypothesis declared, Hypothesis truth) const {
    require(stage >= 0 && stage <= K_, "stage out of range");
    return static_cast<std::size_t>(stage) * 4 + index_of(declared) * 2 + index_of(truth);
}

void SimMetrics::record(const DecisionOutcome& outcome, Hypothesis truth) {
    ++counts_[index(outcome.stage, outcome.declared, truth)];
    ++trials_;
    if (outcome.prior_only) ++prior_only_;
}

void SimMetrics::merge(const SimMetrics& other) {
    require(other.counts_.size() == counts_.size(), "merging metrics of different horizons");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    trials_ += other.trials_;
    prior_only_ += other.prior_only_;
}

long SimMetrics::count(int stage, Hypothesis declared, Hypothesis truth) const {
    return counts_[index(stage, declared, truth)];
}

long SimMetrics::confusion(Hypothesis declared, Hypothesis truth) const {
    long n = 0;
    for (int k = 0; k <= K_; ++k) n += count(k, declared, truth);
    return n;
}

std::vector<long> SimMetrics::stage_histogram() const {
    std::vector<long> h(K_ + 1, 0);
    for (int k = 0; k <= K_; ++k)
        for (int i = 0; i < 4; ++i) h[k] += counts_[static_cast<std::size_t>(k) * 4 + i];
    return h;
}

template <class F>
std::pair<double, double> SimMetrics::moments(F value) const {
    if (trials_ == 0) return {0.0, 0.0};
    double s1 = 0.0, s2 = 0.0;
    for (int k = 0; k <= K_; ++k) {
        for (auto d : {Hypothesis::H0, Hypothesis::H1}) {
            for (auto t : {Hypothesis::H0, Hypothesis::H1}) {
                const long n = count(k, d, t);
                if (n == 0) continue;
                const double v = value(k, d, t);
                s1 += n * v;
                s2 += n * v * v;
            }
        }
    }
    const double mean = s1 / trials_;
    const double var = std::max(0.0, s2 / trials_ - mean * mean);
    return {mean, std::sqrt(var / trials_)};
}

double SimMetrics::p_error() const {
    return moments([](int, Hypothesis d, Hypothesis t) { return d != t ? 1.0 : 0.0; }).first;
}

double SimMetrics::p_error_stderr() const {
    const double p = p_error();
    return trials_ ? std::sqrt(p * (1 - p) / trials_) : 0.0;
}

double SimMetrics::avg_stage() const {
    return moments([](int k, Hypothesis, Hypothesis) { return static_cast<double>(k); }).first;
}

double SimMetrics::avg_stage_stderr() const {
    return moments([](int k, Hypothesis, Hypothesis) { return static_cast<double>(k); }).second;
}

double SimMetrics::avg_sensing_time() const { return tau_N_ + tau_ * avg_stage(); }

double SimMetrics::secondary_value(int stage, Hypothesis declared, Hypothesis truth) const {
    if (declared != Hypothesis::H0) return 0.0;
    const double success = truth == Hypothesis::H0 ? eta_s_ : delta_s_;
    return success * R_s_ * (1.0 - (tau_N_ + stage * tau_) / tau_s_);
}

double SimMetrics::primary_value(Hypothesis declared, Hypothesis truth) const {
    if (truth != Hypothesis::H1) return 0.0;
    return (declared == Hypothesis::H1 ? eta_p_ : delta_p_) * R_p_;
}

double SimMetrics::norm_throughput_secondary() const {
    return moments([this](int k, Hypothesis d, Hypothesis t) { return secondary_value(k, d, t); }).first;
}

double SimMetrics::norm_throughput_secondary_stderr() const {
    return moments([this](int k, Hypothesis d, Hypothesis t) { return secondary_value(k, d, t); })
        .second;
}

double SimMetrics::norm_throughput_primary() const {
    return moments([this](int, Hypothesis d, Hypothesis t) { return primary_value(d, t); }).first;
}

double SimMetrics::norm_throughput_primary_stderr() const {
    return moments([this](int, Hypothesis d, Hypothesis t) { return primary_value(d, t); }).second;
}

SlotDetector::SlotDetector(const ScenarioConfig& config, const DetectorChoice& choice)
    : config_(config), choice_(choice) {
    config_.validate();
    switch (choice.kind) {
    case DetectorKind::BS:
    case DetectorKind::BSGeneralized:
    case DetectorKind::BlockMAP:
        require(config.identical_sensors(),
                "the ordered sequential detector needs identically distributed sensors");
        bs_.emplace(config_, sensor_law(config_, 0));
        break;
    case DetectorKind::DP:
        ensemble_.emplace(SensorEnsemble::from_config(config_));
        policy_ = std::make_shared<PolicyTable>(
            solve_backward(config_, choice.costs, *ensemble_, choice.solver));
        break;
    case DetectorKind::OneThreshold:
        ensemble_.emplace(SensorEnsemble::from_config(config_));
        policy_ = std::make_shared<PolicyTable>(
            solve_one_threshold(config_, choice.costs, *ensemble_, choice.solver));
        break;
    case DetectorKind::Genie:
    case DetectorKind::PriorOnly:
        break;
    }
}

DecisionOutcome SlotDetector::decide(const SlotRealization& slot) const {
    std::vector<double> values = slot.ordered_values();
    switch (choice_.kind) {
    case DetectorKind::BS: return bs_->run(values);
    case DetectorKind::BSGeneralized: return bs_->run_generalized(values);
    case DetectorKind::BlockMAP: return make_outcome(bs_->block_decision(values), config_.K, config_);
    case DetectorKind::DP:
    case DetectorKind::OneThreshold: return run_policy(values, *policy_, *ensemble_, config_);
    case DetectorKind::Genie: return make_outcome(slot.truth, 1, config_);
    case DetectorKind::PriorOnly: return prior_only_decision(config_);
    }
    return {};
}

namespace {

constexpr long kChunk = 2048;

// Detectors for the participant sets seen so far, shared by all workers.
class DetectorCache {
public:
    DetectorCache(const ScenarioConfig& config, const DetectorChoice& choice)
        : config_(config), choice_(choice) {}

    std::shared_ptr<const SlotDetector> get(const std::vector<int>& participants) {
        std::lock_guard lock(mutex_);
        auto it = cache_.find(participants);
        if (it != cache_.end()) return it->second;
        auto det = std::make_shared<const SlotDetector>(effective_config(config_, participants), choice_);
        cache_.emplace(participants, det);
        return det;
    }

private:
    ScenarioConfig config_;
    DetectorChoice choice_;
    std::mutex mutex_;
    std::map<std::vector<int>, std::shared_ptr<const SlotDetector>> cache_;
};

Hypothesis draw_truth(double pi0, RandomStream& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    return unit(rng) < pi0 ? Hypothesis::H0 : Hypothesis::H1;
}

// Identical sensors give the same detector for every participant set of a given
// size, so the cache key can drop the sensor identities.
std::vector<int> cache_key(const ScenarioConfig& config, const std::vector<int>& participants) {
    if (!config.identical_sensors()) return participants;
    std::vector<int> key(participants.size());
    for (std::size_t i = 0; i < key.size(); ++i) key[i] = static_cast<int>(i);
    return key;
}

} // namespace

SimMetrics run_monte_carlo(const ScenarioConfig& config, const DetectorChoice& detector, long trials,
                           std::uint64_t seed, const MonteCarloOptions& options) {
    require(trials >= 1, "trials must be at least 1");
    config.validate();
    if (options.fading) options.fading->validate(config.tau);

    std::shared_ptr<const SlotDetector> full;
    std::optional<DetectorCache> cache;
    if (options.fading) cache.emplace(config, detector);
    else full = std::make_shared<const SlotDetector>(config, detector);

    unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
    const long chunks = (trials + kChunk - 1) / kChunk;
    threads = static_cast<unsigned>(std::clamp<long>(threads, 1, chunks));

    std::atomic<long> next{0};
    std::vector<SimMetrics> partial(threads, SimMetrics(config, detector.costs));
    std::vector<std::exception_ptr> errors(threads);

    auto worker = [&](unsigned w) {
        try {
            SimMetrics& metrics = partial[w];
            SlotRealization slot;
            std::optional<SlotSampler> sampler;
            if (full) sampler.emplace(config);
            std::map<int, SlotSampler> samplers;  // by participant count
            long period = -1;
            std::vector<int> participants;
            std::shared_ptr<const SlotDetector> det = full;
            for (long c = next++; c < chunks; c = next++) {
                const long end = std::min(trials, (c + 1) * kChunk);
                for (long q = c * kChunk; q < end; ++q) {
                    RandomStream rng = slot_stream(seed, static_cast<std::uint64_t>(q));
                    if (!options.fading) {
                        sampler->draw(rng, slot);
                        metrics.record(det->decide(slot), slot.truth);
                        continue;
                    }
                    const FadingConfig& fading = *options.fading;
                    if (q / fading.T_c != period) {
                        period = q / fading.T_c;
                        RandomStream prng =
                            slot_stream(seed, static_cast<std::uint64_t>(period), kParticipantDomain);
                        participants = sample_participants(fading, config.M, prng);
                        if (!participants.empty()) det = cache->get(cache_key(config, participants));
                    }
                    if (participants.empty()) {
                        metrics.record(prior_only_decision(config), draw_truth(config.pi0, rng));
                        continue;
                    }
                    const ScenarioConfig eff = effective_config(config, participants);
                    auto it = samplers.find(eff.M);
                    if (it == samplers.end() || !config.identical_sensors()) {
                        samplers.erase(eff.M);
                        it = samplers.emplace(eff.M, SlotSampler(eff)).first;
                    }
                    it->second.draw(rng, slot);
                    metrics.record(det->decide(slot), slot.truth);
                }
            }
        } catch (...) {
            errors[w] = std::current_exception();
            next = chunks;
        }
    };

    std::vector<std::thread> pool;
    for (unsigned w = 1; w < threads; ++w) pool.emplace_back(worker, w);
    worker(0);
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    SimMetrics total(config, detector.costs);
    for (const auto& p : partial) total.merge(p);
    return total;
}

AgreementReport compare_with_block_oracle(const ScenarioConfig& config, long trials,
                                          std::uint64_t seed, bool generalized) {
    require(trials >= 1, "trials must be at least 1");
    require(config.identical_sensors(), "block comparison needs identically distributed sensors");
    const OrderedSequentialDetector det(config, sensor_law(config, 0));
    SlotSampler sampler(config);
    SlotRealization slot;
    AgreementReport report;
    for (long q = 0; q < trials; ++q) {
        RandomStream rng = slot_stream(seed, static_cast<std::uint64_t>(q));
        sampler.draw(rng, slot);
        const std::vector<double> values = slot.ordered_values();
        const DecisionOutcome seq = generalized ? det.run_generalized(values) : det.run(values);
        const Hypothesis block = det.block_decision(values);
        ++report.trials;
        if (seq.declared == block) {
            ++report.agreements;
        } else if (!report.first_disagreement) {
            std::ostringstream out;
            out.precision(17);
            out << "slot " << q << ": sequential declared H" << index_of(seq.declared) << " at stage "
                << seq.stage << ", block rule H" << index_of(block) << "; ordered reports";
            for (double v : values) out << ' ' << v;
            report.first_disagreement = out.str();
        }
    }
    return report;
}

std::vector<SweepRow> sweep(SweepAxis axis, const std::vector<double>& values,
                            const ScenarioConfig& base, const DetectorChoice& detector, long trials,
                            std::uint64_t seed, const MonteCarloOptions& options) {
    require(!values.empty(), "sweep needs at least one value");
    std::vector<SweepRow> rows;
    for (double v : values) {
        ScenarioConfig config = base;
        DetectorChoice choice = detector;
        switch (axis) {
        case SweepAxis::M:
            config = with_sensor_count(base, static_cast<int>(v));
            config.K = std::min(base.K, config.M);
            break;
        case SweepAxis::K: config.K = static_cast<int>(v); break;
        case SweepAxis::c: choice.costs.c = v; break;
        case SweepAxis::sigma2_s: config.sigma2_s.assign(config.M, v); break;
        case SweepAxis::omega: choice.costs.omega = v; break;
        }
        rows.push_back({v, config, run_monte_carlo(config, choice, trials, seed, options)});
    }
    return rows;
}

} // namespace ordfuse
