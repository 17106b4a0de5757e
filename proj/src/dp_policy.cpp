#include "ordfuse/dp_policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ordfuse/errors.hpp"
#include "ordfuse/kernels.hpp"
#include "ordfuse/quadrature.hpp"

namespace ordfuse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Quadrature weights of the rank-r density under each hypothesis, normalised so
// that each set sums to one.
struct RankWeights {
    std::vector<double> w0, w1;
    std::size_t nodes = 0;
};

RankWeights rank_weights(int rank, const SensorEnsemble& ens) {
    const int M = ens.size();
    const double tail = 1e-13 / M;
    double lower = kInf, upper = -kInf;
    std::vector<double> breaks;
    for (const auto& law : ens.laws()) {
        lower = std::min(lower, law.lower_cap(tail));
        upper = std::max(upper, law.upper_cap(tail));
        for (double b : law.breakpoints()) breaks.push_back(b);
    }
    breaks.erase(std::remove_if(breaks.begin(), breaks.end(),
                                [&](double b) { return b <= lower || b >= upper; }),
                 breaks.end());
    breaks.push_back(lower);
    breaks.push_back(upper);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    auto both = [&](double y) {
        return ranked_pdf(rank, y, Hypothesis::H0, ens) + ranked_pdf(rank, y, Hypothesis::H1, ens);
    };
    AdaptiveOptions opt;
    opt.max_width = (upper - lower) / 512.0;
    bool converged = true;
    const NodeSet nodes = adaptive_nodes(both, breaks, opt, &converged);

    RankWeights rw;
    rw.nodes = nodes.size();
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
        rw.w0.push_back(nodes.w[q] * ranked_pdf(rank, nodes.x[q], Hypothesis::H0, ens));
        rw.w1.push_back(nodes.w[q] * ranked_pdf(rank, nodes.x[q], Hypothesis::H1, ens));
        s0 += rw.w0.back();
        s1 += rw.w1.back();
    }
    if (std::fabs(s0 - 1.0) > 1e-6 || std::fabs(s1 - 1.0) > 1e-6 || !std::isfinite(s0 + s1)) {
        std::ostringstream msg;
        msg << "quadrature of the rank-" << rank << " density did not converge: masses " << s0
            << " (H0), " << s1 << " (H1) over [" << lower << ", " << upper << "] with "
            << nodes.size() << " nodes" << (converged ? "" : ", depth limit reached");
        throw SolverError(msg.str());
    }
    for (auto& v : rw.w0) v /= s0;
    for (auto& v : rw.w1) v /= s1;
    return rw;
}

struct Choice {
    Action action;
    double value;
};

Choice choose(double stop0, double stop1, double cont, bool allow_h1, bool allow_cont, double tol) {
    double best = stop0;
    if (allow_h1) best = std::min(best, stop1);
    if (allow_cont) best = std::min(best, cont);
    const double slack = tol * std::max(1.0, std::fabs(best));
    if (allow_cont && cont <= best + slack) return {Action::Continue, cont};
    if (stop0 <= best + slack) return {Action::DeclareH0, stop0};
    return {Action::DeclareH1, stop1};
}

// Thresholds sit where the cost lines of the two actions meet inside the
// boundary cell; stop costs are linear in pi and the continuation cost is
// interpolated, so the crossing is exact for the interpolated problem.
template <class Cost>
void extract_thresholds(StagePolicy& s, const std::vector<double>& grid, Cost cost) {
    const std::size_t n = grid.size();
    auto crossing = [&](std::size_t a, std::size_t b, Action keep, Action stop) {
        const double da = cost(a, keep) - cost(a, stop);
        const double db = cost(b, keep) - cost(b, stop);
        const double t = da == db ? 1.0 : std::clamp(da / (da - db), 0.0, 1.0);
        return grid[a] + t * (grid[b] - grid[a]);
    };
    std::size_t i = 0;
    while (i < n && s.action[i] == Action::DeclareH1) ++i;
    if (i == 0) s.pi_low = 0.0;
    else if (i == n) s.pi_low = kInf;
    else s.pi_low = crossing(i - 1, i, Action::DeclareH1, s.action[i]);
    std::ptrdiff_t j = static_cast<std::ptrdiff_t>(n) - 1;
    while (j >= 0 && s.action[j] == Action::DeclareH0) --j;
    if (j == static_cast<std::ptrdiff_t>(n) - 1) s.pi_high = kInf;
    else if (j < 0) s.pi_high = 0.0;
    else s.pi_high = crossing(j, j + 1, s.action[j], Action::DeclareH0);
}

PolicyTable solve(const ScenarioConfig& config, const CostModel& costs, const SensorEnsemble& ens,
                  const SolverOptions& options, bool one_threshold) {
    config.validate();
    costs.validate();
    require(options.grid_size >= 101, "belief grid needs at least 101 points");
    require(ens.size() == config.M, "ensemble size must equal M");
    const int K = config.K;
    const std::size_t n = options.grid_size;

    PolicyTable table;
    table.K = K;
    table.one_threshold = one_threshold;
    table.grid.resize(n);
    for (std::size_t i = 0; i < n; ++i) table.grid[i] = static_cast<double>(i) / (n - 1);
    table.stages.resize(K);

    auto stop_costs = [&](int k, double pi) {
        const double s0 = decision_cost(k, Hypothesis::H0, Hypothesis::H0, costs, config) * pi +
                          decision_cost(k, Hypothesis::H0, Hypothesis::H1, costs, config) * (1 - pi);
        const double s1 = decision_cost(k, Hypothesis::H1, Hypothesis::H0, costs, config) * pi +
                          decision_cost(k, Hypothesis::H1, Hypothesis::H1, costs, config) * (1 - pi);
        return std::pair{s0, s1};
    };

    std::vector<double> psi(n);
    for (int k = K; k >= 1; --k) {
        StagePolicy& s = table.stages[k - 1];
        s.value.resize(n);
        s.action.resize(n);
        const bool last = k == K;
        if (!last) {
            const RankWeights rw = rank_weights(k + 1, ens);
            kernels::continuation_expectation(table.grid.data(), n, rw.w0.data(), rw.w1.data(),
                                              rw.w0.size(), table.stages[k].value.data(), n,
                                              psi.data());
        }
        for (std::size_t i = 0; i < n; ++i) {
            const auto [s0, s1] = stop_costs(k, table.grid[i]);
            const Choice ch = choose(s0, s1, last ? 0.0 : costs.c + psi[i], last || !one_threshold,
                                     !last, options.tie_tolerance);
            s.value[i] = ch.value;
            s.action[i] = ch.action;
        }
        extract_thresholds(s, table.grid, [&](std::size_t i, Action a) {
            const auto [s0, s1] = stop_costs(k, table.grid[i]);
            if (a == Action::DeclareH0) return s0;
            if (a == Action::DeclareH1) return s1;
            return costs.c + psi[i];
        });
    }
    return table;
}

void densities(double y, int rank, const SensorEnsemble& ens, double& f0, double& f1) {
    f0 = ranked_pdf(rank, y, Hypothesis::H0, ens);
    f1 = ranked_pdf(rank, y, Hypothesis::H1, ens);
}

double bayes(double pi, double f0, double f1) {
    if (!(f0 > 0.0) && !(f1 > 0.0))
        throw UndefinedConditionalError("posterior update with zero likelihood under both hypotheses");
    if (pi == 0.0 || pi == 1.0) return pi;
    const double num = pi * f0;
    return num / (num + (1.0 - pi) * f1);
}

} // namespace

const StagePolicy& PolicyTable::stage(int k) const {
    require(k >= 1 && k <= K, "stage out of range");
    return stages[k - 1];
}

Action PolicyTable::action_at(int k, double pi) const {
    const StagePolicy& s = stage(k);
    if (pi >= s.pi_high) return Action::DeclareH0;
    if (k == K) return Action::DeclareH1;
    if (pi < s.pi_low) return Action::DeclareH1;
    return Action::Continue;
}

double PolicyTable::value_at(int k, double pi) const {
    const StagePolicy& s = stage(k);
    require(pi >= 0.0 && pi <= 1.0, "belief must lie in [0, 1]");
    const double idx = pi * (grid.size() - 1);
    const std::size_t i = std::min(static_cast<std::size_t>(idx), grid.size() - 2);
    const double t = idx - i;
    return s.value[i] + t * (s.value[i + 1] - s.value[i]);
}

double posterior_update(double pi, double y, int k, const SensorEnsemble& ensemble) {
    require(pi >= 0.0 && pi <= 1.0, "belief must lie in [0, 1]");
    require(k >= 0 && k < ensemble.size(), "stage out of range");
    double f0, f1;
    densities(y, k + 1, ensemble, f0, f1);
    return bayes(pi, f0, f1);
}

double posterior_update_exact(double pi, double y_prev, double y, int k,
                              const SensorEnsemble& ensemble) {
    if (k == 0) return posterior_update(pi, y, 0, ensemble);
    require(pi >= 0.0 && pi <= 1.0, "belief must lie in [0, 1]");
    require(k >= 1 && k < ensemble.size(), "stage out of range");
    const double f0 = conditional_pdf(k + 1, y, y_prev, Hypothesis::H0, ensemble);
    const double f1 = conditional_pdf(k + 1, y, y_prev, Hypothesis::H1, ensemble);
    return bayes(pi, f0, f1);
}

PolicyTable solve_backward(const ScenarioConfig& config, const CostModel& costs,
                           const SensorEnsemble& ensemble, const SolverOptions& options) {
    return solve(config, costs, ensemble, options, false);
}

PolicyTable solve_one_threshold(const ScenarioConfig& config, const CostModel& costs,
                                const SensorEnsemble& ensemble, const SolverOptions& options) {
    require(costs.mode == CostMode::WeightedThroughput && costs.zero_overheads(),
            "one-threshold solve needs throughput costs with c = 0 and no e, L or P terms");
    return solve(config, costs, ensemble, options, true);
}

DecisionOutcome run_policy(std::span<const double> ordered, const PolicyTable& policy,
                           const SensorEnsemble& ensemble, const ScenarioConfig& config) {
    require(policy.K == config.K, "policy was solved for a different K");
    require(static_cast<int>(ordered.size()) >= config.K, "policy needs at least K ordered reports");
    double pi = config.pi0;
    for (int k = 1; k <= config.K; ++k) {
        pi = posterior_update(pi, ordered[k - 1], k - 1, ensemble);
        const Action a = policy.action_at(k, pi);
        if (a == Action::DeclareH0) return make_outcome(Hypothesis::H0, k, config);
        if (a == Action::DeclareH1) return make_outcome(Hypothesis::H1, k, config);
    }
    return {};  // stage K always declares
}

bool concavity_check(const PolicyTable& policy) {
    for (const auto& s : policy.stages) {
        const auto [lo, hi] = std::minmax_element(s.value.begin(), s.value.end());
        const double tol = 1e-9 * (*hi - *lo);
        for (std::size_t i = 1; i + 1 < s.value.size(); ++i) {
            if (s.value[i] < 0.5 * (s.value[i - 1] + s.value[i + 1]) - tol) return false;
        }
    }
    return true;
}

double belief_to_llr(double pi, double pi0) {
    return std::log(pi0 / (1.0 - pi0)) + std::log((1.0 - pi) / pi);
}

std::string action_name(Action a) {
    switch (a) {
    case Action::DeclareH0: return "H0";
    case Action::DeclareH1: return "H1";
    case Action::Continue: return "C";
    }
    return "?";
}

void save_policy(const PolicyTable& policy, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write policy file " + path);
    std::fprintf(f, "ordfuse-policy 1\n");
    std::fprintf(f, "K %d\ngrid %zu\none_threshold %d\n", policy.K, policy.grid.size(),
                 policy.one_threshold ? 1 : 0);
    for (int k = 1; k <= policy.K; ++k) {
        const StagePolicy& s = policy.stage(k);
        std::fprintf(f, "stage %d %.17g %.17g\n", k, s.pi_low, s.pi_high);
        for (std::size_t i = 0; i < s.value.size(); ++i)
            std::fprintf(f, "%.17g %s\n", s.value[i], action_name(s.action[i]).c_str());
    }
    const bool ok = std::fclose(f) == 0;
    if (!ok) throw std::runtime_error("failed writing policy file " + path);
}

PolicyTable load_policy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read policy file " + path);
    auto fail = [&](const std::string& what) {
        throw std::runtime_error("malformed policy file " + path + ": " + what);
    };
    std::string tag, word;
    int version = 0;
    if (!(in >> tag >> version) || tag != "ordfuse-policy" || version != 1) fail("bad header");
    PolicyTable t;
    std::size_t n = 0;
    int one = 0;
    if (!(in >> word >> t.K) || word != "K" || t.K < 1) fail("K");
    if (!(in >> word >> n) || word != "grid" || n < 2) fail("grid");
    if (!(in >> word >> one) || word != "one_threshold") fail("one_threshold");
    t.one_threshold = one != 0;
    t.grid.resize(n);
    for (std::size_t i = 0; i < n; ++i) t.grid[i] = static_cast<double>(i) / (n - 1);
    t.stages.resize(t.K);
    auto number = [&](double& v) {
        std::string s;
        if (!(in >> s)) fail("truncated");
        char* end = nullptr;
        v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0') fail("bad number '" + s + "'");
    };
    for (int k = 1; k <= t.K; ++k) {
        int idx = 0;
        if (!(in >> word >> idx) || word != "stage" || idx != k) fail("stage header");
        StagePolicy& s = t.stages[k - 1];
        number(s.pi_low);
        number(s.pi_high);
        s.value.resize(n);
        s.action.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            number(s.value[i]);
            if (!(in >> word)) fail("truncated");
            if (word == "H0") s.action[i] = Action::DeclareH0;
            else if (word == "H1") s.action[i] = Action::DeclareH1;
            else if (word == "C") s.action[i] = Action::Continue;
            else fail("bad action '" + word + "'");
        }
    }
    return t;
}

} // namespace ordfuse
