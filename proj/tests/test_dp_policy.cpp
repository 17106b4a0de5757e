#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include <boost/math/tools/roots.hpp>

#include "ordfuse/dp_policy.hpp"
#include "ordfuse/errors.hpp"
#include "ordfuse/sensing_model.hpp"
#include "support.hpp"

using namespace ordfuse;

namespace {

CostModel throughput(double c = 0.0) {
    CostModel m;
    m.mode = CostMode::WeightedThroughput;
    m.c = c;
    return m;
}

CostModel error_min(double c) {
    CostModel m;
    m.c = c;
    return m;
}

const ScenarioConfig kDefault;

const SensorEnsemble& default_ensemble() {
    static const SensorEnsemble ens = SensorEnsemble::from_config(kDefault);
    return ens;
}

} // namespace

TEST_CASE("decision costs") {
    const ScenarioConfig c;
    CostModel m = throughput(1e-4);
    CHECK(decision_cost(1, Hypothesis::H0, Hypothesis::H0, m, c) == doctest::Approx(-0.35));
    CHECK(decision_cost(8, Hypothesis::H0, Hypothesis::H0, m, c) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(decision_cost(1, Hypothesis::H1, Hypothesis::H1, m, c) == doctest::Approx(-0.5));
    CHECK(decision_cost(1, Hypothesis::H1, Hypothesis::H0, m, c) == 0.0);
    CHECK(decision_cost(1, Hypothesis::H0, Hypothesis::H1, m, c) == 0.0);
    m.delta_p = 0.2;
    m.delta_s = 0.4;
    m.e_pt = 0.01;
    m.e_st = 0.02;
    m.P_col = 0.3;
    m.L_f = 0.05;
    m.L_b = 0.07;
    const double f = 0.7;
    CHECK(decision_cost(1, Hypothesis::H0, Hypothesis::H0, m, c) == doctest::Approx(-0.5 * f + 0.02 * f));
    CHECK(decision_cost(1, Hypothesis::H0, Hypothesis::H1, m, c) ==
          doctest::Approx(-0.5 * 0.2 - 0.5 * 0.4 * f + 0.01 + 0.02 * f + 0.3));
    CHECK(decision_cost(1, Hypothesis::H1, Hypothesis::H0, m, c) == doctest::Approx(0.05));
    CHECK(decision_cost(1, Hypothesis::H1, Hypothesis::H1, m, c) == doctest::Approx(-0.5 + 0.01 + 0.07));

    const CostModel e = error_min(0.0);
    CHECK(decision_cost(3, Hypothesis::H0, Hypothesis::H0, e, c) == 0.0);
    CHECK(decision_cost(3, Hypothesis::H1, Hypothesis::H0, e, c) == 1.0);
    CHECK(decision_cost(3, Hypothesis::H0, Hypothesis::H1, e, c) == 1.0);
}

TEST_CASE("cost validation") {
    CostModel m;
    CHECK_NOTHROW(m.validate());
    m.omega = 1.5;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m = CostModel{};
    m.c = -1;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    CHECK(throughput(0.0).zero_overheads());
    CHECK_FALSE(throughput(1e-4).zero_overheads());
}

TEST_CASE("posterior update") {
    const auto& ens = default_ensemble();
    CHECK(posterior_update(0.0, 1.3, 0, ens) == 0.0);
    CHECK(posterior_update(1.0, 1.3, 4, ens) == 1.0);
    CHECK(posterior_update(0.5, 6.0, 0, ens) < 0.5);
    // where the rank-1 densities cross, the belief does not move
    auto diff = [&](double y) {
        return ranked_pdf(1, y, Hypothesis::H0, ens) - ranked_pdf(1, y, Hypothesis::H1, ens);
    };
    std::uintmax_t iters = 100;
    const auto [lo, hi] = boost::math::tools::toms748_solve(
        diff, 0.8, 4.0, boost::math::tools::eps_tolerance<double>(50), iters);
    const double y = 0.5 * (lo + hi);
    CHECK(posterior_update(0.3, y, 0, ens) == doctest::Approx(0.3).epsilon(1e-9));
    CHECK_THROWS_AS(posterior_update(0.5, -10.0, 0, ens), UndefinedConditionalError);
    CHECK_THROWS_AS(posterior_update(1.5, 0.0, 0, ens), ContractError);
}

TEST_CASE("exact belief chain equals Bayes on the joint density") {
    for (auto [M, K] : {std::pair{3, 3}, {10, 8}}) {
        ScenarioConfig c;
        c.M = M;
        c.K = K;
        c.sigma2_s.assign(M, 2.0);
        const LlrLaw law = sensor_law(c, 0);
        const SensorEnsemble ens = SensorEnsemble::from_config(c);
        SlotSampler sampler(c);
        RandomStream rng(40 + M);
        SlotRealization slot;
        for (int s = 0; s < 200; ++s) {
            sampler.draw(rng, slot);
            const auto y = slot.ordered_values();
            double pi = c.pi0;
            for (int k = 0; k < K; ++k) pi = posterior_update_exact(pi, k ? y[k - 1] : 0.0, y[k], k, ens);
            double j0 = 1, j1 = 1;
            for (int k = 0; k < K; ++k) j0 *= law.pdf(y[k], Hypothesis::H0), j1 *= law.pdf(y[k], Hypothesis::H1);
            const double a = std::fabs(y[K - 1]);
            j0 *= std::pow(law.central_mass(a, Hypothesis::H0), M - K);
            j1 *= std::pow(law.central_mass(a, Hypothesis::H1), M - K);
            const double bayes = c.pi0 * j0 / (c.pi0 * j0 + (1 - c.pi0) * j1);
            CHECK(std::fabs(pi - bayes) < 1e-10);
        }
    }
}

TEST_CASE("first exact update equals the unconditional update") {
    const auto& ens = default_ensemble();
    for (double y : {-1.0, 0.3, 2.0}) CHECK(posterior_update_exact(0.4, 99.0, y, 0, ens) == posterior_update(0.4, y, 0, ens));
}

TEST_CASE("error-minimizing policy") {
    const auto& ens = default_ensemble();
    const PolicyTable t = solve_backward(kDefault, error_min(1e-4), ens);
    REQUIRE(t.grid.size() == 1001);
    const auto& last = t.stage(kDefault.K);
    for (std::size_t i = 0; i < t.grid.size(); ++i) {
        CHECK(last.value[i] == doctest::Approx(std::min(t.grid[i], 1 - t.grid[i])).epsilon(1e-15));
        CHECK(last.action[i] != Action::Continue);
    }
    for (int k = 1; k <= t.K; ++k) {
        const auto& s = t.stage(k);
        for (std::size_t i = 0; i < t.grid.size(); ++i)
            CHECK(s.value[i] <= std::min(t.grid[i], 1 - t.grid[i]) + 1e-15);
    }
    CHECK(concavity_check(t));
    CHECK(t.action_at(1, 1.0) == Action::DeclareH0);
    CHECK(t.action_at(1, 0.0) == Action::DeclareH1);
    CHECK(t.action_at(1, 0.5) == Action::Continue);
}

TEST_CASE("expensive reports stop at the first stage") {
    const auto& ens = default_ensemble();
    const PolicyTable t = solve_backward(kDefault, error_min(0.5), ens);
    for (auto a : t.stage(1).action) CHECK(a != Action::Continue);
    SlotSampler sampler(kDefault);
    RandomStream rng(3);
    for (int s = 0; s < 100; ++s) {
        const auto slot = sampler.draw(rng);
        CHECK(run_policy(slot.ordered_values(), t, ens, kDefault).stage == 1);
    }
}

TEST_CASE("throughput policy without overheads never declares busy early") {
    const auto& ens = default_ensemble();
    const PolicyTable t = solve_backward(kDefault, throughput(0.0), ens);
    for (int k = 1; k < kDefault.K; ++k) CHECK(t.stage(k).pi_low == 0.0);
    for (int k = 1; k <= kDefault.K; ++k) CHECK(t.stage(k).value[0] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(concavity_check(t));

    const PolicyTable one = solve_one_threshold(kDefault, throughput(0.0), ens);
    CHECK(one.one_threshold);
    for (int k = 1; k <= kDefault.K; ++k) {
        CHECK(one.stage(k).action == t.stage(k).action);
        CHECK(one.stage(k).value == t.stage(k).value);
    }
    CHECK_THROWS_AS(solve_one_threshold(kDefault, throughput(1e-4), ens), ContractError);
    CHECK_THROWS_AS(solve_one_threshold(kDefault, error_min(0.0), ens), ContractError);
}

TEST_CASE("value function satisfies the Bellman equation under an independent quadrature") {
    const auto& ens = default_ensemble();
    const CostModel costs = throughput(1e-3);
    const PolicyTable t = solve_backward(kDefault, costs, ens);
    const LlrLaw& law = ens.law(0);
    int checked = 0;
    for (int k : {1, 4, 7}) {
        const auto& s = t.stage(k);
        for (std::size_t i = 50; i < t.grid.size(); i += 150) {
            if (s.action[i] != Action::Continue) continue;
            const double pi = t.grid[i];
            auto f = [&](double y) {
                const double f0 = ranked_pdf(k + 1, y, Hypothesis::H0, ens);
                const double f1 = ranked_pdf(k + 1, y, Hypothesis::H1, ens);
                const double mass = pi * f0 + (1 - pi) * f1;
                return mass > 0 ? mass * t.value_at(k + 1, pi * f0 / mass) : 0.0;
            };
            // composite Simpson on a fine uniform mesh: the interpolated J has kinks
            // at every grid crossing, which a fixed fine mesh handles predictably
            auto simpson = [&](double a, double b) {
                const int n = 40000;
                const double h = (b - a) / n;
                double acc = f(a) + f(b);
                for (int j = 1; j < n; ++j) acc += f(a + j * h) * (j % 2 ? 4 : 2);
                return acc * h / 3;
            };
            const double b = law.shift(), hi = law.upper_cap(1e-16);
            const double psi = simpson(-b, 0.0) + simpson(0.0, b) + simpson(b, hi);
            CHECK(std::fabs(s.value[i] - (costs.c + psi)) < 1e-6);
            ++checked;
        }
    }
    CHECK(checked >= 6);
}

TEST_CASE("concavity check rejects a corrupted table") {
    const auto& ens = default_ensemble();
    PolicyTable t = solve_backward(kDefault, throughput(1e-4), ens);
    CHECK(concavity_check(t));
    t.stages[2].value[500] -= 0.05;
    CHECK_FALSE(concavity_check(t));
}

TEST_CASE("thresholds are stable under grid refinement") {
    const auto& ens = default_ensemble();
    const PolicyTable coarse = solve_backward(kDefault, error_min(1e-3), ens);
    SolverOptions fine_opt;
    fine_opt.grid_size = 2001;
    const PolicyTable fine = solve_backward(kDefault, error_min(1e-3), ens, fine_opt);
    for (int k = 1; k <= kDefault.K; ++k) {
        const auto& a = coarse.stage(k);
        const auto& b = fine.stage(k);
        if (std::isfinite(a.pi_low) && std::isfinite(b.pi_low)) CHECK(std::fabs(a.pi_low - b.pi_low) <= 2e-3);
        if (std::isfinite(a.pi_high) && std::isfinite(b.pi_high)) CHECK(std::fabs(a.pi_high - b.pi_high) <= 2e-3);
        // interpolation error is first order in the grid step where J has a kink
        for (double pi = 0; pi <= 1; pi += 0.01)
            CHECK(std::fabs(coarse.value_at(k, pi) - fine.value_at(k, pi)) < 2e-4);
    }
}

TEST_CASE("error-min thresholds resolve inside a grid cell") {
    // continuing costs at least c, so beliefs within c of certainty must stop
    for (int M : {10, 20}) {
        const ScenarioConfig config = with_sensor_count(kDefault, M);
        const SensorEnsemble ens = SensorEnsemble::from_config(config);
        const double c = 1e-4;
        const PolicyTable coarse = solve_backward(config, error_min(c), ens);
        SolverOptions fine_opt;
        fine_opt.grid_size = 8001;
        const PolicyTable fine = solve_backward(config, error_min(c), ens, fine_opt);
        for (int k = 1; k < config.K; ++k) {
            CAPTURE(M);
            CAPTURE(k);
            CHECK(coarse.stage(k).pi_high <= 1.0 - c);
            CHECK(coarse.stage(k).pi_low >= c);
            CHECK(coarse.action_at(k, 1.0 - 0.5 * c) == Action::DeclareH0);
            CHECK(std::fabs(coarse.stage(k).pi_high - fine.stage(k).pi_high) <= 2.5e-4);
            CHECK(std::fabs(coarse.stage(k).pi_low - fine.stage(k).pi_low) <= 2.5e-4);
        }
    }
}

TEST_CASE("policy file round trip") {
    const auto& ens = default_ensemble();
    const PolicyTable t = solve_backward(kDefault, throughput(1e-4), ens);
    const auto path = (std::filesystem::temp_directory_path() / "ordfuse_policy_test.txt").string();
    save_policy(t, path);
    const PolicyTable u = load_policy(path);
    CHECK(u.K == t.K);
    CHECK(u.one_threshold == t.one_threshold);
    CHECK(u.grid == t.grid);
    for (int k = 1; k <= t.K; ++k) {
        CHECK(u.stage(k).value == t.stage(k).value);
        CHECK(u.stage(k).action == t.stage(k).action);
        CHECK(u.stage(k).pi_low == t.stage(k).pi_low);
        CHECK(u.stage(k).pi_high == t.stage(k).pi_high);
    }
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("ordfuse-policy 1\nK 2\ngrid 3\none_threshold 0\nstage 1 0 1\n0 H0\n", f);
    std::fclose(f);
    CHECK_THROWS_AS(load_policy(path), std::runtime_error);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_policy(path), std::runtime_error);
}

TEST_CASE("running a policy") {
    const auto& ens = default_ensemble();
    const PolicyTable t = solve_backward(kDefault, error_min(1e-4), ens);
    ScenarioConfig sure = kDefault;
    sure.pi0 = 1.0;
    const std::vector<double> y(kDefault.M, 0.5);
    const auto out = run_policy(y, t, ens, sure);
    CHECK(out.declared == Hypothesis::H0);
    CHECK(out.stage == 1);

    const std::vector<double> strong{12, 11, 10, 9, 8, 7, 6, 5, 4, 3};
    CHECK(run_policy(strong, t, ens, kDefault).declared == Hypothesis::H1);
    const std::vector<double> too_short{1, 1};
    CHECK_THROWS_AS(run_policy(too_short, t, ens, kDefault), ContractError);
}

TEST_CASE("belief to LLR mapping") {
    CHECK(belief_to_llr(0.5, 0.5) == 0.0);
    CHECK(belief_to_llr(0.25, 0.5) == doctest::Approx(std::log(3.0)));
    CHECK(belief_to_llr(0.5, 0.75) == doctest::Approx(std::log(3.0)));
    CHECK(action_name(Action::Continue) == "C");
}

TEST_CASE("solver argument checks") {
    const auto& ens = default_ensemble();
    SolverOptions small;
    small.grid_size = 50;
    CHECK_THROWS_AS(solve_backward(kDefault, error_min(0.0), ens, small), ContractError);
    ScenarioConfig other = kDefault;
    other.M = 12;
    other.sigma2_s.assign(12, 2.0);
    CHECK_THROWS_AS(solve_backward(other, error_min(0.0), ens), ContractError);
}
