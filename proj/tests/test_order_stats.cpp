#include <doctest.h>

#include <algorithm>
#include <bit>
#include <functional>
#include <random>

#include "ordfuse/errors.hpp"
#include "ordfuse/order_stats.hpp"
#include "support.hpp"

using namespace ordfuse;
using testing::quad;

namespace {

std::vector<LlrLaw> mixed_laws(int M) {
    std::vector<LlrLaw> laws;
    for (int i = 0; i < M; ++i) laws.push_back(LlrLaw::energy(3, 0.5 + 0.7 * i));
    return laws;
}

// Sum over bitmasks: every subset of the non-excluded sensors enumerated explicitly.
double brute_subset_sum(int m_sub, Hypothesis h, double hi, double lo, const std::vector<int>& excl,
                        const SensorEnsemble& ens) {
    const int M = ens.size();
    double total = 0;
    for (unsigned mask = 0; mask < (1u << M); ++mask) {
        bool bad = false;
        for (int v : excl) bad |= (mask >> v) & 1u;
        if (bad || std::popcount(mask) != m_sub) continue;
        double term = 1;
        for (int v = 0; v < M; ++v) {
            if (std::find(excl.begin(), excl.end(), v) != excl.end()) continue;
            term *= (mask >> v) & 1u ? ens.law(v).magnitude_tail(hi, h)
                                     : 1.0 - ens.law(v).magnitude_tail(lo, h);
        }
        total += term;
    }
    return total;
}

double brute_ranked_pdf(int m, double y, Hypothesis h, const SensorEnsemble& ens) {
    const int M = ens.size();
    double total = 0;
    for (int i = 0; i < M; ++i) {
        const double f = ens.law(i).pdf(y, h);
        if (f == 0) continue;
        total += f * brute_subset_sum(m - 1, h, std::fabs(y), std::fabs(y), {i}, ens);
    }
    return total;
}

// Integral over [lo, hi] split at every +-shift of the ensemble and at 0, where
// the densities and central masses lose smoothness.
double piecewise(const std::function<double(double)>& f, double lo, double hi, const SensorEnsemble& ens,
                 double tol = 1e-12) {
    std::vector<double> br{lo, hi, 0.0};
    for (const auto& l : ens.laws()) {
        br.push_back(-l.shift());
        br.push_back(l.shift());
    }
    std::sort(br.begin(), br.end());
    double total = 0;
    for (std::size_t i = 0; i + 1 < br.size(); ++i) {
        const double x0 = std::max(br[i], lo), x1 = std::min(br[i + 1], hi);
        if (x1 > x0) total += quad(f, x0, x1, tol);
    }
    return total;
}

double ranked_mass(int m, Hypothesis h, const SensorEnsemble& ens) {
    const double lo = -std::max_element(ens.laws().begin(), ens.laws().end(), [](auto& a, auto& b) {
                           return a.shift() < b.shift();
                       })->shift();
    double hi = 0;
    for (const auto& l : ens.laws()) hi = std::max(hi, l.upper_cap(1e-16));
    auto f = [&](double y) { return ranked_pdf(m, y, h, ens); };
    double total = 0, prev = lo;
    std::vector<double> breaks{0.0};
    for (const auto& l : ens.laws()) {
        breaks.push_back(-l.shift());
        breaks.push_back(l.shift());
    }
    std::sort(breaks.begin(), breaks.end());
    for (double b : breaks) {
        if (b <= prev) continue;
        total += quad(f, prev, b);
        prev = b;
    }
    return total + quad(f, prev, hi);
}

} // namespace

TEST_CASE("subset coefficients against enumeration") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int M = 1; M <= 8; ++M) {
        std::vector<double> in(M), out(M);
        for (int i = 0; i < M; ++i) in[i] = u(rng), out[i] = u(rng);
        const auto e = subset_coefficients(in, out, M);
        for (int m = 0; m <= M; ++m) {
            double brute = 0;
            for (unsigned mask = 0; mask < (1u << M); ++mask) {
                if (std::popcount(mask) != m) continue;
                double t = 1;
                for (int v = 0; v < M; ++v) t *= (mask >> v) & 1u ? in[v] : out[v];
                brute += t;
            }
            CHECK(std::fabs(e[m] - brute) < 1e-12);
        }
    }
}

TEST_CASE("subset weight sum") {
    const SensorEnsemble ens(mixed_laws(6));
    // empty subset is the product of central masses
    double prod = 1;
    for (int v = 1; v < 6; ++v) prod *= ens.law(v).central_mass(0.8, Hypothesis::H1);
    CHECK(std::fabs(subset_weight_sum(0, Hypothesis::H1, 2.0, 0.8, {0}, ens) - prod) < 1e-14);

    for (int M = 2; M <= 8; ++M) {
        const SensorEnsemble e(mixed_laws(M));
        for (auto h : {Hypothesis::H0, Hypothesis::H1})
            for (int m = 0; m <= M - 2; ++m)
                CHECK(std::fabs(subset_weight_sum(m, h, 1.7, 0.4, {0, M - 1}, e) -
                                brute_subset_sum(m, h, 1.7, 0.4, {0, M - 1}, e)) < 1e-12);
    }

    // identical sensors collapse to a binomial term
    const LlrLaw law = LlrLaw::energy(3, 2.0);
    const SensorEnsemble same(std::vector<LlrLaw>(7, law));
    const double b = law.magnitude_tail(1.3, Hypothesis::H0);
    const double c = law.central_mass(0.6, Hypothesis::H0);
    CHECK(subset_weight_sum(2, Hypothesis::H0, 1.3, 0.6, {3}, same) ==
          doctest::Approx(15.0 * b * b * std::pow(c, 4)).epsilon(1e-13));
    CHECK_THROWS_AS(subset_weight_sum(7, Hypothesis::H0, 1.0, 1.0, {0}, same), ContractError);
}

TEST_CASE("ranked density of a single sensor is its own density") {
    const LlrLaw law = LlrLaw::energy(3, 2.0);
    const SensorEnsemble one({law});
    for (double y : {-1.0, 0.2, 3.0})
        CHECK(ranked_pdf(1, y, Hypothesis::H1, one) == doctest::Approx(law.pdf(y, Hypothesis::H1)));
    CHECK_THROWS_AS(ranked_pdf(2, 0.0, Hypothesis::H0, one), ContractError);
    CHECK_THROWS_AS(ranked_pdf(0, 0.0, Hypothesis::H0, one), ContractError);
}

TEST_CASE("ranked densities against enumeration") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.5, 6.0);
    for (int M = 2; M <= 8; M += 3) {
        const SensorEnsemble ens(mixed_laws(M));
        for (int t = 0; t < 20; ++t) {
            const double y = u(rng);
            for (auto h : {Hypothesis::H0, Hypothesis::H1}) {
                const auto all = ranked_pdf_all(y, h, ens);
                for (int m = 1; m <= M; ++m) {
                    const double brute = brute_ranked_pdf(m, y, h, ens);
                    CHECK(std::fabs(ranked_pdf(m, y, h, ens) - brute) < 1e-12);
                    CHECK(std::fabs(all[m - 1] - brute) < 1e-12);
                }
            }
        }
    }
}

TEST_CASE("ranked densities integrate to one") {
    for (int M : {1, 3, 10}) {
        const SensorEnsemble same(std::vector<LlrLaw>(M, LlrLaw::energy(3, 2.0)));
        for (int m = 1; m <= M; ++m)
            for (auto h : {Hypothesis::H0, Hypothesis::H1})
                CHECK(ranked_mass(m, h, same) == doctest::Approx(1.0).epsilon(1e-6));
    }
    const SensorEnsemble mixed(mixed_laws(4));
    for (int m = 1; m <= 4; ++m)
        for (auto h : {Hypothesis::H0, Hypothesis::H1})
            CHECK(ranked_mass(m, h, mixed) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("ranked densities sum to the sum of sensor densities") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.6, 8.0);
    for (bool identical : {true, false}) {
        const SensorEnsemble ens(identical ? std::vector<LlrLaw>(9, LlrLaw::energy(3, 2.0))
                                           : mixed_laws(9));
        for (int t = 0; t < 20; ++t) {
            const double y = u(rng);
            for (auto h : {Hypothesis::H0, Hypothesis::H1}) {
                double ranked = 0, direct = 0;
                for (int m = 1; m <= 9; ++m) ranked += ranked_pdf(m, y, h, ens);
                for (const auto& l : ens.laws()) direct += l.pdf(y, h);
                CHECK(std::fabs(ranked - direct) < 1e-8 * std::max(1.0, direct));
            }
        }
    }
}

TEST_CASE("closed form and general formulas agree for identical sensors") {
    const std::vector<LlrLaw> laws(6, LlrLaw::energy(3, 2.0));
    const SensorEnsemble fast(laws), general(laws, SensorEnsemble::Evaluation::General);
    CHECK(fast.use_closed_form());
    CHECK_FALSE(general.use_closed_form());
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.6, 6.0);
    for (int t = 0; t < 50; ++t) {
        double g = u(rng), a = u(rng);
        if (std::fabs(a) > std::fabs(g)) std::swap(a, g);
        for (auto h : {Hypothesis::H0, Hypothesis::H1}) {
            for (int m = 2; m <= 6; ++m) {
                const double ref = joint_consecutive_pdf(m, a, g, h, general);
                CHECK(std::fabs(joint_consecutive_pdf(m, a, g, h, fast) - ref) <= 1e-10 * std::max(1.0, ref));
                if (ranked_pdf(m - 1, g, h, general) > 1e-300) {
                    const double c = conditional_pdf(m, a, g, h, general);
                    CHECK(std::fabs(conditional_pdf(m, a, g, h, fast) - c) <= 1e-10 * std::max(1.0, c));
                }
            }
        }
    }
}

TEST_CASE("joint density basic properties") {
    const LlrLaw law = LlrLaw::energy(3, 2.0);
    const SensorEnsemble two({law, law});
    for (double g : {-1.0, 0.8, 3.0})
        for (double a : {-0.5, 0.3}) {
            if (std::fabs(a) > std::fabs(g)) continue;
            const double expect = 2 * law.pdf(a, Hypothesis::H0) * law.pdf(g, Hypothesis::H0);
            CHECK(joint_consecutive_pdf(2, a, g, Hypothesis::H0, two) == doctest::Approx(expect));
        }
    CHECK(joint_consecutive_pdf(2, 2.0, 1.0, Hypothesis::H0, two) == 0.0);
    CHECK(joint_consecutive_pdf(2, -1.2, 1.0, Hypothesis::H0, two) == 0.0);
    CHECK_THROWS_AS(joint_consecutive_pdf(1, 0.0, 1.0, Hypothesis::H0, two), ContractError);
}

TEST_CASE("joint density integrates to one") {
    const LlrLaw law = LlrLaw::energy(3, 2.0);
    const SensorEnsemble three(std::vector<LlrLaw>(3, law));
    const double b = law.shift();
    const double hi = law.upper_cap(1e-14);
    for (int m = 2; m <= 3; ++m) {
        auto inner = [&](double g) {
            auto f = [&](double a) { return joint_consecutive_pdf(m, a, g, Hypothesis::H1, three); };
            const double r = std::fabs(g);
            return piecewise(f, std::max(-r, -b), r, three, 1e-10);
        };
        const double total = piecewise(inner, -b, hi, three, 1e-9);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-5));
    }
}

TEST_CASE("conditional densities integrate to one") {
    const SensorEnsemble mixed(mixed_laws(4));
    for (double g : {-0.9, 0.7, 2.5, 5.0}) {
        for (int m = 2; m <= 4; ++m) {
            for (auto h : {Hypothesis::H0, Hypothesis::H1}) {
                auto f = [&](double a) { return conditional_pdf(m, a, g, h, mixed); };
                const double r = std::fabs(g);
                const double lo = std::max(-r, -mixed.law(mixed.size() - 1).shift());
                const double total = piecewise(f, lo, r, mixed, 1e-11);
                CHECK(total == doctest::Approx(1.0).epsilon(1e-7));
            }
        }
    }
}

TEST_CASE("conditional density is undefined where the marginal vanishes") {
    const LlrLaw law = LlrLaw::energy(3, 2.0);
    const SensorEnsemble ens(std::vector<LlrLaw>(4, law));
    const double outside = -law.shift() - 0.5;
    CHECK_THROWS_AS(conditional_pdf(2, 0.0, outside, Hypothesis::H0, ens), UndefinedConditionalError);
    const SensorEnsemble general(std::vector<LlrLaw>(4, law), SensorEnsemble::Evaluation::General);
    CHECK_THROWS_AS(conditional_pdf(2, 0.0, outside, Hypothesis::H0, general), UndefinedConditionalError);
}

TEST_CASE("chain of conditionals reproduces the joint density of the top ranks") {
    const LlrLaw law = LlrLaw::energy(3, 2.0);
    const int M = 10, K = 8;
    const SensorEnsemble ens(std::vector<LlrLaw>(M, law));
    std::mt19937_64 rng(9);
    for (int t = 0; t < 30; ++t) {
        std::vector<double> y(K);
        for (auto& v : y) v = law.sample(t % 2 ? Hypothesis::H1 : Hypothesis::H0, rng);
        std::sort(y.begin(), y.end(), [](double a, double b) { return std::fabs(a) > std::fabs(b); });
        for (auto h : {Hypothesis::H0, Hypothesis::H1}) {
            double chain = ranked_pdf(1, y[0], h, ens);
            for (int m = 2; m <= K; ++m) chain *= conditional_pdf(m, y[m - 1], y[m - 2], h, ens);
            double direct = 1;
            for (int i = 0; i < K; ++i) direct *= (M - i) * law.pdf(y[i], h);
            direct *= std::pow(law.central_mass(std::fabs(y[K - 1]), h), M - K);
            CHECK(std::fabs(chain - direct) <= 1e-8 * direct);
        }
    }
}

TEST_CASE("joint density of the two largest reports matches sampling") {
    // three sensors with different SNRs
    const SensorEnsemble ens({LlrLaw::energy(3, 1.0), LlrLaw::energy(3, 2.0), LlrLaw::energy(3, 4.0)});
    struct Cell {
        double g0, g1, a0, a1;
    };
    const Cell cells[] = {{2.0, 4.0, 0.5, 1.5}, {2.0, 4.0, -1.0, -0.3}, {1.0, 2.0, -0.9, 0.9},
                          {4.0, 8.0, 0.0, 3.0}};
    const int n = 400000;
    for (auto h : {Hypothesis::H0, Hypothesis::H1}) {
        std::mt19937_64 rng(h == Hypothesis::H0 ? 31 : 32);
        std::vector<int> hits(std::size(cells), 0);
        for (int s = 0; s < n; ++s) {
            double y[3];
            for (int i = 0; i < 3; ++i) y[i] = ens.law(i).sample(h, rng);
            std::sort(y, y + 3, [](double a, double b) { return std::fabs(a) > std::fabs(b); });
            for (std::size_t c = 0; c < std::size(cells); ++c) {
                const auto& cl = cells[c];
                if (y[0] >= cl.g0 && y[0] < cl.g1 && y[1] >= cl.a0 && y[1] < cl.a1) ++hits[c];
            }
        }
        for (std::size_t c = 0; c < std::size(cells); ++c) {
            const auto& cl = cells[c];
            auto inner = [&](double g) {
                auto f = [&](double a) { return joint_consecutive_pdf(2, a, g, h, ens); };
                const double lo = std::max(cl.a0, -std::fabs(g)), hi = std::min(cl.a1, std::fabs(g));
                return hi > lo ? piecewise(f, lo, hi, ens, 1e-10) : 0.0;
            };
            const double p = piecewise(inner, cl.g0, cl.g1, ens, 1e-9);
            const double freq = static_cast<double>(hits[c]) / n;
            const double sigma = std::sqrt(p * (1 - p) / n);
            CHECK(p > 1e-4);
            CHECK(std::fabs(freq - p) < 4 * sigma);
        }
    }
}
