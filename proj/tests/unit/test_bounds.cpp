#include <doctest.h>

#include <cmath>

#include "gwtails/bounds.hpp"
#include "gwtails/error.hpp"
#include "gwtails/numeric.hpp"

using namespace gwtails;

namespace {

//! P{sum of n iid draws > level} by direct convolution of the pmf vector.
double convolved_tail(const std::vector<double>& pmf, int n, double level)
{
    std::vector<long double> dist{1.0L};
    for (int i = 0; i < n; ++i) {
        std::vector<long double> next(dist.size() + pmf.size() - 1, 0.0L);
        for (std::size_t a = 0; a < dist.size(); ++a)
            for (std::size_t b = 0; b < pmf.size(); ++b) next[a + b] += dist[a] * pmf[b];
        dist.swap(next);
    }
    long double t = 0.0L;
    for (std::size_t v = 0; v < dist.size(); ++v)
        if (static_cast<double>(v) > level) t += dist[v];
    return static_cast<double>(t);
}

//! eta = xi - factor * m with the law's own mean, so the summand mean is exactly nonpositive.
CenteredSummandLaw centered(const OffspringLaw& law, double factor = 1.0)
{
    return CenteredSummandLaw(law, factor * law.mean());
}

CenteredSummandLaw two_point_summand()
{
    return CenteredSummandLaw(make_finite_support({{0, 0.25}, {2, 0.75}}), 1.5);
}

}  // namespace

TEST_CASE("truncated mgf")
{
    const auto s = two_point_summand();
    for (double lambda : {0.1, 1.0, 2.5})
        for (double y : {0.5, 3.0})
            CHECK(truncated_mgf(s, lambda, y) ==
                  doctest::Approx(0.25 * std::exp(-1.5 * lambda) + 0.75 * std::exp(0.5 * lambda)).epsilon(1e-14));
    CHECK(truncated_mgf(s, 1.0, 0.0) == doctest::Approx(0.25 * std::exp(-1.5)).epsilon(1e-14));
    CHECK(truncated_mgf(s, 1.0, -2.0) == 0.0);

    const auto p = centered(tune_to_mean(ParetoParams{3.0, 1.0}, 2.0));
    for (double y : {5.0, 50.0}) CHECK(truncated_mgf(p, 1e-9, y) == doctest::Approx(1.0 - p.tail(y)).epsilon(1e-7));
    CHECK_THROWS_AS(truncated_mgf(p, 10.0, 100.0), Error);
}

TEST_CASE("chebyshev bound examples")
{
    const auto s = two_point_summand();
    // n = 1, y = x/2: bound above the exact single tail
    for (double x : {0.2, 0.4, 1.0}) {
        for (double lambda : {0.3, 1.0, 4.0}) {
            const auto b = chebyshev_sum_bound(s, 1, x, x / 2, lambda);
            CHECK(b.bound_value >= s.tail(x));
        }
    }
    // n = 10, x = 4: exceedance needs all ten draws equal to 2
    const auto b = chebyshev_sum_bound(s, 10, 4.0, 2.0, 1.0);
    const double exact = std::pow(0.75, 10);
    CHECK(exact_sum_tail(s, 10, 4.0) == doctest::Approx(exact).epsilon(1e-13));
    CHECK(b.bound_value >= exact);

    // the jump plus Chernoff recipe reproduces prop22_bound
    const auto p = centered(tune_to_mean(ParetoParams{3.0, 1.0}, 2.0));
    const auto r22 = prop22_bound(p, 10, 200.0, 0.5);
    const auto manual = chebyshev_sum_bound(p, 10, 200.0, 100.0, 2.0 * p.hazard(200.0) / 200.0);
    CHECK(r22.bound_value == manual.bound_value);
    CHECK(r22.lambda_used == manual.lambda_used);
}

TEST_CASE("exact validity over a finite-support grid")
{
    const std::vector<std::vector<std::pair<std::int64_t, double>>> pmfs{
        {{0, 0.25}, {2, 0.75}},
        {{0, 0.1}, {1, 0.2}, {3, 0.3}, {7, 0.4}},
        {{0, 0.3}, {1, 0.1}, {2, 0.1}, {3, 0.1}, {4, 0.1}, {5, 0.1}, {6, 0.1}, {7, 0.1}},
    };
    int checked = 0, violations = 0;
    for (const auto& pmf : pmfs) {
        const auto law = make_finite_support(pmf);
        std::vector<double> dense(8, 0.0);
        for (auto [k, p] : pmf) dense[static_cast<std::size_t>(k)] = p;
        for (double shift : {law.mean(), 2.0 * law.mean()}) {
            const CenteredSummandLaw s(law, shift);
            for (int n : {1, 2, 5, 12}) {
                for (double x : {0.5, 1.0, 2.5, 5.0, 10.0, 20.0, 40.0}) {
                    const double exact = convolved_tail(dense, n, x + n * shift);
                    CHECK(exact_sum_tail(s, n, x) == doctest::Approx(exact).epsilon(1e-12));
                    for (double frac : {0.25, 0.5, 0.75})
                        for (double lambda : {0.05, 0.2, 1.0, 3.0}) {
                            const auto b = chebyshev_sum_bound(s, n, x, frac * x, lambda);
                            ++checked;
                            if (!(exact <= b.bound_value * (1 + 1e-12))) ++violations;
                        }
                }
            }
        }
    }
    CHECK(checked > 1000);
    CHECK(violations == 0);
}

TEST_CASE("bound invariants")
{
    const auto p = centered(tune_to_mean(ParetoParams{2.5, 1.0}, 2.0));
    double prev = kInf;
    for (double x = 20; x < 2000; x *= 1.5) {
        const auto b = chebyshev_sum_bound(p, 8, x, 10.0, 0.05);
        CHECK(b.bound_value <= prev);
        prev = b.bound_value;
        CHECK(b.bound_value == b.jump_term + b.chernoff_term);
        const auto narrow = prop22_bound(p, 8, x, 0.3);
        const auto wide = prop22_bound(p, 8, x, 0.6);
        CHECK(narrow.jump_term >= wide.jump_term);
        CHECK(narrow.bound_value == narrow.jump_term + narrow.chernoff_term);
        const auto r23 = prop23_bound(p, 8, x, 0.4 * x, 0.5);
        CHECK(r23.bound_value == r23.jump_term + r23.chernoff_term);
    }
}

TEST_CASE("prop22_bound against simulation and range flag")
{
    const auto p = centered(tune_to_mean(ParetoParams{3.0, 1.0}, 2.0));
    const auto b = prop22_bound(p, 10, 200.0, 0.5);
    CHECK(b.validity == Validity::InRange);
    const auto mc = sum_tail_mc(p, 10, {200.0}, 1000000, MonteCarloOptions{1, 0, 1, 4096, {}});
    CHECK(mc[0].estimate <= b.bound_value + 3 * mc[0].std_error);

    const auto out = prop22_bound(p, 5, 2.0, 0.5);
    CHECK(out.validity == Validity::OutOfRange);
    CHECK(std::isfinite(out.bound_value));

    // c n tail(x) shape: the normalized bound does not blow up along x
    double lo_max = 0.0, hi_max = 0.0;
    for (double x = 50; x < 1e5; x *= 1.25) {
        const double ratio = prop22_bound(p, 10, x, 0.5).bound_value / (10 * p.tail(x));
        (x < 2000 ? lo_max : hi_max) = std::max(x < 2000 ? lo_max : hi_max, ratio);
    }
    CHECK(hi_max <= lo_max);
}

TEST_CASE("prop23_bound")
{
    const auto w = centered(tune_to_mean(WeibullParams{0.3, 1.0, 1.0}, 2.0));
    const auto b = prop23_bound(w, 5, 400.0, 200.0, 0.5);
    CHECK(b.bound_value == doctest::Approx(6.0 * w.tail(200.0)).epsilon(1e-14));
    CHECK(b.jump_term == 5.0 * w.tail(200.0));
    const auto mc = sum_tail_mc(w, 5, {400.0}, 1000000, MonteCarloOptions{2, 0, 1, 4096, {}});
    CHECK(mc[0].estimate <= b.bound_value + 3 * mc[0].std_error);
    CHECK(std::isfinite(b.raw_chebyshev));
    CHECK(b.raw_chebyshev >= mc[0].estimate - 3 * mc[0].std_error);

    CHECK_THROWS_AS(prop23_bound(w, 5, 400.0, 400.0, 0.5), Error);
    const auto zero = prop23_bound(w, 0, 400.0, 100.0, 0.5);
    CHECK(zero.bound_value == w.tail(100.0));
}

TEST_CASE("conditional and naive sum estimators agree")
{
    const auto p = centered(tune_to_mean(ParetoParams{2.5, 1.0}, 2.0));
    const std::vector<double> xs{5.0, 20.0, 60.0};
    const auto c = sum_tail_mc(p, 6, xs, 400000, MonteCarloOptions{3, 0, 1, 4096, {}}, SumEstimator::Conditional);
    const auto n = sum_tail_mc(p, 6, xs, 400000, MonteCarloOptions{3, 1, 1, 4096, {}}, SumEstimator::Naive);
    for (std::size_t i = 0; i < xs.size(); ++i)
        CHECK(std::abs(c[i].estimate - n[i].estimate) <= 4 * std::hypot(c[i].std_error, n[i].std_error));

    // and the conditional one is exact for finite support in expectation
    const auto s = two_point_summand();
    const auto e = sum_tail_mc(s, 4, {0.9, 2.1}, 400000, MonteCarloOptions{3, 2, 1, 4096, {}});
    CHECK(std::abs(e[0].estimate - exact_sum_tail(s, 4, 0.9)) <= 4 * e[0].std_error + 1e-15);
    CHECK(std::abs(e[1].estimate - exact_sum_tail(s, 4, 2.1)) <= 4 * e[1].std_error + 1e-15);
}

TEST_CASE("single big jump harness")
{
    const auto base = tune_to_mean(ParetoParams{2.0, 1.0}, 2.0);
    const CenteredSummandLaw s(base, 2.0 * base.mean());
    const auto one = sstar_bound_harness(s, {1}, {10.0, 100.0}, 1000, MonteCarloOptions{});
    for (const auto& row : one.rows) {
        CHECK(row.ratio == 1.0);
        CHECK(row.std_error == 0.0);
    }
    const auto rep = sstar_bound_harness(s, {5}, {5.0, 1000.0}, 20000, MonteCarloOptions{});
    CHECK_FALSE(rep.rows[0].informative);
    CHECK(rep.rows[1].informative);
    CHECK_THROWS_AS(sstar_bound_harness(CenteredSummandLaw(base, 1.0), {5}, {100.0}, 100, MonteCarloOptions{}), Error);
}
