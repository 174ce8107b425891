#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gwtails/error.hpp"
#include "gwtails/numeric.hpp"
#include "gwtails/offspring.hpp"
#include "oracles.hpp"

using namespace gwtails;

namespace {

std::vector<OffspringLaw> sample_laws()
{
    return {
        tune_to_mean(ParetoParams{2.0, 1.0}, 2.0),
        tune_to_mean(ParetoParams{3.5, 1.0}, 2.0),
        tune_to_mean(WeibullParams{0.3, 1.0, 1.0}, 2.0),
        make_discrete_weibull(0.7, 0.5, 0.9),
        make_log_corrected_index_one(2.0, 3),
        tune_to_mean(LogNormalParams{0.0, 1.0}, 2.0),
        make_finite_support({{0, 0.25}, {2, 0.75}}),
        make_finite_support({{0, 0.1}, {1, 0.2}, {3, 0.3}, {8, 0.4}}),
    };
}

int expect_error(ErrorCode code, auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        CHECK(e.code() == code);
        return 1;
    }
    FAIL("no error thrown");
    return 0;
}

}  // namespace

TEST_CASE("pareto mean agrees with direct summation")
{
    for (auto [alpha, scale] : {std::pair{2.0, 3.0}, std::pair{3.5, 6.5}, std::pair{2.5, 4.0}}) {
        const auto law = make_pareto_integer(alpha, scale);
        CHECK(law.mean() == doctest::Approx(oracle::pareto_mean(alpha, scale)).epsilon(1e-9));
        for (std::int64_t k : {0, 1, 5, 100, 5000})
            CHECK(law.tail_at(k) == doctest::Approx(oracle::pareto_tail(alpha, scale, k)).epsilon(1e-9));
    }
}

TEST_CASE("pareto alpha=2 tuned to m=2 has an inverse-square tail")
{
    const auto law = tune_to_mean(ParetoParams{2.0, 1.0}, 2.0);
    CHECK(law.mean() == doctest::Approx(2.0).epsilon(1e-9));
    const double scale = std::get<ParetoParams>(law.params()).scale;
    CHECK(oracle::pareto_mean(2.0, scale) == doctest::Approx(2.0).epsilon(1e-9));
    const double r3 = law.tail(2000.0) / law.tail(1000.0);
    const double r4 = law.tail(20000.0) / law.tail(10000.0);
    CHECK(r3 == doctest::Approx(oracle::pareto_tail(2, scale, 2000) / oracle::pareto_tail(2, scale, 1000)).epsilon(1e-8));
    CHECK(std::abs(r4 - 0.25) < std::abs(r3 - 0.25));
    CHECK(std::abs(r4 - 0.25) < 1e-3);
}

TEST_CASE("constructor preconditions")
{
    expect_error(ErrorCode::BadParam, [] { make_pareto_integer(1.0, 1.0); });
    expect_error(ErrorCode::BadParam, [] { make_pareto_integer(2.0, 0.0); });
    expect_error(ErrorCode::BadParam, [] { make_discrete_weibull(1.0, 1.0, 1.0); });
    expect_error(ErrorCode::BadParam, [] { make_discrete_weibull(0.5, 1.0, 0.0); });
    expect_error(ErrorCode::BadParam, [] { make_log_corrected_index_one(1.0, 3); });
    expect_error(ErrorCode::BadParam, [] { make_log_corrected_index_one(2.0, 2); });
    expect_error(ErrorCode::SubcriticalMean, [] { make_finite_support({{1, 1.0}}); });
    expect_error(ErrorCode::SubcriticalMean, [] { make_finite_support({{0, 0.5}, {2, 0.5}}); });
    expect_error(ErrorCode::BadPmf, [] { make_finite_support({{0, 0.5}, {2, 0.6}}); });
    expect_error(ErrorCode::SubcriticalMean, [] { make_pareto_integer(2.0, 1.0); });
}

TEST_CASE("finite support basics")
{
    const auto law = make_finite_support({{0, 0.25}, {2, 0.75}});
    CHECK(law.mean() == 1.5);
    CHECK(law.tail(1.5) == 0.75);
    CHECK(law.tail(2.0) == 0.0);
    CHECK(law.support_max() == 2);
    CHECK(law.variance() == doctest::Approx(0.75));
}

TEST_CASE("tail at zero is one minus the atom at zero")
{
    for (const auto& law : sample_laws()) CHECK(law.tail(0.0) == doctest::Approx(1.0 - law.pmf(0)).epsilon(1e-14));
}

TEST_CASE("weibull: tail ratio at one and hazard increments")
{
    const auto w = make_discrete_weibull(0.5, 0.8, 1.0);
    CHECK(w.tail(1.0) / w.tail(0.0) == doctest::Approx(std::exp(-0.8)).epsilon(1e-14));

    const auto law = tune_to_mean(WeibullParams{0.3, 1.0, 1.0}, 2.0);
    const double c = std::get<WeibullParams>(law.params()).c;
    double worst = 0.0;
    for (std::int64_t k = 2; k <= 1000000; ++k) {
        const double rk = c * std::pow(static_cast<double>(k), 0.3);
        const double rk1 = c * std::pow(static_cast<double>(k - 1), 0.3);
        worst = std::max(worst, (rk - rk1) * static_cast<double>(k) / rk);
    }
    CHECK(worst < 1.0);
    for (std::int64_t k : {1, 10, 1000, 100000})
        CHECK(law.hazard(static_cast<double>(k)) ==
              doctest::Approx(c * std::pow(static_cast<double>(k), 0.3)).epsilon(1e-12));

    CHECK_NOTHROW(tune_to_mean(WeibullParams{0.382, 1.0, 1.0}, 2.0));
}

TEST_CASE("log-corrected index one law")
{
    const auto law = make_log_corrected_index_one(2.0, 3);
    for (std::int64_t k = 0; k < 10; ++k) CHECK(law.tail_at(k + 1) <= law.tail_at(k));

    // E xi log xi: partial sums converge (remainder ~ C / log K)
    double s5 = 0.0, s6 = 0.0;
    for (std::int64_t k = 2; k <= 1000000; ++k) {
        const double term = static_cast<double>(k) * std::log(static_cast<double>(k)) * law.pmf(k);
        if (k <= 100000) s5 += term;
        s6 += term;
    }
    CHECK(std::isfinite(s6));
    const double remainder_bound = 2.0 / std::log(1e5);  // integral of (p+1)/(u log^{p+1} u) with a margin
    CHECK(s6 - s5 < remainder_bound);

    // L(x) = integral of the tail ~ (1/p) log^{-p} x
    const double r3 = law.stop_loss(1e3) / (0.5 / std::pow(std::log(1e3), 2));
    const double r4 = law.stop_loss(1e4) / (0.5 / std::pow(std::log(1e4), 2));
    CHECK(std::abs(r4 - 1.0) <= std::abs(r3 - 1.0));
    CHECK(std::abs(r4 - 1.0) < 0.01);
}

TEST_CASE("hazard equals minus log tail")
{
    const double t = std::exp(-5.0);
    const auto law = make_finite_support({{0, 1.0 - t}, {1000, t}});
    CHECK(law.hazard(0.0) == doctest::Approx(5.0).epsilon(1e-12));
    expect_error(ErrorCode::TailZero, [&] { law.hazard(1000.0); });
}

TEST_CASE("truncated first moment with infinite cutoff is the mean")
{
    for (const auto& law : sample_laws())
        CHECK(law.truncated_moment(1.0, kInf) == doctest::Approx(law.mean()).epsilon(1e-8));
    const auto law = tune_to_mean(ParetoParams{3.5, 1.0}, 2.0);
    CHECK(law.truncated_moment(2.0, kInf) == doctest::Approx(law.second_moment()).epsilon(1e-7));
    CHECK(std::isinf(tune_to_mean(ParetoParams{2.0, 1.0}, 2.0).truncated_moment(2.0, kInf)));
}

TEST_CASE("pmf and tail are consistent and monotone over the table")
{
    for (const auto& law : sample_laws()) {
        CompensatedSum mass;
        double prev_tail = 1.0, prev_hazard = 0.0, worst = 0.0;
        const std::int64_t top = std::min<std::int64_t>(law.table_size(), std::int64_t{1} << 20);
        for (std::int64_t k = 0; k < top; ++k) {
            mass += law.pmf(k);
            const double t = law.tail_at(k);
            worst = std::max(worst, std::abs(mass.value() + t - 1.0));
            REQUIRE(t <= prev_tail);
            if (t > 0.0) {
                const double h = law.hazard(static_cast<double>(k));
                REQUIRE(h >= prev_hazard);
                prev_hazard = h;
            }
            prev_tail = t;
        }
        CHECK(worst <= 1e-10);
        // analytic continuation beyond the table stays monotone
        double last = law.tail(static_cast<double>(top));
        for (double x = static_cast<double>(top) * 2; x < 1e15; x *= 3) {
            const double t = law.tail(x);
            CHECK(t <= last);
            last = t;
        }
    }
}

TEST_CASE("tuning hits the target mean")
{
    for (LawParams p : {LawParams{ParetoParams{2.0, 1.0}}, LawParams{WeibullParams{0.3, 1.0, 1.0}},
                        LawParams{LogCorrectedParams{2.0, 3, 0.1}}, LawParams{LogNormalParams{0.0, 1.0}}}) {
        const auto law = tune_to_mean(p, 1.8);
        CHECK(std::abs(law.mean() - 1.8) <= 1e-9 * 1.8);
        CHECK(family_mean(law.params()) == doctest::Approx(1.8).epsilon(1e-9));
    }
}

TEST_CASE("sampler CDF lies in the 99% DKW band")
{
    const int n = 1000000;
    const double band = std::sqrt(std::log(2.0 / 0.01) / (2.0 * n));
    std::uint32_t lane = 0;
    for (const auto& law : sample_laws()) {
        std::vector<std::int64_t> draws(n);
        RandomStream rng(5, lane++, 0);
        for (auto& d : draws) d = law.sample(rng);
        std::sort(draws.begin(), draws.end());
        double worst = 0.0;
        for (double x = 0; x < 1e7; x = std::max(x + 1, std::floor(x * 1.1))) {
            const auto below = std::upper_bound(draws.begin(), draws.end(), static_cast<std::int64_t>(x)) - draws.begin();
            worst = std::max(worst, std::abs(static_cast<double>(below) / n - (1.0 - law.tail(x))));
        }
        INFO(law.spec());
        CHECK(worst <= band);
    }
}

TEST_CASE("empirical tail over 1e7 draws within 4 binomial SE")
{
    const auto law = tune_to_mean(ParetoParams{2.0, 1.0}, 2.0);
    const double x = 20.0;
    const double p = law.tail(x);
    RandomStream rng(9, 0, 0);
    const int n = 10000000;
    std::int64_t hits = 0;
    for (int i = 0; i < n; ++i) hits += law.sample(rng) > x;
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(static_cast<double>(hits) / n - p) < 4 * se);
}

TEST_CASE("conditional samplers respect their ranges")
{
    const auto law = tune_to_mean(WeibullParams{0.5, 1.0, 1.0}, 2.0);
    RandomStream rng(1, 0, 0);
    for (int i = 0; i < 10000; ++i) {
        REQUIRE(law.sample_above(30, rng) > 30);
        REQUIRE(law.sample_at_most(3, rng) <= 3);
        const auto v = law.sample_between(4, 9, rng);
        REQUIRE(v > 4);
        REQUIRE(v <= 9);
    }
    // deep conditional draw beyond the table
    const auto heavy = tune_to_mean(ParetoParams{2.0, 1.0}, 2.0);
    const auto far = heavy.sample_above(std::int64_t{1} << 30, rng);
    CHECK(far > (std::int64_t{1} << 30));
}

TEST_CASE("law spec round trip and parse errors")
{
    for (const char* text : {"pareto(alpha=2, scale=1)", "tuned(pareto(alpha=2), m=2)", "weibull(beta=0.3, c=1.5, q=0.9)",
                             "logcorr(p=2, x0=3)", "lognormal(mu=0.1, sigma=0.7)", "finite(0:0.25, 2:0.75)"}) {
        const auto spec = parse_law_spec(text);
        CHECK(parse_law_spec(format_law_spec(spec)) == spec);
    }
    try {
        parse_law_spec("pareto(alpha=2, colour=3)");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.token() == "colour");
        CHECK(e.column() == 17);
    }
    CHECK_THROWS_AS(parse_law_spec("pareto(alpha=2"), ParseError);
    CHECK_THROWS_AS(parse_law_spec("pareto(alpha=2x)"), ParseError);
    CHECK_THROWS_AS(parse_law_spec("pareto(alpha=2) junk"), ParseError);
}
