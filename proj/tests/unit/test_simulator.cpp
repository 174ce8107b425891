#include <doctest.h>

#include <cmath>

#include "gwtails/error.hpp"
#include "gwtails/numeric.hpp"
#include "gwtails/simulator.hpp"

using namespace gwtails;

namespace {

const OffspringLaw& two_point()
{
    static const OffspringLaw law = make_finite_support({{0, 0.25}, {2, 0.75}});
    return law;
}

void check_binomial(std::int64_t hits, std::int64_t n, double p, double k = 4.0)
{
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(n));
    const double phat = static_cast<double>(hits) / static_cast<double>(n);
    INFO("phat = " << phat << ", p = " << p << ", se = " << se);
    CHECK(std::abs(phat - p) <= k * se);
}

}  // namespace

TEST_CASE("n=0 gives the root only")
{
    RandomStream rng(0, 0, 0);
    const auto rec = simulate(two_point(), 0, rng);
    CHECK(rec.sizes == std::vector<std::int64_t>{1});
    CHECK(rec.w_values == std::vector<double>{1.0});
}

TEST_CASE("two-point law: P{Z1=2} and P{Z2>2}")
{
    const int n = 1000000;
    std::int64_t z1 = 0, z2 = 0;
    for (int r = 0; r < n; ++r) {
        RandomStream rng(1, 0, static_cast<std::uint64_t>(r));
        const auto rec = simulate(two_point(), 2, rng);
        z1 += rec.sizes[1] == 2;
        z2 += rec.sizes[2] > 2;
    }
    check_binomial(z1, n, 0.75);
    check_binomial(z2, n, 27.0 / 64.0);
}

TEST_CASE("trajectory invariants")
{
    const std::vector<OffspringLaw> laws{two_point(), tune_to_mean(ParetoParams{2.0, 1.0}, 2.0),
                                         tune_to_mean(WeibullParams{0.3, 1.0, 1.0}, 1.5)};
    for (const auto& law : laws) {
        const double m = law.mean();
        for (int r = 0; r < 3000; ++r) {
            RandomStream rng(2, 0, static_cast<std::uint64_t>(r));
            const auto rec = simulate(law, 10, rng);
            REQUIRE(rec.sizes[0] == 1);
            for (std::size_t k = 0; k < rec.sizes.size(); ++k) {
                REQUIRE(rec.w_values[k] == static_cast<double>(rec.sizes[k]) / std::pow(m, static_cast<double>(k)));
                if (k + 1 == rec.sizes.size()) break;
                if (rec.sizes[k] == 0) {
                    REQUIRE(rec.sizes[k + 1] == 0);
                    continue;
                }
                REQUIRE(rec.gen_max_offspring[k] <= rec.sizes[k + 1]);
                REQUIRE(rec.sizes[k + 1] <= rec.sizes[k] * rec.gen_max_offspring[k]);
            }
            if (rec.extinct_at) REQUIRE(rec.sizes[static_cast<std::size_t>(*rec.extinct_at)] == 0);
        }
    }
}

TEST_CASE("martingale mean of W_n is one")
{
    const std::vector<OffspringLaw> laws{two_point(), tune_to_mean(ParetoParams{3.5, 1.0}, 2.0),
                                         tune_to_mean(WeibullParams{0.5, 1.0, 1.0}, 2.0),
                                         tune_to_mean(LogNormalParams{0.0, 0.8}, 1.7)};
    std::uint32_t lane = 0;
    for (const auto& law : laws) {
        for (int n : {8, 12}) {
            const int replicas = n == 8 ? 100000 : 20000;
            MomentAccumulator acc;
            for (int r = 0; r < replicas; ++r) {
                RandomStream rng(3, lane, static_cast<std::uint64_t>(r));
                acc.add(simulate(law, n, rng).w_values.back());
            }
            ++lane;
            INFO(law.spec() << " n=" << n << " mean=" << acc.mean() << " se=" << acc.std_error_of_mean());
            CHECK(std::abs(acc.mean() - 1.0) <= 5 * acc.std_error_of_mean());
        }
    }
}

TEST_CASE("identical streams give identical records")
{
    const auto law = tune_to_mean(ParetoParams{2.0, 1.0}, 2.0);
    RandomStream a(4, 3, 17), b(4, 3, 17), c(4, 3, 18);
    const auto ra = simulate(law, 12, a);
    const auto rb = simulate(law, 12, b);
    const auto rc = simulate(law, 12, c);
    CHECK(ra == rb);
    CHECK_FALSE(ra == rc);
}

TEST_CASE("event flags: vacuous threshold, bad x, coupling in x")
{
    const auto law = tune_to_mean(ParetoParams{2.0, 1.0}, 2.0);
    RandomStream rng(5, 0, 0);
    const auto [rec, flags] = simulate_with_events(law, 6, EventOptions{1e15, 0.0, {}}, rng);
    CHECK(flags.a_k_fired == 0);
    CHECK(flags.b_k_holds == (std::uint64_t{1} << 7) - 1);
    CHECK_THROWS_AS(simulate_with_events(law, 6, EventOptions{0.0, 0.0, {}}, rng), Error);

    const std::vector<double> xs{1, 2, 5, 10, 30, 100};
    for (int r = 0; r < 20000; ++r) {
        RandomStream s(5, 1, static_cast<std::uint64_t>(r));
        const auto path = simulate(law, 8, s);
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            const auto lo = compute_events(path, law.mean(), {xs[i], 0.1, {}});
            const auto hi = compute_events(path, law.mean(), {xs[i + 1], 0.1, {}});
            // B_k only gets easier as x grows, the jump only gets harder
            REQUIRE((lo.b_k_holds & ~hi.b_k_holds) == 0);
            REQUIRE((hi.a_k_fired & lo.b_k_holds & ~lo.a_k_fired) == 0);
        }
    }
}

TEST_CASE("P{A_0} matches the tail at m(1+eps)x")
{
    const auto law = tune_to_mean(ParetoParams{2.0, 1.0}, 2.0);
    const double x = 50.0, eps = 0.1;
    const int n = 1000000;
    std::int64_t hits = 0;
    for (int r = 0; r < n; ++r) {
        RandomStream rng(6, 0, static_cast<std::uint64_t>(r));
        hits += simulate_with_events(law, 1, {x, eps, {}}, rng).second.a(0);
    }
    check_binomial(hits, n, law.tail(law.mean() * (1 + eps) * x));
}

TEST_CASE("forced jump at k=0 draws from the conditional tail")
{
    const auto law = tune_to_mean(ParetoParams{2.0, 1.0}, 2.0);
    const std::int64_t t = 40;
    const int n = 1000000;
    const std::vector<std::int64_t> steps{0, 5, 20, 60, 200, 1000};
    std::vector<std::int64_t> above(steps.size());
    for (int r = 0; r < n; ++r) {
        RandomStream rng(7, 0, static_cast<std::uint64_t>(r));
        const auto rec = simulate_forced_jump(law, 1, 0, t, rng);
        REQUIRE(rec.sizes[1] > t);
        for (std::size_t i = 0; i < steps.size(); ++i) above[i] += rec.sizes[1] > t + steps[i];
    }
    for (std::size_t i = 0; i < steps.size(); ++i)
        check_binomial(above[i], n, law.tail_at(t + steps[i]) / law.tail_at(t));
}

TEST_CASE("forced jump without effective conditioning matches simulate")
{
    // pmf(0) = 0, so conditioning on xi > 0 changes nothing
    const auto law = make_finite_support({{1, 0.5}, {3, 0.5}});
    const int n = 400000;
    std::int64_t forced = 0, plain = 0;
    for (int r = 0; r < n; ++r) {
        RandomStream a(8, 0, static_cast<std::uint64_t>(r)), b(8, 1, static_cast<std::uint64_t>(r));
        forced += simulate_forced_jump(law, 3, 1, 0, a).sizes[3] > 10;
        plain += simulate(law, 3, b).sizes[3] > 10;
    }
    const double p = static_cast<double>(plain) / n;
    const double se = std::sqrt(2 * p * (1 - p) / n);
    CHECK(std::abs(static_cast<double>(forced - plain)) / n <= 4 * se);

    std::int64_t unforced = 0;
    for (int r = 0; r < n; ++r) {
        RandomStream a(8, 2, static_cast<std::uint64_t>(r));
        unforced += simulate_forced_jump(two_point(), 2, 0, -1, a).sizes[2] > 2;
    }
    check_binomial(unforced, n, 27.0 / 64.0);
}

TEST_CASE("forced jump at k=n-1 affects only the last generation")
{
    const int n = 400000;
    std::int64_t first = 0;
    for (int r = 0; r < n; ++r) {
        RandomStream rng(9, 0, static_cast<std::uint64_t>(r));
        const auto rec = simulate_forced_jump(two_point(), 3, 2, 1, rng);
        first += rec.sizes[1] == 2;
        if (rec.sizes[2] > 0) REQUIRE(rec.sizes[3] >= 2);
    }
    check_binomial(first, n, 0.75);
}

TEST_CASE("batched generations match individual draws in law")
{
    const auto law = tune_to_mean(ParetoParams{2.0, 1.0}, 2.0);
    const std::int64_t z = 3000, t = 200000;
    const int n = 20000;
    SimulationOptions batched{16, std::numeric_limits<std::int64_t>::max()};
    SimulationOptions single{1 << 30, std::numeric_limits<std::int64_t>::max()};
    MomentAccumulator mb, ms;
    std::int64_t jb = 0, js = 0;
    for (int r = 0; r < n; ++r) {
        RandomStream a(10, 0, static_cast<std::uint64_t>(r)), b(10, 1, static_cast<std::uint64_t>(r));
        const auto db = draw_generation(law, z, a, batched);
        const auto ds = draw_generation(law, z, b, single);
        REQUIRE(db.batched);
        REQUIRE_FALSE(ds.batched);
        mb.add(std::log(static_cast<double>(db.sum)));
        ms.add(std::log(static_cast<double>(ds.sum)));
        jb += db.max > t;
        js += ds.max > t;
    }
    const double se = std::hypot(mb.std_error_of_mean(), ms.std_error_of_mean());
    CHECK(std::abs(mb.mean() - ms.mean()) <= 4 * se);
    check_binomial(jb, n, exceedance_probability(law, z, t));
    check_binomial(js, n, exceedance_probability(law, z, t));
}

TEST_CASE("exceedance-conditioned generation always exceeds")
{
    const auto law = tune_to_mean(WeibullParams{0.4, 1.0, 1.0}, 2.0);
    for (int r = 0; r < 5000; ++r) {
        RandomStream rng(11, 0, static_cast<std::uint64_t>(r));
        const auto d = draw_generation_with_exceedance(law, 1 + r % 2000, 500, rng);
        REQUIRE(d.max > 500);
        REQUIRE(d.sum >= d.max);
    }
    CHECK(exceedance_probability(law, 1, 10) == doctest::Approx(law.tail_at(10)).epsilon(1e-14));
    const double p = law.tail_at(10);
    CHECK(exceedance_probability(law, 7, 10) == doctest::Approx(1 - std::pow(1 - p, 7)).epsilon(1e-12));
}

TEST_CASE("population overflow is reported")
{
    const auto law = tune_to_mean(ParetoParams{1.2, 1.0}, 3.0);
    SimulationOptions opts{512, 1000000};
    bool overflowed = false;
    for (int r = 0; r < 200 && !overflowed; ++r) {
        RandomStream rng(12, 0, static_cast<std::uint64_t>(r));
        try {
            simulate(law, 30, rng, opts);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::PopulationOverflow);
            overflowed = true;
        }
    }
    CHECK(overflowed);
}

TEST_CASE("integer thresholds")
{
    CHECK(integer_threshold(6.75) == 6);
    CHECK(integer_threshold(-0.5) == -1);
    CHECK(integer_threshold(1e300) == std::numeric_limits<std::int64_t>::max());
}
