#include <doctest.h>

#include <set>

#include "gwtails/numeric.hpp"
#include "gwtails/parallel.hpp"
#include "gwtails/rng.hpp"

using namespace gwtails;

TEST_CASE("philox4x32-10 known answers")
{
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    CHECK(Philox4x32::apply(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::apply(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
          C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::apply(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
          C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct")
{
    RandomStream a(7, 1, 42), b(7, 1, 42);
    for (int i = 0; i < 100; ++i) REQUIRE(a() == b());

    std::set<std::uint64_t> first;
    for (std::uint64_t seed : {0ull, 1ull})
        for (std::uint32_t lane : {0u, 1u, (1u << 24) - 1})
            for (std::uint64_t rep : {0ull, 1ull, (1ull << 40) - 1}) {
                RandomStream r(seed, lane, rep);
                first.insert(r());
            }
    CHECK(first.size() == 18);
}

TEST_CASE("uniform_open_closed stays in (0, 1] and has the right mean")
{
    RandomStream r(3, 0, 0);
    MomentAccumulator acc;
    for (int i = 0; i < 200000; ++i) {
        const double u = r.uniform_open_closed();
        REQUIRE(u > 0.0);
        REQUIRE(u <= 1.0);
        acc.add(u);
    }
    CHECK(std::abs(acc.mean() - 0.5) < 4 * acc.std_error_of_mean());
    CHECK(acc.variance() == doctest::Approx(1.0 / 12.0).epsilon(0.01));
}

TEST_CASE("parallel_reduce is independent of the worker count")
{
    auto work = [](std::int64_t begin, std::int64_t end) {
        MomentAccumulator acc;
        for (std::int64_t i = begin; i < end; ++i) {
            RandomStream r(11, 2, static_cast<std::uint64_t>(i));
            acc.add(r.uniform_open_closed());
        }
        return acc;
    };
    auto merge = [](MomentAccumulator& into, MomentAccumulator&& part) { into.merge(part); };
    const auto one = parallel_reduce(50000, 1, 1000, MomentAccumulator{}, work, merge);
    const auto four = parallel_reduce(50000, 4, 1000, MomentAccumulator{}, work, merge);
    CHECK(one.mean() == four.mean());
    CHECK(one.variance() == four.variance());
}

TEST_CASE("moment accumulator merge matches a single pass")
{
    MomentAccumulator all, left, right;
    for (int i = 0; i < 1000; ++i) {
        const double v = std::sin(i) * i;
        all.add(v);
        (i < 400 ? left : right).add(v);
    }
    left.merge(right);
    CHECK(left.mean() == doctest::Approx(all.mean()).epsilon(1e-12));
    CHECK(left.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
    CHECK(left.std_error_of_variance() == doctest::Approx(all.std_error_of_variance()).epsilon(1e-9));
}

TEST_CASE("geometric grid")
{
    const auto g = geometric_grid(50, 2, 8);
    REQUIRE(g.size() == 8);
    CHECK(g.front() == 50);
    CHECK(g.back() == 6400);
}
