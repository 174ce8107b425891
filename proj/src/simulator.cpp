#include "gwtails/simulator.hpp"

#include <algorithm>
#include <cmath>

#include <boost/random/binomial_distribution.hpp>

#include "gwtails/error.hpp"

namespace gwtails {
namespace {

constexpr std::int64_t kMaxInt = std::numeric_limits<std::int64_t>::max();

void add_checked(std::int64_t& sum, std::int64_t value, std::int64_t limit)
{
    std::int64_t out;
    if (__builtin_add_overflow(sum, value, &out) || out > limit)
        fail(ErrorCode::PopulationOverflow, "generation size exceeds the population limit");
    sum = out;
}

void add_product_checked(std::int64_t& sum, std::int64_t value, std::int64_t count, std::int64_t limit)
{
    std::int64_t product;
    if (__builtin_mul_overflow(value, count, &product))
        fail(ErrorCode::PopulationOverflow, "generation size exceeds the population limit");
    add_checked(sum, product, limit);
}

void validate(const SimulationOptions& options)
{
    require(options.population_cap >= 1, "population_cap must be at least 1");
    require(options.overflow_limit >= 1, "overflow_limit must be at least 1");
}

GenerationDraw draw_batched(const OffspringLaw& law, std::int64_t z, RandomStream& rng,
                            const SimulationOptions& options, std::int64_t hi)
{
    GenerationDraw out;
    out.batched = true;
    const double tail_hi = hi == kMaxInt ? 0.0 : law.tail_at(hi);
    const double mass = 1.0 - tail_hi;
    const std::int64_t head_limit = std::min(law.table_size(), hi == kMaxInt ? kMaxInt : hi + 1);

    // Head size H balances z * P{xi >= H} against H categories.
    std::int64_t lo = 1, up = head_limit;
    auto excess = [&](std::int64_t h) {
        return static_cast<double>(z) * (law.tail_at(h - 1) - tail_hi) / mass - static_cast<double>(h);
    };
    while (lo < up) {
        const std::int64_t mid = lo + (up - lo) / 2;
        if (excess(mid) <= 0.0)
            up = mid;
        else
            lo = mid + 1;
    }
    const std::int64_t head = lo;

    std::int64_t remaining = z;
    for (std::int64_t j = 0; j < head && remaining > 0; ++j) {
        std::int64_t count;
        if (j == hi) {
            count = remaining;
        } else {
            const double denom = law.tail_at(j - 1) - tail_hi;
            const double p = denom > 0.0 ? std::clamp(law.pmf(j) / denom, 0.0, 1.0) : 1.0;
            if (p == 0.0) continue;
            boost::random::binomial_distribution<std::int64_t, double> binom(remaining, p);
            count = binom(rng);
        }
        if (count > 0) {
            add_product_checked(out.sum, j, count, options.overflow_limit);
            out.max = j;
            remaining -= count;
        }
    }
    for (std::int64_t i = 0; i < remaining; ++i) {
        const std::int64_t draw = law.sample_between(head - 1, hi, rng);
        add_checked(out.sum, draw, options.overflow_limit);
        out.max = std::max(out.max, draw);
    }
    return out;
}

}  // namespace

std::int64_t integer_threshold(double value)
{
    require(!std::isnan(value), "threshold is NaN");
    if (value < 0) return -1;
    if (value >= 9.2e18) return kMaxInt;
    return static_cast<std::int64_t>(std::floor(value));
}

GenerationDraw draw_generation(const OffspringLaw& law, std::int64_t z, RandomStream& rng,
                               const SimulationOptions& options, std::int64_t hi)
{
    require(z >= 0, "generation size must be nonnegative");
    if (z > options.population_cap) return draw_batched(law, z, rng, options, hi);
    GenerationDraw out;
    if (hi == kMaxInt) {
        for (std::int64_t i = 0; i < z; ++i) {
            const std::int64_t draw = law.sample(rng);
            add_checked(out.sum, draw, options.overflow_limit);
            out.max = std::max(out.max, draw);
        }
    } else {
        for (std::int64_t i = 0; i < z; ++i) {
            const std::int64_t draw = law.sample_between(-1, hi, rng);
            add_checked(out.sum, draw, options.overflow_limit);
            out.max = std::max(out.max, draw);
        }
    }
    return out;
}

double exceedance_probability(const OffspringLaw& law, std::int64_t z, std::int64_t t)
{
    const double p = law.tail_at(t);
    if (p >= 1.0) return z > 0 ? 1.0 : 0.0;
    return -std::expm1(static_cast<double>(z) * std::log1p(-p));
}

GenerationDraw draw_generation_with_exceedance(const OffspringLaw& law, std::int64_t z, std::int64_t t,
                                               RandomStream& rng, const SimulationOptions& options)
{
    require(z >= 1, "conditioning on an exceedance needs at least one individual");
    const double p = law.tail_at(t);
    if (!(p > 0.0)) fail(ErrorCode::ConditionalTailEmpty, "tail vanishes at the jump threshold");

    std::int64_t before = 0;
    if (p < 1.0) {
        const double log_q = std::log1p(-p);
        const double total = -std::expm1(static_cast<double>(z) * log_q);
        const double g = std::floor(std::log1p(-rng.uniform_open_closed() * total) / log_q);
        before = g >= static_cast<double>(z - 1) ? z - 1 : std::max<std::int64_t>(0, static_cast<std::int64_t>(g));
    }

    GenerationDraw out = draw_generation(law, before, rng, options, t);
    const std::int64_t jump = law.sample_above(t, rng);
    add_checked(out.sum, jump, options.overflow_limit);
    out.max = std::max(out.max, jump);
    const GenerationDraw rest = draw_generation(law, z - before - 1, rng, options);
    add_checked(out.sum, rest.sum, options.overflow_limit);
    out.max = std::max(out.max, rest.max);
    out.batched = out.batched || rest.batched;
    return out;
}

namespace {

void append_generation(TrajectoryRecord& rec, double m, const GenerationDraw& draw)
{
    rec.gen_max_offspring.push_back(draw.max);
    rec.sizes.push_back(draw.sum);
    const int k = static_cast<int>(rec.sizes.size()) - 1;
    rec.w_values.push_back(static_cast<double>(draw.sum) / std::pow(m, k));
    rec.capped = rec.capped || draw.batched;
    if (draw.sum == 0 && !rec.extinct_at) rec.extinct_at = k;
}

TrajectoryRecord start_record(int n, const RandomStream& rng)
{
    require(n >= 0, "number of generations must be nonnegative");
    TrajectoryRecord rec;
    rec.sizes.reserve(static_cast<std::size_t>(n) + 1);
    rec.w_values.reserve(static_cast<std::size_t>(n) + 1);
    rec.gen_max_offspring.reserve(static_cast<std::size_t>(n));
    rec.sizes.push_back(1);
    rec.w_values.push_back(1.0);
    rec.seed = rng.id();
    return rec;
}

}  // namespace

TrajectoryRecord simulate(const OffspringLaw& law, int n, RandomStream& rng, const SimulationOptions& options)
{
    validate(options);
    TrajectoryRecord rec = start_record(n, rng);
    const double m = law.mean();
    for (int k = 0; k < n; ++k) append_generation(rec, m, draw_generation(law, rec.sizes.back(), rng, options));
    return rec;
}

EventFlags compute_events(const TrajectoryRecord& record, double m, const EventOptions& events)
{
    const int n = static_cast<int>(record.sizes.size()) - 1;
    require(n <= 62, "event tracking supports at most 62 generations");
    EventFlags flags;
    flags.threshold_x = events.x;
    flags.eps = events.eps;
    flags.jump_factor = events.jump_factor();
    bool holds = true;
    for (int k = 0; k <= n; ++k) {
        const double scale = std::pow(m, k);
        holds = holds && static_cast<double>(record.sizes[static_cast<std::size_t>(k)]) <= scale * events.x;
        if (!holds) break;
        flags.b_k_holds |= std::uint64_t{1} << k;
        if (k < n && static_cast<double>(record.gen_max_offspring[static_cast<std::size_t>(k)]) >
                         scale * m * flags.jump_factor * events.x)
            flags.a_k_fired |= std::uint64_t{1} << k;
    }
    return flags;
}

std::pair<TrajectoryRecord, EventFlags> simulate_with_events(const OffspringLaw& law, int n,
                                                             const EventOptions& events, RandomStream& rng,
                                                             const SimulationOptions& options)
{
    require(events.x > 0.0 && std::isfinite(events.x), "event threshold x must be positive");
    require(events.eps >= 0.0, "eps must be nonnegative");
    require(events.jump_factor() > 0.0, "jump multiplier must be positive");
    require(n <= 62, "event tracking supports at most 62 generations");
    TrajectoryRecord rec = simulate(law, n, rng, options);
    EventFlags flags = compute_events(rec, law.mean(), events);
    return {std::move(rec), flags};
}

TrajectoryRecord simulate_forced_jump(const OffspringLaw& law, int n, int k, std::int64_t jump_threshold,
                                      RandomStream& rng, const SimulationOptions& options)
{
    validate(options);
    require(k >= 0 && k < n, "forced generation must satisfy 0 <= k < n");
    require(jump_threshold >= -1, "jump threshold must be at least -1");
    if (!(law.tail_at(jump_threshold) > 0.0))
        fail(ErrorCode::ConditionalTailEmpty, "tail vanishes at the jump threshold");
    TrajectoryRecord rec = start_record(n, rng);
    const double m = law.mean();
    for (int j = 0; j < n; ++j) {
        const std::int64_t z = rec.sizes.back();
        if (j != k || z == 0) {
            append_generation(rec, m, draw_generation(law, z, rng, options));
            continue;
        }
        GenerationDraw draw;
        draw.max = draw.sum = jump_threshold < 0 ? law.sample(rng) : law.sample_above(jump_threshold, rng);
        const GenerationDraw rest = draw_generation(law, z - 1, rng, options);
        add_checked(draw.sum, rest.sum, options.overflow_limit);
        draw.max = std::max(draw.max, rest.max);
        draw.batched = rest.batched;
        append_generation(rec, m, draw);
    }
    return rec;
}

}  // namespace gwtails
