#include "gwtails/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gwtails/error.hpp"
#include "gwtails/numeric.hpp"
#include "gwtails/parallel.hpp"

namespace gwtails {
namespace {

constexpr double kZ95 = 1.959963984540054;

void fill_interval(EstimatorResult& r)
{
    if (r.method != EstimatorMethod::ExactConvolution && r.exceedances == 0 && r.estimate == 0.0) {
        r.ci_low = 0.0;
        r.ci_high = std::min(1.0, 3.0 / static_cast<double>(std::max<std::int64_t>(1, r.replicas_used)));
        return;
    }
    r.ci_low = std::clamp(r.estimate - kZ95 * r.std_error, 0.0, 1.0);
    r.ci_high = std::clamp(r.estimate + kZ95 * r.std_error, 0.0, 1.0);
    r.ci_low = std::min(r.ci_low, r.estimate);
    r.ci_high = std::max(r.ci_high, r.estimate);
}

struct NaiveTally {
    std::int64_t hits = 0;
    std::int64_t overflowed = 0;
};

}  // namespace

std::string to_string(EstimatorMethod method)
{
    switch (method) {
        case EstimatorMethod::NaiveMC: return "naive";
        case EstimatorMethod::BigJumpDecomposition: return "bigjump";
        case EstimatorMethod::ExactConvolution: return "exact";
    }
    return "unknown";
}

std::optional<EstimatorMethod> parse_estimator_method(const std::string& text)
{
    if (text == "naive" || text == "NaiveMC") return EstimatorMethod::NaiveMC;
    if (text == "bigjump" || text == "BigJumpDecomposition") return EstimatorMethod::BigJumpDecomposition;
    if (text == "exact" || text == "ExactConvolution") return EstimatorMethod::ExactConvolution;
    return std::nullopt;
}

EstimatorResult naive_mc(const OffspringLaw& law, int n, double x, std::int64_t replicas,
                         const MonteCarloOptions& options)
{
    require(n >= 0, "n must be nonnegative");
    require(x >= 0.0 && std::isfinite(x), "x must be nonnegative");
    require(replicas >= 100, "naive_mc needs at least 100 replicas");
    const double level = std::pow(law.mean(), n) * x;

    auto work = [&](std::int64_t begin, std::int64_t end) {
        NaiveTally t;
        for (std::int64_t r = begin; r < end; ++r) {
            RandomStream rng(options.seed, options.lane, static_cast<std::uint64_t>(r));
            std::int64_t z = 1;
            try {
                for (int k = 0; k < n && z > 0; ++k) z = draw_generation(law, z, rng, options.sim).sum;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::PopulationOverflow) throw;
                ++t.overflowed;
                ++t.hits;
                continue;
            }
            if (static_cast<double>(z) > level) ++t.hits;
        }
        return t;
    };
    auto merge = [](NaiveTally& a, NaiveTally&& b) {
        a.hits += b.hits;
        a.overflowed += b.overflowed;
    };
    const NaiveTally t = parallel_reduce(replicas, options.workers, options.chunk, NaiveTally{}, work, merge);

    EstimatorResult r;
    r.method = EstimatorMethod::NaiveMC;
    r.replicas_used = replicas;
    r.exceedances = t.hits;
    r.overflowed = t.overflowed;
    const double N = static_cast<double>(replicas);
    r.estimate = static_cast<double>(t.hits) / N;
    r.std_error = std::sqrt(r.estimate * (1.0 - r.estimate) / N);
    fill_interval(r);
    return r;
}

std::vector<double> exact_generation_distribution(const OffspringLaw& law, int n, std::int64_t max_entries)
{
    require(n >= 0, "n must be nonnegative");
    const auto top = law.support_max();
    if (!top) fail(ErrorCode::BadParam, "exact convolution needs a finite support law");
    const double size = std::pow(static_cast<double>(std::max<std::int64_t>(*top, 1)), n) + 1.0;
    if (size > static_cast<double>(max_entries)) fail(ErrorCode::TooLarge, "Z_n support exceeds the entry limit");
    const auto limit = static_cast<std::int64_t>(size);

    std::vector<double> pmf(static_cast<std::size_t>(*top + 1));
    for (std::int64_t k = 0; k <= *top; ++k) pmf[static_cast<std::size_t>(k)] = law.pmf(k);

    // dist of Z_j started from one ancestor; Z_{j} = sum of Z_1 i.i.d. copies of Z_{j-1}.
    std::vector<double> dist{0.0, 1.0};
    double work = 0.0;
    for (int j = 0; j < n; ++j) {
        std::vector<double> result(1, pmf[0]);
        std::vector<double> power{1.0};  // dist^{*0}
        for (std::int64_t i = 1; i <= *top; ++i) {
            std::vector<double> next(std::min<std::size_t>(power.size() + dist.size() - 1, static_cast<std::size_t>(limit)), 0.0);
            for (std::size_t a = 0; a < power.size(); ++a) {
                if (power[a] == 0.0) continue;
                for (std::size_t b = 0; b < dist.size() && a + b < next.size(); ++b) next[a + b] += power[a] * dist[b];
            }
            work += static_cast<double>(power.size()) * static_cast<double>(dist.size());
            if (work > 2e10) fail(ErrorCode::TooLarge, "exact convolution work exceeds the budget");
            power.swap(next);
            const double p = pmf[static_cast<std::size_t>(i)];
            if (p == 0.0) continue;
            if (result.size() < power.size()) result.resize(power.size(), 0.0);
            for (std::size_t a = 0; a < power.size(); ++a) result[a] += p * power[a];
        }
        dist.swap(result);
    }
    return dist;
}

EstimatorResult exact_convolution(const OffspringLaw& law, int n, std::int64_t threshold)
{
    require(n >= 0, "n must be nonnegative");
    require(threshold >= 0, "threshold must be nonnegative");
    const auto top = law.support_max();
    if (!top) fail(ErrorCode::BadParam, "exact convolution needs a finite support law");

    // Only P{Z_n <= threshold} is needed, so every vector is cut at threshold + 1
    // entries; sums of nonnegative variables never move mass below the cut.
    const double full = std::pow(static_cast<double>(std::max<std::int64_t>(*top, 1)), n) + 1.0;
    const double cut_d = std::min(full, static_cast<double>(threshold) + 1.0);
    if (cut_d > 1e8) fail(ErrorCode::TooLarge, "exact convolution would need more than 1e8 entries");
    const auto cut = static_cast<std::size_t>(cut_d);

    std::vector<double> pmf(static_cast<std::size_t>(*top + 1));
    for (std::int64_t k = 0; k <= *top; ++k) pmf[static_cast<std::size_t>(k)] = law.pmf(k);

    std::vector<double> dist(std::min<std::size_t>(2, cut), 0.0);
    if (cut >= 2) dist[1] = 1.0;
    double work = 0.0;
    for (int j = 0; j < n; ++j) {
        std::vector<double> result(cut, 0.0);
        result[0] = pmf[0];
        std::vector<double> power(1, 1.0);
        for (std::int64_t i = 1; i <= *top; ++i) {
            std::vector<double> next(std::min(power.size() + dist.size() - 1, cut), 0.0);
            for (std::size_t a = 0; a < power.size(); ++a) {
                if (power[a] == 0.0) continue;
                const std::size_t bmax = std::min(dist.size(), next.size() - a);
                for (std::size_t b = 0; b < bmax; ++b) next[a + b] += power[a] * dist[b];
            }
            work += static_cast<double>(power.size()) * static_cast<double>(dist.size());
            if (work > 2e10) fail(ErrorCode::TooLarge, "exact convolution work exceeds the budget");
            power.swap(next);
            const double p = pmf[static_cast<std::size_t>(i)];
            for (std::size_t a = 0; a < power.size(); ++a) result[a] += p * power[a];
        }
        dist.swap(result);
    }
    CompensatedSum below;
    for (double v : dist) below += v;

    EstimatorResult r;
    r.method = EstimatorMethod::ExactConvolution;
    r.estimate = std::clamp(1.0 - below.value(), 0.0, 1.0);
    r.std_error = 0.0;
    r.replicas_used = 0;
    r.ci_low = r.ci_high = r.estimate;
    return r;
}

namespace {

struct KTally {
    MomentAccumulator contribution;
    MomentAccumulator jump;
    std::int64_t overflowed = 0;
    std::int64_t hits = 0;
};

}  // namespace

EstimatorResult big_jump_estimator(const OffspringLaw& law, int n, double x, double eps, std::int64_t replicas_per_k,
                                   const MonteCarloOptions& options)
{
    require(n >= 1, "big_jump_estimator needs n >= 1");
    require(x > 0.0 && std::isfinite(x), "x must be positive");
    require(eps >= 0.0, "eps must be nonnegative");
    require(replicas_per_k >= 2, "need at least 2 replicas per generation");
    const double m = law.mean();
    const double target = std::pow(m, n) * x;

    EstimatorResult r;
    r.method = EstimatorMethod::BigJumpDecomposition;
    r.replicas_used = replicas_per_k * n;
    std::vector<double> breakdown(static_cast<std::size_t>(n), 0.0);
    r.breakdown_std_error.assign(static_cast<std::size_t>(n), 0.0);
    r.jump_probability.assign(static_cast<std::size_t>(n), 0.0);
    double variance = 0.0;

    for (int k = 0; k < n; ++k) {
        const std::int64_t t = integer_threshold(std::pow(m, k + 1) * (1.0 + eps) * x);
        if (!(law.tail_at(t) > 0.0)) {
            r.empty_conditional_k.push_back(k);
            continue;
        }
        const std::uint32_t lane = options.lane + 1 + static_cast<std::uint32_t>(k);
        auto work = [&](std::int64_t begin, std::int64_t end) {
            KTally tally;
            for (std::int64_t rep = begin; rep < end; ++rep) {
                RandomStream rng(options.seed, lane, static_cast<std::uint64_t>(rep));
                std::int64_t z = 1;
                bool in_b = true;
                for (int j = 0; j < k && z > 0; ++j) {
                    z = draw_generation(law, z, rng, options.sim).sum;
                    if (static_cast<double>(z) > std::pow(m, j + 1) * x) {
                        in_b = false;
                        break;
                    }
                }
                if (!in_b || z == 0) {
                    tally.contribution.add(0.0);
                    tally.jump.add(0.0);
                    continue;
                }
                const double weight = exceedance_probability(law, z, t);
                tally.jump.add(weight);
                bool exceeds = false;
                try {
                    z = draw_generation_with_exceedance(law, z, t, rng, options.sim).sum;
                    for (int j = k + 1; j < n && z > 0; ++j) z = draw_generation(law, z, rng, options.sim).sum;
                    exceeds = static_cast<double>(z) > target;
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::PopulationOverflow) throw;
                    ++tally.overflowed;
                    exceeds = true;
                }
                if (exceeds) ++tally.hits;
                tally.contribution.add(exceeds ? weight : 0.0);
            }
            return tally;
        };
        auto merge = [](KTally& a, KTally&& b) {
            a.contribution.merge(b.contribution);
            a.jump.merge(b.jump);
            a.overflowed += b.overflowed;
            a.hits += b.hits;
        };
        const KTally tally = parallel_reduce(replicas_per_k, options.workers, options.chunk, KTally{}, work, merge);
        const auto idx = static_cast<std::size_t>(k);
        breakdown[idx] = tally.contribution.mean();
        r.breakdown_std_error[idx] = tally.contribution.std_error_of_mean();
        r.jump_probability[idx] = tally.jump.mean();
        variance += r.breakdown_std_error[idx] * r.breakdown_std_error[idx];
        r.overflowed += tally.overflowed;
        r.exceedances += tally.hits;
    }
    CompensatedSum total;
    for (double b : breakdown) total += b;
    r.estimate = std::clamp(total.value(), 0.0, 1.0);
    r.std_error = std::sqrt(variance);
    r.per_generation_breakdown = std::move(breakdown);
    fill_interval(r);
    return r;
}

TailApproximation approximate(const OffspringLaw& law, ApproxMethod method, Horizon n, double x)
{
    switch (method) {
        case ApproxMethod::SeriesFinite:
            if (!n) return series_tail_infinite(law, x);
            return series_tail(law, *n, x);
        case ApproxMethod::SeriesInfinite: return series_tail_infinite(law, x);
        case ApproxMethod::WeibullPrincipal: return weibull_tail(law, x);
        case ApproxMethod::WeibullCorrectedLower: {
            const auto* w = std::get_if<WeibullParams>(&law.params());
            require(w != nullptr, "corrected Weibull bound needs a Weibull law");
            const double sigma_sq = var_wn(law.variance(), law.mean(), n);
            return weibull_corrected_lower(w->beta, law.mean(), sigma_sq, x);
        }
        case ApproxMethod::IndexOneIntegral:
        case ApproxMethod::IndexOneIntegralInfinite:
            return index_one_tail(law, method == ApproxMethod::IndexOneIntegralInfinite ? Horizon{} : n, x);
        case ApproxMethod::Lemma32Lower: {
            require(n.has_value(), "lower bound needs finite n");
            const double sd = std::sqrt(law.variance() / (law.mean() * law.mean() - law.mean()));
            return lemma32_lower(law, *n, x, 10.0 * sd);
        }
    }
    fail(ErrorCode::BadParam, "unknown approximation method");
}

std::vector<ComparisonRow> compare_to_asymptotics(const OffspringLaw& law, const std::vector<int>& n_list,
                                                  const std::vector<double>& x_list, ApproxMethod method,
                                                  EstimatorMethod estimator, std::int64_t budget,
                                                  const MonteCarloOptions& options, double eps)
{
    require(!n_list.empty() && !x_list.empty(), "comparison grids must be nonempty");
    std::vector<ComparisonRow> rows;
    std::uint32_t cell = 0;
    for (int n : n_list) {
        for (double x : x_list) {
            MonteCarloOptions opt = options;
            opt.lane = options.lane + cell * 64u;
            ++cell;
            ComparisonRow row;
            row.n = n;
            row.x = x;
            switch (estimator) {
                case EstimatorMethod::NaiveMC: row.estimate = naive_mc(law, n, x, budget, opt); break;
                case EstimatorMethod::BigJumpDecomposition:
                    row.estimate = big_jump_estimator(law, n, x, eps, budget, opt);
                    break;
                case EstimatorMethod::ExactConvolution:
                    row.estimate = exact_convolution(law, n, integer_threshold(std::pow(law.mean(), n) * x));
                    break;
            }
            row.approximation = approximate(law, method, n, x);
            row.ratio = row.approximation.value > 0.0 ? row.estimate.estimate / row.approximation.value
                                                      : std::numeric_limits<double>::quiet_NaN();
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace gwtails
