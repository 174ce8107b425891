#include "gwtails/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gwtails/error.hpp"
#include "gwtails/numeric.hpp"
#include "gwtails/parallel.hpp"

namespace gwtails {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_n_x(int n, double x)
{
    require(n >= 0, "n must be nonnegative");
    require(std::isfinite(x), "x must be finite");
}

}  // namespace

CenteredSummandLaw::CenteredSummandLaw(OffspringLaw base, double shift)
    : base_(std::move(base)), shift_(shift), mean_eta_(base_.mean() - shift)
{
    require(std::isfinite(shift), "shift must be finite");
}

double CenteredSummandLaw::hazard(double x) const
{
    const double t = tail(x);
    if (t == 0.0) fail(ErrorCode::TailZero, "summand tail vanishes at x = " + std::to_string(x));
    return -std::log(t);
}

double CenteredSummandLaw::pmf_at(double v) const
{
    const double k = v + shift_;
    const double r = std::round(k);
    if (std::abs(k - r) > 1e-9 * std::max(1.0, std::abs(k)) || r < 0) return 0.0;
    return base_.pmf(static_cast<std::int64_t>(r));
}

std::string to_string(Validity v) { return v == Validity::InRange ? "in_range" : "out_of_range"; }

double truncated_mgf(const CenteredSummandLaw& summand, double lambda, double y)
{
    require(lambda > 0.0 && std::isfinite(lambda), "lambda must be positive");
    require(!std::isnan(y), "y is NaN");
    if (lambda * y > 700.0) fail(ErrorCode::Overflow, "lambda * y exceeds 700");
    const double top = std::floor(y + summand.shift());
    if (top < 0) return 0.0;
    const OffspringLaw& law = summand.base();
    std::int64_t last = static_cast<std::int64_t>(top);
    if (auto s = law.support_max()) last = std::min(last, *s);
    if (last - law.table_size() > (std::int64_t{1} << 27))
        fail(ErrorCode::TooLarge, "truncated mgf cutoff too far beyond the tabulated range");
    CompensatedSum sum;
    for (std::int64_t k = 0; k <= last; ++k) {
        const double p = law.pmf(k);
        if (p > 0.0) sum += p * std::exp(lambda * (static_cast<double>(k) - summand.shift()));
    }
    return sum.value();
}

BoundResult chebyshev_sum_bound(const CenteredSummandLaw& summand, int n, double x, double y, double lambda)
{
    check_n_x(n, x);
    require(y > 0.0 && y < x, "Chebyshev bound needs 0 < y < x");
    require(lambda > 0.0 && std::isfinite(lambda), "lambda must be positive");
    require(summand.mean_eta() <= 0.0, "Chebyshev sum bound needs a nonpositive summand mean");
    BoundResult r;
    r.lambda_used = lambda;
    r.y_used = y;
    r.jump_term = n * summand.tail(y);
    const double mgf = truncated_mgf(summand, lambda, y);
    r.chernoff_term = mgf > 0.0 ? std::exp(-lambda * x + n * std::log(mgf)) : (n == 0 ? std::exp(-lambda * x) : 0.0);
    r.bound_value = r.jump_term + r.chernoff_term;
    r.raw_chebyshev = r.bound_value;
    r.raw_lambda = lambda;
    r.validity = Validity::InRange;
    r.range_note = "exponential Chebyshev bound, valid for every (y, lambda)";
    return r;
}

BoundResult prop22_bound(const CenteredSummandLaw& summand, int n, double x, double eps, double c)
{
    check_n_x(n, x);
    require(x >= 1.0, "prop22 bound needs x >= 1");
    require(eps > 0.0 && eps < 1.0, "prop22 bound needs eps in (0, 1)");
    require(c > 0.0, "range constant c must be positive");
    const double y = eps * x;
    const double lambda = 2.0 * summand.hazard(x) / x;
    BoundResult r = chebyshev_sum_bound(summand, n, x, y, lambda);
    const double lx = std::log(x);
    const double limit = lx > 0.0 ? x * x / (c * lx) : kInf;
    r.validity = n <= limit ? Validity::InRange : Validity::OutOfRange;
    r.range_note = "n <= x^2/(c log x) = " + std::to_string(limit) + " with c = " + std::to_string(c);
    return r;
}

BoundResult prop23_bound(const CenteredSummandLaw& summand, int n, double x, double y, double eps, double c)
{
    check_n_x(n, x);
    require(eps > 0.0 && eps < 1.0, "prop23 bound needs eps in (0, 1)");
    require(c > 0.0, "range constant c must be positive");
    require(x > 0.0 && y > 0.0, "prop23 bound needs x, y > 0");
    if (y > (1.0 - eps) * x) fail(ErrorCode::BadParam, "prop23 bound needs y <= (1 - eps) x");
    BoundResult r;
    r.y_used = y;
    const double g = summand.tail(y);
    r.jump_term = n * g;
    r.chernoff_term = g;
    r.bound_value = r.jump_term + r.chernoff_term;
    const double ry = g > 0.0 ? -std::log(g) : kInf;
    r.lambda_used = (1.0 + eps) * ry / x;
    const double stat = n * ry / (x * x);
    r.validity = stat <= 1.0 / c ? Validity::InRange : Validity::OutOfRange;
    r.range_note = "n R(y)/x^2 = " + std::to_string(stat) + " vs 1/c = " + std::to_string(1.0 / c);
    r.raw_lambda = r.lambda_used;
    r.raw_chebyshev = kNaN;
    if (std::isfinite(r.lambda_used) && r.lambda_used > 0.0 && summand.mean_eta() <= 0.0 && y < x) {
        try {
            r.raw_chebyshev = chebyshev_sum_bound(summand, n, x, y, r.lambda_used).bound_value;
        } catch (const Error& e) {
            r.range_note += "; Chebyshev counterpart unavailable: " + std::string(e.what());
        }
    }
    return r;
}

std::vector<double> exact_sum_distribution(const OffspringLaw& law, int n)
{
    require(n >= 0, "n must be nonnegative");
    const auto top = law.support_max();
    require(top.has_value(), "exact sum distribution needs a finite support law");
    const std::int64_t size = *top * n + 1;
    if (static_cast<double>(*top) * n > 1e8) fail(ErrorCode::TooLarge, "sum support exceeds 1e8 points");
    std::vector<double> pmf(static_cast<std::size_t>(*top + 1));
    for (std::int64_t k = 0; k <= *top; ++k) pmf[static_cast<std::size_t>(k)] = law.pmf(k);
    std::vector<double> dist{1.0};
    for (int i = 0; i < n; ++i) {
        std::vector<double> next(dist.size() + pmf.size() - 1, 0.0);
        for (std::size_t a = 0; a < dist.size(); ++a) {
            if (dist[a] == 0.0) continue;
            for (std::size_t b = 0; b < pmf.size(); ++b) next[a + b] += dist[a] * pmf[b];
        }
        dist.swap(next);
    }
    (void)size;
    return dist;
}

double exact_sum_tail(const CenteredSummandLaw& summand, int n, double x)
{
    const auto dist = exact_sum_distribution(summand.base(), n);
    // T_n > x  <=>  sum of xi > x + n shift
    const double level = x + n * summand.shift();
    CompensatedSum s;
    for (std::size_t v = dist.size(); v-- > 0;) {
        if (!(static_cast<double>(v) > level)) break;
        s += dist[v];
    }
    return s.value();
}

std::vector<SumTailEstimate> sum_tail_mc(const CenteredSummandLaw& summand, int n, const std::vector<double>& x_grid,
                                         std::int64_t replicas, const MonteCarloOptions& options,
                                         SumEstimator method)
{
    require(n >= 1, "sum_tail_mc needs n >= 1");
    require(replicas >= 1, "replicas must be positive");
    require(!x_grid.empty(), "x grid is empty");
    const OffspringLaw& law = summand.base();
    const double shift = summand.shift();
    using Acc = std::vector<MomentAccumulator>;

    auto work = [&](std::int64_t begin, std::int64_t end) {
        Acc acc(x_grid.size());
        for (std::int64_t r = begin; r < end; ++r) {
            RandomStream rng(options.seed, options.lane, static_cast<std::uint64_t>(r));
            if (method == SumEstimator::Naive) {
                double sum = 0.0;
                for (int i = 0; i < n; ++i) sum += static_cast<double>(law.sample(rng));
                const double t = sum - n * shift;
                for (std::size_t j = 0; j < x_grid.size(); ++j) acc[j].add(t > x_grid[j] ? 1.0 : 0.0);
                continue;
            }
            // The last summand is integrated out; ties at the maximum are broken uniformly.
            std::int64_t sum = 0, top = -1, ties = 0;
            for (int i = 0; i < n - 1; ++i) {
                const std::int64_t v = law.sample(rng);
                sum += v;
                if (v > top) {
                    top = v;
                    ties = 1;
                } else if (v == top) {
                    ++ties;
                }
            }
            const double p_top = top >= 0 ? law.pmf(top) : 0.0;
            for (std::size_t j = 0; j < x_grid.size(); ++j) {
                const double need = x_grid[j] + n * shift - static_cast<double>(sum);  // xi_n > need
                double value = law.tail(std::max(static_cast<double>(top), need));
                if (top >= 0 && static_cast<double>(top) > need) value += p_top / static_cast<double>(ties + 1);
                acc[j].add(n * value);
            }
        }
        return acc;
    };
    auto merge = [](Acc& into, Acc&& part) {
        for (std::size_t j = 0; j < into.size(); ++j) into[j].merge(part[j]);
    };
    Acc total = parallel_reduce(replicas, options.workers, options.chunk, Acc(x_grid.size()), work, merge);

    std::vector<SumTailEstimate> out;
    for (std::size_t j = 0; j < x_grid.size(); ++j)
        out.push_back({x_grid[j], total[j].mean(), total[j].std_error_of_mean()});
    return out;
}

HarnessReport sstar_bound_harness(const CenteredSummandLaw& summand, const std::vector<int>& n_grid,
                                  const std::vector<double>& x_grid, std::int64_t replicas,
                                  const MonteCarloOptions& options, double tolerance, SumEstimator method)
{
    require(summand.mean_eta() < 0.0, "harness needs a negative summand mean");
    require(!n_grid.empty() && !x_grid.empty(), "harness grids must be nonempty");
    HarnessReport report;
    report.tolerance = tolerance;
    report.pass = true;
    const double a = std::abs(summand.mean_eta());
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        const int n = n_grid[i];
        MonteCarloOptions opt = options;
        opt.lane = options.lane + static_cast<std::uint32_t>(i);
        const auto est = sum_tail_mc(summand, n, x_grid, replicas, opt, method);
        double top_ratio = kNaN;
        for (const auto& e : est) {
            HarnessRow row;
            row.n = n;
            row.x = e.x;
            row.estimate = e.estimate;
            row.std_error = e.std_error;
            row.n_gbar = n * summand.tail(e.x);
            row.ratio = row.n_gbar > 0.0 ? row.estimate / row.n_gbar : kNaN;
            row.informative = e.x > n * a;
            if (row.informative && std::isfinite(row.ratio)) top_ratio = row.ratio;
            report.rows.push_back(row);
        }
        report.top_ratio.push_back(top_ratio);
        if (!(top_ratio <= 1.0 + tolerance)) report.pass = false;
    }
    return report;
}

}  // namespace gwtails
