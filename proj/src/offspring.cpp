#include "gwtails/offspring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_zeta.h>

#include "gwtails/error.hpp"
#include "gwtails/numeric.hpp"

namespace gwtails {
namespace detail {
namespace {

constexpr std::int64_t kTableLimit = std::int64_t{1} << 20;
constexpr std::int64_t kMeanCut = 4096;
constexpr int kGuideSize = 4096;
constexpr double kTwoPi = 6.283185307179586;

double floor_tail(double v) { return v < kTailFloor ? 0.0 : v; }

double hurwitz_zeta(double s, double q)
{
    static std::once_flag once;
    std::call_once(once, [] { gsl_set_error_handler_off(); });
    gsl_sf_result result;
    int status = gsl_sf_hzeta_e(s, q, &result);
    if (status == GSL_EUNDRFLW) return 0.0;
    if (status != GSL_SUCCESS) fail(ErrorCode::Overflow, "Hurwitz zeta evaluation failed");
    return result.val;
}

double normal_density(double z) { return std::exp(-0.5 * z * z) / std::sqrt(kTwoPi); }

//! Tail representation valid at every nonnegative integer (passed as double).
class TailModel {
  public:
    virtual ~TailModel() = default;
    virtual double tail(double k) const = 0;
    virtual double pmf(double k) const { return tail(k - 1.0) - tail(k); }
    //! sum_{j >= K} tail(j)
    virtual double suffix_sum(double K) const = 0;
    //! sum_{j >= K} (2j + 1) tail(j); +inf when divergent.
    virtual double suffix_second(double K) const = 0;
    //! First K at which suffix formulas are trusted.
    virtual double analytic_cut() const { return static_cast<double>(kMeanCut); }
    virtual std::optional<std::int64_t> support_max() const { return std::nullopt; }

    double mean() const
    {
        const double cut = analytic_cut();
        CompensatedSum s;
        for (double k = 0; k < cut; k += 1.0) s += tail(k);
        s += suffix_sum(cut);
        return s.value();
    }

    double second_moment() const
    {
        const double cut = analytic_cut();
        double rest = suffix_second(cut);
        if (!std::isfinite(rest)) return kInf;
        CompensatedSum s;
        for (double k = 0; k < cut; k += 1.0) s += (2.0 * k + 1.0) * tail(k);
        s += rest;
        return s.value();
    }
};

class ParetoModel final : public TailModel {
  public:
    explicit ParetoModel(ParetoParams p) : p_(p), norm_(hurwitz_zeta(p.alpha + 1.0, p.scale)) {}

    double tail(double k) const override
    {
        if (k < 0) return 1.0;
        return hurwitz_zeta(p_.alpha + 1.0, k + 1.0 + p_.scale) / norm_;
    }
    double pmf(double k) const override
    {
        if (k < 0) return 0.0;
        return std::pow(k + p_.scale, -p_.alpha - 1.0) / norm_;
    }
    double suffix_sum(double K) const override
    {
        const double q = K + 1.0 + p_.scale;
        return (hurwitz_zeta(p_.alpha, q) - (K + p_.scale) * hurwitz_zeta(p_.alpha + 1.0, q)) / norm_;
    }
    double suffix_second(double K) const override
    {
        if (p_.alpha <= 2.0) return kInf;
        const double q = K + 1.0 + p_.scale;
        const double s = p_.scale;
        const double upper = (hurwitz_zeta(p_.alpha - 1.0, q) - 2.0 * s * hurwitz_zeta(p_.alpha, q) +
                              s * s * hurwitz_zeta(p_.alpha + 1.0, q)) /
                             norm_;
        return upper - K * K * tail(K);
    }
    double analytic_cut() const override { return 0.0; }

  private:
    ParetoParams p_;
    double norm_;
};

class WeibullModel final : public TailModel {
  public:
    explicit WeibullModel(WeibullParams p) : p_(p) {}

    double tail(double k) const override
    {
        if (k < 0) return 1.0;
        if (k == 0) return p_.q;
        return floor_tail(p_.q * std::exp(-p_.c * std::pow(k, p_.beta)));
    }
    double pmf(double k) const override
    {
        if (k < 0) return 0.0;
        if (k == 0) return 1.0 - p_.q;
        const double prev = tail(k - 1.0);
        const double gap = p_.c * (std::pow(k, p_.beta) - std::pow(k - 1.0, p_.beta));
        return prev * -std::expm1(-gap);
    }
    double suffix_sum(double K) const override
    {
        const double f = tail(K);
        if (f == 0.0) return 0.0;
        const double fprime = -p_.c * p_.beta * std::pow(K, p_.beta - 1.0) * f;
        return integral(0.0, K) + f / 2.0 - fprime / 12.0;
    }
    double suffix_second(double K) const override
    {
        const double f = tail(K);
        if (f == 0.0) return 0.0;
        const double fprime = -p_.c * p_.beta * std::pow(K, p_.beta - 1.0) * f;
        const double g = (2.0 * K + 1.0) * f;
        const double gprime = 2.0 * f + (2.0 * K + 1.0) * fprime;
        return 2.0 * integral(1.0, K) + integral(0.0, K) + g / 2.0 - gprime / 12.0;
    }

  private:
    //! integral_K^inf u^a q exp(-c u^beta) du
    double integral(double a, double K) const
    {
        const double s = (a + 1.0) / p_.beta;
        const double x = p_.c * std::pow(K, p_.beta);
        return p_.q / p_.beta * std::pow(p_.c, -s) * boost::math::tgamma(s, x);
    }

    WeibullParams p_;
};

class LogCorrectedModel final : public TailModel {
  public:
    explicit LogCorrectedModel(LogCorrectedParams p) : p_(p)
    {
        head_mass_ = (1.0 - formula(static_cast<double>(p.x0))) / static_cast<double>(p.x0 - 1);
    }

    double tail(double k) const override
    {
        if (k < 0) return 1.0;
        if (k < static_cast<double>(p_.x0)) return std::max(0.0, 1.0 - k * head_mass_);
        return floor_tail(formula(k));
    }
    double pmf(double k) const override
    {
        const double x0 = static_cast<double>(p_.x0);
        if (k <= 0) return 0.0;
        if (k < x0) return head_mass_;
        if (k == x0) return 0.0;
        return tail(k - 1.0) - tail(k);
    }
    double suffix_sum(double K) const override
    {
        const double lk = std::log(K);
        const double f = formula(K);
        const double fprime = -p_.c_tail * (lk + p_.p + 1.0) / (K * K * std::pow(lk, p_.p + 2.0));
        return p_.c_tail / (p_.p * std::pow(lk, p_.p)) + f / 2.0 - fprime / 12.0;
    }
    double suffix_second(double) const override { return kInf; }
    double analytic_cut() const override
    {
        return static_cast<double>(std::max<std::int64_t>(kMeanCut, p_.x0 + 1));
    }

    double formula(double k) const { return p_.c_tail / (k * std::pow(std::log(k), p_.p + 1.0)); }

  private:
    LogCorrectedParams p_;
    double head_mass_ = 0.0;
};

class LogNormalModel final : public TailModel {
  public:
    explicit LogNormalModel(LogNormalParams p) : p_(p) {}

    double tail(double k) const override
    {
        if (k < 0) return 1.0;
        return floor_tail(normal_upper(z(k + 1.0)));
    }
    double pmf(double k) const override
    {
        if (k < 0) return 0.0;
        const double hi = z(k + 1.0);
        if (k == 0) return 1.0 - normal_upper(hi);
        const double lo = z(k);
        if (lo >= 0) return normal_upper(lo) - normal_upper(hi);
        return normal_upper(-hi) - normal_upper(-lo);
    }
    double suffix_sum(double K) const override
    {
        const double w = K + 1.0;
        const double f = tail(K);
        const double fprime = -normal_density(z(w)) / (p_.sigma * w);
        return partial_first(w) + f / 2.0 - fprime / 12.0;
    }
    double suffix_second(double K) const override
    {
        const double w = K + 1.0;
        const double f = tail(K);
        const double fprime = -normal_density(z(w)) / (p_.sigma * w);
        const double g = (2.0 * K + 1.0) * f;
        const double gprime = 2.0 * f + (2.0 * K + 1.0) * fprime;
        const double s2 = p_.sigma * p_.sigma;
        const double upper_sq = std::exp(2.0 * p_.mu + 2.0 * s2) * normal_upper(z(w) - 2.0 * p_.sigma) -
                                w * w * normal_upper(z(w));
        return upper_sq - partial_first(w) + g / 2.0 - gprime / 12.0;
    }

  private:
    double z(double y) const { return (std::log(y) - p_.mu) / p_.sigma; }
    //! E (Y - w)^+
    double partial_first(double w) const
    {
        return std::exp(p_.mu + 0.5 * p_.sigma * p_.sigma) * normal_upper(z(w) - p_.sigma) -
               w * normal_upper(z(w));
    }

    LogNormalParams p_;
};

class FiniteModel final : public TailModel {
  public:
    explicit FiniteModel(const FiniteParams& p)
    {
        const std::int64_t top = p.pmf.back().first;
        probs_.assign(static_cast<std::size_t>(top + 1), 0.0);
        for (const auto& [k, prob] : p.pmf) probs_[static_cast<std::size_t>(k)] = prob;
        tails_.assign(probs_.size(), 0.0);
        double acc = 0.0;
        for (std::size_t k = probs_.size(); k-- > 0;) {
            tails_[k] = acc;
            acc += probs_[k];
        }
    }

    double tail(double k) const override
    {
        if (k < 0) return 1.0;
        if (k >= static_cast<double>(tails_.size())) return 0.0;
        return tails_[static_cast<std::size_t>(k)];
    }
    double pmf(double k) const override
    {
        if (k < 0 || k >= static_cast<double>(probs_.size())) return 0.0;
        return probs_[static_cast<std::size_t>(k)];
    }
    double suffix_sum(double K) const override
    {
        double s = 0.0;
        for (auto k = static_cast<std::size_t>(std::max(0.0, K)); k < tails_.size(); ++k) s += tails_[k];
        return s;
    }
    double suffix_second(double K) const override
    {
        double s = 0.0;
        for (auto k = static_cast<std::size_t>(std::max(0.0, K)); k < tails_.size(); ++k)
            s += (2.0 * static_cast<double>(k) + 1.0) * tails_[k];
        return s;
    }
    double analytic_cut() const override { return static_cast<double>(tails_.size()); }
    std::optional<std::int64_t> support_max() const override
    {
        return static_cast<std::int64_t>(probs_.size()) - 1;
    }

  private:
    std::vector<double> probs_;
    std::vector<double> tails_;
};

std::unique_ptr<TailModel> make_model(const LawParams& params)
{
    return std::visit(
        [](const auto& p) -> std::unique_ptr<TailModel> {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ParetoParams>) return std::make_unique<ParetoModel>(p);
            if constexpr (std::is_same_v<T, WeibullParams>) return std::make_unique<WeibullModel>(p);
            if constexpr (std::is_same_v<T, LogCorrectedParams>) return std::make_unique<LogCorrectedModel>(p);
            if constexpr (std::is_same_v<T, LogNormalParams>) return std::make_unique<LogNormalModel>(p);
            if constexpr (std::is_same_v<T, FiniteParams>) return std::make_unique<FiniteModel>(p);
        },
        params);
}

void validate(const LawParams& params)
{
    std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ParetoParams>) {
                require(std::isfinite(p.alpha) && p.alpha > 1.0, "pareto alpha must exceed 1");
                require(std::isfinite(p.scale) && p.scale > 0.0, "pareto scale must be positive");
            }
            if constexpr (std::is_same_v<T, WeibullParams>) {
                require(p.beta > 0.0 && p.beta < 1.0, "weibull beta must lie in (0, 1)");
                require(std::isfinite(p.c) && p.c > 0.0, "weibull c must be positive");
                require(p.q > 0.0 && p.q <= 1.0, "weibull q must lie in (0, 1]");
            }
            if constexpr (std::is_same_v<T, LogCorrectedParams>) {
                require(std::isfinite(p.p) && p.p > 1.0, "logcorr p must exceed 1");
                require(p.x0 >= 3, "logcorr x0 must be at least 3");
                require(std::isfinite(p.c_tail) && p.c_tail > 0.0, "logcorr tail constant must be positive");
                const double x0 = static_cast<double>(p.x0);
                require(p.c_tail / (x0 * std::pow(std::log(x0), p.p + 1.0)) <= 1.0,
                        "logcorr tail constant too large: tail(x0) would exceed 1");
            }
            if constexpr (std::is_same_v<T, LogNormalParams>) {
                require(std::isfinite(p.mu), "lognormal mu must be finite");
                require(std::isfinite(p.sigma) && p.sigma > 0.0, "lognormal sigma must be positive");
            }
            if constexpr (std::is_same_v<T, FiniteParams>) {
                if (p.pmf.empty()) fail(ErrorCode::BadPmf, "finite pmf is empty");
                double total = 0.0;
                std::int64_t prev = -1;
                for (const auto& [k, prob] : p.pmf) {
                    if (k < 0) fail(ErrorCode::BadPmf, "finite pmf atoms must be nonnegative");
                    if (k <= prev) fail(ErrorCode::BadPmf, "finite pmf atoms must be strictly increasing");
                    if (!(prob >= 0.0) || !std::isfinite(prob))
                        fail(ErrorCode::BadPmf, "finite pmf probabilities must be nonnegative");
                    if (k > (std::int64_t{1} << 24)) fail(ErrorCode::BadPmf, "finite pmf atom too large");
                    total += prob;
                    prev = k;
                }
                if (std::abs(total - 1.0) > 1e-15)
                    fail(ErrorCode::BadPmf, "finite pmf must sum to 1 (got " + std::to_string(total) + ")");
            }
        },
        params);
}

}  // namespace

struct LawData {
    LawParams params;
    std::unique_ptr<TailModel> model;
    std::vector<double> tail;
    std::vector<double> pmf;
    std::vector<double> suffix;  // suffix[k] = sum_{j >= k} tail(j), size table+1
    std::vector<std::int64_t> guide;
    double guide_floor = 0.0;
    double mean = 0.0;
    double second = 0.0;
};

}  // namespace detail

using detail::LawData;

std::string to_string(Family family)
{
    switch (family) {
        case Family::ParetoInteger: return "ParetoInteger";
        case Family::DiscreteWeibull: return "DiscreteWeibull";
        case Family::LogCorrectedIndexOne: return "LogCorrectedIndexOne";
        case Family::LogNormalInteger: return "LogNormalInteger";
        case Family::FiniteSupport: return "FiniteSupport";
    }
    return "Unknown";
}

Family family_of(const LawParams& params)
{
    switch (params.index()) {
        case 0: return Family::ParetoInteger;
        case 1: return Family::DiscreteWeibull;
        case 2: return Family::LogCorrectedIndexOne;
        case 3: return Family::LogNormalInteger;
        default: return Family::FiniteSupport;
    }
}

double family_mean(const LawParams& params)
{
    detail::validate(params);
    auto model = detail::make_model(params);
    if (auto* pareto = std::get_if<ParetoParams>(&params)) {
        (void)pareto;
        return model->suffix_sum(0.0);
    }
    return model->mean();
}

OffspringLaw make_law(const LawParams& params)
{
    detail::validate(params);
    auto data = std::make_shared<LawData>();
    data->params = params;
    data->model = detail::make_model(params);
    const auto& model = *data->model;

    data->mean = family_mean(params);
    if (!(data->mean > 1.0))
        fail(ErrorCode::SubcriticalMean, "offspring mean " + std::to_string(data->mean) + " is not above 1");
    data->second = model.second_moment();

    // Tables
    std::int64_t size = detail::kTableLimit;
    if (auto top = model.support_max()) size = *top + 1;
    data->pmf.reserve(static_cast<std::size_t>(size));
    data->tail.reserve(static_cast<std::size_t>(size));
    const bool pareto = std::holds_alternative<ParetoParams>(params);
    for (std::int64_t k = 0; k < size; ++k) {
        double t = pareto ? 0.0 : model.tail(static_cast<double>(k));
        data->pmf.push_back(model.pmf(static_cast<double>(k)));
        data->tail.push_back(t);
        if (!pareto && t == 0.0 && !model.support_max()) {
            size = k + 1;
            break;
        }
    }
    if (pareto) {
        // backward accumulation keeps sum(pmf) + tail consistent to rounding
        auto& tail = data->tail;
        tail.back() = model.tail(static_cast<double>(size - 1));
        for (std::int64_t k = size - 1; k > 0; --k)
            tail[static_cast<std::size_t>(k - 1)] = tail[static_cast<std::size_t>(k)] + data->pmf[static_cast<std::size_t>(k)];
        for (auto& t : tail) t = detail::floor_tail(t);
    }

    const auto n = data->tail.size();
    data->suffix.assign(n + 1, 0.0);
    data->suffix[n] = model.support_max() ? 0.0 : model.suffix_sum(static_cast<double>(n));
    for (std::size_t k = n; k-- > 0;) data->suffix[k] = data->suffix[k + 1] + data->tail[k];

    // guide[b] = min{k : tail[k] < (b+1)/G}
    data->guide.assign(detail::kGuideSize, static_cast<std::int64_t>(n) - 1);
    std::size_t k = 0;
    for (int b = detail::kGuideSize - 1; b >= 0; --b) {
        const double level = static_cast<double>(b + 1) / detail::kGuideSize;
        while (k < n && data->tail[k] >= level) ++k;
        if (k == n) break;
        data->guide[static_cast<std::size_t>(b)] = static_cast<std::int64_t>(k);
    }
    data->guide_floor = std::max(1.0 / detail::kGuideSize, data->tail.back());
    return OffspringLaw(std::move(data));
}

OffspringLaw make_pareto_integer(double alpha, double scale) { return make_law(ParetoParams{alpha, scale}); }
OffspringLaw make_discrete_weibull(double beta, double c, double q) { return make_law(WeibullParams{beta, c, q}); }
OffspringLaw make_log_corrected_index_one(double p, std::int64_t x0, double c_tail)
{
    return make_law(LogCorrectedParams{p, x0, c_tail});
}
OffspringLaw make_log_normal_integer(double mu, double sigma) { return make_law(LogNormalParams{mu, sigma}); }
OffspringLaw make_finite_support(std::vector<std::pair<std::int64_t, double>> pmf)
{
    std::sort(pmf.begin(), pmf.end());
    return make_law(FiniteParams{std::move(pmf)});
}

Family OffspringLaw::family() const { return family_of(d_->params); }
const LawParams& OffspringLaw::params() const { return d_->params; }
double OffspringLaw::mean() const { return d_->mean; }
double OffspringLaw::second_moment() const { return d_->second; }
double OffspringLaw::variance() const
{
    return std::isfinite(d_->second) ? std::max(0.0, d_->second - d_->mean * d_->mean) : kInf;
}
bool OffspringLaw::has_finite_variance() const { return std::isfinite(d_->second); }
std::int64_t OffspringLaw::table_size() const { return static_cast<std::int64_t>(d_->tail.size()); }
std::optional<std::int64_t> OffspringLaw::support_max() const { return d_->model->support_max(); }

double OffspringLaw::tail_at(std::int64_t k) const
{
    if (k < 0) return 1.0;
    if (k < table_size()) return d_->tail[static_cast<std::size_t>(k)];
    return d_->model->tail(static_cast<double>(k));
}

double OffspringLaw::tail(double x) const
{
    require(!std::isnan(x), "tail argument is NaN");
    if (x < 0) return 1.0;
    const double k = std::floor(x);
    if (k < static_cast<double>(table_size())) return d_->tail[static_cast<std::size_t>(k)];
    if (!std::isfinite(k)) return 0.0;
    return d_->model->tail(k);
}

double OffspringLaw::hazard(double x) const
{
    const double t = tail(x);
    if (t == 0.0) fail(ErrorCode::TailZero, "tail vanishes at x = " + std::to_string(x));
    return -std::log(t);
}

double OffspringLaw::pmf(std::int64_t k) const
{
    if (k < 0) return 0.0;
    if (k < table_size()) return d_->pmf[static_cast<std::size_t>(k)];
    return d_->model->pmf(static_cast<double>(k));
}

double OffspringLaw::stop_loss(double x) const
{
    if (x < 0) return d_->mean - x;
    const double k = std::floor(x);
    const double frac_part = (k + 1.0 - x) * tail(k);
    const double next = k + 1.0;
    if (next < static_cast<double>(d_->suffix.size())) return frac_part + d_->suffix[static_cast<std::size_t>(next)];
    if (support_max()) return frac_part;
    return frac_part + d_->model->suffix_sum(next);
}

double OffspringLaw::truncated_moment(double order, double cutoff) const
{
    require(order > 0.0, "moment order must be positive");
    require(!std::isnan(cutoff), "moment cutoff is NaN");
    if (cutoff < 0) return 0.0;
    if (std::isinf(cutoff)) {
        if (order == 1.0) return d_->mean;
        if (order == 2.0) return d_->second;
        // sum_k ((k+1)^r - k^r) tail(k) over the table, then a panel quadrature.
        CompensatedSum s;
        const auto n = table_size();
        for (std::int64_t k = 0; k < n; ++k) {
            const double kd = static_cast<double>(k);
            s += (std::pow(kd + 1.0, order) - std::pow(kd, order)) * d_->tail[static_cast<std::size_t>(k)];
        }
        if (support_max()) return s.value();
        auto integrand = [&](double u) { return order * std::pow(u, order - 1.0) * d_->model->tail(std::floor(u)); };
        double lo = static_cast<double>(n);
        double previous = kInf;
        int small = 0;
        for (int panel = 0; panel < 400; ++panel) {
            const double hi = lo * 2.0;
            const double part = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 8, 1e-10);
            s += part;
            if (part > previous * 1.0001 && panel > 4) return kInf;
            if (part < 1e-16 * s.value()) {
                if (++small >= 3) return s.value();
            } else {
                small = 0;
            }
            previous = part;
            lo = hi;
        }
        return kInf;
    }
    const auto top = static_cast<std::int64_t>(std::floor(cutoff));
    if (top - table_size() > (std::int64_t{1} << 27))
        fail(ErrorCode::TooLarge, "truncated moment cutoff too far beyond the tabulated range");
    CompensatedSum s;
    for (std::int64_t k = 1; k <= top; ++k) {
        const double p = pmf(k);
        if (p == 0.0 && k >= table_size()) break;
        s += std::pow(static_cast<double>(k), order) * p;
    }
    return s.value();
}

std::int64_t OffspringLaw::inverse_tail(double v) const
{
    const auto& tail = d_->tail;
    if (v > d_->guide_floor) {
        const int b = std::min(detail::kGuideSize - 1, static_cast<int>(std::ceil(v * detail::kGuideSize)) - 1);
        auto k = static_cast<std::size_t>(d_->guide[static_cast<std::size_t>(b)]);
        while (tail[k] >= v) ++k;
        return static_cast<std::int64_t>(k);
    }
    if (tail.back() < v) {
        auto it = std::partition_point(tail.begin(), tail.end(), [v](double t) { return t >= v; });
        return static_cast<std::int64_t>(it - tail.begin());
    }
    // Beyond the table: exponential bracketing then integer bisection on the analytic tail.
    const auto& model = *d_->model;
    std::int64_t lo = table_size() - 1;  // tail(lo) >= v
    std::int64_t step = std::max<std::int64_t>(1, lo);
    std::int64_t hi = lo;
    constexpr std::int64_t limit = std::int64_t{1} << 62;
    while (true) {
        hi = (hi > limit - step) ? limit : hi + step;
        if (model.tail(static_cast<double>(hi)) < v) break;
        if (hi == limit) fail(ErrorCode::PopulationOverflow, "offspring draw exceeds the 63-bit range");
        lo = hi;
        if (step < limit / 2) step *= 2;
    }
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (model.tail(static_cast<double>(mid)) < v)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

std::int64_t OffspringLaw::sample(RandomStream& rng) const { return inverse_tail(rng.uniform_open_closed()); }

std::int64_t OffspringLaw::sample_between(std::int64_t lo, std::int64_t hi, RandomStream& rng) const
{
    require(hi > lo, "sample_between needs lo < hi");
    const double upper = tail_at(lo);
    const double lower = hi == std::numeric_limits<std::int64_t>::max() ? 0.0 : tail_at(hi);
    const double width = upper - lower;
    if (!(width > 0.0))
        fail(ErrorCode::ConditionalTailEmpty,
             "no probability mass in (" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    double v = lower + rng.uniform_open_closed() * width;
    if (v <= lower) v = std::nextafter(lower, 1.0);
    if (v > upper) v = upper;
    return std::clamp(inverse_tail(v), lo + 1, hi);
}

std::int64_t OffspringLaw::sample_above(std::int64_t t, RandomStream& rng) const
{
    return sample_between(t, std::numeric_limits<std::int64_t>::max(), rng);
}

std::int64_t OffspringLaw::sample_at_most(std::int64_t t, RandomStream& rng) const
{
    return sample_between(-1, t, rng);
}

std::string OffspringLaw::spec() const { return format_law_spec(LawSpec{d_->params, std::nullopt}); }

//---------------------------------------------------------------------------//
// Mean tuning
//---------------------------------------------------------------------------//

namespace {

template <class Apply>
double bisect_parameter(Apply apply, double lo, double hi, double target, bool increasing, bool geometric)
{
    auto mean_at = [&](double v) { return family_mean(apply(v)); };
    auto too_low = [&](double m) { return increasing ? m < target : m > target; };
    for (int i = 0; i < 400; ++i) {
        const double mid = geometric ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        const double m = mean_at(mid);
        if (std::abs(m - target) <= 1e-10 * target) return mid;
        if (too_low(m))
            lo = mid;
        else
            hi = mid;
    }
    return geometric ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
}

}  // namespace

LawParams tune_params_to_mean(const LawParams& params, double target_m)
{
    require(std::isfinite(target_m) && target_m > 1.0, "tuned target mean must exceed 1");
    return std::visit(
        [&](const auto& p) -> LawParams {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ParetoParams>) {
                auto apply = [&](double s) { return LawParams{ParetoParams{p.alpha, s}}; };
                double lo = 1e-3, hi = 1.0;
                while (family_mean(apply(hi)) < target_m) {
                    hi *= 2.0;
                    require(hi < 1e12, "cannot tune pareto scale to the requested mean");
                }
                require(family_mean(apply(lo)) < target_m, "cannot tune pareto scale to the requested mean");
                return apply(bisect_parameter(apply, lo, hi, target_m, true, true));
            }
            if constexpr (std::is_same_v<T, WeibullParams>) {
                auto apply = [&](double c) { return LawParams{WeibullParams{p.beta, c, p.q}}; };
                double lo = 1e-2, hi = 1.0;
                while (family_mean(apply(hi)) > target_m) {
                    hi *= 2.0;
                    require(hi < 1e6, "cannot tune weibull c to the requested mean");
                }
                while (family_mean(apply(lo)) < target_m) {
                    lo /= 2.0;
                    require(lo > 1e-8, "cannot tune weibull c to the requested mean");
                }
                return apply(bisect_parameter(apply, lo, hi, target_m, false, true));
            }
            if constexpr (std::is_same_v<T, LogCorrectedParams>) {
                auto apply = [&](double c) { return LawParams{LogCorrectedParams{p.p, p.x0, c}}; };
                const double x0 = static_cast<double>(p.x0);
                const double hi = x0 * std::pow(std::log(x0), p.p + 1.0);
                const double lo = 1e-9 * hi;
                require(family_mean(apply(hi)) >= target_m && family_mean(apply(lo)) <= target_m,
                        "cannot tune logcorr tail constant to the requested mean");
                return apply(bisect_parameter(apply, lo, hi, target_m, true, true));
            }
            if constexpr (std::is_same_v<T, LogNormalParams>) {
                auto apply = [&](double mu) { return LawParams{LogNormalParams{mu, p.sigma}}; };
                double lo = -20.0, hi = 20.0;
                require(family_mean(apply(lo)) < target_m && family_mean(apply(hi)) > target_m,
                        "cannot tune lognormal mu to the requested mean");
                return apply(bisect_parameter(apply, lo, hi, target_m, true, false));
            }
            if constexpr (std::is_same_v<T, FiniteParams>) {
                fail(ErrorCode::BadParam, "finite support laws have no tunable parameter");
            }
        },
        params);
}

OffspringLaw tune_to_mean(const LawParams& params, double target_m)
{
    return make_law(tune_params_to_mean(params, target_m));
}

}  // namespace gwtails
