#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gwtails/rng.hpp"

namespace gwtails {

enum class Family { ParetoInteger, DiscreteWeibull, LogCorrectedIndexOne, LogNormalInteger, FiniteSupport };

std::string to_string(Family family);

//! P{xi = k} proportional to (k + scale)^(-alpha-1), k >= 0.
struct ParetoParams {
    double alpha = 2.0;
    double scale = 1.0;
};

//! Tail q * exp(-c k^beta) for k >= 1, tail(0) = q.
struct WeibullParams {
    double beta = 0.5;
    double c = 1.0;
    double q = 1.0;
};

//! Tail c_tail / (k log^(p+1) k) for k >= x0; uniform mass on {1, ..., x0-1}.
struct LogCorrectedParams {
    double p = 2.0;
    std::int64_t x0 = 3;
    double c_tail = 1.0;
};

//! xi = floor(Y), Y log-normal(mu, sigma).
struct LogNormalParams {
    double mu = 0.0;
    double sigma = 1.0;
};

struct FiniteParams {
    std::vector<std::pair<std::int64_t, double>> pmf;  // sorted by k, unique
};

using LawParams = std::variant<ParetoParams, WeibullParams, LogCorrectedParams, LogNormalParams, FiniteParams>;

Family family_of(const LawParams& params);

namespace detail {
struct LawData;
}

//---------------------------------------------------------------------------//
/*!
 * An integer-valued supercritical offspring distribution.
 *
 * Immutable after construction and cheap to copy (tables are shared), so one
 * law can be used concurrently by any number of workers; sampling state lives
 * in the caller's RandomStream.
 *
 * Tail, pmf and stop-loss values are tabulated up to table_size() and
 * continued analytically beyond it. Tails below 1e-300 report 0.
 */
class OffspringLaw {
  public:
    Family family() const;
    const LawParams& params() const;

    double mean() const;
    //! +infinity when the second moment diverges.
    double variance() const;
    double second_moment() const;
    bool has_finite_variance() const;

    //! P{xi > x}; non-integer x evaluates at floor(x).
    double tail(double x) const;
    double tail_at(std::int64_t k) const;
    //! -log tail(x); throws TailZero when the tail is zero.
    double hazard(double x) const;
    double pmf(std::int64_t k) const;
    //! E (xi - x)^+ = integral of the tail over (x, infinity).
    double stop_loss(double x) const;
    //! E{xi^order; xi <= cutoff}; cutoff may be +infinity.
    double truncated_moment(double order, double cutoff) const;

    //! Unconditional draw by inversion of the tail.
    std::int64_t sample(RandomStream& rng) const;
    //! Draw from xi | xi > t. Throws ConditionalTailEmpty when tail(t) == 0.
    std::int64_t sample_above(std::int64_t t, RandomStream& rng) const;
    //! Draw from xi | xi <= t.
    std::int64_t sample_at_most(std::int64_t t, RandomStream& rng) const;
    //! Draw from xi | lo < xi <= hi (lo may be -1, hi may be INT64_MAX).
    std::int64_t sample_between(std::int64_t lo, std::int64_t hi, RandomStream& rng) const;
    //! Smallest k with tail(k) < v, for v in (0, 1].
    std::int64_t inverse_tail(double v) const;

    std::int64_t table_size() const;
    //! Largest atom for finite support laws.
    std::optional<std::int64_t> support_max() const;
    //! Canonical law-spec string, parseable by parse_law_spec.
    std::string spec() const;

  private:
    friend OffspringLaw make_law(const LawParams& params);
    explicit OffspringLaw(std::shared_ptr<const detail::LawData> data) : d_(std::move(data)) {}

    std::shared_ptr<const detail::LawData> d_;
};

OffspringLaw make_pareto_integer(double alpha, double scale);
OffspringLaw make_discrete_weibull(double beta, double c, double q);
OffspringLaw make_log_corrected_index_one(double p, std::int64_t x0, double c_tail = 1.0);
OffspringLaw make_log_normal_integer(double mu, double sigma);
OffspringLaw make_finite_support(std::vector<std::pair<std::int64_t, double>> pmf);
OffspringLaw make_law(const LawParams& params);

//! Mean of the law described by params, without building tables.
double family_mean(const LawParams& params);

/*!
 * Adjust the family's designated free parameter by bisection until the mean
 * equals target_m to relative tolerance 1e-10.
 *
 * Designated parameters: Pareto scale, Weibull c, log-corrected c_tail,
 * log-normal mu. Finite support laws are not tunable.
 */
LawParams tune_params_to_mean(const LawParams& params, double target_m);
OffspringLaw tune_to_mean(const LawParams& params, double target_m);

//---------------------------------------------------------------------------//
// Law specification grammar
//---------------------------------------------------------------------------//

/*!
 * A parsed law spec: `pareto(alpha=2.0, scale=1.0)`, `weibull(beta=0.3,
 * c=0.5, q=1.0)`, `logcorr(p=2.0, x0=3)`, `lognormal(mu=0.0, sigma=1.5)`,
 * `finite(0:0.25, 2:0.75)`, optionally wrapped as `tuned(<spec>, m=2.0)`.
 */
struct LawSpec {
    LawParams params;
    std::optional<double> tuned_mean;

    friend bool operator==(const LawSpec& a, const LawSpec& b);
};

LawSpec parse_law_spec(const std::string& text);
std::string format_law_spec(const LawSpec& spec);
OffspringLaw build_law(const LawSpec& spec);

bool operator==(const ParetoParams& a, const ParetoParams& b);
bool operator==(const WeibullParams& a, const WeibullParams& b);
bool operator==(const LogCorrectedParams& a, const LogCorrectedParams& b);
bool operator==(const LogNormalParams& a, const LogNormalParams& b);
bool operator==(const FiniteParams& a, const FiniteParams& b);

}  // namespace gwtails
