#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gwtails/classes.hpp"
#include "gwtails/offspring.hpp"

namespace gwtails {

//! Number of generations; std::nullopt stands for n = infinity.
using Horizon = std::optional<int>;

enum class ApproxMethod {
    SeriesFinite,
    SeriesInfinite,
    WeibullPrincipal,
    WeibullCorrectedLower,
    IndexOneIntegral,
    IndexOneIntegralInfinite,
    Lemma32Lower,
};

std::string to_string(ApproxMethod method);
std::optional<ApproxMethod> parse_approx_method(const std::string& text);

/*!
 * An asymptotic tail value with its diagnostics. All o(1) corrections are
 * taken as zero; the method tag says which formula produced the value.
 */
struct TailApproximation {
    double value = 0.0;
    ApproxMethod method = ApproxMethod::SeriesFinite;
    std::int64_t truncation_terms = 0;
    //! Rigorous remainder bound; NaN when none is available.
    double truncation_bound = 0.0;
    double quadrature_error = 0.0;
    //! Series stopped by the heuristic rule rather than a rigorous bound.
    bool heuristic = false;
    //! Lower bound with a nonpositive prefactor.
    bool vacuous = false;
    std::string note;
};

//! sum_{i=0}^{n-1} m^i tail(m^{i+1} x), compensated summation.
TailApproximation series_tail(const OffspringLaw& law, int n, double x);

struct MatuszewskaParams {
    double delta;
    double c;
};

/*!
 * sum_{i>=0} m^i tail(m^{i+1} x). With Matuszewska parameters the summation
 * stops once c tail(mx) m^{-(J+1) delta} / (1 - m^{-delta}) < rel_tol * sum;
 * otherwise after 10 consecutive terms below rel_tol * sum / 10 (flagged).
 */
TailApproximation series_tail_infinite(const OffspringLaw& law, double x, double rel_tol = 1e-10,
                                       std::optional<MatuszewskaParams> mat = std::nullopt);

//! tail(m x).
TailApproximation weibull_tail(const OffspringLaw& law, double x);

//! exp{-(mx)^beta + (beta^2 sigma_sq / 2)(mx)^{2 beta - 1}} for beta in (1/2, 1).
TailApproximation weibull_corrected_lower(double beta, double m, double sigma_sq, double x);

/*!
 * (m log m)^{-1} x^{-1} integral_x^{m^n x} tail(u) du (upper limit infinity
 * for n = infinity). The tail is a step function, so the integral is the exact
 * difference of stop-loss values.
 */
TailApproximation index_one_tail(const OffspringLaw& law, Horizon n, double x);

//! sigma^2 (1 - m^{-n}) / (m^2 - m); the limit for n = infinity.
double var_wn(double sigma_xi_sq, double m, Horizon n);

struct ProductiveGenerationLaw {
    //! m^{-(alpha-1)}
    double ratio = 0.0;
    Horizon n;
    //! weights for k = 0..n-1; for n = infinity, until the weight drops below 1e-18.
    std::vector<double> weights;

    double weight(std::int64_t k) const;
};

ProductiveGenerationLaw productive_generation_law(double alpha, double m, Horizon n);

enum class Example1Regime { SuperLog, ProportionalLog, SubLog };
std::string to_string(Example1Regime regime);

struct Example1Result {
    Example1Regime regime;
    double t;  // n / log x
    TailApproximation approx;
};

/*!
 * Three regimes for tail(u) = u^{-1} log^{-p-1} u by t = n / log x:
 * t > upper_cut gives x^{-1} L(x) / (m log m) with L(x) = log^{-p}(x) / p;
 * t < lower_cut gives n tail(mx); otherwise the first value times
 * 1 - (1 + t log m)^{-p}.
 */
Example1Result example1_regime(double p, double m, int n, double x, double upper_cut = 10.0,
                               double lower_cut = 0.1);
//! The value of a given regime formula regardless of t.
double example1_value(Example1Regime regime, double p, double m, int n, double x);

/*!
 * (1 - sigma^2/((m^2 - m) A^2)) sum_{i<n} m^i tail(m^{i+1} x + A sqrt(m^{i+1} x)).
 * Returns 0 flagged vacuous when the prefactor is not positive.
 */
TailApproximation lemma32_lower(const OffspringLaw& law, int n, double x, double A);

enum class Regime {
    IRVSeries,
    SqrtInsensitiveSeries,
    WeibullPrincipal,
    WeibullCorrectedNeeded,
    IndexOneIntegral,
    Unclassified,
};
std::string to_string(Regime regime);

struct RegimeTag {
    Regime regime = Regime::Unclassified;
    //! Reports backing the tag; all consistent unless regime is Unclassified.
    std::vector<ClassReport> justification;
    //! Local index estimates at the top of the grid.
    double tail_index = 0.0;
    double hazard_index = 0.0;
    //! Hazard index within 0.005 of (3 - sqrt 5)/2.
    bool at_weibull_threshold = false;
    std::string note;
};

inline constexpr double kWeibullThreshold = 0.38196601125010515;

RegimeTag classify_regime(const OffspringLaw& law, double x_max = 1048576.0);

//! Methods whose hypotheses a regime supports.
bool regime_supports(Regime regime, ApproxMethod method);

}  // namespace gwtails
