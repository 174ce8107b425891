#include "gwtails/asymptotics.hpp"

#include <cmath>
#include <limits>

#include "gwtails/error.hpp"
#include "gwtails/numeric.hpp"

namespace gwtails {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

//! m^i tail(m^{i+1} x) with 0 for an exhausted tail (avoids inf * 0).
double series_term(const OffspringLaw& law, int i, double x)
{
    const double m = law.mean();
    const double t = law.tail(std::pow(m, i + 1) * x);
    return t > 0.0 ? std::pow(m, i) * t : 0.0;
}

void require_x(double x) { require(std::isfinite(x) && x > 0.0, "x must be positive and finite"); }

}  // namespace

std::string to_string(ApproxMethod method)
{
    switch (method) {
        case ApproxMethod::SeriesFinite: return "SeriesFinite";
        case ApproxMethod::SeriesInfinite: return "SeriesInfinite";
        case ApproxMethod::WeibullPrincipal: return "WeibullPrincipal";
        case ApproxMethod::WeibullCorrectedLower: return "WeibullCorrectedLower";
        case ApproxMethod::IndexOneIntegral: return "IndexOneIntegral";
        case ApproxMethod::IndexOneIntegralInfinite: return "IndexOneIntegralInfinite";
        case ApproxMethod::Lemma32Lower: return "Lemma32Lower";
    }
    return "Unknown";
}

std::optional<ApproxMethod> parse_approx_method(const std::string& text)
{
    for (auto m : {ApproxMethod::SeriesFinite, ApproxMethod::SeriesInfinite, ApproxMethod::WeibullPrincipal,
                   ApproxMethod::WeibullCorrectedLower, ApproxMethod::IndexOneIntegral,
                   ApproxMethod::IndexOneIntegralInfinite, ApproxMethod::Lemma32Lower})
        if (text == to_string(m)) return m;
    if (text == "series") return ApproxMethod::SeriesFinite;
    if (text == "series_inf") return ApproxMethod::SeriesInfinite;
    if (text == "weibull") return ApproxMethod::WeibullPrincipal;
    if (text == "weibull_corrected") return ApproxMethod::WeibullCorrectedLower;
    if (text == "index_one") return ApproxMethod::IndexOneIntegral;
    if (text == "index_one_inf") return ApproxMethod::IndexOneIntegralInfinite;
    if (text == "lower") return ApproxMethod::Lemma32Lower;
    return std::nullopt;
}

TailApproximation series_tail(const OffspringLaw& law, int n, double x)
{
    require(n >= 1, "series_tail needs n >= 1");
    require_x(x);
    CompensatedSum s;
    for (int i = 0; i < n; ++i) s += series_term(law, i, x);
    TailApproximation out;
    out.value = s.value();
    out.method = ApproxMethod::SeriesFinite;
    out.truncation_terms = n;
    return out;
}

TailApproximation series_tail_infinite(const OffspringLaw& law, double x, double rel_tol,
                                       std::optional<MatuszewskaParams> mat)
{
    require_x(x);
    require(rel_tol > 0.0 && rel_tol < 1.0, "rel_tol must lie in (0, 1)");
    if (mat) require(mat->delta > 0.0 && mat->c >= 1.0, "Matuszewska parameters need delta > 0, c >= 1");
    const double m = law.mean();
    TailApproximation out;
    out.method = ApproxMethod::SeriesInfinite;
    const double first_tail = law.tail(m * x);
    if (first_tail == 0.0) {
        out.truncation_terms = 1;
        out.truncation_bound = 0.0;
        out.note = "tail vanishes at m x";
        return out;
    }
    CompensatedSum s;
    int small_run = 0;
    for (int i = 0; i < 10000; ++i) {
        const double term = series_term(law, i, x);
        s += term;
        const double partial = s.value();
        if (mat) {
            const double remainder = mat->c * first_tail * std::pow(m, -(i + 1) * mat->delta) /
                                     (1.0 - std::pow(m, -mat->delta));
            if (remainder < rel_tol * partial) {
                out.value = partial;
                out.truncation_terms = i + 1;
                out.truncation_bound = remainder;
                return out;
            }
        } else {
            small_run = term < rel_tol * partial / 10.0 ? small_run + 1 : 0;
            if (small_run >= 10) {
                out.value = partial;
                out.truncation_terms = i + 1;
                out.truncation_bound = kNaN;
                out.heuristic = true;
                out.note = "heuristic truncation: 10 consecutive negligible terms";
                return out;
            }
        }
    }
    fail(ErrorCode::NoConvergence, "series did not converge within 10^4 terms");
}

TailApproximation weibull_tail(const OffspringLaw& law, double x)
{
    require(std::isfinite(x) && x >= 0.0, "x must be nonnegative and finite");
    TailApproximation out;
    out.method = ApproxMethod::WeibullPrincipal;
    out.value = law.tail(law.mean() * x);
    out.truncation_terms = 1;
    return out;
}

TailApproximation weibull_corrected_lower(double beta, double m, double sigma_sq, double x)
{
    if (!(beta > 0.5 && beta < 1.0))
        fail(ErrorCode::BadParam, "corrected Weibull lower bound needs beta in (1/2, 1)");
    require(m > 1.0, "m must exceed 1");
    require(sigma_sq >= 0.0, "sigma_sq must be nonnegative");
    require_x(x);
    const double mx = m * x;
    TailApproximation out;
    out.method = ApproxMethod::WeibullCorrectedLower;
    out.value = std::exp(-std::pow(mx, beta) + 0.5 * beta * beta * sigma_sq * std::pow(mx, 2.0 * beta - 1.0));
    out.note = "pure-power hazard x^beta; o(1) in the exponent set to 0";
    return out;
}

TailApproximation index_one_tail(const OffspringLaw& law, Horizon n, double x)
{
    require_x(x);
    if (n) require(*n >= 1, "index_one_tail needs n >= 1");
    const double m = law.mean();
    if (!(law.tail(x) > 0.0)) fail(ErrorCode::TailZero, "tail vanishes at x");
    const double lower = law.stop_loss(x);
    if (!std::isfinite(lower)) fail(ErrorCode::NonIntegrableTail, "tail integral diverges");
    double integral = lower;
    if (n) {
        const double upper_limit = std::pow(m, *n) * x;
        if (std::isfinite(upper_limit)) integral = lower - law.stop_loss(upper_limit);
    }
    TailApproximation out;
    out.method = n ? ApproxMethod::IndexOneIntegral : ApproxMethod::IndexOneIntegralInfinite;
    out.value = std::max(0.0, integral) / (x * m * std::log(m));
    out.truncation_terms = 0;
    out.quadrature_error = 0.0;
    return out;
}

double var_wn(double sigma_xi_sq, double m, Horizon n)
{
    require(m > 1.0, "m must exceed 1");
    require(sigma_xi_sq >= 0.0, "variance must be nonnegative");
    if (n) require(*n >= 0, "n must be nonnegative");
    const double limit = sigma_xi_sq / (m * m - m);
    if (!n) return limit;
    return -std::expm1(-static_cast<double>(*n) * std::log(m)) * limit;
}

double ProductiveGenerationLaw::weight(std::int64_t k) const
{
    if (k < 0) return 0.0;
    if (n) return k < *n ? weights[static_cast<std::size_t>(k)] : 0.0;
    return (1.0 - ratio) * std::pow(ratio, static_cast<double>(k));
}

ProductiveGenerationLaw productive_generation_law(double alpha, double m, Horizon n)
{
    require(alpha > 1.0, "alpha must exceed 1");
    require(m > 1.0, "m must exceed 1");
    if (n) require(*n >= 1, "n must be at least 1");
    ProductiveGenerationLaw law;
    law.ratio = std::pow(m, -(alpha - 1.0));
    law.n = n;
    if (n) {
        CompensatedSum norm;
        for (int k = 0; k < *n; ++k) norm += std::pow(law.ratio, k);
        for (int k = 0; k < *n; ++k) law.weights.push_back(std::pow(law.ratio, k) / norm.value());
    } else {
        for (int k = 0;; ++k) {
            const double w = law.weight(k);
            if (w < 1e-18 || k > 100000) break;
            law.weights.push_back(w);
        }
    }
    return law;
}

std::string to_string(Example1Regime regime)
{
    switch (regime) {
        case Example1Regime::SuperLog: return "super_log";
        case Example1Regime::ProportionalLog: return "proportional_log";
        case Example1Regime::SubLog: return "sub_log";
    }
    return "unknown";
}

double example1_value(Example1Regime regime, double p, double m, int n, double x)
{
    require(p > 0.0, "p must be positive");
    require(m > 1.0, "m must exceed 1");
    require(x > std::exp(1.0), "x must exceed e");
    require(n >= 1, "n must be at least 1");
    const double lx = std::log(x);
    const double leading = std::pow(lx, -p) / p / (x * m * std::log(m));
    switch (regime) {
        case Example1Regime::SuperLog: return leading;
        case Example1Regime::ProportionalLog: {
            const double t = n / lx;
            return leading * -std::expm1(-p * std::log1p(t * std::log(m)));
        }
        case Example1Regime::SubLog: {
            const double mx = m * x;
            return n / (mx * std::pow(std::log(mx), p + 1.0));
        }
    }
    return kNaN;
}

Example1Result example1_regime(double p, double m, int n, double x, double upper_cut, double lower_cut)
{
    require(upper_cut > lower_cut && lower_cut > 0.0, "regime cut points need 0 < lower < upper");
    require(x > std::exp(1.0), "x must exceed e");
    Example1Result r;
    r.t = n / std::log(x);
    r.regime = r.t > upper_cut   ? Example1Regime::SuperLog
               : r.t < lower_cut ? Example1Regime::SubLog
                                 : Example1Regime::ProportionalLog;
    r.approx.value = example1_value(r.regime, p, m, n, x);
    r.approx.method = r.regime == Example1Regime::SuperLog ? ApproxMethod::IndexOneIntegralInfinite
                                                           : ApproxMethod::IndexOneIntegral;
    r.approx.note = "pure law tail(u) = u^-1 log^-(p+1) u, regime " + to_string(r.regime);
    return r;
}

TailApproximation lemma32_lower(const OffspringLaw& law, int n, double x, double A)
{
    require(n >= 1, "lemma32_lower needs n >= 1");
    require_x(x);
    require(A > 0.0, "A must be positive");
    const double m = law.mean();
    TailApproximation out;
    out.method = ApproxMethod::Lemma32Lower;
    out.truncation_terms = n;
    const double sigma_sq = law.variance();
    const double prefactor = std::isfinite(sigma_sq) ? 1.0 - sigma_sq / ((m * m - m) * A * A) : -kInf;
    if (!(prefactor > 0.0)) {
        out.vacuous = true;
        out.note = "prefactor 1 - sigma^2/((m^2-m)A^2) is not positive";
        return out;
    }
    CompensatedSum s;
    for (int i = 0; i < n; ++i) {
        const double u = std::pow(m, i + 1) * x;
        const double t = law.tail(u + A * std::sqrt(u));
        if (t > 0.0) s += std::pow(m, i) * t;
    }
    out.value = prefactor * s.value();
    out.note = "o(1) in the prefactor set to 0";
    return out;
}

std::string to_string(Regime regime)
{
    switch (regime) {
        case Regime::IRVSeries: return "IRV_series";
        case Regime::SqrtInsensitiveSeries: return "SqrtInsensitive_series";
        case Regime::WeibullPrincipal: return "Weibull_principal";
        case Regime::WeibullCorrectedNeeded: return "Weibull_corrected_needed";
        case Regime::IndexOneIntegral: return "IndexOne_integral";
        case Regime::Unclassified: return "Unclassified";
    }
    return "Unknown";
}

RegimeTag classify_regime(const OffspringLaw& law, double x_max)
{
    RegimeTag tag;
    if (law.support_max()) {
        tag.note = "finite support";
        return tag;
    }
    const double top = law.tail(x_max), lower = law.tail(x_max / 4.0);
    if (!(top > 0.0)) {
        tag.note = "tail vanishes at the top of the grid";
        return tag;
    }
    tag.tail_index = -std::log(top / lower) / std::log(4.0);
    const double r_top = -std::log(top), r_low = -std::log(lower);
    tag.hazard_index = r_low > 0.0 ? std::log(r_top / r_low) / std::log(4.0) : kNaN;
    tag.at_weibull_threshold = std::abs(tag.hazard_index - kWeibullThreshold) < 0.005;

    const auto grid = class_grid_up_to(x_max);
    auto consistent = [](const ClassReport& r) { return r.verdict == Verdict::Consistent; };

    ClassReport dv = check_dominated_varying(law, x_max);
    ClassReport irv = check_intermediate_rv(law, 0.01, grid);
    if (consistent(dv) && consistent(irv)) {
        if (std::abs(tag.tail_index - 1.0) < 0.35) {
            tag.regime = Regime::IndexOneIntegral;
            tag.justification = {dv, irv};
            tag.note = "regularly varying with index near -1";
            return tag;
        }
        ClassReport mat = check_matuszewska(law, std::max(0.05, (tag.tail_index - 1.0) / 2.0), 10.0, grid);
        if (consistent(mat)) {
            tag.regime = Regime::IRVSeries;
            tag.justification = {dv, irv, mat};
            return tag;
        }
    }
    if (consistent(dv) && law.has_finite_variance()) {
        ClassReport mat = check_matuszewska(law, std::max(0.05, (tag.tail_index - 1.0) / 2.0), 10.0, grid);
        ClassReport ins = check_insensitive(law, 0.75, grid);
        if (consistent(mat) && consistent(ins)) {
            tag.regime = Regime::SqrtInsensitiveSeries;
            tag.justification = {dv, mat, ins};
            return tag;
        }
    }
    ClassReport rapid = check_rapid_variation(law, 0.1, grid);
    if (consistent(rapid) && tag.hazard_index > 0.0 && tag.hazard_index < 1.0) {
        ClassReport sstar = check_sstar(law, grid);
        if (consistent(sstar)) {
            if (tag.hazard_index < kWeibullThreshold) {
                tag.regime = Regime::WeibullPrincipal;
                tag.justification = {rapid, sstar};
            } else if (tag.hazard_index < 0.5) {
                ClassReport inc = check_hazard_increment(law, 10.0, 100000);
                tag.regime = consistent(inc) ? Regime::WeibullPrincipal : Regime::WeibullCorrectedNeeded;
                tag.justification = {rapid, sstar};
                if (consistent(inc)) tag.justification.push_back(inc);
            } else {
                tag.regime = Regime::WeibullCorrectedNeeded;
                tag.justification = {rapid, sstar};
            }
            if (tag.at_weibull_threshold) tag.note = "hazard index at the (3 - sqrt 5)/2 threshold";
            return tag;
        }
        tag.justification = {rapid, sstar};
        tag.note = "rapidly varying but S* not confirmed";
        return tag;
    }
    tag.justification = {dv, irv, rapid};
    return tag;
}

bool regime_supports(Regime regime, ApproxMethod method)
{
    switch (method) {
        case ApproxMethod::SeriesFinite:
        case ApproxMethod::SeriesInfinite:
            return regime == Regime::IRVSeries || regime == Regime::SqrtInsensitiveSeries ||
                   regime == Regime::IndexOneIntegral;
        case ApproxMethod::WeibullPrincipal: return regime == Regime::WeibullPrincipal;
        case ApproxMethod::WeibullCorrectedLower: return regime == Regime::WeibullCorrectedNeeded;
        case ApproxMethod::IndexOneIntegral:
        case ApproxMethod::IndexOneIntegralInfinite: return regime == Regime::IndexOneIntegral;
        case ApproxMethod::Lemma32Lower: return regime != Regime::Unclassified;
    }
    return false;
}

}  // namespace gwtails
