#include "gwtails/classes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gwtails/error.hpp"
#include "gwtails/numeric.hpp"

namespace gwtails {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ratio(double num, double den) { return den > 0.0 ? num / den : kNaN; }

double hazard_or_inf(const OffspringLaw& law, double x)
{
    const double t = law.tail(x);
    return t > 0.0 ? -std::log(t) : kInf;
}

double stat_dominated(const OffspringLaw& law, double x) { return ratio(law.tail(x / 2.0), law.tail(x)); }

double stat_scaled(const OffspringLaw& law, double x, double eps)
{
    return ratio(law.tail(x * (1.0 + eps)), law.tail(x));
}

double stat_matuszewska(const OffspringLaw& law, double x, double y, double delta)
{
    const double base = law.tail(x);
    if (!(base > 0.0)) return kNaN;
    return law.tail(x * y) * std::pow(y, 1.0 + delta) / base;
}

double stat_insensitive(const OffspringLaw& law, double x, double gamma)
{
    const double h = gamma == 0.0 ? 1.0 : std::pow(x, gamma);
    return ratio(law.tail(x + h), law.tail(x));
}

double stat_sstar(const OffspringLaw& law, double x)
{
    const auto n = static_cast<std::int64_t>(std::floor(x));
    const double base = law.tail_at(n);
    if (!(base > 0.0) || n < 1) return kNaN;
    // sum_{j=0}^{n-1} tail(j) tail(n-1-j), folded at the midpoint
    CompensatedSum s;
    for (std::int64_t j = 0; j < n / 2; ++j) s += 2.0 * law.tail_at(j) * law.tail_at(n - 1 - j);
    if (n % 2 == 1) {
        const double mid = law.tail_at(n / 2);
        s += mid * mid;
    }
    return s.value() / (2.0 * law.mean() * base);
}

double stat_hazard_increment(const OffspringLaw& law, double k)
{
    const double r = hazard_or_inf(law, k);
    const double prev = hazard_or_inf(law, k - 1.0);
    if (!std::isfinite(r)) return kNaN;
    if (r == 0.0) return prev == 0.0 ? 0.0 : kNaN;
    return (r - prev) * k / r;
}

double stat_hazard_slope(const OffspringLaw& law, double x, double z)
{
    const double rx = hazard_or_inf(law, x), rz = hazard_or_inf(law, z);
    if (!std::isfinite(rx) || !std::isfinite(rz) || rz == 0.0) return kNaN;
    return (rx / x) / (rz / z);
}

void validate_grid(const std::vector<double>& grid)
{
    require(!grid.empty(), "class check grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        require(grid[i] >= 1.0 && std::isfinite(grid[i]), "class check grid points must be finite and >= 1");
        if (i) require(grid[i] > grid[i - 1], "class check grid must be strictly increasing");
    }
}

//! Index of the first grid point in the top decade.
std::size_t top_decade_start(const std::vector<double>& grid)
{
    const double cut = grid.back() / 10.0;
    std::size_t i = 0;
    while (i + 1 < grid.size() && grid[i] < cut) ++i;
    return i;
}

/*!
 * Handles grid points where the statistic is undefined. For unbounded support
 * this is floating-point underflow of the tail and the grid is cut there when
 * enough points remain; otherwise the report is marked inconclusive.
 */
bool handle_exhausted_tail(const OffspringLaw& law, ClassReport& report)
{
    for (std::size_t i = 0; i < report.grid.size(); ++i) {
        if (std::isnan(report.statistic[i])) {
            if (!law.support_max() && i >= 16) {
                report.grid.resize(i);
                report.statistic.resize(i);
                report.note = "grid cut at x = " + std::to_string(report.grid.back()) + " where the tail underflows";
                return false;
            }
            report.verdict = Verdict::Inconclusive;
            const double edge = law.support_max() ? static_cast<double>(*law.support_max()) : report.grid[i];
            report.witness = Witness{edge, std::nullopt, report.statistic[i]};
            report.note = "tail vanishes on the grid (support edge near x = " + std::to_string(edge) + ")";
            return true;
        }
    }
    return false;
}

//! Finite support laws are light-tailed; never report them consistent.
void finalize(const OffspringLaw& law, ClassReport& report)
{
    if (report.verdict == Verdict::Consistent && law.support_max()) {
        report.verdict = Verdict::Inconclusive;
        report.note = "finite support: asymptotic class cannot hold";
    }
}

ClassReport make_report(ClassName name, const std::vector<double>& grid, std::vector<double> parameters)
{
    validate_grid(grid);
    ClassReport r;
    r.class_name = name;
    r.grid = grid;
    r.parameters = std::move(parameters);
    return r;
}

//! Least-squares slope of log(values) against log(grid) over [start, end).
double log_slope(const std::vector<double>& grid, const std::vector<double>& values, std::size_t start)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = start; i < grid.size(); ++i) {
        if (!(values[i] > 0.0)) continue;
        const double lx = std::log(grid[i]), ly = std::log(values[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return kNaN;
    const double den = n * sxx - sx * sx;
    return den > 0.0 ? (n * sxy - sx * sy) / den : kNaN;
}

}  // namespace

std::string to_string(ClassName name)
{
    switch (name) {
        case ClassName::DominatedVarying: return "DominatedVarying";
        case ClassName::IntermediateRV: return "IntermediateRV";
        case ClassName::Matuszewska: return "Matuszewska";
        case ClassName::HInsensitive: return "HInsensitive";
        case ClassName::SStar: return "SStar";
        case ClassName::RapidlyVarying: return "RapidlyVarying";
        case ClassName::HazardIncrement: return "HazardIncrement";
        case ClassName::HazardSlope: return "HazardSlope";
    }
    return "Unknown";
}

std::string to_string(Verdict verdict)
{
    switch (verdict) {
        case Verdict::Consistent: return "consistent";
        case Verdict::Violated: return "violated";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

std::vector<double> class_grid_up_to(double x_max)
{
    require(x_max >= 8.0, "grid maximum must be at least 8");
    const int count = 64;
    std::vector<double> grid;
    const double factor = std::pow(x_max / 8.0, 1.0 / (count - 1));
    for (int i = 0; i < count; ++i) {
        const double v = std::round(8.0 * std::pow(factor, i));
        if (grid.empty() || v > grid.back()) grid.push_back(v);
    }
    grid.back() = std::round(x_max);
    return grid;
}

std::vector<double> default_class_grid() { return class_grid_up_to(1048576.0); }

ClassReport check_dominated_varying(const OffspringLaw& law, double x_max)
{
    require(x_max >= 4.0, "dominated variation check needs x_max >= 4");
    std::vector<double> grid = x_max >= 8.0 ? class_grid_up_to(x_max) : std::vector<double>{4.0, std::round(x_max)};
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    ClassReport r = make_report(ClassName::DominatedVarying, grid, {});
    for (double x : grid) r.statistic.push_back(stat_dominated(law, x));
    if (handle_exhausted_tail(law, r)) return r;

    const std::size_t top = top_decade_start(r.grid);
    const auto sup_it = std::max_element(r.statistic.begin(), r.statistic.end());
    const double global_sup = *sup_it;
    const double top_sup = *std::max_element(r.statistic.begin() + static_cast<long>(top), r.statistic.end());
    const double top_min = *std::min_element(r.statistic.begin() + static_cast<long>(top), r.statistic.end());
    r.witness = Witness{r.grid[static_cast<std::size_t>(sup_it - r.statistic.begin())], std::nullopt, global_sup};
    const bool rising = r.statistic.back() > 1.01 * r.statistic[top];
    if (top_sup <= 1.05 * top_min && !rising) {
        r.verdict = Verdict::Consistent;
        r.note = "ratio stable over the top decade; sup " + std::to_string(global_sup);
    } else {
        r.verdict = Verdict::Inconclusive;
        r.note = "ratio still moving over the top decade";
    }
    finalize(law, r);
    return r;
}

ClassReport check_intermediate_rv(const OffspringLaw& law, double eps, const std::vector<double>& grid)
{
    require(eps > 0.0 && eps <= 0.5, "intermediate variation check needs eps in (0, 0.5]");
    ClassReport r = make_report(ClassName::IntermediateRV, grid, {eps});
    for (double x : grid) r.statistic.push_back(stat_scaled(law, x, eps));
    if (handle_exhausted_tail(law, r)) return r;

    const std::size_t top = top_decade_start(r.grid);
    const auto min_it = std::min_element(r.statistic.begin() + static_cast<long>(top), r.statistic.end());
    const double top_min = *min_it;
    const double prev_min =
        top > 0 ? *std::min_element(r.statistic.begin(), r.statistic.begin() + static_cast<long>(top)) : top_min;
    r.witness = Witness{r.grid[static_cast<std::size_t>(min_it - r.statistic.begin())], std::nullopt, top_min};
    // A regularly varying tail of index -a gives (1+eps)^-a; 40 eps allows a up to about 40.
    const double floor_value = std::max(0.5, 1.0 - 40.0 * eps);
    if (top_min >= floor_value && top_min >= 0.98 * prev_min) {
        r.verdict = Verdict::Consistent;
    } else if (top_min < floor_value && top_min < prev_min) {
        r.verdict = Verdict::Violated;
        r.note = "scaled tail ratio keeps decreasing";
    } else {
        r.verdict = Verdict::Inconclusive;
    }
    finalize(law, r);
    return r;
}

ClassReport check_matuszewska(const OffspringLaw& law, double delta, double c, const std::vector<double>& grid,
                              const std::vector<double>& y_grid_in)
{
    require(delta > 0.0, "Matuszewska check needs delta > 0");
    require(c >= 1.0, "Matuszewska check needs c >= 1");
    const std::vector<double> y_grid = y_grid_in.empty() ? geometric_grid(2.0, 2.0, 20) : y_grid_in;
    for (double y : y_grid) require(y > 1.0, "Matuszewska y grid points must exceed 1");
    ClassReport r = make_report(ClassName::Matuszewska, grid, {delta, c});
    std::optional<Witness> worst;
    for (double x : grid) {
        double best = -kInf;
        for (double y : y_grid) {
            const double s = stat_matuszewska(law, x, y, delta);
            if (std::isnan(s)) {
                best = kNaN;
                break;
            }
            if (s > c && r.verdict != Verdict::Violated) {
                r.verdict = Verdict::Violated;
                r.witness = Witness{x, y, s};
            }
            if (s > best) {
                best = s;
                if (!worst || s > worst->statistic) worst = Witness{x, y, s};
            }
        }
        r.statistic.push_back(best);
    }
    if (r.verdict == Verdict::Violated) {
        r.note = "inequality fails at the witness (x, y)";
        return r;
    }
    if (handle_exhausted_tail(law, r)) return r;
    r.verdict = Verdict::Consistent;
    r.witness = worst;
    finalize(law, r);
    return r;
}

ClassReport check_insensitive(const OffspringLaw& law, double gamma, const std::vector<double>& grid)
{
    require(gamma >= 0.0 && gamma < 1.0, "insensitivity check needs gamma in [0, 1)");
    ClassReport r = make_report(ClassName::HInsensitive, grid, {gamma});
    for (double x : grid) r.statistic.push_back(stat_insensitive(law, x, gamma));
    if (handle_exhausted_tail(law, r)) return r;

    const std::size_t top = top_decade_start(r.grid);
    std::vector<double> deviation;
    for (double s : r.statistic) deviation.push_back(-std::log(s));
    const auto worst = std::max_element(deviation.begin() + static_cast<long>(top), deviation.end());
    const std::size_t wi = static_cast<std::size_t>(worst - deviation.begin());
    r.witness = Witness{r.grid[wi], std::nullopt, r.statistic[wi]};
    const double slope = log_slope(r.grid, deviation, top);
    const double worst_ratio = r.statistic[wi];

    if (worst_ratio >= 0.98) {
        r.verdict = Verdict::Consistent;
        r.note = "ratio within 2% of 1 over the top decade";
    } else if (slope < -0.05) {
        r.verdict = Verdict::Consistent;
        r.note = "deviation from 1 decays like x^" + std::to_string(slope);
    } else if (slope > 0.05) {
        r.verdict = Verdict::Violated;
        r.witness = Witness{r.grid.back(), std::nullopt, r.statistic.back()};
        r.note = "deviation from 1 grows like x^" + std::to_string(slope);
    } else if (worst_ratio < 0.9) {
        r.verdict = Verdict::Violated;
        r.note = "ratio stabilizes away from 1";
    } else {
        r.verdict = Verdict::Inconclusive;
    }
    finalize(law, r);
    return r;
}

ClassReport check_sstar(const OffspringLaw& law, const std::vector<double>& grid)
{
    ClassReport r = make_report(ClassName::SStar, grid, {});
    for (double x : grid) r.statistic.push_back(stat_sstar(law, x));
    if (handle_exhausted_tail(law, r)) return r;

    const std::size_t top = top_decade_start(r.grid);
    double worst = 0.0;
    std::size_t wi = top;
    for (std::size_t i = top; i < r.grid.size(); ++i) {
        const double d = std::abs(r.statistic[i] - 1.0);
        if (d >= worst) {
            worst = d;
            wi = i;
        }
    }
    r.witness = Witness{r.grid[wi], std::nullopt, r.statistic[wi]};
    std::vector<double> deviation;
    for (double s : r.statistic) deviation.push_back(std::abs(s - 1.0));
    const double slope = log_slope(r.grid, deviation, top);
    if (worst <= 0.05) {
        r.verdict = Verdict::Consistent;
    } else if (slope > 0.05 && worst > 0.5) {
        r.verdict = Verdict::Violated;
        r.note = "ratio drifts away from 1";
    } else {
        r.verdict = Verdict::Inconclusive;
    }
    finalize(law, r);
    return r;
}

ClassReport check_rapid_variation(const OffspringLaw& law, double eps, const std::vector<double>& grid)
{
    require(eps > 0.0, "rapid variation check needs eps > 0");
    ClassReport r = make_report(ClassName::RapidlyVarying, grid, {eps});
    for (double x : grid) r.statistic.push_back(stat_scaled(law, x, eps));
    if (handle_exhausted_tail(law, r)) return r;

    const std::size_t top = top_decade_start(r.grid);
    const double last = r.statistic.back();
    bool decreasing = true;
    for (std::size_t i = top + 1; i < r.grid.size(); ++i)
        if (r.statistic[i] > r.statistic[i - 1] * (1.0 + 1e-9)) decreasing = false;
    const double top_first = r.statistic[top];
    r.witness = Witness{r.grid.back(), std::nullopt, last};
    if (last <= 0.05 && decreasing) {
        r.verdict = Verdict::Consistent;
    } else if (last > 0.05 && std::abs(last - top_first) <= 0.05 * top_first) {
        r.verdict = Verdict::Violated;
        r.note = "ratio stabilizes at a positive value";
    } else {
        r.verdict = Verdict::Inconclusive;
    }
    finalize(law, r);
    return r;
}

ClassReport check_hazard_increment(const OffspringLaw& law, double c1, std::int64_t k_max)
{
    require(c1 > 0.0, "hazard increment check needs c1 > 0");
    require(k_max >= 2, "hazard increment check needs k_max >= 2");
    ClassReport r;
    r.class_name = ClassName::HazardIncrement;
    r.parameters = {c1};
    double bucket_end = 2.0;
    double bucket_max = -kInf;
    double worst = -kInf;
    double prev_r = hazard_or_inf(law, 0.0);
    for (std::int64_t k = 1; k <= k_max; ++k) {
        const double kd = static_cast<double>(k);
        const double rk = hazard_or_inf(law, kd);
        double s;
        if (!std::isfinite(rk)) {
            r.grid.push_back(kd);
            r.statistic.push_back(kNaN);
            r.verdict = Verdict::Inconclusive;
            r.witness = Witness{kd - 1.0, std::nullopt, kNaN};
            r.note = "tail vanishes at k = " + std::to_string(k);
            return r;
        }
        s = rk == 0.0 ? 0.0 : (rk - prev_r) * kd / rk;
        prev_r = rk;
        if (s > c1 && r.verdict != Verdict::Violated) {
            r.verdict = Verdict::Violated;
            r.witness = Witness{kd, std::nullopt, s};
        }
        if (s > worst && r.verdict != Verdict::Violated) {
            worst = s;
            r.witness = Witness{kd, std::nullopt, s};
        }
        bucket_max = std::max(bucket_max, s);
        if (kd >= bucket_end || k == k_max) {
            r.grid.push_back(kd);
            r.statistic.push_back(bucket_max);
            bucket_max = -kInf;
            bucket_end = std::max(bucket_end + 1.0, std::round(bucket_end * 1.25));
        }
    }
    if (r.verdict != Verdict::Violated) r.verdict = Verdict::Consistent;
    finalize(law, r);
    return r;
}

ClassReport check_hazard_slope(const OffspringLaw& law, double eps, double x0, const std::vector<double>& grid)
{
    require(eps > 0.0, "hazard slope check needs eps > 0");
    require(x0 >= 1.0, "hazard slope check needs x0 >= 1");
    std::vector<double> points;
    for (double x : grid)
        if (x >= x0) points.push_back(x);
    require(!points.empty(), "no grid points at or above x0");
    ClassReport r = make_report(ClassName::HazardSlope, points, {eps, x0});
    double best_z = points.front();
    double best_slope = kInf;
    double worst = -kInf;
    for (double x : points) {
        const double rx = hazard_or_inf(law, x);
        if (!std::isfinite(rx)) {
            r.statistic.push_back(kNaN);
            continue;
        }
        if (rx / x < best_slope) {
            best_slope = rx / x;
            best_z = x;
        }
        const double s = stat_hazard_slope(law, x, best_z);
        r.statistic.push_back(s);
        if (s > 1.0 + eps && r.verdict != Verdict::Violated) {
            r.verdict = Verdict::Violated;
            r.witness = Witness{x, best_z, s};
        }
        if (s > worst && r.verdict != Verdict::Violated) {
            worst = s;
            r.witness = Witness{x, best_z, s};
        }
    }
    if (r.verdict == Verdict::Violated) return r;
    if (handle_exhausted_tail(law, r)) return r;
    r.verdict = Verdict::Consistent;
    finalize(law, r);
    return r;
}

double evaluate_statistic(const OffspringLaw& law, const ClassReport& report, double x, std::optional<double> y)
{
    const auto& p = report.parameters;
    switch (report.class_name) {
        case ClassName::DominatedVarying: return stat_dominated(law, x);
        case ClassName::IntermediateRV:
        case ClassName::RapidlyVarying: return stat_scaled(law, x, p.at(0));
        case ClassName::Matuszewska:
            require(y.has_value(), "Matuszewska statistic needs y");
            return stat_matuszewska(law, x, *y, p.at(0));
        case ClassName::HInsensitive: return stat_insensitive(law, x, p.at(0));
        case ClassName::SStar: return stat_sstar(law, x);
        case ClassName::HazardIncrement: return stat_hazard_increment(law, x);
        case ClassName::HazardSlope:
            require(y.has_value(), "hazard slope statistic needs the comparison point z");
            return stat_hazard_slope(law, x, *y);
    }
    return kNaN;
}

}  // namespace gwtails
