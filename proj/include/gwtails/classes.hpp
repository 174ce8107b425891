#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gwtails/offspring.hpp"

namespace gwtails {

enum class ClassName {
    DominatedVarying,
    IntermediateRV,
    Matuszewska,
    HInsensitive,
    SStar,
    RapidlyVarying,
    HazardIncrement,
    HazardSlope,
};

enum class Verdict { Consistent, Violated, Inconclusive };

std::string to_string(ClassName name);
std::string to_string(Verdict verdict);

//! Worst (or first failing) evaluation point; y is set for two-argument checks.
struct Witness {
    double x = 0.0;
    std::optional<double> y;
    double statistic = 0.0;
};

/*!
 * Result of a finite-grid class diagnostic.
 *
 * A Violated verdict always carries a witness whose statistic can be
 * recomputed with evaluate_statistic.
 */
struct ClassReport {
    ClassName class_name = ClassName::DominatedVarying;
    std::vector<double> grid;
    std::vector<double> statistic;
    Verdict verdict = Verdict::Inconclusive;
    std::optional<Witness> witness;
    //! Check parameters (delta, c, gamma, eps, ...) in declaration order.
    std::vector<double> parameters;
    std::string note;
};

//! 64 geometric points from 8 to 2^20, rounded to integers.
std::vector<double> default_class_grid();
//! Geometric integer grid from 8 to x_max (at most 64 points).
std::vector<double> class_grid_up_to(double x_max);

//! sup ratio tail(x/2)/tail(x); consistent if it stabilizes over the top decade (within 5%).
ClassReport check_dominated_varying(const OffspringLaw& law, double x_max = 1048576.0);

//! tail(x(1+eps))/tail(x) for a small eps; consistent if it stays near 1 and stabilizes.
ClassReport check_intermediate_rv(const OffspringLaw& law, double eps = 0.01,
                                  const std::vector<double>& grid = default_class_grid());

/*!
 * tail(xy) y^{1+delta} / tail(x) <= c over the product of grid and y_grid.
 * statistic[i] is the maximum over y at grid[i].
 */
ClassReport check_matuszewska(const OffspringLaw& law, double delta, double c,
                              const std::vector<double>& grid = default_class_grid(),
                              const std::vector<double>& y_grid = {});

//! tail(x + x^gamma)/tail(x); gamma = 0 uses a shift of 1.
ClassReport check_insensitive(const OffspringLaw& law, double gamma,
                              const std::vector<double>& grid = default_class_grid());

//! sum_{j<x} tail(j) tail(x-1-j) / (2 m tail(x)), the exact integral of the step tail.
ClassReport check_sstar(const OffspringLaw& law, const std::vector<double>& grid = default_class_grid());

ClassReport check_rapid_variation(const OffspringLaw& law, double eps,
                                  const std::vector<double>& grid = default_class_grid());

/*!
 * (R(k) - R(k-1)) k / R(k) <= c1 for k = 1..k_max. The report grid holds
 * geometric bucket ends and the bucket maxima of the statistic.
 */
ClassReport check_hazard_increment(const OffspringLaw& law, double c1, std::int64_t k_max = 1000000);

//! (R(x)/x) / min_{x0 <= z <= x} (R(z)/z) <= 1 + eps over the grid points >= x0.
ClassReport check_hazard_slope(const OffspringLaw& law, double eps, double x0,
                               const std::vector<double>& grid = default_class_grid());

//! Statistic of the named check at a single point (y only for Matuszewska / HazardSlope).
double evaluate_statistic(const OffspringLaw& law, const ClassReport& report, double x,
                          std::optional<double> y = std::nullopt);

}  // namespace gwtails
