#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gwtails/asymptotics.hpp"
#include "gwtails/offspring.hpp"
#include "gwtails/simulator.hpp"

namespace gwtails {

enum class EstimatorMethod { NaiveMC, BigJumpDecomposition, ExactConvolution };

std::string to_string(EstimatorMethod method);
std::optional<EstimatorMethod> parse_estimator_method(const std::string& text);

/*!
 * A rare-event probability estimate. The confidence interval is the 95%
 * normal interval clipped to [0, 1]; with zero observed exceedances the
 * upper end is 3 / replicas.
 */
struct EstimatorResult {
    double estimate = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::int64_t replicas_used = 0;
    EstimatorMethod method = EstimatorMethod::NaiveMC;
    //! Big-jump only: estimate of P{A_k, Z_n > m^n x} for k = 0..n-1.
    std::optional<std::vector<double>> per_generation_breakdown;
    std::vector<double> breakdown_std_error;
    //! Big-jump only: estimate of P{A_k}.
    std::vector<double> jump_probability;
    //! Generations whose jump threshold lies beyond the numeric tail range.
    std::vector<int> empty_conditional_k;
    //! Replicas that hit PopulationOverflow (counted as exceedances).
    std::int64_t overflowed = 0;
    std::int64_t exceedances = 0;
};

//! Fraction of paths with Z_n > m^n x, binomial standard error.
EstimatorResult naive_mc(const OffspringLaw& law, int n, double x, std::int64_t replicas,
                         const MonteCarloOptions& options = {});

/*!
 * Exact P{Z_n > threshold} for a finite support law by backward composition
 * dist_k = sum_i p_i dist_{k-1}^{*i}, truncated at threshold + 1 entries.
 * Throws TooLarge when the truncated vectors or the work would be too large.
 */
EstimatorResult exact_convolution(const OffspringLaw& law, int n, std::int64_t threshold);

//! Exact distribution of Z_n (index = size) for a finite support law.
std::vector<double> exact_generation_distribution(const OffspringLaw& law, int n, std::int64_t max_entries = 100000000);

/*!
 * Sum over k of P{A_k(x), Z_n > m^n x}. For each k, replicas simulate
 * generations 0..k, keep the jump probability 1 - (1 - tail(t_k))^{Z_k} on
 * B_k (t_k = m^{k+1}(1+eps)x), draw generation k conditioned on a jump and
 * continue to generation n. Each k has its own stream lane; the standard error
 * combines the independent per-k errors.
 */
EstimatorResult big_jump_estimator(const OffspringLaw& law, int n, double x, double eps, std::int64_t replicas_per_k,
                                   const MonteCarloOptions& options = {});

struct ComparisonRow {
    int n = 0;
    double x = 0.0;
    EstimatorResult estimate;
    TailApproximation approximation;
    double ratio = 0.0;
};

/*!
 * Estimates and approximations over the (n, x) grid. budget is the replica
 * count (per k for the big-jump estimator). Each (n, x) cell gets its own lane
 * block so cells are independent.
 */
std::vector<ComparisonRow> compare_to_asymptotics(const OffspringLaw& law, const std::vector<int>& n_list,
                                                  const std::vector<double>& x_list, ApproxMethod method,
                                                  EstimatorMethod estimator, std::int64_t budget,
                                                  const MonteCarloOptions& options = {}, double eps = 0.0);

//! The approximation of the given method at (n, x).
TailApproximation approximate(const OffspringLaw& law, ApproxMethod method, Horizon n, double x);

}  // namespace gwtails
