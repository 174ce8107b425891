#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gwtails/offspring.hpp"
#include "gwtails/simulator.hpp"

namespace gwtails {

//! eta = xi - shift for xi drawn from the base law.
class CenteredSummandLaw {
  public:
    CenteredSummandLaw(OffspringLaw base, double shift);

    const OffspringLaw& base() const { return base_; }
    double shift() const { return shift_; }
    //! mean of the base law minus shift.
    double mean_eta() const { return mean_eta_; }
    //! G-bar(x) = F-bar(x + shift).
    double tail(double x) const { return base_.tail(x + shift_); }
    //! -log G-bar(x); throws TailZero.
    double hazard(double x) const;
    //! P{eta = v}; zero off the lattice Z+ - shift.
    double pmf_at(double v) const;

  private:
    OffspringLaw base_;
    double shift_;
    double mean_eta_;
};

enum class Validity { InRange, OutOfRange };
std::string to_string(Validity v);

/*!
 * Two-term bound n G-bar(y) + e^{-lambda x} (E{e^{lambda eta}; eta <= y})^n.
 * bound_value is computed as jump_term + chernoff_term.
 */
struct BoundResult {
    double bound_value = 0.0;
    double jump_term = 0.0;
    double chernoff_term = 0.0;
    double lambda_used = 0.0;
    double y_used = 0.0;
    Validity validity = Validity::InRange;
    std::string range_note;
    //! Unconditionally valid Chebyshev counterpart (equal to bound_value for Chebyshev-type results).
    double raw_chebyshev = 0.0;
    double raw_lambda = 0.0;
};

//! E{e^{lambda eta}; eta <= y} by direct summation. Throws Overflow if lambda y > 700.
double truncated_mgf(const CenteredSummandLaw& summand, double lambda, double y);

BoundResult chebyshev_sum_bound(const CenteredSummandLaw& summand, int n, double x, double y, double lambda);

//! y = eps x, lambda = 2 R(x)/x; in range iff n <= x^2 / (c log x).
BoundResult prop22_bound(const CenteredSummandLaw& summand, int n, double x, double eps, double c = 8.0);

/*!
 * (n+1) G-bar(y), split as jump_term = n G-bar(y) and chernoff_term = G-bar(y);
 * in range iff n R(y)/x^2 <= 1/c. raw_chebyshev uses lambda = (1+eps) R(y)/x.
 */
BoundResult prop23_bound(const CenteredSummandLaw& summand, int n, double x, double y, double eps, double c = 8.0);

//! Exact law of xi_1 + ... + xi_n for a finite support base (index = value).
std::vector<double> exact_sum_distribution(const OffspringLaw& law, int n);
//! Exact P{T_n > x} for a finite support base.
double exact_sum_tail(const CenteredSummandLaw& summand, int n, double x);

enum class SumEstimator {
    Naive,
    //! n E[P{eta_n > max(M, x - T') with uniform tie breaking}], M and T' from the other n-1 summands.
    Conditional,
};

struct SumTailEstimate {
    double x = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
};

//! Monte Carlo P{T_n > x} for every x in the grid from common replicas.
std::vector<SumTailEstimate> sum_tail_mc(const CenteredSummandLaw& summand, int n, const std::vector<double>& x_grid,
                                         std::int64_t replicas, const MonteCarloOptions& options,
                                         SumEstimator method = SumEstimator::Conditional);

struct HarnessRow {
    int n = 0;
    double x = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    double n_gbar = 0.0;
    double ratio = 0.0;
    //! false when x <= n |a|, the central region.
    bool informative = true;
};

struct HarnessReport {
    std::vector<HarnessRow> rows;
    double tolerance = 0.3;
    //! ratio at the largest informative x for each n, in n_grid order.
    std::vector<double> top_ratio;
    bool pass = false;
};

/*!
 * Estimates P{T_n > x} / (n G-bar(x)) over the grid for a summand with
 * negative mean. pass holds when every top ratio is <= 1 + tolerance.
 */
HarnessReport sstar_bound_harness(const CenteredSummandLaw& summand, const std::vector<int>& n_grid,
                                  const std::vector<double>& x_grid, std::int64_t replicas,
                                  const MonteCarloOptions& options, double tolerance = 0.3,
                                  SumEstimator method = SumEstimator::Conditional);

}  // namespace gwtails
