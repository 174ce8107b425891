#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace gwtails {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

//! Tails below this are reported as exactly zero.
inline constexpr double kTailFloor = 1e-300;

//! Neumaier-compensated running sum.
class CompensatedSum {
  public:
    CompensatedSum& operator+=(double v)
    {
        double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
        return *this;
    }

    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

//! count points start, start*factor, ... ; requires start > 0, factor > 1.
std::vector<double> geometric_grid(double start, double factor, int count);

//! count log-spaced points from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, int count);

//! Standard normal upper tail Q(z) = P{N > z}.
inline double normal_upper(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

inline bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

/*!
 * Sample mean / variance accumulator (Welford) that also tracks the fourth
 * central moment, used for standard errors of sample variances.
 */
class MomentAccumulator {
  public:
    void add(double x);
    void merge(const MomentAccumulator& other);

    std::int64_t count() const { return n_; }
    double mean() const { return mean_; }
    //! Unbiased sample variance.
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double std_error_of_mean() const;
    //! Asymptotic standard error of the sample variance, sqrt((mu4 - s^4)/n).
    double std_error_of_variance() const;

  private:
    std::int64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    double m3_ = 0.0;
    double m4_ = 0.0;
};

}  // namespace gwtails
