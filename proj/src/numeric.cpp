#include "gwtails/numeric.hpp"

#include "gwtails/error.hpp"

namespace gwtails {

std::vector<double> geometric_grid(double start, double factor, int count)
{
    require(start > 0.0, "geometric grid start must be positive");
    require(factor > 1.0, "geometric grid factor must exceed 1");
    require(count >= 1, "geometric grid needs at least one point");
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) grid.push_back(start * std::pow(factor, i));
    return grid;
}

std::vector<double> log_spaced(double lo, double hi, int count)
{
    require(lo > 0.0 && hi > lo, "log_spaced needs 0 < lo < hi");
    require(count >= 2, "log_spaced needs at least two points");
    std::vector<double> grid(static_cast<std::size_t>(count));
    const double step = std::log(hi / lo) / (count - 1);
    for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
    grid.back() = hi;
    return grid;
}

void MomentAccumulator::add(double x)
{
    const std::int64_t n1 = n_;
    ++n_;
    const double n = static_cast<double>(n_);
    const double delta = x - mean_;
    const double delta_n = delta / n;
    const double delta_n2 = delta_n * delta_n;
    const double term1 = delta * delta_n * static_cast<double>(n1);
    mean_ += delta_n;
    m4_ += term1 * delta_n2 * (n * n - 3 * n + 3) + 6 * delta_n2 * m2_ - 4 * delta_n * m3_;
    m3_ += term1 * delta_n * (n - 2) - 3 * delta_n * m2_;
    m2_ += term1;
}

void MomentAccumulator::merge(const MomentAccumulator& o)
{
    if (o.n_ == 0) return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(o.n_);
    const double n = na + nb;
    const double delta = o.mean_ - mean_;
    const double d2 = delta * delta;
    const double d3 = d2 * delta;
    const double d4 = d2 * d2;

    const double mean = mean_ + delta * nb / n;
    const double m2 = m2_ + o.m2_ + d2 * na * nb / n;
    const double m3 = m3_ + o.m3_ + d3 * na * nb * (na - nb) / (n * n) +
                      3.0 * delta * (na * o.m2_ - nb * m2_) / n;
    const double m4 = m4_ + o.m4_ + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                      6.0 * d2 * (na * na * o.m2_ + nb * nb * m2_) / (n * n) +
                      4.0 * delta * (na * o.m3_ - nb * m3_) / n;
    n_ += o.n_;
    mean_ = mean;
    m2_ = m2;
    m3_ = m3;
    m4_ = m4;
}

double MomentAccumulator::std_error_of_mean() const
{
    if (n_ < 2) return 0.0;
    return std::sqrt(variance() / static_cast<double>(n_));
}

double MomentAccumulator::std_error_of_variance() const
{
    if (n_ < 2) return 0.0;
    const double n = static_cast<double>(n_);
    const double mu2 = m2_ / n;
    const double mu4 = m4_ / n;
    return std::sqrt(std::max(0.0, mu4 - mu2 * mu2) / n);
}

}  // namespace gwtails
