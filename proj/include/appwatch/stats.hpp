#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <vector>

namespace appwatch::stats {

template <typename Derived>
typename Derived::Scalar mean(const Eigen::DenseBase<Derived>& values)
{
    return values.size() == 0 ? typename Derived::Scalar(0) : values.derived().mean();
}

/// Population standard deviation, two-pass.
template <typename Derived>
typename Derived::Scalar population_stddev(const Eigen::DenseBase<Derived>& values)
{
    using Scalar = typename Derived::Scalar;
    if (values.size() == 0) return Scalar(0);
    const Scalar mu = values.derived().mean();
    const Scalar ss = (values.derived().array() - mu).square().sum();
    return std::sqrt(ss / Scalar(values.size()));
}

/// Median with the midpoint convention for even counts. Empty input gives 0.
template <typename Scalar>
Scalar median(std::vector<Scalar> values)
{
    if (values.empty()) return Scalar(0);
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    const Scalar upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const Scalar lower = *std::max_element(values.begin(), values.begin() + mid);
    return (lower + upper) / Scalar(2);
}

template <typename Derived>
typename Derived::Scalar median(const Eigen::DenseBase<Derived>& values)
{
    using Scalar = typename Derived::Scalar;
    std::vector<Scalar> v(static_cast<std::size_t>(values.size()));
    for (Eigen::Index i = 0; i < values.size(); ++i) v[i] = values.derived()(i);
    return median(std::move(v));
}

/// Median absolute deviation around the median (unscaled).
template <typename Derived>
typename Derived::Scalar median_absolute_deviation(const Eigen::DenseBase<Derived>& values)
{
    using Scalar = typename Derived::Scalar;
    const Scalar m = median(values);
    std::vector<Scalar> dev(static_cast<std::size_t>(values.size()));
    for (Eigen::Index i = 0; i < values.size(); ++i) dev[i] = std::abs(values.derived()(i) - m);
    return median(std::move(dev));
}

}  // namespace appwatch::stats
