#pragma once

#include "cellflow/numerics/types.hpp"

#include <span>
#include <vector>

namespace cellflow {

double mean(std::span<const double> v);
double median(std::vector<double> v);
double pearson(std::span<const double> x, std::span<const double> y);
/// Population standard deviation.
double stddev(std::span<const double> v);

/// Median of pairwise distances between rows, over at most `cap` rows chosen
/// by a seeded subsample.
double median_pairwise_distance(const Matrix& x, Index cap = 1000, std::uint64_t seed = 0);

}  // namespace cellflow
