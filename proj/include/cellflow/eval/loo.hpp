#pragma once

#include "cellflow/dynamics/model.hpp"
#include "cellflow/training/train.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cellflow::eval {

struct MetricRow {
    Index t = 0;
    std::string metric;
    double value = 0.0;
    std::uint64_t seed = 0;
};
using MetricTable = std::vector<MetricRow>;

/// w1, mmd_g and mmd_m rows for one prediction.
MetricTable distribution_metrics(Index t, const Matrix& predicted, const Matrix& observed, std::uint64_t seed,
                                 Index w1_cap = 1000);

struct LooConfig {
    dynamics::DynamicsConfig model;
    training::TrainConfig train;
    Index w1_cap = 1000;
};

/// For every interior t: train a fresh model on the other timepoints, push
/// snapshot t-1 forward to times[t], score against snapshot t.
MetricTable leave_one_out(const std::vector<Matrix>& z, const std::vector<double>& times, const LooConfig& cfg);

/// Same table with snapshot t-1 carried forward unchanged.
MetricTable identity_baseline(const std::vector<Matrix>& z, std::uint64_t seed, Index w1_cap = 1000);

/// Value for (t, metric); throws if absent.
double lookup(const MetricTable& table, Index t, const std::string& metric);

}  // namespace cellflow::eval
