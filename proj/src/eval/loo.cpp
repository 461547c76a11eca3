#include "cellflow/eval/loo.hpp"

#include "cellflow/dynamics/integrate.hpp"
#include "cellflow/error.hpp"
#include "cellflow/eval/metrics.hpp"

namespace cellflow::eval {

MetricTable distribution_metrics(Index t, const Matrix& predicted, const Matrix& observed, std::uint64_t seed,
                                 Index w1_cap) {
    return {{t, "w1", w1(predicted, observed, w1_cap, seed), seed},
            {t, "mmd_g", mmd_gaussian(predicted, observed), seed},
            {t, "mmd_m", mmd_mean(predicted, observed), seed}};
}

MetricTable leave_one_out(const std::vector<Matrix>& z, const std::vector<double>& times, const LooConfig& cfg) {
    require(z.size() >= 3, "leave_one_out: need at least three timepoints");
    require(times.size() == z.size(), "leave_one_out: one time per snapshot");
    const std::uint64_t seed = cfg.train.seed;
    MetricTable table;
    for (std::size_t t = 1; t + 1 < z.size(); ++t) {
        std::vector<Matrix> kept;
        std::vector<double> kept_times;
        for (std::size_t s = 0; s < z.size(); ++s)
            if (s != t) kept.push_back(z[s]), kept_times.push_back(times[s]);

        dynamics::DynamicsConfig mc = cfg.model;
        mc.seed = derive_seed(cfg.model.seed, {t});
        training::TrainConfig tc = cfg.train;
        tc.seed = derive_seed(seed, {t});
        const auto trained = training::train(dynamics::make_dynamics_model(mc), kept, kept_times, tc);

        const Index steps = training::segment_steps(times[t - 1], times[t], tc.steps_per_unit);
        const auto traj =
            dynamics::integrate(trained.model, z[t - 1], times[t - 1], times[t], steps, derive_seed(tc.seed, {0x4c4f4fULL}));
        auto rows = distribution_metrics(static_cast<Index>(t), traj.states.back(), z[t], seed, cfg.w1_cap);
        table.insert(table.end(), rows.begin(), rows.end());
    }
    return table;
}

MetricTable identity_baseline(const std::vector<Matrix>& z, std::uint64_t seed, Index w1_cap) {
    require(z.size() >= 3, "identity_baseline: need at least three timepoints");
    MetricTable table;
    for (std::size_t t = 1; t + 1 < z.size(); ++t) {
        auto rows = distribution_metrics(static_cast<Index>(t), z[t - 1], z[t], seed, w1_cap);
        table.insert(table.end(), rows.begin(), rows.end());
    }
    return table;
}

double lookup(const MetricTable& table, Index t, const std::string& metric) {
    for (const auto& r : table)
        if (r.t == t && r.metric == metric) return r.value;
    fail(ErrorCode::InvalidArgument, "metric table has no row (" + std::to_string(t) + ", " + metric + ")");
}

}  // namespace cellflow::eval
