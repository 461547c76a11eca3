#pragma once

#include "cellflow/numerics/types.hpp"
#include "cellflow/training/rollout.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cellflow::io {

/// One line of the trajectory file:
/// {"cell_id": i, "branch": b (optional), "times": [...], "path": [[...]], "mass": [...]}
struct TrajectoryRecord {
    Index cell_id = 0;
    std::optional<Index> branch;
    std::vector<double> times;
    /// steps + 1 x d
    Matrix path;
    std::vector<double> mass;
};

std::vector<TrajectoryRecord> records_from_rollout(const training::Rollout& r,
                                                   const std::vector<Index>* branches = nullptr);

std::string to_jsonl(const std::vector<TrajectoryRecord>& records);
void write_trajectories(const std::filesystem::path& path, const std::vector<TrajectoryRecord>& records);
/// Format on malformed lines; an empty file gives no records.
std::vector<TrajectoryRecord> read_trajectories(const std::filesystem::path& path);

/// Grid states (each cells x d) rebuilt from records that share one grid.
std::vector<Matrix> states_from_records(const std::vector<TrajectoryRecord>& records);

}  // namespace cellflow::io
