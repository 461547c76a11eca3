#include "cellflow/io/trajectories.hpp"

#include "cellflow/error.hpp"
#include "cellflow/io/csv.hpp"

#include <json.hpp>

#include <sstream>

namespace cellflow::io {

using nlohmann::json;

std::vector<TrajectoryRecord> records_from_rollout(const training::Rollout& r, const std::vector<Index>* branches) {
    if (branches && static_cast<Index>(branches->size()) != r.cells())
        fail(ErrorCode::ShapeMismatch, "trajectory records: one branch label per cell");
    std::vector<TrajectoryRecord> out;
    for (Index c = 0; c < r.cells(); ++c) {
        TrajectoryRecord rec;
        rec.cell_id = c;
        if (branches) rec.branch = (*branches)[static_cast<std::size_t>(c)];
        rec.times = r.times;
        rec.path = r.path(c);
        for (const Vector& m : r.masses) rec.mass.push_back(m[c]);
        out.push_back(std::move(rec));
    }
    return out;
}

std::string to_jsonl(const std::vector<TrajectoryRecord>& records) {
    std::string s;
    for (const auto& rec : records) {
        json j;
        j["cell_id"] = rec.cell_id;
        if (rec.branch) j["branch"] = *rec.branch;
        j["times"] = rec.times;
        json path = json::array();
        for (Index k = 0; k < rec.path.rows(); ++k) {
            json p = json::array();
            for (Index c = 0; c < rec.path.cols(); ++c) p.push_back(rec.path(k, c));
            path.push_back(std::move(p));
        }
        j["path"] = std::move(path);
        j["mass"] = rec.mass;
        s += j.dump() + "\n";
    }
    return s;
}

void write_trajectories(const std::filesystem::path& path, const std::vector<TrajectoryRecord>& records) {
    write_text(path, to_jsonl(records));
}

std::vector<TrajectoryRecord> read_trajectories(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    std::string line;
    std::vector<TrajectoryRecord> out;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            TrajectoryRecord rec;
            rec.cell_id = j.at("cell_id").get<Index>();
            if (j.contains("branch")) rec.branch = j["branch"].get<Index>();
            rec.times = j.at("times").get<std::vector<double>>();
            const auto rows = j.at("path").get<std::vector<std::vector<double>>>();
            const std::size_t d = rows.empty() ? 0 : rows.front().size();
            rec.path.resize(static_cast<Index>(rows.size()), static_cast<Index>(d));
            for (std::size_t k = 0; k < rows.size(); ++k) {
                if (rows[k].size() != d) fail(ErrorCode::Format, "ragged path");
                for (std::size_t c = 0; c < d; ++c) rec.path(static_cast<Index>(k), static_cast<Index>(c)) = rows[k][c];
            }
            rec.mass = j.at("mass").get<std::vector<double>>();
            if (rec.times.size() != rows.size() || rec.mass.size() != rows.size())
                fail(ErrorCode::Format, "times, path and mass lengths differ");
            out.push_back(std::move(rec));
        } catch (const json::exception& e) {
            fail(ErrorCode::Format, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        } catch (const Error& e) {
            fail(ErrorCode::Format, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<Matrix> states_from_records(const std::vector<TrajectoryRecord>& records) {
    if (records.empty()) return {};
    const Index steps = records.front().path.rows(), d = records.front().path.cols();
    std::vector<Matrix> states(static_cast<std::size_t>(steps), Matrix(static_cast<Index>(records.size()), d));
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].path.rows() != steps || records[i].path.cols() != d)
            fail(ErrorCode::ShapeMismatch, "trajectory records do not share one grid");
        for (Index k = 0; k < steps; ++k) states[static_cast<std::size_t>(k)].row(static_cast<Index>(i)) = records[i].path.row(k);
    }
    return states;
}

}  // namespace cellflow::io
