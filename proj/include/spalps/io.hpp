#pragma once

#include <string>
#include <vector>

#include "spalps/stochastic.hpp"

namespace spalps {

// Writes via a temp file in the same directory plus rename, so readers never
// observe a half-written file. Throws std::runtime_error on I/O failure.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);  // throws on failure

// step,phase,state,location,value
std::string trajectory_csv(const Trajectory& t, const StateSpace& space, const Habitat& h);

// step,phase,state,location,replica_mean,replica_std
std::string ensemble_csv(const Ensemble& e, const StateSpace& space, const Habitat& h);

// Parsed form shared by both schemas; `value` holds the mean column for
// ensemble files and `stddev` stays zero for trajectory files.
struct FrameRow {
    int step = 0;
    std::string phase;
    std::string state;
    std::string location;
    double value = 0.0;
    double stddev = 0.0;
};

struct FrameTable {
    bool has_std = false;
    std::vector<FrameRow> rows;
};

FrameTable parse_frames_csv(const std::string& text);  // throws on malformed input

// Joins on (step, state, location); reports per-step relative L1 of value
// columns and any phase or key misalignment.
CompareReport compare_frame_tables(const FrameTable& mf, const FrameTable& mc);

std::string compare_report_text(const CompareReport& rep);

}  // namespace spalps
