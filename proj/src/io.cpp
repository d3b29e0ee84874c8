#include "spalps/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace spalps {

void atomic_write_file(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open `" + tmp + "` for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw std::runtime_error("write to `" + tmp + "` failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw std::runtime_error("cannot move `" + tmp + "` to `" + path + "`");
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open `" + path + "`");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"\n") != std::string::npos;
}

std::string csv_field(const std::string& s) {
    if (!needs_quoting(s)) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// Splits one CSV line honoring double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

std::string trajectory_csv(const Trajectory& t, const StateSpace& space, const Habitat& h) {
    std::string out = "step,phase,state,location,value\n";
    for (size_t f = 0; f < t.frames.size(); ++f) {
        const Frame& fr = t.frames[f];
        for (int k = 0; k < t.states; ++k) {
            for (int l = 0; l < t.locations; ++l) {
                out += std::to_string(f);
                out += ',';
                out += phase_name(fr.phase);
                out += ',';
                out += csv_field(space[k].display);
                out += ',';
                out += csv_field(h.location_name(l));
                out += ',';
                out += fmt_double(fr.at(k, l, t.locations));
                out += '\n';
            }
        }
    }
    return out;
}

std::string ensemble_csv(const Ensemble& e, const StateSpace& space, const Habitat& h) {
    std::string out = "step,phase,state,location,replica_mean,replica_std\n";
    for (int f = 0; f < e.frame_count; ++f) {
        for (int k = 0; k < e.states; ++k) {
            for (int l = 0; l < e.locations; ++l) {
                size_t i = static_cast<size_t>(k) * e.locations + l;
                out += std::to_string(f);
                out += ',';
                out += phase_name(e.phases[f]);
                out += ',';
                out += csv_field(space[k].display);
                out += ',';
                out += csv_field(h.location_name(l));
                out += ',';
                out += fmt_double(e.mean[f][i]);
                out += ',';
                out += fmt_double(e.stddev[f][i]);
                out += '\n';
            }
        }
    }
    return out;
}

FrameTable parse_frames_csv(const std::string& text) {
    FrameTable table;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = split_csv_line(line);
    if (header.size() == 5 && header[4] == "value") {
        table.has_std = false;
    } else if (header.size() == 6 && header[4] == "replica_mean") {
        table.has_std = true;
    } else {
        throw std::runtime_error("unrecognized CSV header: " + line);
    }
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f = split_csv_line(line);
        if (f.size() != header.size()) {
            throw std::runtime_error("CSV line " + std::to_string(lineno) +
                                     ": expected " + std::to_string(header.size()) +
                                     " fields, got " + std::to_string(f.size()));
        }
        FrameRow row;
        try {
            row.step = std::stoi(f[0]);
            row.value = std::stod(f[4]);
            if (table.has_std) row.stddev = std::stod(f[5]);
        } catch (const std::exception&) {
            throw std::runtime_error("CSV line " + std::to_string(lineno) +
                                     ": malformed numeric field");
        }
        row.phase = f[1];
        row.state = f[2];
        row.location = f[3];
        table.rows.push_back(std::move(row));
    }
    return table;
}

CompareReport compare_frame_tables(const FrameTable& mf, const FrameTable& mc) {
    CompareReport rep;
    constexpr size_t kMaxNotes = 20;
    auto note = [&](const std::string& msg) {
        if (rep.notes.size() < kMaxNotes) rep.notes.push_back(msg);
    };

    struct StepData {
        std::string phase;
        std::map<std::pair<std::string, std::string>, double> cells;
    };
    auto index_rows = [](const FrameTable& t) {
        std::map<int, StepData> by_step;
        for (const auto& r : t.rows) {
            StepData& sd = by_step[r.step];
            sd.phase = r.phase;
            sd.cells[{r.state, r.location}] = r.value;
        }
        return by_step;
    };
    std::map<int, StepData> a = index_rows(mf);
    std::map<int, StepData> b = index_rows(mc);

    for (const auto& [step, da] : a) {
        auto it = b.find(step);
        if (it == b.end()) {
            rep.phases_aligned = false;
            note("step " + std::to_string(step) + " missing from second input");
            continue;
        }
        const StepData& db = it->second;
        if (da.phase != db.phase) {
            rep.phases_aligned = false;
            note("step " + std::to_string(step) + ": phase " + da.phase + " vs " + db.phase);
        }
        double diff = 0.0, ref = 0.0;
        for (const auto& [key, v] : da.cells) {
            auto jt = db.cells.find(key);
            if (jt == db.cells.end()) {
                rep.phases_aligned = false;
                note("step " + std::to_string(step) + ": cell " + key.first + "@" +
                     key.second + " missing from second input");
                continue;
            }
            diff += std::abs(v - jt->second);
            ref += v;
        }
        if (da.cells.size() != db.cells.size()) {
            rep.phases_aligned = false;
            note("step " + std::to_string(step) + ": cell sets differ");
        }
        double l1 = ref > 0.0 ? diff / ref : diff;
        rep.l1.push_back(l1);
        rep.max_l1 = std::max(rep.max_l1, l1);
        ++rep.frames_compared;
    }
    for (const auto& [step, db] : b) {
        (void)db;
        if (a.find(step) == a.end()) {
            rep.phases_aligned = false;
            note("step " + std::to_string(step) + " missing from first input");
        }
    }
    return rep;
}

std::string compare_report_text(const CompareReport& rep) {
    std::string out;
    out += "frames compared: " + std::to_string(rep.frames_compared) + "\n";
    out += "max relative L1: " + fmt_double(rep.max_l1) + "\n";
    out += std::string("phases aligned: ") + (rep.phases_aligned ? "yes" : "no") + "\n";
    for (size_t t = 0; t < rep.l1.size(); ++t) {
        out += "frame " + std::to_string(t) + ": L1 = " + fmt_double(rep.l1[t]) + "\n";
    }
    for (const auto& n : rep.notes) out += "note: " + n + "\n";
    return out;
}

}  // namespace spalps
