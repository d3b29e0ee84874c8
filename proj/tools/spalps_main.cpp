#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spalps/io.hpp"
#include "spalps/json_io.hpp"
#include "spalps/parser.hpp"

namespace {

constexpr const char* kVersion = "spalps 1.0.0";

constexpr int kExitOk = 0;
constexpr int kExitDiagnostics = 1;
constexpr int kExitUsage = 2;

struct CliError {
    int code;
    std::string message;
};

std::map<std::string, spalps::Rational> parse_param_overrides(
    const std::vector<std::string>& raw) {
    std::map<std::string, spalps::Rational> out;
    for (const auto& item : raw) {
        size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw CliError{kExitUsage, "--param expects name=value, got `" + item + "`"};
        }
        std::string name = item.substr(0, eq);
        std::string value = item.substr(eq + 1);
        try {
            out[name] = spalps::parse_rational(value);
        } catch (const std::exception& e) {
            throw CliError{kExitUsage, "--param " + name + ": " + e.what()};
        }
    }
    return out;
}

std::string load_source(const std::string& path) {
    try {
        return spalps::read_file(path);
    } catch (const std::exception& e) {
        throw CliError{kExitUsage, e.what()};
    }
}

spalps::ValidatedModel load_model(const std::string& path,
                                  const std::vector<std::string>& raw_params) {
    auto overrides = parse_param_overrides(raw_params);
    std::string text = load_source(path);
    spalps::ModelSpec spec;
    try {
        spec = spalps::parse_model(text, path);
    } catch (const spalps::ParseError& e) {
        throw CliError{kExitDiagnostics, spalps::format_diagnostic(path, e.diagnostic())};
    }
    spalps::ValidationResult result = spalps::validate(spec, overrides);
    std::string messages;
    for (const auto& d : result.diagnostics) {
        if (!messages.empty()) messages += "\n";
        messages += spalps::format_diagnostic(path, d);
    }
    if (!result.ok()) {
        throw CliError{kExitDiagnostics, messages};
    }
    if (!messages.empty()) std::cerr << messages << "\n";
    return *result.model;
}

spalps::Compiled compile_from(const std::string& path,
                              const std::vector<std::string>& raw_params) {
    spalps::ValidatedModel m = load_model(path, raw_params);
    try {
        return spalps::compile_model(m);
    } catch (const std::exception& e) {
        throw CliError{kExitDiagnostics, std::string("error: ") + e.what()};
    }
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    try {
        spalps::atomic_write_file(out_path, content);
    } catch (const std::exception& e) {
        throw CliError{kExitUsage, e.what()};
    }
}

std::string states_text(const spalps::Compiled& c) {
    std::string out;
    for (int k = 0; k < c.space.size(); ++k) {
        const spalps::CanonicalState& st = c.space[k];
        out += "S" + std::to_string(k + 1) + ": " + st.display + " [" +
               spalps::head_kind_name(st.head) + "]";
        if (st.species >= 0) out += " species " + c.model.species_names[st.species];
        out += " = " + st.term->text();
        out += "\n";
    }
    return out;
}

spalps::Compiled scale_init(spalps::Compiled c, std::int64_t factor) {
    for (auto& cell : c.init.cells) cell *= factor;
    return c;
}

// ---------------------------------------------------------------------------
// Corpus goldens

struct GoldenFile {
    std::string name;
    std::string content;
};

std::vector<GoldenFile> corpus_goldens(const std::string& stem, const spalps::Compiled& c) {
    constexpr int kGoldenSteps = 30;
    std::vector<GoldenFile> files;
    files.push_back({stem + ".states.txt", states_text(c)});
    files.push_back({stem + ".stt.txt", spalps::stt_text(c.stt, c.space, c.model.habitat)});
    files.push_back({stem + ".eqs.txt", spalps::equations_text(c)});
    spalps::Trajectory traj = spalps::evaluate(c, kGoldenSteps);
    files.push_back(
        {stem + ".traj.csv", spalps::trajectory_csv(traj, c.space, c.model.habitat)});
    return files;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compiler and simulator for spatial process-algebra population models"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string file, out_path, mf_path, mc_path, emit_kind = "eqs", corpus_dir;
    std::vector<std::string> raw_params;
    int steps = 30;
    bool collapse = false;
    bool check_goldens = false;
    std::uint64_t seed = 1;
    int replicas = 100;
    std::int64_t scale = 1;

    CLI::App* cmd_check = app.add_subcommand("check", "Parse and validate a model");
    cmd_check->add_option("file", file, "model file")->required();
    cmd_check->add_option("--param", raw_params, "override a parameter (name=value)");

    CLI::App* cmd_states = app.add_subcommand("states", "List the reachable states");
    cmd_states->add_option("file", file, "model file")->required();
    cmd_states->add_option("--param", raw_params, "override a parameter (name=value)");

    CLI::App* cmd_compile =
        app.add_subcommand("compile", "Emit the transition table, recurrences, or JSON");
    cmd_compile->add_option("file", file, "model file")->required();
    cmd_compile->add_option("--emit", emit_kind, "eqs | stt | json")
        ->check(CLI::IsMember({"eqs", "stt", "json"}));
    cmd_compile->add_option("--out", out_path, "output file (default stdout)");
    cmd_compile->add_option("--param", raw_params, "override a parameter (name=value)");

    CLI::App* cmd_sim = app.add_subcommand("simulate", "Deterministic mean trajectory");
    cmd_sim->add_option("file", file, "model file")->required();
    cmd_sim->add_option("--steps", steps, "number of micro-steps")->check(CLI::NonNegativeNumber);
    cmd_sim->add_flag("--collapse-ticks", collapse, "keep only the initial and clock frames");
    cmd_sim->add_option("--out", out_path, "output file (default stdout)");
    cmd_sim->add_option("--param", raw_params, "override a parameter (name=value)");

    CLI::App* cmd_mc = app.add_subcommand("mc", "Stochastic replica ensemble");
    cmd_mc->add_option("file", file, "model file")->required();
    cmd_mc->add_option("--seed", seed, "ensemble seed");
    cmd_mc->add_option("--replicas", replicas, "number of replicas")
        ->check(CLI::PositiveNumber);
    cmd_mc->add_option("--steps", steps, "number of micro-steps")->check(CLI::NonNegativeNumber);
    cmd_mc->add_option("--scale", scale, "multiply every initial count")
        ->check(CLI::PositiveNumber);
    cmd_mc->add_option("--out", out_path, "output file (default stdout)");
    cmd_mc->add_option("--param", raw_params, "override a parameter (name=value)");

    CLI::App* cmd_cmp = app.add_subcommand("compare", "Compare two trajectory CSV files");
    cmd_cmp->add_option("--mf", mf_path, "deterministic trajectory CSV")->required();
    cmd_cmp->add_option("--mc", mc_path, "ensemble CSV")->required();
    cmd_cmp->add_option("--out", out_path, "output file (default stdout)");

    CLI::App* cmd_corpus =
        app.add_subcommand("corpus", "Regenerate or verify golden outputs for a model corpus");
    cmd_corpus->add_option("dir", corpus_dir, "directory containing .palps models")->required();
    cmd_corpus->add_flag("--check", check_goldens, "verify instead of rewrite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (cmd_check->parsed()) {
            spalps::Compiled c = compile_from(file, raw_params);
            std::cout << "valid: " << c.space.size() << " states, "
                      << c.model.habitat.location_count() << " locations\n";
            return kExitOk;
        }
        if (cmd_states->parsed()) {
            spalps::Compiled c = compile_from(file, raw_params);
            std::cout << states_text(c);
            return kExitOk;
        }
        if (cmd_compile->parsed()) {
            spalps::Compiled c = compile_from(file, raw_params);
            std::string content;
            if (emit_kind == "stt") {
                content = spalps::stt_text(c.stt, c.space, c.model.habitat);
            } else if (emit_kind == "json") {
                content = spalps::compiled_json(c);
            } else {
                content = spalps::equations_text(c);
            }
            emit(out_path, content);
            return kExitOk;
        }
        if (cmd_sim->parsed()) {
            spalps::Compiled c = compile_from(file, raw_params);
            spalps::Trajectory traj = spalps::evaluate(c, steps);
            if (traj.stalled) {
                std::cerr << "warning: livelock detected after "
                          << traj.frames.size() - 1 << " frames; time cannot advance\n";
            }
            if (collapse) traj = spalps::collapse_ticks(traj);
            emit(out_path, spalps::trajectory_csv(traj, c.space, c.model.habitat));
            return kExitOk;
        }
        if (cmd_mc->parsed()) {
            spalps::Compiled c = compile_from(file, raw_params);
            if (scale != 1) c = scale_init(std::move(c), scale);
            spalps::Ensemble ens = spalps::run_ensemble(c, steps, seed, replicas);
            if (ens.any_stalled) {
                std::cerr << "warning: at least one replica hit a livelock\n";
            }
            if (!ens.phases_agree) {
                std::cerr << "warning: replicas disagree on the phase sequence; "
                             "per-frame statistics mix phases\n";
            }
            emit(out_path, spalps::ensemble_csv(ens, c.space, c.model.habitat));
            return kExitOk;
        }
        if (cmd_cmp->parsed()) {
            spalps::FrameTable mf = spalps::parse_frames_csv(load_source(mf_path));
            spalps::FrameTable mc = spalps::parse_frames_csv(load_source(mc_path));
            spalps::CompareReport rep = spalps::compare_frame_tables(mf, mc);
            emit(out_path, spalps::compare_report_text(rep));
            return kExitOk;
        }
        if (cmd_corpus->parsed()) {
            namespace fs = std::filesystem;
            std::vector<fs::path> models;
            try {
                for (const auto& entry : fs::directory_iterator(corpus_dir)) {
                    if (entry.path().extension() == ".palps") models.push_back(entry.path());
                }
            } catch (const fs::filesystem_error& e) {
                throw CliError{kExitUsage, e.what()};
            }
            std::sort(models.begin(), models.end());
            if (models.empty()) {
                throw CliError{kExitUsage, "no .palps models under `" + corpus_dir + "`"};
            }
            fs::path golden_dir = fs::path(corpus_dir) / "golden";
            bool mismatch = false;
            for (const auto& model_path : models) {
                spalps::Compiled c = compile_from(model_path.string(), {});
                auto files = corpus_goldens(model_path.stem().string(), c);
                for (const auto& gf : files) {
                    fs::path target = golden_dir / gf.name;
                    if (check_goldens) {
                        std::string existing;
                        try {
                            existing = spalps::read_file(target.string());
                        } catch (const std::exception&) {
                            std::cerr << "missing golden: " << target.string() << "\n";
                            mismatch = true;
                            continue;
                        }
                        if (existing != gf.content) {
                            std::cerr << "golden mismatch: " << target.string() << "\n";
                            mismatch = true;
                        }
                    } else {
                        std::error_code ec;
                        fs::create_directories(golden_dir, ec);
                        spalps::atomic_write_file(target.string(), gf.content);
                        std::cout << "wrote " << target.string() << "\n";
                    }
                }
            }
            if (check_goldens && mismatch) return kExitDiagnostics;
            if (check_goldens) std::cout << "goldens match\n";
            return kExitOk;
        }
    } catch (const CliError& e) {
        std::cerr << e.message << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDiagnostics;
    }
    return kExitUsage;
}
