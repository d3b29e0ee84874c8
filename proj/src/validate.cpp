#include "spalps/validate.hpp"

#include <algorithm>
#include <set>

namespace spalps {

namespace {

class Validator {
public:
    Validator(const ModelSpec& spec, const std::map<std::string, Rational>& overrides)
        : spec_(spec), overrides_(overrides) {}

    ValidationResult run() {
        bind_params();
        resolve_habitat();
        lower_species();
        if (habitat_ok_) check_locations();
        check_probabilities();
        check_constants();
        check_channels();
        resolve_placements();

        ValidationResult res;
        res.diagnostics = std::move(diags_);
        if (!has_errors(res.diagnostics)) {
            ValidatedModel m;
            m.spec = spec_;
            m.habitat = habitat_;
            m.params = params_;
            m.species_names = species_names_;
            m.species_defs = species_defs_;
            m.species_order = species_order_;
            m.placements = placements_;
            m.restricted = spec_.restricted;
            res.model = std::move(m);
        }
        return res;
    }

private:
    void error(std::string code, std::string msg, SourcePos pos = {}) {
        diags_.push_back({Severity::Error, std::move(code), std::move(msg), pos});
    }
    void warning(std::string code, std::string msg, SourcePos pos = {}) {
        diags_.push_back({Severity::Warning, std::move(code), std::move(msg), pos});
    }

    void bind_params() {
        for (const auto& [n, v] : spec_.params) params_[n] = v;
        for (const auto& [n, v] : overrides_) {
            if (!params_.count(n)) {
                error("E015", "parameter override names undeclared parameter `" + n + "`");
                continue;
            }
            params_[n] = v;
        }
    }

    void resolve_habitat() {
        const HabitatDecl& d = spec_.habitat;
        if (!spec_.has_habitat) {
            error("E010", "model has no habitat declaration");
            return;
        }
        if (d.kind == Habitat::Kind::Ring) {
            if (d.ring_size < 2) {
                error("E010", "ring habitat needs at least 2 locations", d.pos);
                return;
            }
            habitat_ = Habitat::ring(d.ring_size);
            habitat_ok_ = true;
            return;
        }
        std::set<std::string> seen;
        bool ok = true;
        for (const auto& n : d.node_names) {
            if (!seen.insert(n).second) {
                error("E010", "duplicate habitat node `" + n + "`", d.pos);
                ok = false;
            }
        }
        std::vector<std::pair<int, int>> edges;
        for (const auto& [a, b] : d.edges) {
            auto idx = [&](const std::string& n) {
                for (size_t i = 0; i < d.node_names.size(); ++i)
                    if (d.node_names[i] == n) return static_cast<int>(i);
                return -1;
            };
            int ia = idx(a), ib = idx(b);
            if (ia < 0 || ib < 0) {
                error("E010", "edge endpoint `" + (ia < 0 ? a : b) + "` is not a declared node",
                      d.pos);
                ok = false;
                continue;
            }
            if (ia == ib) {
                error("E010", "self edge on habitat node `" + a + "`", d.pos);
                ok = false;
                continue;
            }
            edges.emplace_back(ia, ib);
        }
        if (d.node_names.empty()) {
            error("E010", "graph habitat has no nodes", d.pos);
            ok = false;
        }
        if (!ok) return;
        habitat_ = Habitat::graph(d.node_names, edges);
        habitat_ok_ = true;
    }

    // ---- lowering ----

    TermPtr lower(const TermPtr& t, bool inside_neighbor_body) {
        switch (t->kind) {
            case ProcessTerm::Kind::Nil:
            case ProcessTerm::Kind::ConstRef:
                return t;
            case ProcessTerm::Kind::Prefix: {
                if (t->act.kind == ActionKind::Go &&
                    t->act.dest.kind == LocationExpr::Kind::It && !inside_neighbor_body)
                    error("E011", "`it` outside pchoice over neighbors", t->pos);
                return ProcessTerm::prefix(t->act, lower(t->next, inside_neighbor_body));
            }
            case ProcessTerm::Kind::ProbChoice: {
                std::vector<std::pair<ProbExpr, TermPtr>> bs;
                for (const auto& [p, b] : t->branches)
                    bs.emplace_back(p, lower(b, inside_neighbor_body));
                return ProcessTerm::prob_choice(std::move(bs));
            }
            case ProcessTerm::Kind::CondComm:
                return ProcessTerm::cond_comm(t->gamma,
                                              lower(t->then_branch, inside_neighbor_body),
                                              lower(t->else_branch, inside_neighbor_body));
            case ProcessTerm::Kind::Parallel: {
                std::vector<TermPtr> ps;
                for (const auto& p : t->parts) ps.push_back(lower(p, inside_neighbor_body));
                return ProcessTerm::parallel(std::move(ps));
            }
            case ProcessTerm::Kind::NeighborChoice:
                return lower_neighbor_choice(t);
        }
        return t;
    }

    TermPtr lower_neighbor_choice(const TermPtr& t) {
        if (!habitat_ok_) return t;
        if (habitat_.kind == Habitat::Kind::Ring) {
            // Uniform ring degree: one branch per distinct myloc offset.
            int m = habitat_.location_count();
            std::vector<int> offsets = m == 2 ? std::vector<int>{1} : std::vector<int>{1, -1};
            Rational share(1, static_cast<std::int64_t>(offsets.size()));
            std::vector<std::pair<ProbExpr, TermPtr>> bs;
            for (int off : offsets) {
                TermPtr sub = substitute_it(t->body, LocationExpr::myloc_offset(off));
                bs.emplace_back(ProbExpr::literal(share), lower(sub, false));
            }
            return ProcessTerm::prob_choice(std::move(bs));
        }
        // Graph habitats keep the node; the uniform-neighbor dispersal row in the
        // transition table needs the `go it . K` shape to fire in a single step.
        const TermPtr& b = t->body;
        if (b->kind != ProcessTerm::Kind::Prefix || b->act.kind != ActionKind::Go ||
            b->act.dest.kind != LocationExpr::Kind::It) {
            error("E012",
                  "pchoice over neighbors on a graph habitat requires a `go it . ...` body",
                  t->pos);
            return t;
        }
        if (term_uses_it(b->next)) {
            error("E011", "`it` may only appear as the dispersal go target", t->pos);
            return t;
        }
        return ProcessTerm::neighbor_choice(ProcessTerm::prefix(b->act, lower(b->next, false)));
    }

    static bool term_uses_it(const TermPtr& t) {
        switch (t->kind) {
            case ProcessTerm::Kind::Nil:
            case ProcessTerm::Kind::ConstRef:
                return false;
            case ProcessTerm::Kind::Prefix:
                if (t->act.kind == ActionKind::Go &&
                    t->act.dest.kind == LocationExpr::Kind::It)
                    return true;
                return term_uses_it(t->next);
            case ProcessTerm::Kind::ProbChoice:
                for (const auto& [p, b] : t->branches)
                    if (term_uses_it(b)) return true;
                return false;
            case ProcessTerm::Kind::CondComm:
                return term_uses_it(t->then_branch) || term_uses_it(t->else_branch);
            case ProcessTerm::Kind::Parallel:
                for (const auto& p : t->parts)
                    if (term_uses_it(p)) return true;
                return false;
            case ProcessTerm::Kind::NeighborChoice:
                return false;  // binds its own `it`
        }
        return false;
    }

    void lower_species() {
        for (const auto& sp : spec_.species) {
            species_names_.push_back(sp.name);
            ConstTable table;
            std::vector<std::string> order;
            for (const auto& [n, body] : sp.defs) {
                table[n] = lower(body, false);
                order.push_back(n);
            }
            species_defs_.push_back(std::move(table));
            species_order_.push_back(std::move(order));
        }
    }

    // ---- per-term checks ----

    template <typename F>
    void walk(const TermPtr& t, F&& visit) {
        visit(t);
        switch (t->kind) {
            case ProcessTerm::Kind::Prefix: walk(t->next, visit); break;
            case ProcessTerm::Kind::ProbChoice:
                for (const auto& [p, b] : t->branches) walk(b, visit);
                break;
            case ProcessTerm::Kind::CondComm:
                walk(t->then_branch, visit);
                walk(t->else_branch, visit);
                break;
            case ProcessTerm::Kind::Parallel:
                for (const auto& p : t->parts) walk(p, visit);
                break;
            case ProcessTerm::Kind::NeighborChoice: walk(t->body, visit); break;
            default: break;
        }
    }

    template <typename F>
    void for_each_lowered_term(F&& f) {
        for (size_t s = 0; s < species_defs_.size(); ++s)
            for (const auto& name : species_order_[s]) f(species_defs_[s].at(name));
    }

    void check_locations() {
        auto check = [&](const TermPtr& t) {
            if (t->kind != ProcessTerm::Kind::Prefix || t->act.kind != ActionKind::Go) return;
            const LocationExpr& d = t->act.dest;
            if (d.kind == LocationExpr::Kind::Literal) {
                if (habitat_.find_location(d.literal) < 0)
                    error("E007", "unknown location `" + d.literal + "`", t->pos);
            } else if (d.kind == LocationExpr::Kind::MyLocOffset) {
                if (habitat_.kind != Habitat::Kind::Ring)
                    error("E008", "myloc offsets require a ring habitat", t->pos);
            }
        };
        for_each_lowered_term([&](const TermPtr& t) { walk(t, check); });
        bool has_isolated = false;
        for (int i = 0; i < habitat_.location_count(); ++i)
            has_isolated = has_isolated || habitat_.neighbors(i).empty();
        if (has_isolated && uses_neighbor_choice())
            warning("W003",
                    "habitat has locations without neighbors; dispersal cannot leave them");
    }

    bool uses_neighbor_choice() {
        bool used = false;
        for_each_lowered_term([&](const TermPtr& t) {
            walk(t, [&](const TermPtr& u) {
                used = used || u->kind == ProcessTerm::Kind::NeighborChoice;
            });
        });
        return used;
    }

    void check_probabilities() {
        auto check = [&](const TermPtr& t) {
            if (t->kind != ProcessTerm::Kind::ProbChoice) return;
            Rational sum(0);
            bool bound = true;
            for (const auto& [p, b] : t->branches) {
                try {
                    Rational v = p.value(params_);
                    if (v <= Rational(0) || v > Rational(1))
                        error("E004",
                              "branch probability " + v.str() + " outside (0, 1]", t->pos);
                    sum += v;
                } catch (const std::out_of_range&) {
                    error("E006", "unbound parameter `" + p.param + "`", t->pos);
                    bound = false;
                }
            }
            if (bound && sum != Rational(1))
                error("E005", "branch probabilities sum to " + sum.str() + ", expected 1",
                      t->pos);
        };
        for_each_lowered_term([&](const TermPtr& t) { walk(t, check); });
        for (const auto& e : spec_.system_entries) {
            TermPtr lowered = lower(e.term, false);
            walk(lowered, check);
        }
    }

    void check_constants() {
        for (size_t s = 0; s < species_defs_.size(); ++s) {
            const ConstTable& table = species_defs_[s];
            // Undefined references anywhere in a body.
            for (const auto& name : species_order_[s]) {
                walk(table.at(name), [&](const TermPtr& t) {
                    if (t->kind == ProcessTerm::Kind::ConstRef && !table.count(t->const_name))
                        error("E002",
                              "undefined constant `" + t->const_name + "` in species `" +
                                  species_names_[s] + "`",
                              t->pos);
                });
            }
            // Guardedness via canonicalization of every definition.
            for (const auto& name : species_order_[s]) {
                try {
                    canonicalize(ProcessTerm::const_ref(name), table);
                } catch (const UnguardedRecursionError& e) {
                    error("E003",
                          "constant `" + e.constant_name + "` in species `" +
                              species_names_[s] + "` recurses without a guard");
                } catch (const UnknownConstantError&) {
                    // already reported above
                }
            }
        }
    }

    void check_channels() {
        auto restricted = [&](const std::string& ch) {
            return std::find(spec_.restricted.begin(), spec_.restricted.end(), ch) !=
                   spec_.restricted.end();
        };
        std::set<std::string> warned;
        auto check = [&](const TermPtr& t) {
            if (t->kind == ProcessTerm::Kind::CondComm) {
                if (!restricted(t->gamma.channel))
                    error("E009",
                          "channel `" + t->gamma.channel +
                              "` used in conditional communication is not restricted",
                          t->pos);
            } else if (t->kind == ProcessTerm::Kind::Prefix && t->act.is_channel()) {
                if (!restricted(t->act.channel) && warned.insert(t->act.channel).second)
                    warning("W001",
                            "channel `" + t->act.channel +
                                "` is not restricted; its prefixes fire without a partner",
                            t->pos);
            }
        };
        for_each_lowered_term([&](const TermPtr& t) { walk(t, check); });
    }

    void resolve_placements() {
        for (const auto& e : spec_.system_entries) {
            ValidatedModel::Placement p;
            p.term = lower(e.term, false);
            p.count = e.count;
            if (e.count < 0) error("E014", "negative population count", e.pos);

            if (habitat_ok_) {
                int loc = habitat_.find_location(e.loc_token);
                if (loc < 0)
                    error("E007", "unknown location `" + e.loc_token + "`", e.pos);
                p.location = loc;
            }

            // Attribute the entry to the species defining its constants.
            std::set<std::string> refs;
            walk(p.term, [&](const TermPtr& t) {
                if (t->kind == ProcessTerm::Kind::ConstRef) refs.insert(t->const_name);
            });
            if (!refs.empty()) {
                int found = -1;
                bool ambiguous = false;
                for (size_t s = 0; s < species_defs_.size(); ++s) {
                    bool all = true;
                    for (const auto& r : refs) all = all && species_defs_[s].count(r) > 0;
                    if (all) {
                        if (found >= 0) ambiguous = true;
                        if (found < 0) found = static_cast<int>(s);
                    }
                }
                if (found < 0) {
                    error("E013",
                          "system process references constants not defined together in any "
                          "species",
                          e.pos);
                } else if (ambiguous) {
                    error("E013", "system process matches more than one species", e.pos);
                } else {
                    p.species = found;
                }
            }
            placements_.push_back(std::move(p));
        }
        if (spec_.system_entries.empty())
            error("E013", "system block is empty", spec_.system_pos);
    }

    const ModelSpec& spec_;
    const std::map<std::string, Rational>& overrides_;
    std::vector<Diagnostic> diags_;
    std::map<std::string, Rational> params_;
    Habitat habitat_;
    bool habitat_ok_ = false;
    std::vector<std::string> species_names_;
    std::vector<ConstTable> species_defs_;
    std::vector<std::vector<std::string>> species_order_;
    std::vector<ValidatedModel::Placement> placements_;
};

}  // namespace

bool ValidatedModel::is_restricted(const std::string& ch) const {
    return std::find(restricted.begin(), restricted.end(), ch) != restricted.end();
}

const ConstTable& ValidatedModel::defs_for(int species_index) const {
    static const ConstTable kEmpty;
    if (species_index < 0 || species_index >= static_cast<int>(species_defs.size()))
        return kEmpty;
    return species_defs[species_index];
}

ValidationResult validate(const ModelSpec& spec,
                          const std::map<std::string, Rational>& param_overrides) {
    return Validator(spec, param_overrides).run();
}

}  // namespace spalps
