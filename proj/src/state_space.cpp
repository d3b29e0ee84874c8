#include "spalps/state_space.hpp"

#include <deque>
#include <set>
#include <utility>

namespace spalps {

const char* head_kind_name(HeadKind k) {
    switch (k) {
        case HeadKind::Nil: return "nil";
        case HeadKind::Prob: return "prob";
        case HeadKind::Go: return "go";
        case HeadKind::Tick: return "tick";
        case HeadKind::Chan: return "chan";
        case HeadKind::CondComm: return "comm";
    }
    return "?";
}

int StateSpace::find(int species, const std::string& key) const {
    auto it = index.find({species, key});
    return it == index.end() ? -1 : it->second;
}

namespace {

// Alias keys of single-member constants so states print as `W_3`, not as the
// unfolded term text. First definition in declaration order wins.
std::map<std::string, std::string> alias_map(const ValidatedModel& m, int species) {
    std::map<std::string, std::string> aliases;
    if (species < 0) return aliases;
    const ConstTable& defs = m.defs_for(species);
    for (const std::string& name : m.species_order[species]) {
        SpawnMultiset ms = canonicalize(ProcessTerm::const_ref(name), defs);
        if (ms.entries.size() == 1 && ms.entries[0].second == 1) {
            aliases.emplace(ms.entries[0].first->key(), name);
        }
    }
    return aliases;
}

CanonicalState make_state(TermPtr term, int species, int id,
                          const std::map<std::string, std::string>& aliases) {
    CanonicalState st;
    st.key = term->key();
    st.species = species;
    auto it = aliases.find(st.key);
    // Constant-defined states keep their name; anonymous intermediates get a
    // compact index name so tables and CSV stay readable.
    st.display = it != aliases.end() ? it->second : "S" + std::to_string(id + 1);
    switch (term->kind) {
        case ProcessTerm::Kind::Nil:
            st.head = HeadKind::Nil;
            break;
        case ProcessTerm::Kind::Prefix:
            switch (term->act.kind) {
                case ActionKind::Tick: st.head = HeadKind::Tick; break;
                case ActionKind::Go: st.head = HeadKind::Go; break;
                default: st.head = HeadKind::Chan; break;
            }
            st.action = term->act;
            break;
        case ProcessTerm::Kind::ProbChoice:
            st.head = HeadKind::Prob;
            break;
        case ProcessTerm::Kind::NeighborChoice:
            st.head = HeadKind::Prob;
            st.disperse = true;
            st.action = term->body->act;
            break;
        case ProcessTerm::Kind::CondComm:
            st.head = HeadKind::CondComm;
            st.action = term->gamma;
            break;
        default:
            throw std::logic_error("non-canonical term reached state construction");
    }
    st.term = std::move(term);
    return st;
}

// One-step continuations of a canonical term, in deterministic order.
std::vector<TermPtr> continuations(const TermPtr& t) {
    switch (t->kind) {
        case ProcessTerm::Kind::Nil:
            return {};
        case ProcessTerm::Kind::Prefix:
            return {t->next};
        case ProcessTerm::Kind::ProbChoice: {
            std::vector<TermPtr> out;
            for (const auto& br : t->branches) out.push_back(br.second);
            return out;
        }
        case ProcessTerm::Kind::CondComm:
            return {t->then_branch, t->else_branch};
        case ProcessTerm::Kind::NeighborChoice:
            return {t->body->next};
        default:
            throw std::logic_error("non-canonical term reached successor expansion");
    }
}

}  // namespace

StateSpace enumerate_states(const ValidatedModel& m) {
    StateSpace space;
    std::map<int, std::map<std::string, std::string>> aliases;
    auto aliases_for = [&](int species) -> const std::map<std::string, std::string>& {
        auto it = aliases.find(species);
        if (it == aliases.end()) it = aliases.emplace(species, alias_map(m, species)).first;
        return it->second;
    };

    std::deque<int> frontier;
    std::set<std::string> used_displays;
    auto intern = [&](const TermPtr& term, int species) -> int {
        std::string key = term->key();
        int found = space.find(species, key);
        if (found >= 0) return found;
        if (space.size() >= kMaxStates) {
            throw StateSpaceOverflowError(term->text());
        }
        int id = space.size();
        CanonicalState st = make_state(term, species, id, aliases_for(species));
        // Same display from two species (or an alias matching a term's own
        // text elsewhere) would be ambiguous in tables and CSV output.
        if (!used_displays.insert(st.display).second) {
            st.display += "#" + std::to_string(id + 1);
            used_displays.insert(st.display);
        }
        space.states.push_back(std::move(st));
        space.index.emplace(std::make_pair(species, std::move(key)), id);
        frontier.push_back(id);
        return id;
    };

    for (const auto& p : m.placements) {
        SpawnMultiset ms = canonicalize(p.term, m.defs_for(p.species));
        for (const auto& [term, mult] : ms.entries) {
            (void)mult;
            intern(term, p.species);
        }
    }

    while (!frontier.empty()) {
        int id = frontier.front();
        frontier.pop_front();
        // Copy: intern() may reallocate `states`.
        TermPtr term = space.states[id].term;
        int species = space.states[id].species;
        for (const TermPtr& cont : continuations(term)) {
            SpawnMultiset ms = canonicalize(cont, m.defs_for(species));
            for (const auto& [succ, mult] : ms.entries) {
                (void)mult;
                intern(succ, species);
            }
        }
    }
    return space;
}

InitMatrix build_init_matrix(const ValidatedModel& m, const StateSpace& space) {
    InitMatrix init;
    init.states = space.size();
    init.locations = m.habitat.location_count();
    init.cells.assign(static_cast<size_t>(init.states) * init.locations, 0);
    for (const auto& p : m.placements) {
        SpawnMultiset ms = canonicalize(p.term, m.defs_for(p.species));
        for (const auto& [term, mult] : ms.entries) {
            int id = space.find(p.species, term->key());
            init.at(id, p.location) += static_cast<std::int64_t>(mult) * p.count;
        }
    }
    return init;
}

}  // namespace spalps
