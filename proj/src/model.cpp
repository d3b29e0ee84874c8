#include "spalps/model.hpp"

#include <algorithm>
#include <set>

namespace spalps {

// ---------------------------------------------------------------------------
// Diagnostics

std::string format_diagnostic(const std::string& file, const Diagnostic& d) {
    std::string out;
    if (!file.empty()) out += file + ":";
    if (d.pos.line > 0) out += std::to_string(d.pos.line) + ":" + std::to_string(d.pos.col) + ":";
    if (!out.empty()) out += " ";
    out += (d.severity == Severity::Error ? "error" : "warning");
    out += "[" + d.code + "]: " + d.message;
    return out;
}

// ---------------------------------------------------------------------------
// Locations

std::string LocationExpr::key() const {
    switch (kind) {
        case Kind::Literal: return "lit:" + literal;
        case Kind::MyLoc: return "my";
        case Kind::MyLocOffset:
            return offset >= 0 ? "my+" + std::to_string(offset) : "my" + std::to_string(offset);
        case Kind::It: return "it";
    }
    return "";
}

std::string LocationExpr::text() const {
    switch (kind) {
        case Kind::Literal: return literal;
        case Kind::MyLoc: return "myloc";
        case Kind::MyLocOffset:
            return offset >= 0 ? "myloc+" + std::to_string(offset)
                               : "myloc-" + std::to_string(-offset);
        case Kind::It: return "it";
    }
    return "";
}

Habitat Habitat::ring(int m) {
    if (m < 2) throw std::invalid_argument("ring habitat needs at least 2 locations");
    Habitat h;
    h.kind = Kind::Ring;
    h.names.reserve(m);
    h.adj.resize(m);
    for (int i = 0; i < m; ++i) h.names.push_back(std::to_string(i + 1));
    for (int i = 0; i < m; ++i) {
        std::set<int> nb{(i + 1) % m, (i - 1 + m) % m};
        nb.erase(i);
        h.adj[i].assign(nb.begin(), nb.end());
    }
    return h;
}

Habitat Habitat::graph(std::vector<std::string> node_names,
                       const std::vector<std::pair<int, int>>& edges) {
    Habitat h;
    h.kind = Kind::Graph;
    h.names = std::move(node_names);
    h.adj.resize(h.names.size());
    std::vector<std::set<int>> nb(h.names.size());
    for (auto [a, b] : edges) {
        if (a < 0 || b < 0 || a >= (int)h.names.size() || b >= (int)h.names.size())
            throw std::out_of_range("edge endpoint out of range");
        if (a == b) throw std::invalid_argument("habitat graphs may not contain self edges");
        nb[a].insert(b);
        nb[b].insert(a);
    }
    for (size_t i = 0; i < nb.size(); ++i) h.adj[i].assign(nb[i].begin(), nb[i].end());
    return h;
}

const std::string& Habitat::location_name(int i) const {
    if (i < 0 || i >= location_count()) throw std::out_of_range("location index out of range");
    return names[i];
}

const std::vector<int>& Habitat::neighbors(int loc) const {
    if (loc < 0 || loc >= location_count()) throw std::out_of_range("location index out of range");
    return adj[loc];
}

int Habitat::find_location(const std::string& name) const {
    for (int i = 0; i < location_count(); ++i)
        if (names[i] == name) return i;
    return -1;
}

int resolve_location(const LocationExpr& e, int myloc, const Habitat& h) {
    const int m = h.location_count();
    if (myloc < 0 || myloc >= m) throw std::out_of_range("myloc out of range");
    switch (e.kind) {
        case LocationExpr::Kind::Literal: {
            int i = h.find_location(e.literal);
            if (i < 0) throw std::out_of_range("unknown location `" + e.literal + "`");
            return i;
        }
        case LocationExpr::Kind::MyLoc:
            return myloc;
        case LocationExpr::Kind::MyLocOffset: {
            if (h.kind != Habitat::Kind::Ring)
                throw std::invalid_argument("myloc offsets require a ring habitat");
            int r = (myloc + e.offset) % m;
            if (r < 0) r += m;
            return r;
        }
        case LocationExpr::Kind::It:
            throw std::invalid_argument("`it` outside pchoice over neighbors");
    }
    throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// Actions / probabilities

std::string Action::key() const {
    switch (kind) {
        case ActionKind::Input: return "in:" + channel;
        case ActionKind::Output: return "out:" + channel;
        case ActionKind::Go: return "go:" + dest.key();
        case ActionKind::Tick: return "tick";
    }
    return "";
}

std::string Action::text() const {
    switch (kind) {
        case ActionKind::Input: return "in " + channel;
        case ActionKind::Output: return "out " + channel;
        case ActionKind::Go: return "go " + dest.text();
        case ActionKind::Tick: return "tick";
    }
    return "";
}

Rational ProbExpr::value(const std::map<std::string, Rational>& params) const {
    Rational base;
    if (kind == Kind::Lit) {
        base = lit;
    } else {
        auto it = params.find(param);
        if (it == params.end())
            throw std::out_of_range("unbound parameter `" + param + "`");
        base = it->second;
    }
    return complement ? Rational(1) - base : base;
}

std::string ProbExpr::key() const {
    std::string base = kind == Kind::Lit ? "lit:" + lit.str() : "param:" + param;
    return complement ? "1-(" + base + ")" : base;
}

std::string ProbExpr::text() const {
    std::string base = kind == Kind::Lit ? lit.str() : param;
    return complement ? "1 - " + base : base;
}

// ---------------------------------------------------------------------------
// Terms

TermPtr ProcessTerm::nil() {
    auto t = std::make_shared<ProcessTerm>();
    t->kind = Kind::Nil;
    return t;
}

TermPtr ProcessTerm::prefix(Action a, TermPtr cont) {
    auto t = std::make_shared<ProcessTerm>();
    t->kind = Kind::Prefix;
    t->act = std::move(a);
    t->next = std::move(cont);
    return t;
}

TermPtr ProcessTerm::prob_choice(std::vector<std::pair<ProbExpr, TermPtr>> branches) {
    auto t = std::make_shared<ProcessTerm>();
    t->kind = Kind::ProbChoice;
    t->branches = std::move(branches);
    return t;
}

TermPtr ProcessTerm::cond_comm(Action gamma, TermPtr then_b, TermPtr else_b) {
    auto t = std::make_shared<ProcessTerm>();
    t->kind = Kind::CondComm;
    t->gamma = std::move(gamma);
    t->then_branch = std::move(then_b);
    t->else_branch = std::move(else_b);
    return t;
}

TermPtr ProcessTerm::parallel(std::vector<TermPtr> parts) {
    auto t = std::make_shared<ProcessTerm>();
    t->kind = Kind::Parallel;
    t->parts = std::move(parts);
    return t;
}

TermPtr ProcessTerm::const_ref(std::string name) {
    auto t = std::make_shared<ProcessTerm>();
    t->kind = Kind::ConstRef;
    t->const_name = std::move(name);
    return t;
}

TermPtr ProcessTerm::neighbor_choice(TermPtr body) {
    auto t = std::make_shared<ProcessTerm>();
    t->kind = Kind::NeighborChoice;
    t->body = std::move(body);
    return t;
}

std::string ProcessTerm::key() const {
    switch (kind) {
        case Kind::Nil:
            return "0";
        case Kind::Prefix:
            return "P[" + act.key() + "]." + next->key();
        case Kind::ProbChoice: {
            std::string s = "C{";
            for (size_t i = 0; i < branches.size(); ++i) {
                if (i) s += ";";
                s += branches[i].first.key() + ":" + branches[i].second->key();
            }
            return s + "}";
        }
        case Kind::CondComm:
            return "G[" + gamma.key() + "](" + then_branch->key() + "," + else_branch->key() + ")";
        case Kind::Parallel: {
            std::string s = "|(";
            for (size_t i = 0; i < parts.size(); ++i) {
                if (i) s += ",";
                s += parts[i]->key();
            }
            return s + ")";
        }
        case Kind::ConstRef:
            return "K(" + const_name + ")";
        case Kind::NeighborChoice:
            return "N{" + body->key() + "}";
    }
    return "";
}

std::string ProcessTerm::text() const {
    switch (kind) {
        case Kind::Nil:
            return "nil";
        case Kind::Prefix:
            return act.text() + " . " + next->text();
        case Kind::ProbChoice: {
            std::string s = "pchoice { ";
            for (size_t i = 0; i < branches.size(); ++i) {
                if (i) s += "; ";
                s += branches[i].first.text() + ": " + branches[i].second->text();
            }
            return s + " }";
        }
        case Kind::CondComm: {
            std::string head = gamma.kind == ActionKind::Output ? "out " + gamma.channel
                                                                : gamma.channel;
            return head + " ? (" + then_branch->text() + ", " + else_branch->text() + ")";
        }
        case Kind::Parallel: {
            std::string s = "par(";
            for (size_t i = 0; i < parts.size(); ++i) {
                if (i) s += ", ";
                s += parts[i]->text();
            }
            return s + ")";
        }
        case Kind::ConstRef:
            return const_name;
        case Kind::NeighborChoice:
            return "pchoice over neighbors { " + body->text() + " }";
    }
    return "";
}

TermPtr substitute_it(const TermPtr& t, const LocationExpr& repl) {
    auto subst_loc = [&](const LocationExpr& e) {
        return e.kind == LocationExpr::Kind::It ? repl : e;
    };
    switch (t->kind) {
        case ProcessTerm::Kind::Nil:
        case ProcessTerm::Kind::ConstRef:
            return t;
        case ProcessTerm::Kind::Prefix: {
            Action a = t->act;
            if (a.kind == ActionKind::Go) a.dest = subst_loc(a.dest);
            return ProcessTerm::prefix(std::move(a), substitute_it(t->next, repl));
        }
        case ProcessTerm::Kind::ProbChoice: {
            std::vector<std::pair<ProbExpr, TermPtr>> bs;
            bs.reserve(t->branches.size());
            for (const auto& [p, b] : t->branches) bs.emplace_back(p, substitute_it(b, repl));
            return ProcessTerm::prob_choice(std::move(bs));
        }
        case ProcessTerm::Kind::CondComm:
            return ProcessTerm::cond_comm(t->gamma, substitute_it(t->then_branch, repl),
                                          substitute_it(t->else_branch, repl));
        case ProcessTerm::Kind::Parallel: {
            std::vector<TermPtr> ps;
            ps.reserve(t->parts.size());
            for (const auto& p : t->parts) ps.push_back(substitute_it(p, repl));
            return ProcessTerm::parallel(std::move(ps));
        }
        case ProcessTerm::Kind::NeighborChoice:
            // Nested neighbor choices bind their own `it`; leave the body alone.
            return t;
    }
    return t;
}

const TermPtr* SpeciesDef::find(const std::string& constant) const {
    for (const auto& [n, t] : defs)
        if (n == constant) return &t;
    return nullptr;
}

std::string ModelSpec::key() const {
    std::string s = "model{";
    s += "params[";
    for (const auto& [n, v] : params) s += n + "=" + v.str() + ";";
    s += "]habitat[";
    if (has_habitat) {
        if (habitat.kind == Habitat::Kind::Ring) {
            s += "ring:" + std::to_string(habitat.ring_size);
        } else {
            s += "graph:";
            for (const auto& n : habitat.node_names) s += n + ",";
            s += "/";
            for (const auto& [a, b] : habitat.edges) s += a + "-" + b + ",";
        }
    }
    s += "]species[";
    for (const auto& sp : species) {
        s += sp.name + "{";
        for (const auto& [n, t] : sp.defs) s += n + "=" + t->key() + ";";
        s += "}";
    }
    s += "]system[";
    for (const auto& e : system_entries)
        s += e.term->key() + "@" + e.loc_token + "*" + std::to_string(e.count) + ";";
    s += "]restrict[";
    for (const auto& c : restricted) s += c + ",";
    s += "]}";
    return s;
}

// ---------------------------------------------------------------------------
// Canonicalization

namespace {

void collect_canonical(const TermPtr& t, const ConstTable& defs,
                       std::vector<std::string>& unfold_chain,
                       std::vector<TermPtr>& out) {
    switch (t->kind) {
        case ProcessTerm::Kind::Parallel:
            for (const auto& p : t->parts) collect_canonical(p, defs, unfold_chain, out);
            return;
        case ProcessTerm::Kind::ConstRef: {
            const std::string& name = t->const_name;
            for (const auto& seen : unfold_chain)
                if (seen == name) throw UnguardedRecursionError(name);
            auto it = defs.find(name);
            if (it == defs.end()) throw UnknownConstantError(name);
            unfold_chain.push_back(name);
            collect_canonical(it->second, defs, unfold_chain, out);
            unfold_chain.pop_back();
            return;
        }
        default:
            out.push_back(t);
            return;
    }
}

}  // namespace

SpawnMultiset canonicalize(const TermPtr& t, const ConstTable& defs) {
    std::vector<TermPtr> members;
    std::vector<std::string> chain;
    collect_canonical(t, defs, chain, members);

    std::vector<std::pair<std::string, TermPtr>> keyed;
    keyed.reserve(members.size());
    for (const auto& m : members) keyed.emplace_back(m->key(), m);
    std::sort(keyed.begin(), keyed.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    SpawnMultiset ms;
    for (size_t i = 0; i < keyed.size();) {
        size_t j = i;
        while (j < keyed.size() && keyed[j].first == keyed[i].first) ++j;
        ms.entries.emplace_back(keyed[i].second, static_cast<int>(j - i));
        i = j;
    }
    return ms;
}

}  // namespace spalps
