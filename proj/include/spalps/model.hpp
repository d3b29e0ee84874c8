#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spalps/diagnostics.hpp"
#include "spalps/rational.hpp"

namespace spalps {

// ---------------------------------------------------------------------------
// Locations

struct LocationExpr {
    enum class Kind { Literal, MyLoc, MyLocOffset, It };
    Kind kind = Kind::MyLoc;
    std::string literal;  // Literal: node name or ring position as written
    int offset = 0;       // MyLocOffset: nonzero shift, ring habitats only

    static LocationExpr literal_loc(std::string name) {
        LocationExpr e; e.kind = Kind::Literal; e.literal = std::move(name); return e;
    }
    static LocationExpr myloc() { return LocationExpr{}; }
    static LocationExpr myloc_offset(int k) {
        LocationExpr e; e.kind = Kind::MyLocOffset; e.offset = k; return e;
    }
    static LocationExpr it() { LocationExpr e; e.kind = Kind::It; return e; }

    std::string key() const;
    std::string text() const;
};

struct Habitat {
    enum class Kind { Ring, Graph };
    Kind kind = Kind::Ring;
    std::vector<std::string> names;      // display names; rings use "1".."m"
    std::vector<std::vector<int>> adj;   // sorted, deduplicated, no self entries

    static Habitat ring(int m);
    static Habitat graph(std::vector<std::string> node_names,
                         const std::vector<std::pair<int, int>>& edges);

    int location_count() const { return static_cast<int>(names.size()); }
    const std::string& location_name(int i) const;
    const std::vector<int>& neighbors(int loc) const;
    // -1 when no location has this display name
    int find_location(const std::string& name) const;
};

// Literal -> its index; MyLoc -> myloc; MyLocOffset -> wrapped shift (ring only).
// Unresolvable expressions (unknown literal, offset on a graph, bare `it`) throw.
int resolve_location(const LocationExpr& e, int myloc, const Habitat& h);

// ---------------------------------------------------------------------------
// Actions and probability expressions

enum class ActionKind { Input, Output, Go, Tick };

struct Action {
    ActionKind kind = ActionKind::Tick;
    std::string channel;    // Input/Output
    LocationExpr dest;      // Go

    static Action tick() { return Action{}; }
    static Action input(std::string ch) { return Action{ActionKind::Input, std::move(ch), {}}; }
    static Action output(std::string ch) { return Action{ActionKind::Output, std::move(ch), {}}; }
    static Action go(LocationExpr d) { return Action{ActionKind::Go, {}, std::move(d)}; }

    bool is_channel() const { return kind == ActionKind::Input || kind == ActionKind::Output; }
    std::string key() const;
    std::string text() const;
};

// Branch probability: a rational literal, a parameter reference, or the
// complement `1 - x` of either. Kept structural so rendering round-trips.
struct ProbExpr {
    enum class Kind { Lit, Param };
    Kind kind = Kind::Lit;
    Rational lit;
    std::string param;
    bool complement = false;

    static ProbExpr literal(Rational r) { ProbExpr p; p.lit = std::move(r); return p; }
    static ProbExpr param_ref(std::string name) {
        ProbExpr p; p.kind = Kind::Param; p.param = std::move(name); return p;
    }
    ProbExpr complemented() const { ProbExpr p = *this; p.complement = !p.complement; return p; }

    // Value under a parameter table; unknown parameters throw.
    Rational value(const std::map<std::string, Rational>& params) const;
    std::string key() const;
    std::string text() const;
};

// ---------------------------------------------------------------------------
// Process terms

class ProcessTerm;
using TermPtr = std::shared_ptr<const ProcessTerm>;

// Immutable after construction; shared freely.
class ProcessTerm {
public:
    enum class Kind { Nil, Prefix, ProbChoice, CondComm, Parallel, ConstRef, NeighborChoice };

    Kind kind = Kind::Nil;
    Action act;                                           // Prefix
    TermPtr next;                                         // Prefix continuation
    std::vector<std::pair<ProbExpr, TermPtr>> branches;   // ProbChoice
    Action gamma;                                         // CondComm channel action
    TermPtr then_branch, else_branch;                     // CondComm
    std::vector<TermPtr> parts;                           // Parallel (n-ary, size >= 2)
    std::string const_name;                               // ConstRef
    TermPtr body;                                         // NeighborChoice (contains `it`)
    SourcePos pos;

    static TermPtr nil();
    static TermPtr prefix(Action a, TermPtr cont);
    static TermPtr prob_choice(std::vector<std::pair<ProbExpr, TermPtr>> branches);
    static TermPtr cond_comm(Action gamma, TermPtr then_b, TermPtr else_b);
    static TermPtr parallel(std::vector<TermPtr> parts);
    static TermPtr const_ref(std::string name);
    static TermPtr neighbor_choice(TermPtr body);

    // Canonical structural serialization; ignores source positions.
    std::string key() const;
    // Concrete-syntax fragment; parse(text()) reproduces the term.
    std::string text() const;
};

// Substitute every `it` location expression by `repl` (used by ring lowering).
TermPtr substitute_it(const TermPtr& t, const LocationExpr& repl);

// ---------------------------------------------------------------------------
// Species / model

struct SpeciesDef {
    std::string name;
    std::vector<std::pair<std::string, TermPtr>> defs;  // declaration order
    SourcePos pos;

    const TermPtr* find(const std::string& constant) const;
};

struct HabitatDecl {
    Habitat::Kind kind = Habitat::Kind::Ring;
    int ring_size = 0;
    std::vector<std::string> node_names;
    std::vector<std::pair<std::string, std::string>> edges;
    SourcePos pos;
};

struct SystemEntry {
    TermPtr term;
    std::string loc_token;  // as written; resolved during validation
    std::int64_t count = 0;
    SourcePos pos;
};

struct ModelSpec {
    std::string source_name;                              // file name for diagnostics
    std::vector<std::pair<std::string, Rational>> params; // declaration order
    std::vector<SourcePos> param_pos;
    bool has_habitat = false;
    HabitatDecl habitat;
    std::vector<SpeciesDef> species;
    std::vector<SystemEntry> system_entries;
    std::vector<std::string> restricted;                  // declaration order, deduplicated
    SourcePos system_pos;

    std::string key() const;  // structural serialization of the whole model
};

// ---------------------------------------------------------------------------
// Canonicalization

struct SpawnMultiset {
    // Entries sorted by term key, multiplicities >= 1.
    std::vector<std::pair<TermPtr, int>> entries;

    int total() const {
        int n = 0;
        for (const auto& e : entries) n += e.second;
        return n;
    }
};

struct UnguardedRecursionError : std::runtime_error {
    explicit UnguardedRecursionError(const std::string& constant)
        : std::runtime_error("unguarded recursion through constant `" + constant + "`"),
          constant_name(constant) {}
    std::string constant_name;
};

struct UnknownConstantError : std::runtime_error {
    explicit UnknownConstantError(const std::string& constant)
        : std::runtime_error("reference to undefined constant `" + constant + "`"),
          constant_name(constant) {}
    std::string constant_name;
};

// Constant-definition lookup for one species.
using ConstTable = std::map<std::string, TermPtr>;

// Flattens Parallel composition into a multiset and unfolds ConstRef heads
// until a non-ConstRef head appears. Order-insensitive over Parallel. Throws
// UnguardedRecursionError when unfolding revisits a constant without passing
// a guard, UnknownConstantError for missing definitions.
SpawnMultiset canonicalize(const TermPtr& t, const ConstTable& defs);

}  // namespace spalps
