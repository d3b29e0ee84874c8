#include "doctest.h"
#include "spalps/parser.hpp"
#include "spalps/validate.hpp"

#include <algorithm>

using namespace spalps;

namespace {

ValidationResult check(const std::string& text,
                       const std::map<std::string, Rational>& overrides = {}) {
    return validate(parse_model(text, "test"), overrides);
}

bool has_code(const ValidationResult& r, const std::string& code) {
    return std::any_of(r.diagnostics.begin(), r.diagnostics.end(),
                       [&](const Diagnostic& d) { return d.code == code; });
}

}  // namespace

TEST_CASE("well-formed model validates cleanly") {
    ValidationResult r = check(R"(
param p = 1/3
habitat ring(4)
species A {
  process K = pchoice { p: tick . K; 1 - p: go myloc+1 . K }
}
system { K @ 2 * 7; } restrict { }
)");
    REQUIRE(r.ok());
    CHECK(r.diagnostics.empty());
    CHECK(r.model->habitat.location_count() == 4);
    CHECK(r.model->placements.size() == 1);
    CHECK(r.model->placements[0].location == 1);
    CHECK(r.model->placements[0].count == 7);
}

TEST_CASE("undefined constant is E002") {
    ValidationResult r = check(R"(
habitat ring(2)
species A { process K = tick . Missing }
system { K @ 1 * 1; } restrict { }
)");
    CHECK_FALSE(r.ok());
    CHECK(has_code(r, "E002"));
}

TEST_CASE("unguarded recursion is E003") {
    ValidationResult r = check(R"(
habitat ring(2)
species A { process K = par(K, K) }
system { K @ 1 * 1; } restrict { }
)");
    CHECK_FALSE(r.ok());
    CHECK(has_code(r, "E003"));

    // Mutual unguarded recursion through constants.
    ValidationResult r2 = check(R"(
habitat ring(2)
species A {
  process K = J
  process J = K
}
system { K @ 1 * 1; } restrict { }
)");
    CHECK_FALSE(r2.ok());
    CHECK(has_code(r2, "E003"));

    // Guarded self-reference is fine.
    CHECK(check(R"(
habitat ring(2)
species A { process K = tick . par(K, K) }
system { K @ 1 * 1; } restrict { }
)").ok());
}

TEST_CASE("probability range and sum checks") {
    ValidationResult r = check(R"(
habitat ring(2)
species A { process K = pchoice { 3/2: tick . K; 1/2: tick . K } }
system { K @ 1 * 1; } restrict { }
)");
    CHECK(has_code(r, "E004"));

    ValidationResult r2 = check(R"(
habitat ring(2)
species A { process K = pchoice { 1/3: tick . K; 1/3: tick . K } }
system { K @ 1 * 1; } restrict { }
)");
    CHECK(has_code(r2, "E005"));

    ValidationResult r3 = check(R"(
habitat ring(2)
species A { process K = pchoice { q: tick . K; 1 - q: tick . K } }
system { K @ 1 * 1; } restrict { }
)");
    CHECK(has_code(r3, "E006"));

    // Zero probability is out of range.
    ValidationResult r4 = check(R"(
habitat ring(2)
species A { process K = pchoice { 0: tick . K; 1: tick . K } }
system { K @ 1 * 1; } restrict { }
)");
    CHECK(has_code(r4, "E004"));
}

TEST_CASE("parameter overrides") {
    const char* text = R"(
param p = 1/2
habitat ring(2)
species A { process K = pchoice { p: tick . K; 1 - p: tick . K } }
system { K @ 1 * 1; } restrict { }
)";
    ValidationResult r = check(text, {{"p", Rational(1, 5)}});
    REQUIRE(r.ok());
    CHECK(r.model->params.at("p") == Rational(1, 5));

    ValidationResult bad = check(text, {{"nope", Rational(1, 5)}});
    CHECK(has_code(bad, "E015"));

    // An override can also push a model into invalidity.
    ValidationResult out_of_range = check(text, {{"p", Rational(2)}});
    CHECK(has_code(out_of_range, "E004"));
}

TEST_CASE("location discipline") {
    ValidationResult r = check(R"(
habitat graph { nodes a, b; edges a - b; }
species A { process K = go c . K }
system { K @ a * 1; } restrict { }
)");
    CHECK(has_code(r, "E007"));

    ValidationResult r2 = check(R"(
habitat graph { nodes a, b; edges a - b; }
species A { process K = go myloc+1 . K }
system { K @ a * 1; } restrict { }
)");
    CHECK(has_code(r2, "E008"));

    ValidationResult r3 = check(R"(
habitat ring(3)
species A { process K = tick . K }
system { K @ 9 * 1; } restrict { }
)");
    CHECK(has_code(r3, "E007"));
}

TEST_CASE("habitat problems are E010") {
    CHECK(has_code(check(R"(
habitat ring(1)
species A { process K = tick . K }
system { K @ 1 * 1; } restrict { }
)"), "E010"));

    CHECK(has_code(check(R"(
habitat graph { nodes a, a; edges ; }
species A { process K = tick . K }
system { K @ a * 1; } restrict { }
)"), "E010"));

    CHECK(has_code(check(R"(
habitat graph { nodes a, b; edges a - a; }
species A { process K = tick . K }
system { K @ a * 1; } restrict { }
)"), "E010"));
}

TEST_CASE("channel discipline") {
    // Conditional communication on an unrestricted channel.
    ValidationResult r = check(R"(
habitat ring(2)
species A { process K = ch ? (tick . K, tick . K) }
system { K @ 1 * 1; } restrict { }
)");
    CHECK(has_code(r, "E009"));

    // Plain prefix on an unrestricted channel is legal but flagged.
    ValidationResult r2 = check(R"(
habitat ring(2)
species A { process K = in ch . tick . K }
system { K @ 1 * 1; } restrict { }
)");
    REQUIRE(r2.ok());
    CHECK(has_code(r2, "W001"));
}

TEST_CASE("neighbor-choice shape rules") {
    // On a graph the body must be a bare dispersal step.
    ValidationResult r = check(R"(
habitat graph { nodes a, b; edges a - b; }
species A { process K = pchoice over neighbors { tick . K } }
system { K @ a * 1; } restrict { }
)");
    CHECK(has_code(r, "E012"));

    // `it` outside a neighbor block.
    ValidationResult r2 = check(R"(
habitat ring(3)
species A { process K = go it . K }
system { K @ 1 * 1; } restrict { }
)");
    CHECK(has_code(r2, "E011"));

    // Ring neighbor choices expand to offset branches.
    ValidationResult r3 = check(R"(
habitat ring(4)
species A { process K = pchoice over neighbors { go it . tick . K } }
system { K @ 1 * 1; } restrict { }
)");
    REQUIRE(r3.ok());
    const TermPtr& lowered = r3.model->species_defs[0].at("K");
    REQUIRE(lowered->kind == ProcessTerm::Kind::ProbChoice);
    REQUIRE(lowered->branches.size() == 2);
    CHECK(lowered->branches[0].first.lit == Rational(1, 2));
    CHECK(lowered->branches[0].second->act.dest.offset == 1);
    CHECK(lowered->branches[1].second->act.dest.offset == -1);

    // Two-site ring: the two neighbors coincide, one branch.
    ValidationResult r4 = check(R"(
habitat ring(2)
species A { process K = pchoice over neighbors { go it . tick . K } }
system { K @ 1 * 1; } restrict { }
)");
    REQUIRE(r4.ok());
    CHECK(r4.model->species_defs[0].at("K")->branches.size() == 1);

    // Graph neighbor choices survive lowering as dispersal nodes.
    ValidationResult r5 = check(R"(
habitat graph { nodes a, b, c; edges a - b, b - c; }
species A { process K = pchoice over neighbors { go it . tick . K } }
system { K @ a * 1; } restrict { }
)");
    REQUIRE(r5.ok());
    CHECK(r5.model->species_defs[0].at("K")->kind == ProcessTerm::Kind::NeighborChoice);
}

TEST_CASE("system block checks") {
    ValidationResult r = check(R"(
habitat ring(2)
species A { process K = tick . K }
species B { process J = tick . J }
system { par(K, J) @ 1 * 1; } restrict { }
)");
    CHECK(has_code(r, "E013"));  // spans two species

    ValidationResult r2 = check(R"(
habitat ring(2)
species A { process K = tick . K }
system { K @ 1 * -3; } restrict { }
)");
    CHECK(has_code(r2, "E014"));
}

TEST_CASE("isolated node with dispersal draws a warning") {
    ValidationResult r = check(R"(
habitat graph { nodes a, b, c; edges a - b; }
species A { process K = pchoice over neighbors { go it . K } }
system { K @ a * 1; } restrict { }
)");
    REQUIRE(r.ok());
    CHECK(has_code(r, "W003"));
}

TEST_CASE("all diagnostics are reported, not just the first") {
    ValidationResult r = check(R"(
habitat ring(2)
species A {
  process K = tick . Missing
  process J = pchoice { 1/3: tick . J; 1/3: tick . J }
}
system { K @ 1 * 1; } restrict { }
)");
    CHECK(has_code(r, "E002"));
    CHECK(has_code(r, "E005"));
}
