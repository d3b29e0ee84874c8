#include "doctest.h"
#include "spalps/parser.hpp"

using namespace spalps;

namespace {

const char* kSmallModel = R"(# comment
param p = 1/2

habitat ring(3)

species A {
  process K = pchoice { p: tick . K; 1 - p: go myloc+1 . K }
}

system {
  K @ 1 * 5;
} restrict { }
)";

}  // namespace

TEST_CASE("parses params, habitat, species, system") {
    ModelSpec m = parse_model(kSmallModel, "small");
    REQUIRE(m.params.size() == 1);
    CHECK(m.params[0].first == "p");
    CHECK(m.params[0].second == Rational(1, 2));
    CHECK(m.has_habitat);
    CHECK(m.habitat.kind == Habitat::Kind::Ring);
    CHECK(m.habitat.ring_size == 3);
    REQUIRE(m.species.size() == 1);
    CHECK(m.species[0].name == "A");
    REQUIRE(m.species[0].defs.size() == 1);
    REQUIRE(m.system_entries.size() == 1);
    CHECK(m.system_entries[0].loc_token == "1");
    CHECK(m.system_entries[0].count == 5);
    CHECK(m.restricted.empty());
}

TEST_CASE("term shapes parse to the right AST nodes") {
    ModelSpec m = parse_model(R"(
habitat ring(2)
species A {
  process N = nil
  process T = tick . N
  process G = go myloc-1 . N
  process C = pchoice { 1/3: T; 2/3: G }
  process D = ch ? (T, G)
  process O = out ch ? (T, G)
  process P = par(T, G, N)
  process Q = pchoice over neighbors { go it . T }
}
system { N @ 1 * 1; } restrict { ch }
)");
    const auto& defs = m.species[0].defs;
    CHECK(defs[0].second->kind == ProcessTerm::Kind::Nil);
    CHECK(defs[1].second->kind == ProcessTerm::Kind::Prefix);
    CHECK(defs[1].second->act.kind == ActionKind::Tick);
    CHECK(defs[2].second->act.kind == ActionKind::Go);
    CHECK(defs[2].second->act.dest.kind == LocationExpr::Kind::MyLocOffset);
    CHECK(defs[2].second->act.dest.offset == -1);
    CHECK(defs[3].second->kind == ProcessTerm::Kind::ProbChoice);
    CHECK(defs[3].second->branches.size() == 2);
    CHECK(defs[4].second->kind == ProcessTerm::Kind::CondComm);
    CHECK(defs[4].second->gamma.kind == ActionKind::Input);
    CHECK(defs[5].second->gamma.kind == ActionKind::Output);
    CHECK(defs[6].second->kind == ProcessTerm::Kind::Parallel);
    CHECK(defs[6].second->parts.size() == 3);
    CHECK(defs[7].second->kind == ProcessTerm::Kind::NeighborChoice);
    CHECK(m.restricted == std::vector<std::string>{"ch"});
}

TEST_CASE("decimal probabilities become exact rationals") {
    ModelSpec m = parse_model(R"(
habitat ring(2)
species A { process K = pchoice { 0.25: tick . K; 0.75: tick . K } }
system { K @ 1 * 1; } restrict { }
)");
    const auto& br = m.species[0].defs[0].second->branches;
    CHECK(br[0].first.lit == Rational(1, 4));
    CHECK(br[1].first.lit == Rational(3, 4));
}

TEST_CASE("an integer before a dot-prefix is not a decimal") {
    // `3 . P`-style text must not lex `3.` as a decimal literal.
    ModelSpec m = parse_model(R"(
habitat graph { nodes a, b; edges a - b; }
species A { process K = go a . K }
system { K @ b * 12; } restrict { }
)");
    CHECK(m.system_entries[0].count == 12);
    CHECK(m.species[0].defs[0].second->act.dest.literal == "a");
}

TEST_CASE("graph habitat with nodes and edges") {
    ModelSpec m = parse_model(R"(
habitat graph {
  nodes x, y, z;
  edges x - y, y - z;
}
species A { process K = tick . K }
system { K @ x * 1; } restrict { }
)");
    CHECK(m.habitat.kind == Habitat::Kind::Graph);
    CHECK(m.habitat.node_names == std::vector<std::string>{"x", "y", "z"});
    REQUIRE(m.habitat.edges.size() == 2);
    CHECK(m.habitat.edges[0] == std::pair<std::string, std::string>{"x", "y"});
}

TEST_CASE("syntax errors carry positions") {
    try {
        parse_model("habitat ring(3)\nspecies A {\n  process K = pchoice { }\n}\nsystem { K @ 1 * 1; } restrict { }");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.pos.line == 3);
        CHECK(e.diagnostic().code == "E001");
    }
    CHECK_THROWS_AS(parse_model("species A {"), ParseError);
    CHECK_THROWS_AS(parse_model("habitat ring(3) system { x @ 1 * 1; }"), ParseError);
    CHECK_THROWS_AS(parse_model(""), ParseError);
    // missing system block
    CHECK_THROWS_AS(parse_model("habitat ring(2)\nspecies A { process K = nil }"), ParseError);
    // zero denominator
    CHECK_THROWS_AS(parse_model("param p = 1/0\nhabitat ring(2)\nspecies A { process K = nil }\nsystem { K @ 1 * 1; } restrict { }"),
                    ParseError);
}

TEST_CASE("duplicate declarations are rejected") {
    CHECK_THROWS_AS(parse_model("param p = 1\nparam p = 2\nhabitat ring(2)\nspecies A { process K = nil }\nsystem { K @ 1 * 1; } restrict { }"),
                    ParseError);
    CHECK_THROWS_AS(parse_model("habitat ring(2)\nhabitat ring(3)\nspecies A { process K = nil }\nsystem { K @ 1 * 1; } restrict { }"),
                    ParseError);
    CHECK_THROWS_AS(parse_model("habitat ring(2)\nspecies A { process K = nil process K = nil }\nsystem { K @ 1 * 1; } restrict { }"),
                    ParseError);
}

TEST_CASE("render/parse round-trip is structural identity and render a fixed point") {
    ModelSpec m = parse_model(kSmallModel);
    std::string r1 = render_model(m);
    ModelSpec m2 = parse_model(r1);
    CHECK(m2.key() == m.key());
    CHECK(render_model(m2) == r1);
}

TEST_CASE("parse_rational accepts the documented forms") {
    CHECK(parse_rational("3") == Rational(3));
    CHECK(parse_rational("2/5") == Rational(2, 5));
    CHECK(parse_rational("0.35") == Rational(7, 20));
    CHECK(parse_rational("-1/2") == Rational(-1, 2));
    CHECK_THROWS_AS(parse_rational(""), ParseError);
    CHECK_THROWS_AS(parse_rational("x"), ParseError);
    CHECK_THROWS_AS(parse_rational("1/0"), ParseError);
    CHECK_THROWS_AS(parse_rational("1.2.3"), ParseError);
}
