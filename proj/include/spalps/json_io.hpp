#pragma once

#include <string>
#include <vector>

#include "spalps/meanfield.hpp"

namespace spalps {

// Self-contained compiled artifact: habitat, state names, initial occupancy,
// and the full recurrence system with exact rational coefficients. Exporting
// and re-importing preserves every expression bit-for-bit, so iterating the
// imported system reproduces the in-memory one exactly.
std::string compiled_json(const Compiled& c);

struct CompiledArtifact {
    Habitat habitat;
    std::vector<std::string> state_names;
    std::vector<std::string> species;  // per state, may be empty
    InitMatrix init;
    EquationSystem equations;
};

CompiledArtifact parse_compiled_json(const std::string& text);  // throws on malformed input

std::string expr_json(const ExprPtr& e);            // single expression (diagnostics)
ExprPtr parse_expr_json(const std::string& text);   // inverse of expr_json

}  // namespace spalps
