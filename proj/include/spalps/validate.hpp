#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spalps/model.hpp"

namespace spalps {

// Validation output. Ring neighbor-choices are expanded into explicit
// myloc-offset branches; graph neighbor-choices stay as NeighborChoice nodes
// (checked to have `go it . K` shape). Probabilities remain structural;
// `params` carries the bound values for them.
struct ValidatedModel {
    ModelSpec spec;
    Habitat habitat;
    std::map<std::string, Rational> params;

    std::vector<std::string> species_names;
    std::vector<ConstTable> species_defs;                 // lowered bodies
    std::vector<std::vector<std::string>> species_order;  // declaration order of names

    struct Placement {
        TermPtr term;      // lowered
        int species = -1;  // -1 when the term references no constants
        int location = -1;
        std::int64_t count = 0;
    };
    std::vector<Placement> placements;

    std::vector<std::string> restricted;

    bool is_restricted(const std::string& ch) const;
    const ConstTable& defs_for(int species_index) const;  // empty table for -1
};

struct ValidationResult {
    std::vector<Diagnostic> diagnostics;   // every issue found, not just the first
    std::optional<ValidatedModel> model;   // present iff no error-severity entries
    bool ok() const { return model.has_value(); }
};

ValidationResult validate(const ModelSpec& spec,
                          const std::map<std::string, Rational>& param_overrides = {});

}  // namespace spalps
