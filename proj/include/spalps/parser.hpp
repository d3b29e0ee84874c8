#pragma once

#include <stdexcept>
#include <string>

#include "spalps/model.hpp"

namespace spalps {

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, SourcePos p)
        : std::runtime_error(msg), pos(p) {}
    SourcePos pos;

    Diagnostic diagnostic() const {
        return Diagnostic{Severity::Error, "E001", what(), pos};
    }
};

// Parses `.palps` model text; identical input bytes give identical results.
// The first syntax error throws ParseError with its source position.
ModelSpec parse_model(const std::string& text, const std::string& source_name = "");

// Canonical rendering. parse_model(render_model(m)) is structurally equal
// to m, and render is a fixed point: render(parse(render(m))) == render(m).
std::string render_model(const ModelSpec& m);

// Accepts "3", "2/5", and exact decimals like "0.35". Throws ParseError.
Rational parse_rational(const std::string& text);

}  // namespace spalps
