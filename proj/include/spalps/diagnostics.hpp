#pragma once

#include <string>
#include <vector>

namespace spalps {

// 1-indexed source position; {0,0} means "no position" (synthetic nodes).
struct SourcePos {
    int line = 0;
    int col = 0;
};

enum class Severity { Error, Warning };

struct Diagnostic {
    Severity severity = Severity::Error;
    std::string code;     // e.g. "E003", "W001"
    std::string message;
    SourcePos pos;
};

// "file:line:col: severity[code]: message"; position omitted when absent.
std::string format_diagnostic(const std::string& file, const Diagnostic& d);

inline bool has_errors(const std::vector<Diagnostic>& ds) {
    for (const auto& d : ds)
        if (d.severity == Severity::Error) return true;
    return false;
}

}  // namespace spalps
