#pragma once

#include <stdexcept>
#include <string>

namespace mealgen {

// Every failure path in the library throws Error. `kind` lets callers
// branch without string matching; line/column/field are filled where the
// source of the failure is known.
class Error : public std::runtime_error {
public:
    enum class Kind {
        Parse,        // malformed input text (OBJ, JSON, YAML)
        Validation,   // well-formed input violating an invariant
        Config,       // unusable configuration
        Planning,     // drop planning infeasible
        Placement,    // procedural pose violates a placement constraint
        Simulation,   // physics divergence
        Generation,   // scene/batch retry budget exhausted
        Lookup,       // unresolvable id or selector
        Range,        // argument outside its legal range
        Io,           // filesystem / codec failure
    };

    Error(Kind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

    int line = -1;          // 1-based, -1 when unknown
    int column = -1;        // 1-based, -1 when unknown
    std::string field;      // offending field/key, when known
    std::string path;       // offending file, when known

private:
    Kind kind_;
};

inline Error parse_error(std::string msg, int line = -1, int column = -1) {
    Error e(Error::Kind::Parse, std::move(msg));
    e.line = line;
    e.column = column;
    return e;
}

inline Error validation_error(std::string msg, std::string field = {}) {
    Error e(Error::Kind::Validation, std::move(msg));
    e.field = std::move(field);
    return e;
}

inline const char* to_string(Error::Kind k) {
    switch (k) {
    case Error::Kind::Parse: return "parse";
    case Error::Kind::Validation: return "validation";
    case Error::Kind::Config: return "config";
    case Error::Kind::Planning: return "planning";
    case Error::Kind::Placement: return "placement";
    case Error::Kind::Simulation: return "simulation";
    case Error::Kind::Generation: return "generation";
    case Error::Kind::Lookup: return "lookup";
    case Error::Kind::Range: return "range";
    case Error::Kind::Io: return "io";
    }
    return "unknown";
}

} // namespace mealgen
