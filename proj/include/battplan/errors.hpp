#pragma once

#include <stdexcept>
#include <string>

namespace battplan {

// Malformed input text (JSON documents, CSV tables, MPS files).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Structurally well-formed input that breaks a model invariant
// (duplicate ids, dangling references, inconsistent bounds).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Extensive-form build refused because the horizon exceeds the hour cap.
class GuardrailError : public std::runtime_error {
public:
    GuardrailError(int horizon_hours, int cap)
        : std::runtime_error("horizon of " + std::to_string(horizon_hours) +
                             " hours exceeds the extensive-form cap of " + std::to_string(cap) +
                             " hours; use the decomposed (solve-ph) mode"),
          horizon(horizon_hours),
          hour_cap(cap)
    {
    }
    int horizon;
    int hour_cap;
};

} // namespace battplan
