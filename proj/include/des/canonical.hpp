#pragma once

#include <string>

#include "des/json.hpp"

namespace des {

// JSON Canonicalization Scheme (RFC 8785).
//
// Objects are emitted with keys sorted by UTF-16 code units, no whitespace,
// strings with the minimal escape set, and numbers in the ECMAScript
// shortest round-trip form (integers beyond 2^53 are first rounded to the
// nearest double). Throws Error{canonicalization_error} on NaN/Infinity or a
// null anywhere in the document.
std::string canonicalize(const Json& value);
void canonicalize_to(const Json& value, std::string& out);

// ECMAScript Number::toString for a finite double.
std::string canonical_number(double value);

}  // namespace des
