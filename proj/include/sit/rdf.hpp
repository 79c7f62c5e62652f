//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#pragma once

#include <string>
#include <variant>
#include <vector>

namespace sit::rdf {

inline constexpr const char* kAff4Ns = "http://aff4.org/Schema#";
inline constexpr const char* kRdfNs = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr const char* kXsdNs = "http://www.w3.org/2001/XMLSchema#";

inline constexpr const char* kXsdString = "http://www.w3.org/2001/XMLSchema#string";
inline constexpr const char* kXsdLong = "http://www.w3.org/2001/XMLSchema#long";
inline constexpr const char* kXsdDateTime = "http://www.w3.org/2001/XMLSchema#dateTime";

struct Iri {
    std::string value;
    auto operator<=>(const Iri&) const = default;
};

struct TypedLiteral {
    std::string lexical;
    std::string datatype; // full IRI
    auto operator<=>(const TypedLiteral&) const = default;
};

using Object = std::variant<Iri, TypedLiteral>;

// One metadata atom: subject URN, predicate IRI (both stored expanded),
// IRI or typed-literal object.
struct Triple {
    std::string subject;
    std::string predicate;
    Object object;

    auto operator<=>(const Triple&) const = default;
};

// Deterministic subset serialization: exactly three prefix lines, subject
// blocks sorted ascending by URN, fixed predicate order, `;`-separated
// predicate lines, block terminated by ` .`. Identical triple sets yield
// byte-identical text.
std::string serialize_turtle(const std::vector<Triple>& triples);

// Parses the dialect serialize_turtle emits (prefix directives, subject
// blocks, `;` lists, typed and plain literals, IRIs). Throws SyntaxError
// with a line number, or UnknownPrefix.
std::vector<Triple> parse_turtle(const std::string& text);

// Canonical order for set comparisons.
std::vector<Triple> sorted(std::vector<Triple> triples);

} // namespace sit::rdf
