#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace onset::rdf {

inline constexpr std::string_view kRdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view kRdfs = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view kOwl = "http://www.w3.org/2002/07/owl#";
inline constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";

inline const std::string kRdfType = std::string(kRdf) + "type";

enum class TermKind { iri, blank, literal };

struct Term {
    TermKind kind = TermKind::iri;
    std::string value;
    std::string lang;      // literals only
    std::string datatype;  // literals only, empty for plain strings

    bool is_iri() const noexcept { return kind == TermKind::iri; }
    bool is_literal() const noexcept { return kind == TermKind::literal; }
    friend bool operator==(const Term&, const Term&) = default;
};

struct Triple {
    Term subject;
    Term predicate;
    Term object;
};

/// Parses a Turtle document. N-Triples is accepted as the Turtle subset it is.
/// Throws ParseError with a line number on malformed input.
std::vector<Triple> parse_turtle(std::string_view text, std::string_view base_iri = {});

}  // namespace onset::rdf
