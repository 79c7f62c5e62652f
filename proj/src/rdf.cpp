//
// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 the SIT project contributors
//

#include "sit/rdf.hpp"

#include <algorithm>
#include <map>

#include "sit/errors.hpp"

namespace sit::rdf {

namespace {

// Fixed emission order inside a subject block.
const char* kPredicateOrder[] = {
    "http://www.w3.org/1999/02/22-rdf-syntax-ns#type",
    "http://aff4.org/Schema#originalFileName",
    "http://aff4.org/Schema#size",
    "http://aff4.org/Schema#MD5",
    "http://aff4.org/Schema#SHA1",
    "http://aff4.org/Schema#SHA256",
    "http://aff4.org/Schema#birthTime",
    "http://aff4.org/Schema#lastWritten",
    "http://aff4.org/Schema#mftChanged",
    "http://aff4.org/Schema#lastAccessed",
    "http://aff4.org/Schema#acquisitionTime",
    "http://aff4.org/Schema#storedIn",
};

int predicate_rank(const std::string& iri) {
    for (size_t i = 0; i < std::size(kPredicateOrder); ++i)
        if (iri == kPredicateOrder[i])
            return static_cast<int>(i);
    return static_cast<int>(std::size(kPredicateOrder));
}

std::string escape_literal(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '\\': out += "\\\\"; break;
        case '"': out += "\\\""; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

// Prefixed form when the IRI sits in one of the three fixed namespaces.
std::string compact_iri(const std::string& iri) {
    const struct {
        const char* ns;
        const char* prefix;
    } namespaces[] = {{kAff4Ns, "aff4:"}, {kRdfNs, "rdf:"}, {kXsdNs, "xsd:"}};
    for (const auto& entry : namespaces) {
        const std::string ns(entry.ns);
        if (iri.rfind(ns, 0) == 0 && iri.size() > ns.size()) {
            const std::string local = iri.substr(ns.size());
            if (local.find_first_of("/<>#\"\\ \t\n") == std::string::npos)
                return entry.prefix + local;
        }
    }
    return "<" + iri + ">";
}

std::string render_object(const Object& object) {
    if (const auto* iri = std::get_if<Iri>(&object))
        return compact_iri(iri->value);
    const auto& literal = std::get<TypedLiteral>(object);
    return "\"" + escape_literal(literal.lexical) + "\"^^" + compact_iri(literal.datatype);
}

// ----------------------------------------------------------- parser

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    std::vector<Triple> run() {
        skip_ws();
        while (!eof()) {
            if (peek() == '@')
                parse_prefix_directive();
            else
                parse_subject_block();
            skip_ws();
        }
        return std::move(triples_);
    }

private:
    [[noreturn]] void fail(const std::string& message) {
        raise(ErrorCode::SyntaxError, "line " + std::to_string(line_) + ": " + message);
    }

    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }
    char take() {
        const char c = text_[pos_++];
        if (c == '\n')
            ++line_;
        return c;
    }

    void skip_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r'))
            take();
    }

    void expect(char c, const char* what) {
        if (eof() || peek() != c)
            fail(std::string("expected ") + what);
        take();
    }

    std::string parse_iri_ref() {
        expect('<', "'<'");
        std::string iri;
        while (!eof() && peek() != '>') {
            if (peek() == '\n')
                fail("newline inside IRI");
            iri.push_back(take());
        }
        expect('>', "'>'");
        return iri;
    }

    std::string parse_name_token() {
        std::string token;
        while (!eof()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == ';' || c == '.' ||
                c == '<' || c == '"')
                break;
            token.push_back(take());
        }
        return token;
    }

    // prefixed name or IRI ref, expanded to a full IRI
    std::string parse_iri() {
        if (!eof() && peek() == '<')
            return parse_iri_ref();
        const std::string token = parse_name_token();
        if (token.empty())
            fail("expected an IRI or prefixed name");
        const auto colon = token.find(':');
        if (colon == std::string::npos)
            fail("prefixed name \"" + token + "\" has no ':'");
        const std::string prefix = token.substr(0, colon);
        const auto it = prefixes_.find(prefix);
        if (it == prefixes_.end())
            raise(ErrorCode::UnknownPrefix,
                  "line " + std::to_string(line_) + ": prefix \"" + prefix + ":\" not declared");
        return it->second + token.substr(colon + 1);
    }

    std::string parse_string_literal() {
        expect('"', "'\"'");
        std::string value;
        while (true) {
            if (eof())
                fail("unterminated string literal");
            char c = take();
            if (c == '"')
                break;
            if (c == '\\') {
                if (eof())
                    fail("dangling escape");
                const char e = take();
                switch (e) {
                case '\\': value.push_back('\\'); break;
                case '"': value.push_back('"'); break;
                case 'n': value.push_back('\n'); break;
                case 't': value.push_back('\t'); break;
                case 'r': value.push_back('\r'); break;
                default: fail(std::string("unknown escape \\") + e);
                }
            } else {
                value.push_back(c);
            }
        }
        return value;
    }

    void parse_prefix_directive() {
        const std::string keyword = parse_name_token(); // "@prefix"
        if (keyword != "@prefix")
            fail("unknown directive \"" + keyword + "\"");
        skip_ws();
        std::string decl = parse_name_token(); // "name:"
        if (decl.empty() || decl.back() != ':')
            fail("prefix declaration must end with ':'");
        decl.pop_back();
        skip_ws();
        const std::string iri = parse_iri_ref();
        skip_ws();
        expect('.', "'.' after @prefix directive");
        prefixes_[decl] = iri;
    }

    Object parse_object() {
        skip_ws();
        if (eof())
            fail("expected an object");
        if (peek() == '"') {
            TypedLiteral literal;
            literal.lexical = parse_string_literal();
            if (pos_ + 1 < text_.size() && text_[pos_] == '^' && text_[pos_ + 1] == '^') {
                take();
                take();
                literal.datatype = parse_iri();
            } else {
                literal.datatype = kXsdString; // plain literal
            }
            return literal;
        }
        return Iri{parse_iri()};
    }

    void parse_subject_block() {
        const std::string subject = parse_iri();
        while (true) {
            skip_ws();
            const std::string predicate = parse_iri();
            const Object object = parse_object();
            triples_.push_back(Triple{subject, predicate, object});
            skip_ws();
            if (eof())
                fail("expected ';' or '.' after object");
            const char c = take();
            if (c == '.')
                break;
            if (c != ';')
                fail(std::string("expected ';' or '.', got '") + c + "'");
        }
    }

    const std::string& text_;
    size_t pos_ = 0;
    size_t line_ = 1;
    std::map<std::string, std::string> prefixes_;
    std::vector<Triple> triples_;
};

} // namespace

std::string serialize_turtle(const std::vector<Triple>& triples) {
    std::string out;
    out += "@prefix aff4: <http://aff4.org/Schema#> .\n";
    out += "@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n";
    out += "@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n";

    std::map<std::string, std::vector<const Triple*>> by_subject;
    for (const auto& triple : triples)
        by_subject[triple.subject].push_back(&triple);

    for (auto& [subject, list] : by_subject) {
        std::stable_sort(list.begin(), list.end(), [](const Triple* a, const Triple* b) {
            const int ra = predicate_rank(a->predicate);
            const int rb = predicate_rank(b->predicate);
            if (ra != rb)
                return ra < rb;
            if (a->predicate != b->predicate)
                return a->predicate < b->predicate;
            return a->object < b->object;
        });

        out += "\n<" + subject + ">\n";
        for (size_t i = 0; i < list.size(); ++i) {
            out += "    " + compact_iri(list[i]->predicate) + " " + render_object(list[i]->object);
            out += (i + 1 == list.size()) ? " .\n" : " ;\n";
        }
    }
    return out;
}

std::vector<Triple> parse_turtle(const std::string& text) {
    return Parser(text).run();
}

std::vector<Triple> sorted(std::vector<Triple> triples) {
    std::sort(triples.begin(), triples.end());
    triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
    return triples;
}

} // namespace sit::rdf
