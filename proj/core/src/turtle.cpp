#include "onset/turtle.hpp"

#include <cctype>
#include <map>

#include <fmt/format.h>

#include "onset/error.hpp"

namespace onset::rdf {

namespace {

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

bool is_pn_char(char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || c == '-' || u >= 0x80;
}

class TurtleParser {
public:
    TurtleParser(std::string_view text, std::string_view base) : text_(text), base_(base) {}

    std::vector<Triple> run() {
        skip_ws();
        while (!at_end()) {
            statement();
            skip_ws();
        }
        return std::move(triples_);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::string base_;
    std::map<std::string, std::string, std::less<>> prefixes_;
    std::vector<Triple> triples_;
    std::size_t blank_counter_ = 0;

    [[noreturn]] void fail(std::string_view msg) const {
        throw ParseError(fmt::format("turtle: line {}: {}", line_, msg));
    }

    bool at_end() const { return pos_ >= text_.size(); }
    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }
    char get() {
        if (at_end()) fail("unexpected end of input");
        char c = text_[pos_++];
        if (c == '\n') ++line_;
        return c;
    }
    void expect(char c) {
        skip_ws();
        if (peek() != c) fail(fmt::format("expected '{}'", c));
        get();
    }

    void skip_ws() {
        while (!at_end()) {
            char c = peek();
            if (c == '#') {
                while (!at_end() && peek() != '\n') get();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                get();
            } else {
                break;
            }
        }
    }

    bool keyword_ahead(std::string_view kw, bool case_insensitive) const {
        if (pos_ + kw.size() > text_.size()) return false;
        for (std::size_t i = 0; i < kw.size(); ++i) {
            char a = text_[pos_ + i];
            char b = kw[i];
            if (case_insensitive ? std::tolower(static_cast<unsigned char>(a)) != b : a != b) {
                return false;
            }
        }
        char next = pos_ + kw.size() < text_.size() ? text_[pos_ + kw.size()] : ' ';
        return !is_pn_char(next) && next != ':';
    }

    void statement() {
        if (keyword_ahead("@prefix", false)) {
            pos_ += 7;
            prefix_decl();
            expect('.');
        } else if (keyword_ahead("@base", false)) {
            pos_ += 5;
            skip_ws();
            base_ = iriref();
            expect('.');
        } else if (keyword_ahead("prefix", true)) {
            pos_ += 6;
            prefix_decl();
        } else if (keyword_ahead("base", true)) {
            pos_ += 4;
            skip_ws();
            base_ = iriref();
        } else {
            triples_block();
            expect('.');
        }
    }

    void prefix_decl() {
        skip_ws();
        std::string name;
        while (!at_end() && peek() != ':') {
            if (!is_pn_char(peek()) && peek() != '.') fail("bad prefix name");
            name += get();
        }
        get();  // ':'
        skip_ws();
        prefixes_[name] = iriref();
    }

    void triples_block() {
        skip_ws();
        Term subject;
        if (peek() == '[') {
            subject = blank_property_list();
            skip_ws();
            if (peek() == '.') return;
        } else {
            subject = subject_term();
        }
        predicate_object_list(subject);
    }

    Term subject_term() {
        skip_ws();
        char c = peek();
        if (c == '<') return {TermKind::iri, iriref(), {}, {}};
        if (c == '_' && peek(1) == ':') return blank_label();
        if (c == '(') return collection();
        return {TermKind::iri, prefixed_name(), {}, {}};
    }

    void predicate_object_list(const Term& subject) {
        while (true) {
            skip_ws();
            Term predicate = verb();
            object_list(subject, predicate);
            skip_ws();
            if (peek() != ';') return;
            while (peek() == ';') {
                get();
                skip_ws();
            }
            char c = peek();
            if (c == '.' || c == ']' || c == '\0') return;
        }
    }

    Term verb() {
        skip_ws();
        if (peek() == 'a' && !is_pn_char(peek(1)) && peek(1) != ':') {
            get();
            return {TermKind::iri, kRdfType, {}, {}};
        }
        if (peek() == '<') return {TermKind::iri, iriref(), {}, {}};
        return {TermKind::iri, prefixed_name(), {}, {}};
    }

    void object_list(const Term& subject, const Term& predicate) {
        while (true) {
            Term obj = object_term();
            triples_.push_back({subject, predicate, std::move(obj)});
            skip_ws();
            if (peek() != ',') return;
            get();
        }
    }

    Term object_term() {
        skip_ws();
        char c = peek();
        if (c == '<') return {TermKind::iri, iriref(), {}, {}};
        if (c == '_' && peek(1) == ':') return blank_label();
        if (c == '[') return blank_property_list();
        if (c == '(') return collection();
        if (c == '"' || c == '\'') return literal();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' ||
            (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            return numeric_literal();
        }
        if (keyword_ahead("true", false) || keyword_ahead("false", false)) {
            std::string v = peek() == 't' ? "true" : "false";
            pos_ += v.size();
            return {TermKind::literal, v, {}, std::string(kXsd) + "boolean"};
        }
        return {TermKind::iri, prefixed_name(), {}, {}};
    }

    Term fresh_blank() { return {TermKind::blank, fmt::format("_:genid{}", ++blank_counter_), {}, {}}; }

    Term blank_label() {
        pos_ += 2;
        std::string name = "_:";
        while (!at_end() && (is_pn_char(peek()) || (peek() == '.' && is_pn_char(peek(1))))) {
            name += get();
        }
        if (name.size() == 2) fail("empty blank node label");
        return {TermKind::blank, name, {}, {}};
    }

    Term blank_property_list() {
        get();  // '['
        Term node = fresh_blank();
        skip_ws();
        if (peek() == ']') {
            get();
            return node;
        }
        predicate_object_list(node);
        expect(']');
        return node;
    }

    Term collection() {
        get();  // '('
        std::vector<Term> items;
        while (true) {
            skip_ws();
            if (peek() == ')') {
                get();
                break;
            }
            if (at_end()) fail("unterminated collection");
            items.push_back(object_term());
        }
        Term nil{TermKind::iri, std::string(kRdf) + "nil", {}, {}};
        if (items.empty()) return nil;
        Term head = fresh_blank();
        Term current = head;
        for (std::size_t i = 0; i < items.size(); ++i) {
            triples_.push_back({current, {TermKind::iri, std::string(kRdf) + "first", {}, {}}, items[i]});
            Term next = i + 1 < items.size() ? fresh_blank() : nil;
            triples_.push_back({current, {TermKind::iri, std::string(kRdf) + "rest", {}, {}}, next});
            current = next;
        }
        return head;
    }

    std::string resolve(std::string iri) const {
        if (base_.empty() || iri.find(':') != std::string::npos) return iri;
        return base_ + iri;
    }

    char32_t hex_escape(int digits) {
        char32_t cp = 0;
        for (int i = 0; i < digits; ++i) {
            char h = get();
            cp <<= 4;
            if (h >= '0' && h <= '9') cp |= static_cast<char32_t>(h - '0');
            else if (h >= 'a' && h <= 'f') cp |= static_cast<char32_t>(h - 'a' + 10);
            else if (h >= 'A' && h <= 'F') cp |= static_cast<char32_t>(h - 'A' + 10);
            else fail("bad hex escape");
        }
        return cp;
    }

    std::string iriref() {
        skip_ws();
        if (peek() != '<') fail("expected '<'");
        get();
        std::string iri;
        while (true) {
            char c = get();
            if (c == '>') break;
            if (c == '\n' || c == ' ') fail("whitespace inside iri");
            if (c == '\\') {
                char e = get();
                if (e == 'u') append_utf8(iri, hex_escape(4));
                else if (e == 'U') append_utf8(iri, hex_escape(8));
                else fail("bad escape in iri");
            } else {
                iri += c;
            }
        }
        return resolve(std::move(iri));
    }

    std::string prefixed_name() {
        std::string prefix;
        while (!at_end() && peek() != ':') {
            char c = peek();
            if (!is_pn_char(c) && c != '.') fail(fmt::format("unexpected character '{}'", c));
            prefix += get();
        }
        if (at_end()) fail("expected prefixed name");
        get();  // ':'
        auto it = prefixes_.find(prefix);
        if (it == prefixes_.end()) fail(fmt::format("undeclared prefix '{}'", prefix));
        std::string local;
        while (!at_end()) {
            char c = peek();
            if (c == '\\') {
                get();
                local += get();
            } else if (is_pn_char(c) || c == ':' || c == '%') {
                local += get();
            } else if (c == '.' && (is_pn_char(peek(1)) || peek(1) == ':')) {
                local += get();
            } else {
                break;
            }
        }
        return it->second + local;
    }

    Term literal() {
        char quote = get();
        bool long_form = peek() == quote && peek(1) == quote;
        if (long_form) {
            get();
            get();
        }
        std::string value;
        while (true) {
            if (at_end()) fail("unterminated string literal");
            char c = get();
            if (c == quote) {
                if (!long_form) break;
                if (peek() == quote && peek(1) == quote) {
                    get();
                    get();
                    break;
                }
                value += c;
                continue;
            }
            if (c == '\n' && !long_form) fail("newline in short string literal");
            if (c == '\\') {
                char e = get();
                switch (e) {
                    case 't': value += '\t'; break;
                    case 'b': value += '\b'; break;
                    case 'n': value += '\n'; break;
                    case 'r': value += '\r'; break;
                    case 'f': value += '\f'; break;
                    case '"': value += '"'; break;
                    case '\'': value += '\''; break;
                    case '\\': value += '\\'; break;
                    case 'u': append_utf8(value, hex_escape(4)); break;
                    case 'U': append_utf8(value, hex_escape(8)); break;
                    default: fail("bad string escape");
                }
                continue;
            }
            value += c;
        }
        Term t{TermKind::literal, std::move(value), {}, {}};
        if (peek() == '@') {
            get();
            while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-')) {
                t.lang += static_cast<char>(std::tolower(static_cast<unsigned char>(get())));
            }
            if (t.lang.empty()) fail("empty language tag");
        } else if (peek() == '^' && peek(1) == '^') {
            pos_ += 2;
            t.datatype = peek() == '<' ? iriref() : prefixed_name();
        }
        return t;
    }

    Term numeric_literal() {
        std::string v;
        if (peek() == '+' || peek() == '-') v += get();
        bool decimal = false;
        bool exponent = false;
        while (!at_end()) {
            char c = peek();
            if (std::isdigit(static_cast<unsigned char>(c))) {
                v += get();
            } else if (c == '.' && !decimal && !exponent &&
                       std::isdigit(static_cast<unsigned char>(peek(1)))) {
                decimal = true;
                v += get();
            } else if ((c == 'e' || c == 'E') && !exponent) {
                exponent = true;
                v += get();
                if (peek() == '+' || peek() == '-') v += get();
            } else {
                break;
            }
        }
        if (v.empty() || v == "+" || v == "-") fail("bad numeric literal");
        std::string dt = exponent ? "double" : decimal ? "decimal" : "integer";
        return {TermKind::literal, v, {}, std::string(kXsd) + dt};
    }
};

}  // namespace

std::vector<Triple> parse_turtle(std::string_view text, std::string_view base_iri) {
    return TurtleParser(text, base_iri).run();
}

}  // namespace onset::rdf
