#include "onset/gbnf.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "onset/error.hpp"

namespace onset::gbnf {

std::u32string decode_utf8(std::string_view text, bool* ok) {
    std::u32string out;
    out.reserve(text.size());
    bool good = true;
    for (std::size_t i = 0; i < text.size();) {
        auto b0 = static_cast<unsigned char>(text[i]);
        int len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 0;
        if (len == 0 || i + static_cast<std::size_t>(len) > text.size()) {
            good = false;
            out += U'�';
            ++i;
            continue;
        }
        char32_t cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
        bool cont_ok = true;
        for (int k = 1; k < len; ++k) {
            auto b = static_cast<unsigned char>(text[i + static_cast<std::size_t>(k)]);
            if ((b & 0xC0) != 0x80) cont_ok = false;
            cp = (cp << 6) | (b & 0x3F);
        }
        if (!cont_ok) {
            good = false;
            out += U'�';
            ++i;
            continue;
        }
        out += cp;
        i += static_cast<std::size_t>(len);
    }
    if (ok) *ok = good;
    return out;
}

std::string encode_utf8(std::u32string_view text) {
    std::string out;
    for (char32_t cp : text) {
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
    return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

bool is_name_char(char32_t c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
}

class Parser {
public:
    explicit Parser(std::string_view text) {
        bool ok = true;
        src_ = decode_utf8(text, &ok);
        if (!ok) throw ParseError("gbnf: grammar is not valid UTF-8");
    }


    std::vector<Rule> run() {
        skip_space(true);
        while (!at_end()) {
            std::string name = parse_name();
            skip_space(false);
            if (!consume(U"::=")) fail("expected '::='");
            skip_space(true);
            std::size_t idx = rule_index(name);
            if (defined_.count(idx)) fail(fmt::format("rule '{}' defined twice", name));
            defined_.insert(idx);
            rules_[idx].body = parse_alternatives(false);
            skip_space(true);
        }
        if (rules_.empty()) fail("grammar has no rules");
        for (std::size_t i = 0; i < rules_.size(); ++i) {
            if (!defined_.count(i)) {
                throw ParseError(fmt::format("gbnf: undefined nonterminal '{}'", rules_[i].name));
            }
        }
        return std::move(rules_);
    }

private:
    std::u32string src_;
    std::size_t pos_ = 0;
    std::vector<Rule> rules_;
    std::set<std::size_t> defined_;

    [[noreturn]] void fail(std::string_view msg) const {
        std::size_t line = 1 + static_cast<std::size_t>(std::count(src_.begin(), src_.begin() + static_cast<std::ptrdiff_t>(std::min(pos_, src_.size())), U'\n'));
        throw ParseError(fmt::format("gbnf: line {}: {}", line, msg));
    }
    bool at_end() const { return pos_ >= src_.size(); }
    char32_t peek(std::size_t ahead = 0) const { return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : 0; }
    char32_t get() {
        if (at_end()) fail("unexpected end of grammar");
        return src_[pos_++];
    }
    bool consume(std::u32string_view s) {
        if (src_.compare(pos_, s.size(), s) == 0) {
            pos_ += s.size();
            return true;
        }
        return false;
    }

    void skip_space(bool newline_ok) {
        while (!at_end()) {
            char32_t c = peek();
            if (c == '#') {
                while (!at_end() && peek() != '\n') ++pos_;
            } else if (c == ' ' || c == '\t' || c == '\r' || (newline_ok && c == '\n')) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::string parse_name() {
        std::u32string name;
        while (!at_end() && is_name_char(peek())) name += get();
        if (name.empty()) fail("expected rule name");
        return encode_utf8(name);
    }

    std::size_t rule_index(const std::string& name) {
        for (std::size_t i = 0; i < rules_.size(); ++i) {
            if (rules_[i].name == name) return i;
        }
        rules_.push_back({name, {}});
        return rules_.size() - 1;
    }

    char32_t parse_hex(int digits) {
        char32_t v = 0;
        for (int i = 0; i < digits; ++i) {
            char32_t c = get();
            v <<= 4;
            if (c >= '0' && c <= '9') v |= c - '0';
            else if (c >= 'a' && c <= 'f') v |= c - 'a' + 10;
            else if (c >= 'A' && c <= 'F') v |= c - 'A' + 10;
            else fail("bad hex escape");
        }
        return v;
    }

    char32_t parse_char() {
        char32_t c = get();
        if (c != '\\') return c;
        char32_t e = get();
        switch (e) {
            case 'x': return parse_hex(2);
            case 'u': return parse_hex(4);
            case 'U': return parse_hex(8);
            case 't': return '\t';
            case 'r': return '\r';
            case 'n': return '\n';
            case '\\': case '"': case '[': case ']': case '-': case '^': return e;
            default: fail("unknown escape");
        }
    }

    Alternatives parse_alternatives(bool nested) {
        Alternatives alts;
        alts.push_back(parse_sequence(nested));
        while (peek() == '|') {
            ++pos_;
            skip_space(true);
            alts.push_back(parse_sequence(nested));
        }
        return alts;
    }

    Sequence parse_sequence(bool nested) {
        Sequence seq;
        while (!at_end()) {
            char32_t c = peek();
            Element el;
            if (c == '"') {
                ++pos_;
                el.kind = Element::Kind::literal;
                while (peek() != '"') {
                    if (at_end() || peek() == '\n') fail("unterminated literal");
                    el.literal += parse_char();
                }
                ++pos_;
            } else if (c == '[') {
                ++pos_;
                el.kind = Element::Kind::char_class;
                if (peek() == '^') {
                    el.negated = true;
                    ++pos_;
                }
                while (peek() != ']') {
                    if (at_end()) fail("unterminated character class");
                    char32_t lo = parse_char();
                    char32_t hi = lo;
                    if (peek() == '-' && peek(1) != ']') {
                        ++pos_;
                        hi = parse_char();
                    }
                    if (hi < lo) fail("inverted character range");
                    el.ranges.push_back({lo, hi});
                }
                ++pos_;
            } else if (c == '.') {
                ++pos_;
                el.kind = Element::Kind::any_char;
            } else if (c == '(') {
                ++pos_;
                skip_space(true);
                el.kind = Element::Kind::group;
                el.group = std::make_shared<const Alternatives>(parse_alternatives(true));
                skip_space(true);
                if (get() != ')') fail("expected ')'");
            } else if (is_name_char(c)) {
                // A name followed by ::= starts the next rule.
                std::size_t save = pos_;
                std::string name = parse_name();
                skip_space(false);
                if (peek() == ':' && peek(1) == ':' && peek(2) == '=') {
                    pos_ = save;
                    break;
                }
                el.kind = Element::Kind::rule_ref;
                el.rule = rule_index(name);
            } else {
                break;
            }
            parse_repetition(el);
            seq.push_back(std::move(el));
            skip_space(nested);
        }
        return seq;
    }

    std::size_t parse_int() {
        std::size_t v = 0;
        bool any = false;
        while (peek() >= '0' && peek() <= '9') {
            v = v * 10 + (get() - '0');
            any = true;
        }
        if (!any) fail("expected integer");
        return v;
    }

    void parse_repetition(Element& el) {
        char32_t c = peek();
        if (c == '*') {
            ++pos_;
            el.min_repeat = 0;
            el.max_repeat = kUnbounded;
        } else if (c == '+') {
            ++pos_;
            el.min_repeat = 1;
            el.max_repeat = kUnbounded;
        } else if (c == '?') {
            ++pos_;
            el.min_repeat = 0;
            el.max_repeat = 1;
        } else if (c == '{') {
            ++pos_;
            skip_space(false);
            el.min_repeat = parse_int();
            skip_space(false);
            el.max_repeat = el.min_repeat;
            if (peek() == ',') {
                ++pos_;
                skip_space(false);
                el.max_repeat = peek() == '}' ? kUnbounded : parse_int();
                skip_space(false);
            }
            if (get() != '}') fail("expected '}'");
            if (el.max_repeat < el.min_repeat) fail("bad repetition bounds");
        }
    }
};

bool class_matches(const Element& el, char32_t c) {
    bool in = std::any_of(el.ranges.begin(), el.ranges.end(),
                          [c](const CharRange& r) { return c >= r.lo && c <= r.hi; });
    return in != el.negated;
}

// ---------------------------------------------------------------------------
// Recognizer: set-of-end-positions matcher with memoised rule results.

class Matcher {
public:
    Matcher(const Grammar& g, std::u32string_view text) : g_(g), text_(text) {}

    std::vector<std::size_t> rule_ends(std::size_t rule, std::size_t pos) {
        std::uint64_t key = static_cast<std::uint64_t>(rule) * (text_.size() + 1) + pos;
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        if (!active_.insert(key).second) return {};  // left recursion: no progress
        auto ends = alt_ends(g_.rules()[rule].body, pos);
        active_.erase(key);
        memo_.emplace(key, ends);
        return ends;
    }

private:
    const Grammar& g_;
    std::u32string_view text_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> memo_;
    std::set<std::uint64_t> active_;

    static void merge(std::vector<std::size_t>& into, const std::vector<std::size_t>& add) {
        into.insert(into.end(), add.begin(), add.end());
        std::sort(into.begin(), into.end());
        into.erase(std::unique(into.begin(), into.end()), into.end());
    }

    std::vector<std::size_t> alt_ends(const Alternatives& alts, std::size_t pos) {
        std::vector<std::size_t> out;
        for (const auto& seq : alts) merge(out, seq_ends(seq, pos));
        return out;
    }

    std::vector<std::size_t> seq_ends(const Sequence& seq, std::size_t pos) {
        std::vector<std::size_t> current{pos};
        for (const auto& el : seq) {
            std::vector<std::size_t> next;
            for (std::size_t p : current) merge(next, repeated_ends(el, p));
            if (next.empty()) return {};
            current = std::move(next);
        }
        return current;
    }

    std::vector<std::size_t> repeated_ends(const Element& el, std::size_t pos) {
        std::vector<std::size_t> out;
        if (el.min_repeat == 0) out.push_back(pos);
        std::vector<std::size_t> frontier{pos};
        std::set<std::size_t> seen_after_min;
        for (std::size_t count = 1; count <= el.max_repeat && !frontier.empty(); ++count) {
            std::vector<std::size_t> next;
            for (std::size_t p : frontier) merge(next, once_ends(el, p));
            if (count >= el.min_repeat) {
                std::vector<std::size_t> fresh;
                for (std::size_t p : next) {
                    if (seen_after_min.insert(p).second) fresh.push_back(p);
                }
                merge(out, fresh);
                if (el.max_repeat == kUnbounded) next = std::move(fresh);
            }
            frontier = std::move(next);
        }
        return out;
    }

    std::vector<std::size_t> once_ends(const Element& el, std::size_t pos) {
        switch (el.kind) {
            case Element::Kind::literal:
                if (text_.compare(pos, el.literal.size(), el.literal) == 0 &&
                    pos + el.literal.size() <= text_.size()) {
                    return {pos + el.literal.size()};
                }
                return {};
            case Element::Kind::char_class:
                if (pos < text_.size() && class_matches(el, text_[pos])) return {pos + 1};
                return {};
            case Element::Kind::any_char:
                if (pos < text_.size()) return {pos + 1};
                return {};
            case Element::Kind::rule_ref:
                return rule_ends(el.rule, pos);
            case Element::Kind::group:
                return alt_ends(*el.group, pos);
        }
        return {};
    }
};

// ---------------------------------------------------------------------------
// Sampler

constexpr std::size_t kInfinite = std::numeric_limits<std::size_t>::max() / 4;

class Sampler {
public:
    Sampler(const Grammar& g, std::mt19937_64& rng, const SampleOptions& opt) : g_(g), rng_(rng), opt_(opt) {
        compute_min_lengths();
    }

    void rule(std::size_t idx, std::size_t depth, std::u32string& out) {
        const Rule& r = g_.rules()[idx];
        if (auto it = opt_.overrides.find(r.name); it != opt_.overrides.end() && !it->second.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, it->second.size() - 1);
            out += decode_utf8(it->second[pick(rng_)]);
            return;
        }
        alternatives(r.body, depth + 1, out);
    }

private:
    const Grammar& g_;
    std::mt19937_64& rng_;
    const SampleOptions& opt_;
    std::vector<std::size_t> rule_min_;

    std::size_t min_len(const Element& el) const {
        std::size_t once = 0;
        switch (el.kind) {
            case Element::Kind::literal: once = el.literal.size(); break;
            case Element::Kind::char_class:
            case Element::Kind::any_char: once = 1; break;
            case Element::Kind::rule_ref: once = rule_min_[el.rule]; break;
            case Element::Kind::group: once = min_len(*el.group); break;
        }
        if (el.min_repeat == 0) return 0;
        return once >= kInfinite ? kInfinite : std::min(kInfinite, once * el.min_repeat);
    }
    std::size_t min_len(const Sequence& seq) const {
        std::size_t total = 0;
        for (const auto& el : seq) total = std::min(kInfinite, total + min_len(el));
        return total;
    }
    std::size_t min_len(const Alternatives& alts) const {
        std::size_t best = kInfinite;
        for (const auto& s : alts) best = std::min(best, min_len(s));
        return best;
    }

    void compute_min_lengths() {
        rule_min_.assign(g_.rules().size(), kInfinite);
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t i = 0; i < g_.rules().size(); ++i) {
                std::size_t v = min_len(g_.rules()[i].body);
                if (v < rule_min_[i]) {
                    rule_min_[i] = v;
                    changed = true;
                }
            }
        }
    }

    void alternatives(const Alternatives& alts, std::size_t depth, std::u32string& out) {
        std::size_t choice = 0;
        if (depth > opt_.max_depth) {
            std::size_t best = kInfinite;
            for (std::size_t i = 0; i < alts.size(); ++i) {
                if (std::size_t l = min_len(alts[i]); l < best) {
                    best = l;
                    choice = i;
                }
            }
        } else {
            std::vector<std::size_t> finite;
            for (std::size_t i = 0; i < alts.size(); ++i) {
                if (min_len(alts[i]) < kInfinite) finite.push_back(i);
            }
            if (finite.empty()) throw InvalidArgument("gbnf: rule has no finite expansion");
            std::uniform_int_distribution<std::size_t> pick(0, finite.size() - 1);
            choice = finite[pick(rng_)];
        }
        for (const auto& el : alts[choice]) element(el, depth, out);
    }

    char32_t random_char(const Element& el) {
        static const std::u32string pool = [] {
            std::u32string p;
            for (char32_t c = 0x20; c < 0x7F; ++c) p += c;
            p += U"éüß中文\U0001F600\t\n";
            return p;
        }();
        if (el.kind == Element::Kind::char_class && !el.negated) {
            std::uniform_int_distribution<std::size_t> pick_range(0, el.ranges.size() - 1);
            const CharRange& r = el.ranges[pick_range(rng_)];
            std::uniform_int_distribution<std::uint32_t> pick(r.lo, r.hi);
            return static_cast<char32_t>(pick(rng_));
        }
        std::u32string allowed;
        for (char32_t c : pool) {
            if (el.kind == Element::Kind::any_char || class_matches(el, c)) allowed += c;
        }
        if (allowed.empty()) throw InvalidArgument("gbnf: cannot sample from character class");
        std::uniform_int_distribution<std::size_t> pick(0, allowed.size() - 1);
        return allowed[pick(rng_)];
    }

    void element(const Element& el, std::size_t depth, std::u32string& out) {
        std::size_t count = el.min_repeat;
        if (depth <= opt_.max_depth && el.max_repeat > el.min_repeat) {
            std::size_t extra_cap = el.max_repeat == kUnbounded
                                        ? opt_.max_extra_repeats
                                        : std::min(opt_.max_extra_repeats, el.max_repeat - el.min_repeat);
            std::uniform_int_distribution<std::size_t> pick(0, extra_cap);
            count += pick(rng_);
        }
        for (std::size_t i = 0; i < count; ++i) {
            switch (el.kind) {
                case Element::Kind::literal: out += el.literal; break;
                case Element::Kind::char_class:
                case Element::Kind::any_char: out += random_char(el); break;
                case Element::Kind::rule_ref: rule(el.rule, depth, out); break;
                case Element::Kind::group: alternatives(*el.group, depth + 1, out); break;
            }
        }
    }
};

}  // namespace

Grammar Grammar::parse(std::string_view text) {
    Grammar g;
    g.rules_ = Parser(text).run();
    return g;
}

std::optional<std::size_t> Grammar::find_rule(std::string_view name) const {
    for (std::size_t i = 0; i < rules_.size(); ++i) {
        if (rules_[i].name == name) return i;
    }
    return std::nullopt;
}

bool recognize(const Grammar& grammar, std::string_view root, std::string_view text) {
    auto idx = grammar.find_rule(root);
    if (!idx) throw InvalidArgument(fmt::format("gbnf: no rule named '{}'", root));
    bool ok = true;
    std::u32string decoded = decode_utf8(text, &ok);
    if (!ok) return false;
    Matcher m(grammar, decoded);
    auto ends = m.rule_ends(*idx, 0);
    return std::binary_search(ends.begin(), ends.end(), decoded.size());
}

std::string sample(const Grammar& grammar, std::string_view root, std::mt19937_64& rng,
                   const SampleOptions& options) {
    auto idx = grammar.find_rule(root);
    if (!idx) throw InvalidArgument(fmt::format("gbnf: no rule named '{}'", root));
    Sampler s(grammar, rng, options);
    std::u32string out;
    s.rule(*idx, 0, out);
    return encode_utf8(out);
}

}  // namespace onset::gbnf
