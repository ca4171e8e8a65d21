#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace onset::gbnf {

struct Element;
using Sequence = std::vector<Element>;
using Alternatives = std::vector<Sequence>;

struct CharRange {
    char32_t lo;
    char32_t hi;
};

inline constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

struct Element {
    enum class Kind { literal, char_class, any_char, rule_ref, group };

    Kind kind = Kind::literal;
    std::u32string literal;
    std::vector<CharRange> ranges;
    bool negated = false;
    std::size_t rule = 0;
    std::shared_ptr<const Alternatives> group;
    std::size_t min_repeat = 1;
    std::size_t max_repeat = 1;
};

struct Rule {
    std::string name;
    Alternatives body;
};

/// Parsed form of the GBNF subset the grammar emitters produce: quoted literals,
/// character classes, '.', rule references, parenthesised groups and the
/// repetition operators * + ? {m} {m,} {m,n}.
class Grammar {
public:
    /// Throws ParseError on syntax errors, duplicate rules and undefined nonterminals.
    static Grammar parse(std::string_view text);

    const std::vector<Rule>& rules() const noexcept { return rules_; }
    std::optional<std::size_t> find_rule(std::string_view name) const;

private:
    std::vector<Rule> rules_;
};

/// True iff `text` (UTF-8) is in the language of rule `root`.
/// Throws InvalidArgument when `root` is not defined.
bool recognize(const Grammar& grammar, std::string_view root, std::string_view text);

struct SampleOptions {
    std::size_t max_extra_repeats = 3;  // beyond the minimum, for unbounded repetitions
    std::size_t max_depth = 40;         // past this depth expansions take the shortest path
    /// Rule name → fixed expansions chosen uniformly instead of expanding the rule.
    /// The caller guarantees each expansion is in the rule's language.
    std::map<std::string, std::vector<std::string>, std::less<>> overrides;
};

/// Draws one random string from the language of `root`.
std::string sample(const Grammar& grammar, std::string_view root, std::mt19937_64& rng,
                   const SampleOptions& options = {});

std::u32string decode_utf8(std::string_view text, bool* ok = nullptr);
std::string encode_utf8(std::u32string_view text);

}  // namespace onset::gbnf
