// ============================================================================
// udime/syntax.hpp — Parsers and serializers for all external formats
// ============================================================================
//
// Formats (see README for the full reference):
//
//   Expressions : `||` unordered concatenation (binds tighter than `|`),
//                 `|` disjunction, postfix `?` `*` `+` `[n,m]` `[n,m]?`,
//                 `inf` for an unbounded upper endpoint, `eps` for the
//                 empty word, parentheses for grouping.
//   Schemas     : UTF-8 text, `#` starts a comment, mandatory header line
//                 `root: <symbol>`, one rule `a -> <expr>` per line.
//   Trees       : XML subset: `<a>...</a>` and `<a/>`; whitespace between
//                 tags is ignored; attributes, text content, comments and
//                 processing instructions are rejected.
//   Events      : either the XML subset or the line format
//                 `open <sym>` / `close <sym>`, auto-detected by the first
//                 non-blank byte ('<' selects XML).
//   Queries     : abbreviated XPath: `/` child, `//` descendant, `*`
//                 wildcard, `[...]` nested predicates; the optional leading
//                 `/` is ignored.
//
// Parsers throw ParseError; they never return partially built values.
//
// ============================================================================

#ifndef UDIME_SYNTAX_HPP
#define UDIME_SYNTAX_HPP

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "udime/core.hpp"

namespace udime {

// ── ParseError ──────────────────────────────────────────────────────────────

enum class ParseErrorKind {
    UnexpectedToken,
    UnbalancedParen,
    BadInterval,
    DuplicateRule,
    DuplicateSymbol,
    NotADime,
    BadTag,
    UnsupportedXmlFeature,
};

const char* parse_error_kind_name(ParseErrorKind k);

struct ParseError : std::runtime_error {
    ParseErrorKind kind;
    int line;    // 1-based
    int column;  // 1-based

    ParseError(ParseErrorKind kind_, int line_, int column_, const std::string& message);
};

// Offset -> (line, column) against the given source text.
std::pair<int, int> line_column_at(std::string_view text, std::size_t offset);

// ── Expression parsing ──────────────────────────────────────────────────────

Ure parse_ure(std::string_view text);

// Shape violations reported by check_dime (see dime.hpp); parse_dime maps
// them onto ParseError with kind DuplicateSymbol or NotADime.
Dime parse_dime(std::string_view text);

std::string ure_to_string(const Ure& e);
std::string dime_to_string(const Dime& d);

// ── Schema parsing ──────────────────────────────────────────────────────────

Schema parse_schema(std::string_view text);
std::string schema_to_string(const Schema& s);

// ── Tree parsing ────────────────────────────────────────────────────────────

Tree parse_tree(std::string_view text);
std::string tree_to_string(const Tree& t);

// ── Event streams ───────────────────────────────────────────────────────────

struct TreeEvent {
    enum class Kind { Open, Close };
    Kind kind;
    std::string symbol;
};

// Incremental single-consumer reader over an in-memory buffer.  next()
// returns one event at a time and throws ParseError on malformed input,
// including truncated streams and trailing content after the root closes.
class EventReader {
public:
    explicit EventReader(std::string_view text);

    // nullopt at clean end of stream.
    std::optional<TreeEvent> next();

private:
    std::optional<TreeEvent> next_xml();
    std::optional<TreeEvent> next_lines();
    [[noreturn]] void fail(ParseErrorKind kind, std::size_t at, const std::string& msg) const;

    std::string text_;
    std::size_t pos_ = 0;
    bool xml_mode_ = true;
    int depth_ = 0;
    bool seen_root_ = false;
    std::optional<TreeEvent> pending_;    // Close synthesized for `<a/>`
    std::vector<std::string> open_tags_;  // XML mode: for mismatch reporting
};

// Whole stream at once (convenience; same error behavior as EventReader).
std::vector<TreeEvent> read_events(std::string_view text);

// Assemble a tree from a full event stream.
Tree tree_from_events(const std::vector<TreeEvent>& events);
std::vector<TreeEvent> tree_to_events(const Tree& t);

// ── Query parsing ───────────────────────────────────────────────────────────

TwigQuery parse_query(std::string_view text);
std::string query_to_string(const TwigQuery& q);

// ── Word literals ───────────────────────────────────────────────────────────
// Command line syntax: comma-separated `sym:count` pairs; "eps" or the empty
// string denote the empty word.  Returns the word over the given alphabet
// extended with any new symbols (the extended alphabet is returned too).

std::pair<UnorderedWord, Alphabet> parse_word_literal(std::string_view text,
                                                      const Alphabet& base);

}  // namespace udime

#endif  // UDIME_SYNTAX_HPP
