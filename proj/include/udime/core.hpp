// ============================================================================
// udime/core.hpp — Foundational domain types
// ============================================================================
//
// Shared vocabulary for the whole library:
//
//   Alphabet       : finite, totally ordered set of symbol names.  The order
//                    is lexicographic byte order and doubles as the symbol id
//                    order (SymbolId i names the i-th smallest symbol).
//   UnorderedWord  : multiset of symbols, sparse counts keyed by SymbolId.
//   Interval       : repetition bound [lo,hi] with hi possibly infinite and
//                    an optional "?" flag that additionally admits zero.
//   Ure            : syntax tree of unordered regular expressions.
//   Dime           : structured form of the restricted expression class
//                    (clauses of atoms with intervals, no symbol repeated).
//   Tree, TwigQuery, Schema : the tree-model side.
//
// All types are immutable in practice: nothing here mutates after
// construction, so values can be shared freely across threads.
//
// ============================================================================

#ifndef UDIME_CORE_HPP
#define UDIME_CORE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace udime {

using SymbolId = std::uint32_t;
using Nat = std::uint64_t;

// ── Alphabet ────────────────────────────────────────────────────────────────
// Symbol names match [A-Za-z_][A-Za-z0-9_-]*.  Construction sorts and
// deduplicates, so iteration order is the total order on symbols.

class Alphabet {
public:
    Alphabet() = default;
    explicit Alphabet(std::vector<std::string> symbols);

    static bool valid_symbol_name(std::string_view name);

    std::size_t size() const { return names_.size(); }
    const std::string& name(SymbolId id) const { return names_[id]; }
    const std::vector<std::string>& names() const { return names_; }
    std::optional<SymbolId> find(std::string_view name) const;
    bool contains(std::string_view name) const { return find(name).has_value(); }
    SymbolId require(std::string_view name) const;  // throws std::out_of_range

    bool operator==(const Alphabet& o) const { return names_ == o.names_; }

private:
    std::vector<std::string> names_;  // sorted, distinct
};

// ── UnorderedWord ───────────────────────────────────────────────────────────
// Sparse multiset over an alphabet.  Zero counts are never stored; size is
// the sum of counts (unary size convention).

class UnorderedWord {
public:
    UnorderedWord() = default;

    Nat count(SymbolId a) const;
    void add(SymbolId a, Nat n);
    void set(SymbolId a, Nat n);
    Nat size() const;
    bool empty() const { return counts_.empty(); }
    bool contains(SymbolId a) const { return counts_.count(a) != 0; }

    // Nonzero entries in symbol order.
    const std::map<SymbolId, Nat>& entries() const { return counts_; }

    bool operator==(const UnorderedWord& o) const { return counts_ == o.counts_; }
    bool operator<(const UnorderedWord& o) const { return counts_ < o.counts_; }

private:
    std::map<SymbolId, Nat> counts_;
};

UnorderedWord word_union(const UnorderedWord& w1, const UnorderedWord& w2);
Nat word_size(const UnorderedWord& w);
std::string word_to_string(const UnorderedWord& w, const Alphabet& alphabet);

// ── Interval ────────────────────────────────────────────────────────────────
// The set of admitted repetition counts is [lo,hi] (hi = nullopt means
// unbounded), plus {0} when the optional flag is set.  Construction
// normalizes: a flag on lo <= 1 folds into lo = 0, and lo = 0 clears the
// flag, so equal sets compare equal.

struct Interval {
    Nat lo = 1;
    std::optional<Nat> hi = Nat{1};  // nullopt encodes infinity
    bool optional_zero = false;      // the [n,m]? form

    Interval() = default;
    Interval(Nat lo_, std::optional<Nat> hi_, bool opt = false);

    static Interval one() { return Interval(1, Nat{1}); }
    static Interval opt() { return Interval(0, Nat{1}); }
    static Interval star() { return Interval(0, std::nullopt); }
    static Interval plus() { return Interval(1, std::nullopt); }
    static Interval exactly(Nat n) { return Interval(n, n); }
    static Interval zero() { return Interval(0, Nat{0}); }

    bool contains(Nat i) const;
    // Subset on the represented sets of naturals.
    bool contains_interval(const Interval& inner) const;
    // Smallest admitted count; 0 when the flag (or lo = 0) admits zero.
    Nat min_count() const { return optional_zero ? 0 : lo; }
    bool admits_zero() const { return contains(0); }
    bool unbounded() const { return !hi.has_value(); }
    bool is_empty_only() const { return lo == 0 && hi && *hi == 0; }
    // Interval with the ? flag applied, normalized.
    Interval with_optional() const { return Interval(lo, hi, true); }

    bool operator==(const Interval& o) const {
        return lo == o.lo && hi == o.hi && optional_zero == o.optional_zero;
    }

    // Canonical rendering: "", "?", "*", "+", "[n,m]", "[n,m]?", "[n,inf]".
    std::string suffix_string() const;
};

// The largest finite endpoint mentioned by the interval (lo, and hi if
// finite); used by the oracle's containment sweep bound.
Nat max_finite_endpoint(const Interval& iv);

// ── Ure ─────────────────────────────────────────────────────────────────────
// Unordered regular expressions.  Macros ?, *, +, 1 are represented as
// Repeat with the corresponding interval.  Symbol leaves carry names; an
// alphabet is inferred where needed.

struct Ure {
    enum class Kind { Epsilon, Symbol, Disjunction, Concat, Repeat };

    Kind kind = Kind::Epsilon;
    std::string symbol;          // Kind::Symbol
    std::vector<Ure> children;   // Disjunction, Concat: 2+; Repeat: 1
    Interval interval;           // Kind::Repeat
    std::size_t src_pos = 0;     // byte offset into the source text

    static Ure epsilon();
    static Ure sym(std::string name);
    static Ure disjunction(std::vector<Ure> parts);
    static Ure concat(std::vector<Ure> parts);
    static Ure repeat(Ure child, Interval iv);
};

// All distinct symbol names occurring in the expression, sorted.
std::vector<std::string> ure_symbols(const Ure& e);

// ── Dime ────────────────────────────────────────────────────────────────────
// Structured restricted expressions:
//
//   Dime    = C1 || ... || Ck              (clauses with intervals)
//   Clause  = (A1^I1 | ... | An^In)^I      (outer I from {1, ?, +, *})
//   Atom    = a1[?] || ... || am[?]        (symbols, each required or opt)
//
// A symbol occurs at most once in the whole expression.  An empty clause
// list denotes the language {epsilon}.  An atom with no symbols can appear
// transiently (after symbol deletion) and denotes epsilon.

struct SymbolUse {
    std::string name;
    bool optional = false;  // a? vs a
};

struct AtomExpr {
    std::vector<SymbolUse> symbols;
    Interval interval = Interval::one();

    bool all_optional() const;
    bool has_required_symbol() const;
};

enum class ClauseType { Type1, Type2, Type3 };

struct ClauseExpr {
    std::vector<AtomExpr> atoms;
    Interval interval = Interval::one();  // outer interval
};

struct Dime {
    std::vector<ClauseExpr> clauses;
};

// All distinct symbol names, sorted; duplicates are a shape violation and
// surface from check_dime, not from here.
std::vector<std::string> dime_symbols(const Dime& d);

// Lowering to the general expression language (for the oracle).
Ure dime_to_ure(const Dime& d);

// ── Tree ────────────────────────────────────────────────────────────────────
// Rooted unordered labeled tree.  Child order is preserved from input for
// serialization fidelity but carries no semantic weight.

struct Tree {
    struct Node {
        std::string label;
        std::vector<int> children;
    };

    std::vector<Node> nodes;
    int root = 0;

    int add_node(std::string label);
    void add_child(int parent, int child);

    std::size_t size() const { return nodes.size(); }
    // Number of nodes on the longest root-to-leaf path (single node -> 1).
    std::size_t height() const;
    const std::string& label(int n) const { return nodes[n].label; }
    const std::vector<int>& children(int n) const { return nodes[n].children; }

    // Child labels of node n as a multiset over the given alphabet.
    // Labels outside the alphabet are an error (std::out_of_range).
    UnorderedWord child_word(int n, const Alphabet& alphabet) const;
};

// Structural equality modulo sibling order and node numbering.
bool tree_isomorphic(const Tree& a, const Tree& b);
// Deterministic canonical encoding (labels + sorted child encodings).
std::string tree_canonical_key(const Tree& t, int node = -1);
// Deep copy of the subtree rooted at `node` as a standalone tree.
Tree subtree_copy(const Tree& t, int node);
// Sorted distinct labels.
std::vector<std::string> tree_labels(const Tree& t);

// ── TwigQuery ───────────────────────────────────────────────────────────────

enum class EdgeKind { Child, Descendant };

struct TwigQuery {
    struct Node {
        std::string label;     // empty iff wildcard
        bool wildcard = false;
        std::vector<std::pair<int, EdgeKind>> edges;
    };

    std::vector<Node> nodes;
    int root = 0;

    int add_node(std::string label, bool wildcard = false);
    void add_edge(int parent, int child, EdgeKind kind);
    std::size_t size() const { return nodes.size(); }
};

bool query_isomorphic(const TwigQuery& a, const TwigQuery& b);
std::string query_canonical_key(const TwigQuery& q, int node = -1);

// ── Schema ──────────────────────────────────────────────────────────────────
// Root label plus one rule per symbol; symbols without an explicit rule have
// the implicit rule epsilon.  The alphabet is everything mentioned anywhere
// (root, rule heads, rule bodies).

enum class SchemaKind { Dims, Ims };

struct Schema {
    std::string root_label;
    std::map<std::string, Dime> rules;
    Alphabet alphabet;

    // IMS iff no rule uses disjunction (every clause has exactly one atom).
    SchemaKind kind() const;
    bool is_ims() const { return kind() == SchemaKind::Ims; }

    // The rule for a symbol; implicit rules yield the empty Dime (epsilon).
    const Dime& rule(const std::string& symbol) const;
};

}  // namespace udime

#endif  // UDIME_CORE_HPP
