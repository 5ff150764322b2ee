// ============================================================================
// udime/schema_analysis.hpp — Schema-level decision problems
// ============================================================================
//
// Satisfiability by a productivity fixpoint over the characterizing-tuple
// machinery: a symbol is productive when its rule admits a word over the
// already-productive symbols.  Witness trees are built greedily from the
// cheapest such words, so output is deterministic.
//
// Trimming restricts a satisfiable schema to symbols that are productive
// and reachable from the root, deleting unproductive symbols from the
// surviving rules; the language is preserved.
//
// Containment reduces to per-symbol expression containment, restricted to
// the symbols reachable in the trimmed left-hand schema.
//
// ============================================================================

#ifndef UDIME_SCHEMA_ANALYSIS_HPP
#define UDIME_SCHEMA_ANALYSIS_HPP

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>

#include "udime/core.hpp"
#include "udime/dime.hpp"

namespace udime {

struct UnsatisfiableSchema : std::runtime_error {
    explicit UnsatisfiableSchema(const std::string& what) : std::runtime_error(what) {}
};

// ── Productivity ────────────────────────────────────────────────────────────

struct ProductivityReport {
    std::set<std::string> productive;
    std::set<std::string> reachable;
    // Minimal witness tree per productive symbol.  A witness can be absent
    // in the pathological case where the smallest tree exceeds the
    // materialization budget; the sets above are always exact.
    std::map<std::string, Tree> witness;
};

struct SatResult {
    bool satisfiable = false;
    std::optional<Tree> witness;  // tree in L(s), present when satisfiable
    ProductivityReport report;
};

SatResult schema_satisfiable(const Schema& s);

// ── Trimming ────────────────────────────────────────────────────────────────

struct TrimResult {
    Schema schema;
    ProductivityReport report;
};

// Throws UnsatisfiableSchema when L(s) is empty.
TrimResult trim(const Schema& s);

// ── Containment ─────────────────────────────────────────────────────────────

struct SchemaContainsResult {
    bool contained = false;
    // On false: the root label or the first differing rule head.
    std::optional<std::string> differing_symbol;
};

// True iff L(s1) is a subset of L(s2).  Throws UnsatisfiableSchema when a
// side is unsatisfiable (the operation presupposes satisfiable inputs).
SchemaContainsResult schema_contains(const Schema& s1, const Schema& s2);

// ── Witness construction ────────────────────────────────────────────────────
// A tree of L(s) containing a node labeled `symbol` whose children form
// exactly the word `w` (over s's alphabet).  Requires w itself to satisfy
// the symbol's rule using productive symbols only; returns nullopt when the
// symbol is not reachable or w demands unproductive symbols.

std::optional<Tree> witness_tree_with_word(const Schema& s, const std::string& symbol,
                                           const UnorderedWord& w);

}  // namespace udime

#endif  // UDIME_SCHEMA_ANALYSIS_HPP
