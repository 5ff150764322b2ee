// ============================================================================
// udime/dime.hpp — Restricted expression engine
// ============================================================================
//
// The tractable fragment of unordered regular expressions and the machinery
// that makes it tractable:
//
//   check_dime            : shape check, Ure -> Dime or violations
//   reduce                : rewrite to the reduced normal form in which
//                           every clause with interval has a ClauseType
//   characterizing_tuple  : the compact four-part canonical representation
//                           (conflicts, cardinality map, required-symbol
//                           collections, counting dependencies)
//   word_satisfies        : word vs tuple, with the first violated component
//   membership            : word language membership (polynomial)
//   tuple_subsumes        : tuple subsumption, capturing language containment
//   dime_contains         : language containment (polynomial)
//
// Reduced form invariants, by clause type:
//   Type1: outer interval +, two or more atoms, every atom interval is 1
//          and every atom has a required symbol.
//   Type2: outer interval 1, every atom has a required symbol and an
//          interval that excludes zero.
//   Type3: outer interval 1, every atom interval admits zero.
//
// ============================================================================

#ifndef UDIME_DIME_HPP
#define UDIME_DIME_HPP

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "udime/core.hpp"

namespace udime {

// ── Shape checking ──────────────────────────────────────────────────────────

enum class DimeViolationKind {
    SymbolRepeated,
    EpsilonInside,
    NotAnAtom,
    NonSimpleClauseUnderRepeat,
    BadClauseInterval,
};

struct DimeViolation {
    DimeViolationKind kind;
    std::string message;
    std::size_t src_pos = 0;
};

// Structures the expression or reports every violated grammar restriction.
std::variant<Dime, std::vector<DimeViolation>> check_dime(const Ure& e);

// True when the expression is disjunction free (every clause has one atom).
bool is_ime(const Dime& d);

// ── Reduction ───────────────────────────────────────────────────────────────

// Language preserving rewrite to reduced form.  Deterministic: atom interval
// normalization first, then the clause rewrites, then removal of [0,0]
// parts; a second pass must be a fixpoint and is asserted to be one.
Dime reduce(const Dime& d);

// Classifies a clause of a reduced expression; throws std::logic_error on an
// unclassifiable clause (which indicates a reduction bug).
ClauseType clause_type(const ClauseExpr& clause);

// Non-throwing variant used by assertions.
std::optional<ClauseType> classify_clause(const ClauseExpr& clause);

// ── Characterizing tuple ────────────────────────────────────────────────────

struct CompactTuple {
    Alphabet alphabet;
    // Symmetrically closed set of conflicting sibling pairs.
    std::set<std::pair<SymbolId, SymbolId>> conflicts;
    // Total on the alphabet; symbols absent from the expression map to [0,0].
    std::vector<Interval> card;
    // Required-symbol collections, one per clause of type 1 or 2, each
    // sorted; the list is sorted for canonical output.
    std::vector<std::vector<SymbolId>> required;
    // Counting dependencies (a,b): every word has at least as many a as b.
    std::set<std::pair<SymbolId, SymbolId>> counting;

    const Interval& card_of(SymbolId a) const { return card[a]; }
    bool operator==(const CompactTuple& o) const {
        return alphabet == o.alphabet && conflicts == o.conflicts && card == o.card &&
               required == o.required && counting == o.counting;
    }
};

// Requires d reduced and all its symbols members of the alphabet.
CompactTuple characterizing_tuple(const Dime& d, const Alphabet& alphabet);

// Symbols implied by the expression in the presence of x: x plus everything
// bound to a member of x by a mutual counting dependency.
std::set<SymbolId> impl_set(const CompactTuple& t, const std::set<SymbolId>& x);

// Canonical textual listing (sorted by the symbol order):
//   C: (b,d) (c,d) ...
//   N: a:+ b:* ...
//   P: {a} {b,d}
//   K: (b,c)
std::string tuple_to_string(const CompactTuple& t);

// ── Satisfaction and subsumption ────────────────────────────────────────────

enum class TupleComponent { Conflicts, Cardinality, Required, Counting };

const char* tuple_component_name(TupleComponent c);

struct SatisfyReport {
    bool ok = true;
    TupleComponent violated = TupleComponent::Conflicts;
    std::string detail;  // witness pair, symbol or set
};

// Checks components in the fixed order C, N, P, K and reports the first
// violation.
SatisfyReport word_satisfies(const UnorderedWord& w, const CompactTuple& t);

// True iff the language of sub's expression is contained in the language of
// sup's expression.  Both tuples must be over the same alphabet.
bool tuple_subsumes(const CompactTuple& sub, const CompactTuple& sup);

// ── Whole-expression operations ─────────────────────────────────────────────

// w must be a word over the given alphabet, which must cover d's symbols.
bool membership(const UnorderedWord& w, const Dime& d, const Alphabet& alphabet);

// True iff L(sub) is contained in L(sup).  The joint alphabet is inferred.
bool dime_contains(const Dime& sup, const Dime& sub);

bool dime_equivalent(const Dime& e1, const Dime& e2);

// ── Word construction ───────────────────────────────────────────────────────
// Builds a cheapest word of the reduced expression using only symbols for
// which `cost` yields a value, containing every symbol of `must` at least
// once.  Costs price one occurrence of a symbol (witness subtree sizes in
// schema analysis).  Returns nullopt when no such word exists.

using SymbolCostFn = std::function<std::optional<Nat>(SymbolId)>;

std::optional<UnorderedWord> minimal_word(const Dime& reduced, const Alphabet& alphabet,
                                          const SymbolCostFn& cost,
                                          const std::set<SymbolId>& must = {});

}  // namespace udime

#endif  // UDIME_DIME_HPP
