// ============================================================================
// udime/oracle.hpp — Brute-force reference semantics
// ============================================================================
//
// Everything here is deliberately naive and independent of the polynomial
// decision procedures: expression membership by derivation search over
// sub-multisets, exhaustive word and tree enumeration, and query analysis
// by sweeping small schema-valid trees.  The rest of the library is tested
// against these procedures; nothing here consults a characterizing tuple or
// a dependency graph.
//
// The bounded query procedures return three-valued verdicts so that a test
// can never mistake budget exhaustion for agreement.
//
// ============================================================================

#ifndef UDIME_ORACLE_HPP
#define UDIME_ORACLE_HPP

#include <optional>
#include <vector>

#include "udime/core.hpp"

namespace udime {
namespace oracle {

// ── Budgets ─────────────────────────────────────────────────────────────────

struct EnumBudget {
    Nat max_word_size = 6;
    Nat max_tree_nodes = 8;
    std::size_t max_alphabet = 4;
    // Resource cap on enumerated candidates; hitting it yields Exhausted.
    std::size_t max_items = 200000;
};

enum class BoundedVerdict { True, False, Exhausted };

struct BoundedTreeResult {
    BoundedVerdict verdict = BoundedVerdict::Exhausted;
    std::optional<Tree> evidence;  // witness or counterexample
};

// ── Word-level semantics ────────────────────────────────────────────────────

// Exact membership of w in L(e), by dynamic programming over the
// sub-multisets of w.  Repetition depth is capped at |w| + lo, which is
// sound because iterations contributing only the empty word are idempotent;
// `extra_iterations` widens that cap for the cap-soundness property test.
bool ure_membership_bruteforce(const UnorderedWord& w, const Ure& e, const Alphabet& alphabet,
                               Nat extra_iterations = 0);

// Every word of size at most max_size, in lexicographic count-vector order.
std::vector<UnorderedWord> enumerate_words(const Alphabet& alphabet, Nat max_size);

// Every word of L(e) that fits under the componentwise count limit, in
// count-vector order.  One derivation-search pass; exact.
std::vector<UnorderedWord> derivable_words(const Ure& e, const Alphabet& alphabet,
                                           const UnorderedWord& limit);

// Sweep bound for containment property tests: |alphabet| times the largest
// finite interval endpoint in either expression plus two.
Nat containment_bound(const Dime& e1, const Dime& e2, const Alphabet& alphabet);

// ── Tree enumeration ────────────────────────────────────────────────────────

// Every unordered labeled tree with at most max_nodes nodes, up to
// isomorphism, any root label; children are in canonical order.
std::vector<Tree> enumerate_trees(const Alphabet& alphabet, Nat max_nodes);

// Exact tree-level membership: brute-force expression membership at every
// node plus the root label check.
bool naive_validate(const Schema& s, const Tree& t);

// Every schema-valid tree with at most max_nodes nodes, up to isomorphism.
// Semantically the enumerate_trees sweep filtered by naive_validate, but
// generated directly from the rules.  Sets `exhausted` when max_items was
// hit before the sweep finished.
std::vector<Tree> enumerate_valid_trees(const Schema& s, Nat max_nodes,
                                        std::size_t max_items, bool* exhausted);

// Straightforward recursive query evaluation (independent of the dynamic
// programming in query_analysis).
bool naive_tree_matches(const Tree& t, const TwigQuery& q);

// ── Bounded query analysis ──────────────────────────────────────────────────
// True from impl/contained means "no counterexample within budget"; the
// evidence on False is a verified counterexample (resp. witness for sat).

BoundedTreeResult naive_query_sat(const Schema& s, const TwigQuery& q, const EnumBudget& budget);
BoundedTreeResult naive_query_impl(const Schema& s, const TwigQuery& q, const EnumBudget& budget);
BoundedTreeResult naive_query_contained(const Schema& s, const TwigQuery& p, const TwigQuery& q,
                                        const EnumBudget& budget);

}  // namespace oracle
}  // namespace udime

#endif  // UDIME_ORACLE_HPP
