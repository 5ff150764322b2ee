// ============================================================================
// udime/query_analysis.hpp — Twig-query semantics and static analysis
// ============================================================================
//
// Query evaluation on trees plus static analysis against disjunction-free
// schemas:
//
//   eval_query              : embedding search on a concrete tree
//   dependency_graphs       : existential and universal symbol graphs
//   embed_query_in_graph    : generalized embedding, bottom-up candidates
//   simulate_graph_in_tree  : greatest-fixpoint simulation
//   unfold_graph            : the tree of root paths of an acyclic graph
//   query_satisfiable/_implied : polynomial tests via the two graphs, with
//                             machine-verified witness / counterexample trees
//   query_contained         : characteristic-graph enumeration (the problem
//                             is coNP); every negative answer ships a
//                             verified counterexample tree, and exceeding
//                             the enumeration cap yields Indeterminate
//                             rather than a guess
//
// The disjunction-free-DTD variants reuse the same graph machinery with
// word semantics given by ordinary regular expressions without disjunction,
// interpreted commutatively (twig queries ignore sibling order).
//
// ============================================================================

#ifndef UDIME_QUERY_ANALYSIS_HPP
#define UDIME_QUERY_ANALYSIS_HPP

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "udime/core.hpp"
#include "udime/dime.hpp"
#include "udime/schema_analysis.hpp"

namespace udime {

// ── Dependency graphs ───────────────────────────────────────────────────────

struct DepGraph {
    enum class Flavor { Existential, Universal };

    Alphabet alphabet;
    SymbolId root = 0;
    Flavor flavor = Flavor::Existential;
    std::vector<std::vector<SymbolId>> succ;  // sorted adjacency per symbol

    bool has_edge(SymbolId a, SymbolId b) const;
    std::set<std::pair<SymbolId, SymbolId>> edge_set() const;
};

// Symbols present in every word (forall) / in some word (exists) of a
// disjunction-free expression; throws std::invalid_argument on disjunction.
struct ImeSymbols {
    std::set<SymbolId> forall;
    std::set<SymbolId> exists;
};

ImeSymbols ime_symbols(const Dime& e, const Alphabet& alphabet);

// Smallest number of occurrences of `a` across the words of the expression.
Nat min_nb(const Dime& ime, const Alphabet& alphabet, SymbolId a);

// Both graphs of a disjunction-free schema (expects a trimmed input, as
// produced by trim()); throws std::invalid_argument on disjunction.
std::pair<DepGraph, DepGraph> dependency_graphs(const Schema& s);

// ── Embeddings and simulation ───────────────────────────────────────────────

struct TreeEmbedding {
    std::vector<int> assignment;  // query node -> tree node
};

std::optional<TreeEmbedding> eval_query(const Tree& t, const TwigQuery& q);

struct GraphEmbedding {
    std::vector<SymbolId> assignment;  // query node -> symbol
};

std::optional<GraphEmbedding> embed_query_in_graph(const TwigQuery& q, const DepGraph& g);

// Requires g to have no cycle reachable from the root (throws otherwise).
bool simulate_graph_in_tree(const DepGraph& g, const Tree& t);

// The unfolding: one node per root path, siblings in symbol order.
// Throws std::invalid_argument on a cycle reachable from the root.
Tree unfold_graph(const DepGraph& g);

// ── Characteristic graphs ───────────────────────────────────────────────────

struct CharGraph {
    struct Vertex {
        SymbolId label;
        std::vector<int> succ;
        bool marked = false;  // image of a query node
    };
    std::vector<Vertex> vertices;
    int root = 0;
};

// Lazily enumerates every characteristic graph of (q, s): all embeddings of
// q into the existential graph, in lexicographic per-node symbol order,
// times all choices of acyclic connecting paths per descendant edge (paths
// ordered by length, then lexicographically), each grafted with the
// universal closure below every vertex.  The stream is empty when q does
// not embed into the existential graph.
class CharGraphStream {
public:
    CharGraphStream(const TwigQuery& q, const Schema& trimmed_ims);
    ~CharGraphStream();
    CharGraphStream(CharGraphStream&&) noexcept;

    std::optional<CharGraph> next();

    // Internal: the DTD lane builds streams over its own dependency graphs.
    struct Impl;
    explicit CharGraphStream(std::unique_ptr<Impl> impl);

private:
    std::unique_ptr<Impl> impl_;
};

// ── Analysis outcomes ───────────────────────────────────────────────────────

enum class Verdict { Yes, No, Indeterminate };

struct QueryAnalysisOptions {
    std::size_t graph_cap = 1000000;     // characteristic graphs examined
    Nat tree_node_cap = 1000000;         // nodes per constructed tree
    std::function<bool()> cancelled;     // polled during enumeration
};

struct QuerySatOutcome {
    bool satisfiable = false;
    std::optional<Tree> witness;  // in L(s) and matching q
};

struct QueryImplOutcome {
    bool implied = false;
    std::optional<Tree> counterexample;  // in L(s), not matching q
};

struct QueryContainOutcome {
    Verdict verdict = Verdict::Indeterminate;
    std::optional<Tree> counterexample;  // in L(s), matches p, not q
};

// All three expect a satisfiable disjunction-free schema and trim it
// internally; they throw UnsatisfiableSchema or std::invalid_argument on
// violated preconditions.
QuerySatOutcome query_satisfiable(const Schema& ims, const TwigQuery& q,
                                  const QueryAnalysisOptions& options = {});
QueryImplOutcome query_implied(const Schema& ims, const TwigQuery& q,
                               const QueryAnalysisOptions& options = {});
QueryContainOutcome query_contained(const Schema& ims, const TwigQuery& p, const TwigQuery& q,
                                    const QueryAnalysisOptions& options = {});

// ── Disjunction-free DTDs ───────────────────────────────────────────────────
// Rule bodies are regular expressions without disjunction over ordered
// words; sibling order is irrelevant to twig queries, so analysis works on
// the commutative closure.

struct DtdRegex {
    enum class Kind { Epsilon, Symbol, Star, Opt, Plus, Concat };
    Kind kind = Kind::Epsilon;
    std::string symbol;
    std::vector<DtdRegex> children;
};

struct DtdSchema {
    std::string root_label;
    std::map<std::string, DtdRegex> rules;
    Alphabet alphabet;

    const DtdRegex& rule(const std::string& symbol) const;
};

// Schema file parser for the DTD variant: same header and rule lines, with
// `.` (or the middle dot) as concatenation and postfix ? * +.
DtdSchema parse_dtd_schema(std::string_view text);
std::string dtd_regex_to_string(const DtdRegex& e);

// Structural forall/exists sets; concatenation unions both sides, ? and *
// clear the forall side, + preserves it.
std::pair<std::set<SymbolId>, std::set<SymbolId>> dtd_symbols(const DtdRegex& e,
                                                              const Alphabet& alphabet);

Nat dtd_min_nb(const DtdRegex& e, SymbolId a, const Alphabet& alphabet);

// Commutative-closure lowering (used by the oracle-backed validity checks).
Ure dtd_to_ure(const DtdRegex& e);

std::pair<DepGraph, DepGraph> dtd_dependency_graphs(const DtdSchema& d);

QueryImplOutcome dtd_query_implied(const DtdSchema& d, const TwigQuery& q,
                                   const QueryAnalysisOptions& options = {});
QueryContainOutcome dtd_query_contained(const DtdSchema& d, const TwigQuery& p,
                                        const TwigQuery& q,
                                        const QueryAnalysisOptions& options = {});

}  // namespace udime

#endif  // UDIME_QUERY_ANALYSIS_HPP
