// ============================================================================
// query_analysis.cpp — Twig-query semantics and static analysis
// ============================================================================

#include "udime/query_analysis.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <deque>
#include <stdexcept>

#include "udime/oracle.hpp"
#include "udime/syntax.hpp"
#include "udime/validator.hpp"

namespace udime {

// ── DepGraph ────────────────────────────────────────────────────────────────

bool DepGraph::has_edge(SymbolId a, SymbolId b) const {
    const auto& s = succ[a];
    return std::binary_search(s.begin(), s.end(), b);
}

std::set<std::pair<SymbolId, SymbolId>> DepGraph::edge_set() const {
    std::set<std::pair<SymbolId, SymbolId>> out;
    for (SymbolId a = 0; a < succ.size(); ++a) {
        for (SymbolId b : succ[a]) out.emplace(a, b);
    }
    return out;
}

// ── ime_symbols / min_nb / dependency_graphs ────────────────────────────────

ImeSymbols ime_symbols(const Dime& e, const Alphabet& alphabet) {
    if (!is_ime(e)) {
        throw std::invalid_argument("expression uses disjunction; forall/exists sets need an IME");
    }
    CompactTuple t = characterizing_tuple(reduce(e), alphabet);
    ImeSymbols out;
    for (SymbolId a = 0; a < alphabet.size(); ++a) {
        if (!t.card[a].hi || *t.card[a].hi >= 1) out.exists.insert(a);
        if (!t.card[a].contains(0)) out.forall.insert(a);
    }
    return out;
}

Nat min_nb(const Dime& ime, const Alphabet& alphabet, SymbolId a) {
    if (!is_ime(ime)) {
        throw std::invalid_argument("min_nb is defined on disjunction-free expressions");
    }
    CompactTuple t = characterizing_tuple(reduce(ime), alphabet);
    return t.card[a].min_count();
}

std::pair<DepGraph, DepGraph> dependency_graphs(const Schema& s) {
    if (!s.is_ims()) {
        throw std::invalid_argument("dependency graphs are defined for disjunction-free schemas");
    }
    DepGraph ge, gf;
    ge.alphabet = gf.alphabet = s.alphabet;
    ge.root = gf.root = s.alphabet.require(s.root_label);
    ge.flavor = DepGraph::Flavor::Existential;
    gf.flavor = DepGraph::Flavor::Universal;
    ge.succ.resize(s.alphabet.size());
    gf.succ.resize(s.alphabet.size());
    for (SymbolId a = 0; a < s.alphabet.size(); ++a) {
        ImeSymbols sets = ime_symbols(s.rule(s.alphabet.name(a)), s.alphabet);
        ge.succ[a].assign(sets.exists.begin(), sets.exists.end());
        gf.succ[a].assign(sets.forall.begin(), sets.forall.end());
    }
    return {std::move(ge), std::move(gf)};
}

// ── eval_query ──────────────────────────────────────────────────────────────

namespace {

std::vector<int> query_postorder(const TwigQuery& q) {
    std::vector<int> order;
    auto rec = [&](auto&& self, int n) -> void {
        for (const auto& [c, kind] : q.nodes[n].edges) self(self, c);
        order.push_back(n);
    };
    rec(rec, q.root);
    return order;
}

bool query_label_ok(const TwigQuery& q, int qn, const std::string& label) {
    return q.nodes[qn].wildcard || q.nodes[qn].label == label;
}

}  // namespace

std::optional<TreeEmbedding> eval_query(const Tree& t, const TwigQuery& q) {
    const int nq = static_cast<int>(q.nodes.size());
    const int nt = static_cast<int>(t.nodes.size());
    std::vector<std::vector<char>> sat(nq, std::vector<char>(nt, 0));
    std::vector<std::vector<char>> below(nq, std::vector<char>(nt, 0));

    std::vector<int> tree_postorder;
    tree_postorder.reserve(nt);
    {
        std::vector<std::pair<int, std::size_t>> stack{{t.root, 0}};
        while (!stack.empty()) {
            auto& [n, idx] = stack.back();
            if (idx < t.children(n).size()) {
                stack.emplace_back(t.children(n)[idx++], 0);
            } else {
                tree_postorder.push_back(n);
                stack.pop_back();
            }
        }
    }

    for (int qn : query_postorder(q)) {
        for (int tn : tree_postorder) {
            bool ok = query_label_ok(q, qn, t.label(tn));
            for (const auto& [qc, kind] : q.nodes[qn].edges) {
                if (!ok) break;
                bool found = false;
                if (kind == EdgeKind::Child) {
                    for (int c : t.children(tn)) found |= sat[qc][c] != 0;
                } else {
                    for (int c : t.children(tn)) found |= sat[qc][c] || below[qc][c];
                }
                ok = found;
            }
            sat[qn][tn] = ok;
        }
        for (int tn : tree_postorder) {
            bool any = false;
            for (int c : t.children(tn)) any |= sat[qn][c] || below[qn][c];
            below[qn][tn] = any;
        }
    }

    if (!sat[q.root][t.root]) return std::nullopt;

    // Witness extraction, top down, first tree node in document order.
    TreeEmbedding emb;
    emb.assignment.assign(nq, -1);
    auto descendants_in_preorder = [&](int tn) {
        std::vector<int> out;
        std::vector<int> stack{tn};
        while (!stack.empty()) {
            int n = stack.back();
            stack.pop_back();
            if (n != tn) out.push_back(n);
            const auto& ch = t.children(n);
            for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
        }
        return out;
    };
    auto assign = [&](auto&& self, int qn, int tn) -> void {
        emb.assignment[qn] = tn;
        for (const auto& [qc, kind] : q.nodes[qn].edges) {
            int chosen = -1;
            if (kind == EdgeKind::Child) {
                for (int c : t.children(tn)) {
                    if (sat[qc][c]) {
                        chosen = c;
                        break;
                    }
                }
            } else {
                for (int d : descendants_in_preorder(tn)) {
                    if (sat[qc][d]) {
                        chosen = d;
                        break;
                    }
                }
            }
            self(self, qc, chosen);
        }
    };
    assign(assign, q.root, t.root);
    return emb;
}

// ── Generic embedding into a labeled DAG ────────────────────────────────────

namespace {

struct LabeledDag {
    std::vector<SymbolId> label;
    std::vector<std::vector<int>> succ;
    int root = 0;

    std::size_t size() const { return label.size(); }
};

LabeledDag dag_of_dep_graph(const DepGraph& g) {
    LabeledDag d;
    d.label.resize(g.alphabet.size());
    d.succ.resize(g.alphabet.size());
    for (SymbolId a = 0; a < g.alphabet.size(); ++a) {
        d.label[a] = a;
        d.succ[a].assign(g.succ[a].begin(), g.succ[a].end());
    }
    d.root = static_cast<int>(g.root);
    return d;
}

LabeledDag dag_of_char_graph(const CharGraph& g) {
    LabeledDag d;
    d.label.resize(g.vertices.size());
    d.succ.resize(g.vertices.size());
    for (std::size_t v = 0; v < g.vertices.size(); ++v) {
        d.label[v] = g.vertices[v].label;
        d.succ[v] = g.vertices[v].succ;
    }
    d.root = g.root;
    return d;
}

// Reflexivity-free transitive closure.
std::vector<std::vector<char>> reach_plus(const LabeledDag& d) {
    const std::size_t n = d.size();
    std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
    for (std::size_t v = 0; v < n; ++v) {
        for (int u : d.succ[v]) r[v][u] = 1;
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!r[i][k]) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (r[k][j]) r[i][j] = 1;
            }
        }
    }
    return r;
}

struct EmbedTable {
    std::vector<std::vector<char>> cand;  // query node -> dag vertex
    std::vector<std::vector<char>> reach;
    bool embeddable = false;
};

EmbedTable embed_table(const TwigQuery& q, const LabeledDag& d, const Alphabet& alphabet) {
    EmbedTable out;
    out.reach = reach_plus(d);
    out.cand.assign(q.nodes.size(), std::vector<char>(d.size(), 0));
    for (int qn : query_postorder(q)) {
        for (std::size_t v = 0; v < d.size(); ++v) {
            if (!query_label_ok(q, qn, alphabet.name(d.label[v]))) continue;
            bool ok = true;
            for (const auto& [qc, kind] : q.nodes[qn].edges) {
                bool found = false;
                if (kind == EdgeKind::Child) {
                    for (int u : d.succ[v]) found |= out.cand[qc][u] != 0;
                } else {
                    for (std::size_t u = 0; u < d.size() && !found; ++u) {
                        found = out.reach[v][u] && out.cand[qc][u];
                    }
                }
                if (!found) {
                    ok = false;
                    break;
                }
            }
            out.cand[qn][v] = ok;
        }
    }
    out.embeddable = out.cand[q.root][d.root] != 0;
    return out;
}

std::optional<std::vector<int>> embed_witness(const TwigQuery& q, const LabeledDag& d,
                                              const EmbedTable& table) {
    if (!table.embeddable) return std::nullopt;
    std::vector<int> assignment(q.nodes.size(), -1);
    auto assign = [&](auto&& self, int qn, int v) -> void {
        assignment[qn] = v;
        for (const auto& [qc, kind] : q.nodes[qn].edges) {
            int chosen = -1;
            if (kind == EdgeKind::Child) {
                for (int u : d.succ[v]) {
                    if (table.cand[qc][u] && (chosen < 0 || u < chosen)) chosen = u;
                }
            } else {
                for (std::size_t u = 0; u < d.size(); ++u) {
                    if (table.reach[v][u] && table.cand[qc][u]) {
                        chosen = static_cast<int>(u);
                        break;
                    }
                }
            }
            self(self, qc, chosen);
        }
    };
    assign(assign, q.root, d.root);
    return assignment;
}

bool embeds(const TwigQuery& q, const LabeledDag& d, const Alphabet& alphabet) {
    return embed_table(q, d, alphabet).embeddable;
}

}  // namespace

std::optional<GraphEmbedding> embed_query_in_graph(const TwigQuery& q, const DepGraph& g) {
    LabeledDag d = dag_of_dep_graph(g);
    auto witness = embed_witness(q, d, embed_table(q, d, g.alphabet));
    if (!witness) return std::nullopt;
    GraphEmbedding out;
    out.assignment.assign(witness->begin(), witness->end());
    return out;
}

// ── Simulation and unfolding ────────────────────────────────────────────────

namespace {

// Symbols on a cycle reachable from the root, if any.
bool cycle_reachable_from_root(const DepGraph& g) {
    enum { White, Grey, Black };
    std::vector<int> color(g.alphabet.size(), White);
    bool cycle = false;
    auto dfs = [&](auto&& self, SymbolId a) -> void {
        color[a] = Grey;
        for (SymbolId b : g.succ[a]) {
            if (cycle) return;
            if (color[b] == Grey) {
                cycle = true;
                return;
            }
            if (color[b] == White) self(self, b);
        }
        color[a] = Black;
    };
    dfs(dfs, g.root);
    return cycle;
}

}  // namespace

bool simulate_graph_in_tree(const DepGraph& g, const Tree& t) {
    if (cycle_reachable_from_root(g)) {
        throw std::invalid_argument("simulation requires a graph acyclic from the root");
    }
    // Greatest fixpoint of the simulation conditions.
    const std::size_t n = t.nodes.size();
    std::vector<std::vector<char>> rel(g.alphabet.size(), std::vector<char>(n, 0));
    for (std::size_t tn = 0; tn < n; ++tn) {
        auto id = g.alphabet.find(t.label(static_cast<int>(tn)));
        if (id) rel[*id][tn] = 1;
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (SymbolId a = 0; a < g.alphabet.size(); ++a) {
            for (std::size_t tn = 0; tn < n; ++tn) {
                if (!rel[a][tn]) continue;
                for (SymbolId b : g.succ[a]) {
                    bool found = false;
                    for (int c : t.children(static_cast<int>(tn))) found |= rel[b][c] != 0;
                    if (!found) {
                        rel[a][tn] = 0;
                        changed = true;
                        break;
                    }
                }
            }
        }
    }
    return rel[g.root][t.root] != 0;
}

Tree unfold_graph(const DepGraph& g) {
    if (cycle_reachable_from_root(g)) {
        throw std::invalid_argument("unfolding requires a graph acyclic from the root");
    }
    Tree t;
    auto rec = [&](auto&& self, SymbolId a) -> int {
        int id = t.add_node(g.alphabet.name(a));
        for (SymbolId b : g.succ[a]) t.add_child(id, self(self, b));
        return id;
    };
    t.root = rec(rec, g.root);
    return t;
}

// ── Schema views (shared by the IMS and DTD lanes) ──────────────────────────

namespace {

struct SchemaView {
    Alphabet alphabet;
    DepGraph exists_graph;
    DepGraph forall_graph;
    std::function<std::optional<UnorderedWord>(SymbolId, const UnorderedWord&)> fixup_word;
    std::function<bool(SymbolId, const UnorderedWord&)> word_valid;
    std::function<std::optional<Tree>(SymbolId)> witness_subtree;
    std::function<bool(const Tree&)> tree_valid;
};

// IMS: per-symbol reduced rules drive both the fix-up and validity.
SchemaView make_ims_view(const TrimResult& trimmed) {
    SchemaView view;
    const Schema& s = trimmed.schema;
    view.alphabet = s.alphabet;
    auto graphs = dependency_graphs(s);
    view.exists_graph = std::move(graphs.first);
    view.forall_graph = std::move(graphs.second);

    auto reduced = std::make_shared<std::vector<Dime>>();
    auto tuples = std::make_shared<std::vector<CompactTuple>>();
    for (const auto& name : s.alphabet.names()) {
        reduced->push_back(reduce(s.rule(name)));
        tuples->push_back(characterizing_tuple(reduced->back(), s.alphabet));
    }
    auto witnesses = std::make_shared<std::map<SymbolId, Tree>>();
    for (const auto& [name, tree] : trimmed.report.witness) {
        if (auto id = s.alphabet.find(name)) witnesses->emplace(*id, tree);
    }

    Alphabet alphabet = s.alphabet;
    view.fixup_word = [reduced, alphabet](SymbolId x,
                                          const UnorderedWord& m) -> std::optional<UnorderedWord> {
        UnorderedWord w;
        std::set<SymbolId> covered;
        for (const ClauseExpr& cl : (*reduced)[x].clauses) {
            const AtomExpr& atom = cl.atoms.front();  // IME: one atom per clause
            Nat demand = 0;
            bool any_present = false;
            for (const SymbolUse& su : atom.symbols) {
                SymbolId a = alphabet.require(su.name);
                covered.insert(a);
                if (m.count(a) > 0) any_present = true;
                if (!su.optional) demand = std::max(demand, m.count(a));
            }
            Nat iterations;
            if (!any_present) {
                iterations = atom.interval.min_count();
            } else {
                iterations = std::max<Nat>({demand, 1, atom.interval.lo});
                if (atom.interval.hi && iterations > *atom.interval.hi) {
                    iterations = *atom.interval.hi;  // forces sibling fusion
                }
            }
            if (iterations == 0) continue;
            for (const SymbolUse& su : atom.symbols) {
                SymbolId a = alphabet.require(su.name);
                w.set(a, su.optional ? std::min(m.count(a), iterations) : iterations);
            }
        }
        for (const auto& [a, k] : m.entries()) {
            if (!covered.count(a)) return std::nullopt;
        }
        return w;
    };
    view.word_valid = [tuples](SymbolId x, const UnorderedWord& w) {
        return word_satisfies(w, (*tuples)[x]).ok;
    };
    view.witness_subtree = [witnesses](SymbolId a) -> std::optional<Tree> {
        auto it = witnesses->find(a);
        if (it == witnesses->end()) return std::nullopt;
        return it->second;
    };
    auto compiled = std::make_shared<CompiledSchema>(s);
    view.tree_valid = [compiled](const Tree& t) {
        return validate_tree(*compiled, t).accepted;
    };
    return view;
}

// ── Characteristic graphs ───────────────────────────────────────────────────

// All acyclic paths from src to dst along the existential edges, at least
// one edge long; inner vertices are pairwise distinct and avoid both
// endpoints.  Ordered by length, then lexicographically.
std::vector<std::vector<SymbolId>> acyclic_paths(const DepGraph& g, SymbolId src, SymbolId dst) {
    std::vector<std::vector<SymbolId>> out;
    std::vector<SymbolId> path{src};
    std::vector<char> used(g.alphabet.size(), 0);
    auto rec = [&](auto&& self, SymbolId at) -> void {
        for (SymbolId b : g.succ[at]) {
            if (b == dst) {
                path.push_back(b);
                out.push_back(path);
                path.pop_back();
            }
            if (b == src || b == dst || used[b]) continue;
            used[b] = 1;
            path.push_back(b);
            self(self, b);
            path.pop_back();
            used[b] = 0;
        }
    };
    rec(rec, src);
    std::stable_sort(out.begin(), out.end(),
                     [](const std::vector<SymbolId>& a, const std::vector<SymbolId>& b) {
                         if (a.size() != b.size()) return a.size() < b.size();
                         return a < b;
                     });
    return out;
}

// Enumerates embeddings of q into the existential graph in lexicographic
// per-node symbol order (query nodes in preorder).
class EmbeddingEnum {
public:
    EmbeddingEnum(const TwigQuery& q, const LabeledDag& dag, const Alphabet& alphabet)
        : q_(q), dag_(dag), table_(embed_table(q, dag, alphabet)) {
        preorder_.reserve(q.nodes.size());
        parent_edge_.assign(q.nodes.size(), {-1, EdgeKind::Child});
        auto rec = [&](auto&& self, int n) -> void {
            preorder_.push_back(n);
            for (const auto& [c, kind] : q_.nodes[n].edges) {
                parent_edge_[c] = {n, kind};
                self(self, c);
            }
        };
        rec(rec, q.root);
        position_.assign(preorder_.size(), 0);
        options_.resize(preorder_.size());
        if (table_.embeddable) {
            fresh_ = true;
        } else {
            done_ = true;
        }
    }

    // Next embedding as a query-node-indexed symbol assignment.
    std::optional<std::vector<SymbolId>> next() {
        if (done_) return std::nullopt;
        std::size_t fill_from;
        if (fresh_) {
            fresh_ = false;
            options_[0] = options_at(0, {});
            position_[0] = 0;
            if (options_[0].empty()) {
                done_ = true;
                return std::nullopt;
            }
            fill_from = 1;
        } else {
            std::size_t level = preorder_.size();
            while (true) {
                if (level == 0) {
                    done_ = true;
                    return std::nullopt;
                }
                --level;
                if (++position_[level] < options_[level].size()) break;
            }
            fill_from = level + 1;
        }
        // Fill forward; the candidate table guarantees every level has an
        // option once its parent choice is candidate-consistent.
        std::vector<SymbolId> chosen(q_.nodes.size(), 0);
        for (std::size_t i = 0; i < fill_from; ++i) {
            chosen[preorder_[i]] = options_[i][position_[i]];
        }
        for (std::size_t i = fill_from; i < preorder_.size(); ++i) {
            options_[i] = options_at(i, chosen);
            position_[i] = 0;
            assert(!options_[i].empty());
            chosen[preorder_[i]] = options_[i][0];
        }
        return chosen;
    }

private:
    std::vector<SymbolId> options_at(std::size_t idx, const std::vector<SymbolId>& chosen) const {
        int qn = preorder_[idx];
        std::vector<SymbolId> out;
        if (idx == 0) {
            if (table_.cand[qn][dag_.root]) out.push_back(static_cast<SymbolId>(dag_.root));
            return out;
        }
        auto [parent, kind] = parent_edge_[qn];
        SymbolId pv = chosen[parent];
        for (std::size_t v = 0; v < dag_.size(); ++v) {
            if (!table_.cand[qn][v]) continue;
            bool edge_ok = kind == EdgeKind::Child
                               ? std::binary_search(dag_.succ[pv].begin(), dag_.succ[pv].end(),
                                                    static_cast<int>(v))
                               : table_.reach[pv][v] != 0;
            if (edge_ok) out.push_back(static_cast<SymbolId>(v));
        }
        return out;
    }

    const TwigQuery& q_;
    const LabeledDag& dag_;
    EmbedTable table_;
    std::vector<int> preorder_;
    std::vector<std::pair<int, EdgeKind>> parent_edge_;
    std::vector<std::size_t> position_;
    std::vector<std::vector<SymbolId>> options_;
    bool fresh_ = false;
    bool done_ = false;
};

}  // namespace

// ── CharGraphStream ─────────────────────────────────────────────────────────

struct CharGraphStream::Impl {
    TwigQuery query;
    Alphabet alphabet;
    DepGraph ge, gf;
    LabeledDag ge_dag;
    std::unique_ptr<EmbeddingEnum> embeddings;

    // Descendant edges of the query in preorder discovery order.
    std::vector<std::pair<int, int>> desc_edges;  // (parent, child)
    std::vector<std::pair<int, int>> child_edges;

    // Current embedding and per-descendant-edge path choices.
    std::optional<std::vector<SymbolId>> lambda;
    std::vector<std::vector<std::vector<SymbolId>>> paths;  // per desc edge
    std::vector<std::size_t> odometer;
    std::map<std::pair<SymbolId, SymbolId>, std::vector<std::vector<SymbolId>>> path_cache;

    // Universal closure, precomputed per symbol: reachable set in order.
    std::vector<std::vector<SymbolId>> forall_closure;

    Impl(const TwigQuery& q, DepGraph ge_in, DepGraph gf_in)
        : query(q), alphabet(ge_in.alphabet), ge(std::move(ge_in)), gf(std::move(gf_in)) {
        ge_dag = dag_of_dep_graph(ge);
        embeddings = std::make_unique<EmbeddingEnum>(query, ge_dag, alphabet);
        auto rec = [&](auto&& self, int n) -> void {
            for (const auto& [c, kind] : query.nodes[n].edges) {
                (kind == EdgeKind::Descendant ? desc_edges : child_edges).emplace_back(n, c);
                self(self, c);
            }
        };
        rec(rec, query.root);
        forall_closure.resize(alphabet.size());
        for (SymbolId a = 0; a < alphabet.size(); ++a) {
            std::set<SymbolId> seen;
            std::deque<SymbolId> work{a};
            while (!work.empty()) {
                SymbolId x = work.front();
                work.pop_front();
                for (SymbolId b : gf.succ[x]) {
                    if (b != a && seen.insert(b).second) work.push_back(b);
                }
            }
            forall_closure[a].assign(seen.begin(), seen.end());
        }
    }

    const std::vector<std::vector<SymbolId>>& paths_between(SymbolId src, SymbolId dst) {
        auto it = path_cache.find({src, dst});
        if (it == path_cache.end()) {
            it = path_cache.emplace(std::pair{src, dst}, acyclic_paths(ge, src, dst)).first;
        }
        return it->second;
    }

    bool advance_embedding() {
        while (true) {
            lambda = embeddings->next();
            if (!lambda) return false;
            paths.clear();
            bool viable = true;
            for (const auto& [n, c] : desc_edges) {
                const auto& list = paths_between((*lambda)[n], (*lambda)[c]);
                if (list.empty()) {
                    viable = false;
                    break;
                }
                paths.push_back(list);
            }
            if (viable) {
                odometer.assign(desc_edges.size(), 0);
                return true;
            }
        }
    }

    bool advance_odometer() {
        for (std::size_t i = odometer.size(); i-- > 0;) {
            if (++odometer[i] < paths[i].size()) return true;
            odometer[i] = 0;
        }
        return false;
    }

    CharGraph build() const {
        CharGraph g;
        std::vector<int> image(query.nodes.size(), -1);
        for (std::size_t qn = 0; qn < query.nodes.size(); ++qn) {
            CharGraph::Vertex v;
            v.label = (*lambda)[qn];
            v.marked = true;
            image[qn] = static_cast<int>(g.vertices.size());
            g.vertices.push_back(std::move(v));
        }
        g.root = image[query.root];
        for (const auto& [n, c] : child_edges) {
            g.vertices[image[n]].succ.push_back(image[c]);
        }
        for (std::size_t i = 0; i < desc_edges.size(); ++i) {
            const auto& [n, c] = desc_edges[i];
            const auto& path = paths[i][odometer[i]];
            int prev = image[n];
            for (std::size_t k = 1; k + 1 < path.size(); ++k) {
                CharGraph::Vertex v;
                v.label = path[k];
                int id = static_cast<int>(g.vertices.size());
                g.vertices.push_back(std::move(v));
                g.vertices[prev].succ.push_back(id);
                prev = id;
            }
            g.vertices[prev].succ.push_back(image[c]);
        }
        // Graft the universal closure below every vertex built so far.
        std::size_t skeleton = g.vertices.size();
        for (std::size_t v = 0; v < skeleton; ++v) {
            SymbolId x = g.vertices[v].label;
            std::map<SymbolId, int> copy;
            for (SymbolId a : forall_closure[x]) {
                CharGraph::Vertex fresh;
                fresh.label = a;
                copy[a] = static_cast<int>(g.vertices.size());
                g.vertices.push_back(std::move(fresh));
            }
            auto vertex_for = [&](SymbolId a) { return a == x ? static_cast<int>(v) : copy[a]; };
            for (SymbolId b : gf.succ[x]) g.vertices[v].succ.push_back(vertex_for(b));
            for (SymbolId a : forall_closure[x]) {
                for (SymbolId b : gf.succ[a]) {
                    g.vertices[copy[a]].succ.push_back(vertex_for(b));
                }
            }
        }
        if (alphabet.size() > 0 &&
            g.vertices.size() > query.nodes.size() * alphabet.size() * alphabet.size()) {
            throw std::logic_error("characteristic graph exceeds its size bound");
        }
        return g;
    }

    std::optional<CharGraph> next() {
        if (!lambda) {
            if (!advance_embedding()) return std::nullopt;
            return build();
        }
        if (advance_odometer()) return build();
        if (!advance_embedding()) return std::nullopt;
        return build();
    }
};

CharGraphStream::CharGraphStream(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}

CharGraphStream::CharGraphStream(const TwigQuery& q, const Schema& trimmed_ims) {
    auto graphs = dependency_graphs(trimmed_ims);
    impl_ = std::make_unique<Impl>(q, std::move(graphs.first), std::move(graphs.second));
}

CharGraphStream::~CharGraphStream() = default;
CharGraphStream::CharGraphStream(CharGraphStream&&) noexcept = default;

std::optional<CharGraph> CharGraphStream::next() {
    return impl_->next();
}

// ── Tree realization ────────────────────────────────────────────────────────

namespace {

struct RealizeCapExceeded {};
struct RealizeFailed {};

// Builds a schema-valid tree from an acyclic labeled graph whose every edge
// is existentially consistent.  Where the target word demands fewer
// occurrences of a label than the graph provides, same-labeled successor
// groups are merged (fused); where it demands more, existing subtrees are
// cloned, falling back to productivity witnesses when a label has no
// successor at all.
class TreeRealizer {
public:
    TreeRealizer(const CharGraph& g, const SchemaView& view, Nat node_cap)
        : g_(g), view_(view), node_cap_(node_cap) {}

    Tree run() {
        Tree t;
        t.root = realize({g_.root}, t);
        return t;
    }

private:
    const CharGraph& g_;
    const SchemaView& view_;
    Nat node_cap_;
    Nat nodes_ = 0;

    void bump(Nat n = 1) {
        nodes_ += n;
        if (nodes_ > node_cap_) throw RealizeCapExceeded{};
    }

    int graft_copy(const Tree& src, int src_node, Tree& dst) {
        bump();
        int id = dst.add_node(src.label(src_node));
        for (int c : src.children(src_node)) {
            dst.add_child(id, graft_copy(src, c, dst));
        }
        return id;
    }

    int realize(std::vector<int> group, Tree& t) {
        SymbolId x = g_.vertices[group.front()].label;
        // Union of successors, grouped by label; vertex order keeps the
        // construction deterministic.
        std::map<SymbolId, std::vector<int>> succ_by_label;
        {
            std::set<int> seen;
            for (int v : group) {
                for (int u : g_.vertices[v].succ) {
                    if (seen.insert(u).second) {
                        succ_by_label[g_.vertices[u].label].push_back(u);
                    }
                }
            }
            for (auto& [a, list] : succ_by_label) std::sort(list.begin(), list.end());
        }
        UnorderedWord present;
        for (const auto& [a, list] : succ_by_label) present.set(a, list.size());

        auto target = view_.fixup_word(x, present);
        if (!target) throw RealizeFailed{};

        bump();
        int id = t.add_node(view_.alphabet.name(x));
        for (const auto& [a, want] : target->entries()) {
            auto it = succ_by_label.find(a);
            std::size_t have = it == succ_by_label.end() ? 0 : it->second.size();
            std::vector<std::vector<int>> groups;
            if (have > 0) {
                const auto& list = it->second;
                if (have <= want) {
                    for (int v : list) groups.push_back({v});
                } else {
                    // Fuse: keep want-1 singletons, merge the tail.
                    for (std::size_t i = 0; i + 1 < want; ++i) {
                        groups.push_back({list[i]});
                    }
                    groups.emplace_back(list.begin() + static_cast<long>(want) - 1, list.end());
                }
            }
            int first_child = -1;
            for (auto& sub : groups) {
                int c = realize(std::move(sub), t);
                if (first_child < 0) first_child = c;
                t.add_child(id, c);
            }
            for (Nat k = groups.size(); k < want; ++k) {
                if (first_child >= 0) {
                    t.add_child(id, graft_copy(t, first_child, t));
                } else {
                    auto w = view_.witness_subtree(a);
                    if (!w) throw RealizeFailed{};
                    t.add_child(id, graft_copy(*w, w->root, t));
                }
            }
        }
        return id;
    }
};

std::optional<Tree> realize_tree(const CharGraph& g, const SchemaView& view, Nat node_cap) {
    try {
        return TreeRealizer(g, view, node_cap).run();
    } catch (const RealizeCapExceeded&) {
        return std::nullopt;
    } catch (const RealizeFailed&) {
        return std::nullopt;
    }
}

// The universal graph, restricted to the symbols reachable from the root,
// viewed as a characteristic graph (one vertex per symbol).
CharGraph forall_as_char_graph(const DepGraph& gf) {
    CharGraph g;
    std::map<SymbolId, int> index;
    std::deque<SymbolId> work{gf.root};
    index[gf.root] = 0;
    g.vertices.push_back(CharGraph::Vertex{gf.root, {}, true});
    while (!work.empty()) {
        SymbolId a = work.front();
        work.pop_front();
        for (SymbolId b : gf.succ[a]) {
            if (!index.count(b)) {
                index[b] = static_cast<int>(g.vertices.size());
                g.vertices.push_back(CharGraph::Vertex{b, {}, false});
                work.push_back(b);
            }
            g.vertices[index[a]].succ.push_back(index[b]);
        }
    }
    g.root = 0;
    return g;
}

}  // namespace

// ── IMS query analysis ──────────────────────────────────────────────────────

namespace {

struct ImsContext {
    TrimResult trimmed;
    SchemaView view;
};

ImsContext make_ims_context(const Schema& s) {
    if (!s.is_ims()) {
        throw std::invalid_argument("query analysis requires a disjunction-free schema");
    }
    ImsContext ctx{trim(s), {}};
    ctx.view = make_ims_view(ctx.trimmed);
    return ctx;
}

bool poll_cancelled(const QueryAnalysisOptions& options) {
    return options.cancelled && options.cancelled();
}

// Shared engine for the containment test over a prepared view.
QueryContainOutcome contained_via_char_graphs(const TwigQuery& p, const TwigQuery& q,
                                              const SchemaView& view,
                                              std::unique_ptr<CharGraphStream::Impl> stream_impl,
                                              const QueryAnalysisOptions& options) {
    if (!embeds(p, dag_of_dep_graph(view.exists_graph), view.alphabet)) {
        return {Verdict::Yes, std::nullopt};  // p unsatisfiable: vacuous
    }
    CharGraphStream stream{std::move(stream_impl)};
    std::size_t count = 0;
    while (auto g = stream.next()) {
        if (++count > options.graph_cap || poll_cancelled(options)) {
            return {Verdict::Indeterminate, std::nullopt};
        }
        if (embeds(q, dag_of_char_graph(*g), view.alphabet)) continue;
        auto t = realize_tree(*g, view, options.tree_node_cap);
        if (!t) return {Verdict::Indeterminate, std::nullopt};
        if (!view.tree_valid(*t) || !eval_query(*t, p)) {
            throw std::logic_error("realized characteristic tree failed verification");
        }
        if (!eval_query(*t, q)) return {Verdict::No, std::move(*t)};
        // The fused tree satisfies q even though the graph does not embed
        // it; this graph witnesses nothing.
    }
    return {Verdict::Yes, std::nullopt};
}

QueryImplOutcome implied_via_graphs(const TwigQuery& q, const SchemaView& view,
                                    const QueryAnalysisOptions& options) {
    if (embeds(q, dag_of_dep_graph(view.forall_graph), view.alphabet)) {
        return {true, std::nullopt};
    }
    QueryImplOutcome out{false, std::nullopt};
    auto t = realize_tree(forall_as_char_graph(view.forall_graph), view, options.tree_node_cap);
    if (t) {
        if (!view.tree_valid(*t) || eval_query(*t, q)) {
            throw std::logic_error("universal-graph counterexample failed verification");
        }
        out.counterexample = std::move(*t);
    }
    return out;
}

}  // namespace

QuerySatOutcome query_satisfiable(const Schema& ims, const TwigQuery& q,
                                  const QueryAnalysisOptions& options) {
    ImsContext ctx = make_ims_context(ims);
    if (!embeds(q, dag_of_dep_graph(ctx.view.exists_graph), ctx.view.alphabet)) {
        return {false, std::nullopt};
    }
    QuerySatOutcome out{true, std::nullopt};
    CharGraphStream stream(q, ctx.trimmed.schema);
    if (auto g = stream.next()) {
        if (auto t = realize_tree(*g, ctx.view, options.tree_node_cap)) {
            if (!ctx.view.tree_valid(*t) || !eval_query(*t, q)) {
                throw std::logic_error("satisfiability witness failed verification");
            }
            out.witness = std::move(*t);
        }
    }
    return out;
}

QueryImplOutcome query_implied(const Schema& ims, const TwigQuery& q,
                               const QueryAnalysisOptions& options) {
    ImsContext ctx = make_ims_context(ims);
    return implied_via_graphs(q, ctx.view, options);
}

QueryContainOutcome query_contained(const Schema& ims, const TwigQuery& p, const TwigQuery& q,
                                    const QueryAnalysisOptions& options) {
    ImsContext ctx = make_ims_context(ims);
    auto impl = std::make_unique<CharGraphStream::Impl>(p, ctx.view.exists_graph,
                                                        ctx.view.forall_graph);
    return contained_via_char_graphs(p, q, ctx.view, std::move(impl), options);
}

// ── Disjunction-free DTDs ───────────────────────────────────────────────────

const DtdRegex& DtdSchema::rule(const std::string& symbol) const {
    static const DtdRegex kEpsilon{};
    auto it = rules.find(symbol);
    return it == rules.end() ? kEpsilon : it->second;
}

namespace {

// Regex parser: postfix ? * +, `.` or the UTF-8 middle dot for
// concatenation, parentheses, `eps`.
class DtdRegexParser {
public:
    explicit DtdRegexParser(std::string_view text) : text_(text) {}

    DtdRegex parse() {
        skip_ws();
        DtdRegex e = parse_concat();
        skip_ws();
        if (pos_ < text_.size()) {
            throw ParseError(ParseErrorKind::UnexpectedToken, 1, static_cast<int>(pos_) + 1,
                             "trailing input after expression");
        }
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool try_consume(std::string_view tok) {
        if (text_.substr(pos_, tok.size()) == tok) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    DtdRegex parse_concat() {
        std::vector<DtdRegex> parts;
        parts.push_back(parse_postfix());
        while (true) {
            skip_ws();
            if (try_consume(".") || try_consume("\xc2\xb7")) {
                skip_ws();
                parts.push_back(parse_postfix());
            } else {
                break;
            }
        }
        if (parts.size() == 1) return std::move(parts[0]);
        DtdRegex e;
        e.kind = DtdRegex::Kind::Concat;
        e.children = std::move(parts);
        return e;
    }

    DtdRegex parse_postfix() {
        DtdRegex e = parse_primary();
        while (true) {
            skip_ws();
            if (pos_ >= text_.size()) break;
            char c = text_[pos_];
            DtdRegex wrap;
            if (c == '?') {
                wrap.kind = DtdRegex::Kind::Opt;
            } else if (c == '*') {
                wrap.kind = DtdRegex::Kind::Star;
            } else if (c == '+') {
                wrap.kind = DtdRegex::Kind::Plus;
            } else {
                break;
            }
            ++pos_;
            wrap.children.push_back(std::move(e));
            e = std::move(wrap);
        }
        return e;
    }

    DtdRegex parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) {
            throw ParseError(ParseErrorKind::UnexpectedToken, 1, static_cast<int>(pos_) + 1,
                             "expected expression");
        }
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            DtdRegex e = parse_concat();
            skip_ws();
            if (pos_ >= text_.size() || text_[pos_] != ')') {
                throw ParseError(ParseErrorKind::UnbalancedParen, 1, static_cast<int>(pos_) + 1,
                                 "missing ')'");
            }
            ++pos_;
            return e;
        }
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                text_[pos_] == '-')) {
            ++pos_;
        }
        std::string name(text_.substr(start, pos_ - start));
        if (name == "eps") return DtdRegex{};
        if (!Alphabet::valid_symbol_name(name)) {
            throw ParseError(ParseErrorKind::UnexpectedToken, 1, static_cast<int>(start) + 1,
                             "expected symbol, 'eps' or '('");
        }
        DtdRegex e;
        e.kind = DtdRegex::Kind::Symbol;
        e.symbol = name;
        return e;
    }
};

void collect_dtd_symbols(const DtdRegex& e, std::set<std::string>& out) {
    if (e.kind == DtdRegex::Kind::Symbol) out.insert(e.symbol);
    for (const auto& c : e.children) collect_dtd_symbols(c, out);
}

}  // namespace

DtdSchema parse_dtd_schema(std::string_view text) {
    // Reuse the line structure of the main schema format.
    DtdSchema out;
    bool seen_root = false;
    std::set<std::string> mentioned;
    int line_no = 0;
    std::size_t line_start = 0;
    while (line_start <= text.size()) {
        std::size_t line_end = text.find('\n', line_start);
        if (line_end == std::string_view::npos) line_end = text.size();
        std::string_view line = text.substr(line_start, line_end - line_start);
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string_view::npos) {
            if (line_end == text.size()) break;
            line_start = line_end + 1;
            continue;
        }
        std::size_t e = line.find_last_not_of(" \t\r") + 1;
        std::string_view content = line.substr(b, e - b);
        if (!seen_root) {
            if (content.substr(0, 5) != "root:") {
                throw ParseError(ParseErrorKind::UnexpectedToken, line_no, static_cast<int>(b) + 1,
                                 "expected 'root: <symbol>' header before any rule");
            }
            std::string name(content.substr(5));
            name.erase(0, name.find_first_not_of(" \t"));
            if (!Alphabet::valid_symbol_name(name)) {
                throw ParseError(ParseErrorKind::UnexpectedToken, line_no, static_cast<int>(b) + 1,
                                 "invalid root symbol");
            }
            out.root_label = name;
            mentioned.insert(name);
            seen_root = true;
        } else {
            std::size_t arrow = content.find("->");
            if (arrow == std::string_view::npos) {
                throw ParseError(ParseErrorKind::UnexpectedToken, line_no, static_cast<int>(b) + 1,
                                 "expected '<symbol> -> <expression>'");
            }
            std::string head(content.substr(0, arrow));
            head.erase(head.find_last_not_of(" \t") + 1);
            head.erase(0, head.find_first_not_of(" \t"));
            if (!Alphabet::valid_symbol_name(head)) {
                throw ParseError(ParseErrorKind::UnexpectedToken, line_no, static_cast<int>(b) + 1,
                                 "invalid rule head");
            }
            if (out.rules.count(head)) {
                throw ParseError(ParseErrorKind::DuplicateRule, line_no, static_cast<int>(b) + 1,
                                 "duplicate rule for '" + head + "'");
            }
            DtdRegex body = DtdRegexParser(content.substr(arrow + 2)).parse();
            mentioned.insert(head);
            collect_dtd_symbols(body, mentioned);
            out.rules.emplace(head, std::move(body));
        }
        if (line_end == text.size()) break;
        line_start = line_end + 1;
    }
    if (!seen_root) {
        throw ParseError(ParseErrorKind::UnexpectedToken, 1, 1, "missing 'root:' header");
    }
    out.alphabet = Alphabet(std::vector<std::string>(mentioned.begin(), mentioned.end()));
    return out;
}

std::string dtd_regex_to_string(const DtdRegex& e) {
    switch (e.kind) {
        case DtdRegex::Kind::Epsilon:
            return "eps";
        case DtdRegex::Kind::Symbol:
            return e.symbol;
        case DtdRegex::Kind::Star:
        case DtdRegex::Kind::Opt:
        case DtdRegex::Kind::Plus: {
            std::string inner = dtd_regex_to_string(e.children[0]);
            bool atomic = e.children[0].kind == DtdRegex::Kind::Symbol ||
                          e.children[0].kind == DtdRegex::Kind::Epsilon;
            if (!atomic) inner = "(" + inner + ")";
            char suffix = e.kind == DtdRegex::Kind::Star  ? '*'
                          : e.kind == DtdRegex::Kind::Opt ? '?'
                                                          : '+';
            return inner + suffix;
        }
        case DtdRegex::Kind::Concat: {
            std::string outp;
            for (std::size_t i = 0; i < e.children.size(); ++i) {
                if (i) outp += ".";
                std::string inner = dtd_regex_to_string(e.children[i]);
                if (e.children[i].kind == DtdRegex::Kind::Concat) inner = "(" + inner + ")";
                outp += inner;
            }
            return outp;
        }
    }
    return "?";
}

std::pair<std::set<SymbolId>, std::set<SymbolId>> dtd_symbols(const DtdRegex& e,
                                                              const Alphabet& alphabet) {
    switch (e.kind) {
        case DtdRegex::Kind::Epsilon:
            return {{}, {}};
        case DtdRegex::Kind::Symbol: {
            SymbolId id = alphabet.require(e.symbol);
            return {{id}, {id}};
        }
        case DtdRegex::Kind::Star:
        case DtdRegex::Kind::Opt: {
            auto inner = dtd_symbols(e.children[0], alphabet);
            return {{}, std::move(inner.second)};
        }
        case DtdRegex::Kind::Plus:
            return dtd_symbols(e.children[0], alphabet);
        case DtdRegex::Kind::Concat: {
            std::pair<std::set<SymbolId>, std::set<SymbolId>> out;
            for (const auto& c : e.children) {
                auto inner = dtd_symbols(c, alphabet);
                out.first.insert(inner.first.begin(), inner.first.end());
                out.second.insert(inner.second.begin(), inner.second.end());
            }
            return out;
        }
    }
    return {{}, {}};
}

Nat dtd_min_nb(const DtdRegex& e, SymbolId a, const Alphabet& alphabet) {
    switch (e.kind) {
        case DtdRegex::Kind::Epsilon:
            return 0;
        case DtdRegex::Kind::Symbol:
            return alphabet.require(e.symbol) == a ? 1 : 0;
        case DtdRegex::Kind::Star:
        case DtdRegex::Kind::Opt:
            return 0;
        case DtdRegex::Kind::Plus:
            return dtd_min_nb(e.children[0], a, alphabet);
        case DtdRegex::Kind::Concat: {
            Nat total = 0;
            for (const auto& c : e.children) total += dtd_min_nb(c, a, alphabet);
            return total;
        }
    }
    return 0;
}

Ure dtd_to_ure(const DtdRegex& e) {
    switch (e.kind) {
        case DtdRegex::Kind::Epsilon:
            return Ure::epsilon();
        case DtdRegex::Kind::Symbol:
            return Ure::sym(e.symbol);
        case DtdRegex::Kind::Star:
            return Ure::repeat(dtd_to_ure(e.children[0]), Interval::star());
        case DtdRegex::Kind::Opt:
            return Ure::repeat(dtd_to_ure(e.children[0]), Interval::opt());
        case DtdRegex::Kind::Plus:
            return Ure::repeat(dtd_to_ure(e.children[0]), Interval::plus());
        case DtdRegex::Kind::Concat: {
            std::vector<Ure> parts;
            for (const auto& c : e.children) parts.push_back(dtd_to_ure(c));
            return Ure::concat(std::move(parts));
        }
    }
    return Ure::epsilon();
}

std::pair<DepGraph, DepGraph> dtd_dependency_graphs(const DtdSchema& d) {
    DepGraph ge, gf;
    ge.alphabet = gf.alphabet = d.alphabet;
    ge.root = gf.root = d.alphabet.require(d.root_label);
    ge.flavor = DepGraph::Flavor::Existential;
    gf.flavor = DepGraph::Flavor::Universal;
    ge.succ.resize(d.alphabet.size());
    gf.succ.resize(d.alphabet.size());
    for (SymbolId a = 0; a < d.alphabet.size(); ++a) {
        auto [forall, exists] = dtd_symbols(d.rule(d.alphabet.name(a)), d.alphabet);
        ge.succ[a].assign(exists.begin(), exists.end());
        gf.succ[a].assign(forall.begin(), forall.end());
    }
    return {std::move(ge), std::move(gf)};
}

namespace {

std::size_t dtd_regex_size(const DtdRegex& e) {
    std::size_t n = 1;
    for (const auto& c : e.children) n += dtd_regex_size(c);
    return n;
}

struct DtdContext {
    DtdSchema schema;
    std::vector<char> productive;
    SchemaView view;
};

DtdContext make_dtd_context(const DtdSchema& d) {
    DtdContext ctx;
    ctx.schema = d;
    const Alphabet& alphabet = d.alphabet;

    // A symbol is productive when every symbol its rule forces is; the
    // least fixpoint leaves everything on a universal cycle unproductive.
    auto [ge_full, gf_full] = dtd_dependency_graphs(d);
    std::vector<char> productive(alphabet.size(), 0);
    bool changed = true;
    while (changed) {
        changed = false;
        for (SymbolId a = 0; a < alphabet.size(); ++a) {
            if (productive[a]) continue;
            bool ok = true;
            for (SymbolId b : gf_full.succ[a]) ok &= productive[b] != 0;
            if (ok) {
                productive[a] = 1;
                changed = true;
            }
        }
    }
    auto root = alphabet.find(d.root_label);
    if (!root || !productive[*root]) {
        throw UnsatisfiableSchema("DTD '" + d.root_label + "' has an empty language");
    }
    ctx.productive = productive;

    // Graphs restricted to productive symbols.
    SchemaView view;
    view.alphabet = alphabet;
    view.exists_graph = ge_full;
    view.forall_graph = gf_full;
    for (SymbolId a = 0; a < alphabet.size(); ++a) {
        auto prune = [&](std::vector<SymbolId>& list) {
            list.erase(std::remove_if(list.begin(), list.end(),
                                      [&](SymbolId b) { return !productive[b]; }),
                       list.end());
        };
        if (!productive[a]) {
            view.exists_graph.succ[a].clear();
            view.forall_graph.succ[a].clear();
        } else {
            prune(view.exists_graph.succ[a]);
            prune(view.forall_graph.succ[a]);
        }
    }

    auto schema = std::make_shared<DtdSchema>(d);
    auto productive_shared = std::make_shared<std::vector<char>>(productive);
    auto rule_ure = std::make_shared<std::map<std::string, Ure>>();
    for (const auto& name : alphabet.names()) {
        rule_ure->emplace(name, dtd_to_ure(schema->rule(name)));
    }

    view.word_valid = [schema, rule_ure](SymbolId x, const UnorderedWord& w) {
        return oracle::ure_membership_bruteforce(w, rule_ure->at(schema->alphabet.name(x)),
                                                 schema->alphabet);
    };

    view.fixup_word = [schema, rule_ure, productive_shared](
                          SymbolId x, const UnorderedWord& m) -> std::optional<UnorderedWord> {
        const Alphabet& ab = schema->alphabet;
        const DtdRegex& rule = schema->rule(ab.name(x));
        const Ure& ure = rule_ure->at(ab.name(x));
        std::size_t slack = dtd_regex_size(rule) + 2;
        // Candidate domain: counts up to the demand plus the forced floor
        // plus slack, zero for unproductive symbols.
        std::vector<Nat> bound(ab.size(), 0);
        for (SymbolId a = 0; a < ab.size(); ++a) {
            if (!(*productive_shared)[a]) continue;
            bound[a] = m.count(a) + dtd_min_nb(rule, a, ab) + slack;
        }
        std::set<SymbolId> demanded;
        for (const auto& [a, k] : m.entries()) demanded.insert(a);

        UnorderedWord limit;
        for (SymbolId a = 0; a < ab.size(); ++a) limit.set(a, bound[a]);
        std::optional<UnorderedWord> best;
        std::size_t best_presence = 0;
        Nat best_meet = 0;
        for (const UnorderedWord& w : oracle::derivable_words(ure, ab, limit)) {
            std::size_t presence = 0;
            Nat meet = 0;
            for (SymbolId a : demanded) {
                if (w.count(a) > 0) ++presence;
                meet += std::min(w.count(a), m.count(a));
            }
            if (best) {
                if (presence < best_presence) continue;
                if (presence == best_presence) {
                    if (meet < best_meet) continue;
                    if (meet == best_meet && w.size() >= best->size()) continue;
                }
            }
            best = w;
            best_presence = presence;
            best_meet = meet;
        }
        if (!best || (best_presence < demanded.size())) return std::nullopt;
        return best;
    };

    view.witness_subtree = [schema, productive_shared](SymbolId a) -> std::optional<Tree> {
        const Alphabet& ab = schema->alphabet;
        if (!(*productive_shared)[a]) return std::nullopt;
        Tree t;
        auto rec = [&](auto&& self, SymbolId x) -> int {
            int id = t.add_node(ab.name(x));
            const DtdRegex& rule = schema->rule(ab.name(x));
            for (SymbolId b = 0; b < ab.size(); ++b) {
                Nat k = dtd_min_nb(rule, b, ab);
                for (Nat i = 0; i < k; ++i) t.add_child(id, self(self, b));
            }
            return id;
        };
        t.root = rec(rec, a);
        return t;
    };

    Alphabet ab = alphabet;
    auto word_valid = view.word_valid;
    view.tree_valid = [schema, ab, word_valid](const Tree& t) {
        if (t.label(t.root) != schema->root_label) return false;
        for (std::size_t n = 0; n < t.nodes.size(); ++n) {
            auto id = ab.find(t.label(static_cast<int>(n)));
            if (!id) return false;
            UnorderedWord w;
            for (int c : t.children(static_cast<int>(n))) {
                auto cid = ab.find(t.label(c));
                if (!cid) return false;
                w.add(*cid, 1);
            }
            if (!word_valid(*id, w)) return false;
        }
        return true;
    };

    ctx.view = std::move(view);
    return ctx;
}

}  // namespace

QueryImplOutcome dtd_query_implied(const DtdSchema& d, const TwigQuery& q,
                                   const QueryAnalysisOptions& options) {
    DtdContext ctx = make_dtd_context(d);
    return implied_via_graphs(q, ctx.view, options);
}

QueryContainOutcome dtd_query_contained(const DtdSchema& d, const TwigQuery& p,
                                        const TwigQuery& q, const QueryAnalysisOptions& options) {
    DtdContext ctx = make_dtd_context(d);
    auto impl = std::make_unique<CharGraphStream::Impl>(p, ctx.view.exists_graph,
                                                        ctx.view.forall_graph);
    return contained_via_char_graphs(p, q, ctx.view, std::move(impl), options);
}

}  // namespace udime
