// ============================================================================
// oracle.cpp — Brute-force reference semantics
// ============================================================================

#include "udime/oracle.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace udime {
namespace oracle {

namespace {

using Counts = std::vector<Nat>;
using CountSet = std::set<Counts>;

Counts word_to_counts(const UnorderedWord& w, std::size_t n) {
    Counts c(n, 0);
    for (const auto& [sym, k] : w.entries()) c[sym] = k;
    return c;
}

// Pairwise sums of two derivable sets, pruned to sub-multisets of the target.
CountSet sum_sets(const CountSet& a, const CountSet& b, const Counts& limit) {
    CountSet out;
    for (const auto& x : a) {
        for (const auto& y : b) {
            Counts s(x.size());
            bool ok = true;
            for (std::size_t i = 0; i < s.size(); ++i) {
                s[i] = x[i] + y[i];
                if (s[i] > limit[i]) {
                    ok = false;
                    break;
                }
            }
            if (ok) out.insert(std::move(s));
        }
    }
    return out;
}

CountSet derivable(const Ure& e, const Alphabet& alphabet, const Counts& limit,
                   Nat total_size, Nat extra) {
    switch (e.kind) {
        case Ure::Kind::Epsilon:
            return {Counts(limit.size(), 0)};
        case Ure::Kind::Symbol: {
            SymbolId id = alphabet.require(e.symbol);
            if (limit[id] == 0) return {};
            Counts c(limit.size(), 0);
            c[id] = 1;
            return {c};
        }
        case Ure::Kind::Disjunction: {
            CountSet out;
            for (const auto& child : e.children) {
                CountSet s = derivable(child, alphabet, limit, total_size, extra);
                out.insert(s.begin(), s.end());
            }
            return out;
        }
        case Ure::Kind::Concat: {
            CountSet out{Counts(limit.size(), 0)};
            for (const auto& child : e.children) {
                out = sum_sets(out, derivable(child, alphabet, limit, total_size, extra), limit);
                if (out.empty()) break;
            }
            return out;
        }
        case Ure::Kind::Repeat: {
            CountSet base = derivable(e.children[0], alphabet, limit, total_size, extra);
            const Interval& iv = e.interval;
            CountSet out;
            if (iv.contains(0)) out.insert(Counts(limit.size(), 0));
            // Iterations past total_size + lo only re-add the empty word.
            Nat cap = total_size + iv.lo + extra;
            if (iv.hi) cap = std::min(cap, *iv.hi);
            CountSet current = base;
            for (Nat i = 1; i <= cap && !current.empty(); ++i) {
                if (iv.contains(i)) out.insert(current.begin(), current.end());
                if (i < cap) current = sum_sets(current, base, limit);
            }
            return out;
        }
    }
    return {};
}

}  // namespace

bool ure_membership_bruteforce(const UnorderedWord& w, const Ure& e, const Alphabet& alphabet,
                               Nat extra_iterations) {
    Counts target = word_to_counts(w, alphabet.size());
    CountSet reachable = derivable(e, alphabet, target, w.size(), extra_iterations);
    return reachable.count(target) != 0;
}

std::vector<UnorderedWord> derivable_words(const Ure& e, const Alphabet& alphabet,
                                           const UnorderedWord& limit) {
    Counts bound = word_to_counts(limit, alphabet.size());
    Nat total = 0;
    for (Nat k : bound) total += k;
    std::vector<UnorderedWord> out;
    for (const Counts& c : derivable(e, alphabet, bound, total, 0)) {
        UnorderedWord w;
        for (SymbolId a = 0; a < c.size(); ++a) w.add(a, c[a]);
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<UnorderedWord> enumerate_words(const Alphabet& alphabet, Nat max_size) {
    std::vector<UnorderedWord> out;
    UnorderedWord current;
    // Lexicographic recursion over count vectors.
    auto rec = [&](auto&& self, SymbolId next, Nat remaining) -> void {
        if (next == alphabet.size()) {
            out.push_back(current);
            return;
        }
        for (Nat k = 0; k <= remaining; ++k) {
            current.set(next, k);
            self(self, next + 1, remaining - k);
        }
        current.set(next, 0);
    };
    rec(rec, 0, max_size);
    return out;
}

namespace {

void collect_intervals(const Dime& d, std::vector<Interval>& out) {
    for (const auto& cl : d.clauses) {
        out.push_back(cl.interval);
        for (const auto& at : cl.atoms) out.push_back(at.interval);
    }
}

}  // namespace

Nat containment_bound(const Dime& e1, const Dime& e2, const Alphabet& alphabet) {
    std::vector<Interval> ivs;
    collect_intervals(e1, ivs);
    collect_intervals(e2, ivs);
    Nat max_ep = 0;
    for (const auto& iv : ivs) max_ep = std::max(max_ep, max_finite_endpoint(iv));
    return static_cast<Nat>(alphabet.size()) * (max_ep + 2);
}

// ── Tree enumeration ────────────────────────────────────────────────────────

namespace {

// Attach a copy of src below parent (or make it the root when parent < 0).
void graft(Tree& dst, int parent, const Tree& src) {
    std::vector<int> remap(src.nodes.size(), -1);
    for (std::size_t i = 0; i < src.nodes.size(); ++i) {
        remap[i] = dst.add_node(src.nodes[i].label);
    }
    for (std::size_t i = 0; i < src.nodes.size(); ++i) {
        for (int c : src.nodes[i].children) dst.add_child(remap[i], remap[c]);
    }
    if (parent >= 0) {
        dst.add_child(parent, remap[src.root]);
    } else {
        dst.root = remap[src.root];
    }
}

}  // namespace

std::vector<Tree> enumerate_trees(const Alphabet& alphabet, Nat max_nodes) {
    // by_size[k]: canonical trees with exactly k nodes, key-sorted.
    std::vector<std::vector<Tree>> by_size(max_nodes + 1);
    // Flat view with (size, index) for multiset generation.
    struct Entry {
        Nat size;
        std::size_t index;
    };
    std::vector<Entry> flat;

    for (Nat n = 1; n <= max_nodes; ++n) {
        std::map<std::string, Tree> found;
        std::vector<const Tree*> chosen;
        auto emit = [&](const std::string& label) {
            Tree t;
            int root = t.add_node(label);
            t.root = root;
            for (const Tree* sub : chosen) graft(t, root, *sub);
            found.emplace(tree_canonical_key(t), std::move(t));
        };
        // Choose a non-decreasing sequence of flat entries totaling n-1.
        auto rec = [&](auto&& self, std::size_t start, Nat remaining) -> void {
            if (remaining == 0) {
                for (const auto& label : alphabet.names()) emit(label);
                return;
            }
            for (std::size_t i = start; i < flat.size(); ++i) {
                if (flat[i].size > remaining) continue;
                chosen.push_back(&by_size[flat[i].size][flat[i].index]);
                self(self, i, remaining - flat[i].size);
                chosen.pop_back();
            }
        };
        rec(rec, 0, n - 1);
        for (auto& [key, t] : found) by_size[n].push_back(std::move(t));
        for (std::size_t i = 0; i < by_size[n].size(); ++i) flat.push_back(Entry{n, i});
        std::sort(flat.begin(), flat.end(), [](const Entry& a, const Entry& b) {
            return a.size != b.size ? a.size < b.size : a.index < b.index;
        });
    }

    std::vector<Tree> out;
    for (Nat n = 1; n <= max_nodes; ++n) {
        for (auto& t : by_size[n]) out.push_back(std::move(t));
    }
    return out;
}

bool naive_validate(const Schema& s, const Tree& t) {
    if (t.label(t.root) != s.root_label) return false;
    for (std::size_t n = 0; n < t.nodes.size(); ++n) {
        const std::string& label = t.label(static_cast<int>(n));
        if (!s.alphabet.contains(label)) return false;
        UnorderedWord children;
        bool ok = true;
        for (int c : t.children(static_cast<int>(n))) {
            auto id = s.alphabet.find(t.label(c));
            if (!id) {
                ok = false;
                break;
            }
            children.add(*id, 1);
        }
        if (!ok) return false;
        if (!ure_membership_bruteforce(children, dime_to_ure(s.rule(label)), s.alphabet)) {
            return false;
        }
    }
    return true;
}

// ── Valid-tree enumeration ──────────────────────────────────────────────────

namespace {

struct ValidTreeGen {
    const Schema& schema;
    Nat max_nodes;
    std::size_t max_items;
    bool exhausted = false;
    std::size_t produced = 0;

    // trees[a][s]: valid trees rooted at symbol a with exactly s nodes.
    std::map<std::string, std::vector<std::vector<Tree>>> trees;
    // Valid child words per symbol, ascending by size.
    std::map<std::string, std::vector<UnorderedWord>> valid_words;

    explicit ValidTreeGen(const Schema& s, Nat max_nodes_, std::size_t max_items_)
        : schema(s), max_nodes(max_nodes_), max_items(max_items_) {
        for (const auto& name : schema.alphabet.names()) {
            Ure rule = dime_to_ure(schema.rule(name));
            std::vector<UnorderedWord> valid;
            for (const auto& w : enumerate_words(schema.alphabet, max_nodes - 1)) {
                if (ure_membership_bruteforce(w, rule, schema.alphabet)) valid.push_back(w);
            }
            std::stable_sort(valid.begin(), valid.end(),
                             [](const UnorderedWord& a, const UnorderedWord& b) {
                                 return a.size() < b.size();
                             });
            valid_words.emplace(name, std::move(valid));
            trees.emplace(name, std::vector<std::vector<Tree>>(max_nodes + 1));
        }
        for (Nat s = 1; s <= max_nodes && !exhausted; ++s) {
            for (const auto& name : schema.alphabet.names()) build(name, s);
        }
    }

    void build(const std::string& label, Nat size) {
        auto& bucket = trees[label][size];
        std::set<std::string> seen;
        for (const auto& w : valid_words[label]) {
            if (w.size() > size - 1) break;
            if (exhausted) return;
            // Distribute size-1 nodes among the children demanded by w.
            std::vector<std::pair<std::string, Nat>> kids;
            for (const auto& [sym, k] : w.entries()) {
                kids.emplace_back(schema.alphabet.name(sym), k);
            }
            std::vector<const Tree*> chosen;
            auto rec = [&](auto&& self, std::size_t entry, Nat copy, std::size_t min_size,
                           std::size_t min_index, Nat remaining) -> void {
                if (exhausted) return;
                if (entry == kids.size()) {
                    if (remaining != 0) return;
                    Tree t;
                    int root = t.add_node(label);
                    t.root = root;
                    for (const Tree* sub : chosen) graft(t, root, *sub);
                    std::string key = tree_canonical_key(t);
                    if (seen.insert(key).second) {
                        if (++produced > max_items) {
                            exhausted = true;
                            return;
                        }
                        bucket.push_back(std::move(t));
                    }
                    return;
                }
                const auto& [sym, count] = kids[entry];
                if (copy == count) {
                    self(self, entry + 1, 0, 1, 0, remaining);
                    return;
                }
                const auto& table = trees[sym];
                // Non-decreasing (size, index) across copies of one symbol.
                for (std::size_t s = (copy == 0 ? 1 : min_size); s <= remaining; ++s) {
                    const auto& pool = table[s];
                    std::size_t start = (copy != 0 && s == min_size) ? min_index : 0;
                    for (std::size_t i = start; i < pool.size(); ++i) {
                        chosen.push_back(&pool[i]);
                        self(self, entry, copy + 1, s, i, remaining - s);
                        chosen.pop_back();
                        if (exhausted) return;
                    }
                }
            };
            rec(rec, 0, 0, 1, 0, size - 1);
        }
    }

    std::vector<Tree> roots() const {
        std::vector<Tree> out;
        auto it = trees.find(schema.root_label);
        if (it == trees.end()) return out;
        for (Nat s = 1; s <= max_nodes; ++s) {
            for (const auto& t : it->second[s]) out.push_back(t);
        }
        return out;
    }
};

}  // namespace

std::vector<Tree> enumerate_valid_trees(const Schema& s, Nat max_nodes, std::size_t max_items,
                                        bool* exhausted) {
    ValidTreeGen gen(s, max_nodes, max_items);
    if (exhausted) *exhausted = gen.exhausted;
    return gen.roots();
}

// ── Query evaluation (independent recursive check) ──────────────────────────

namespace {

bool label_ok(const TwigQuery& q, int qn, const Tree& t, int tn) {
    return q.nodes[qn].wildcard || q.nodes[qn].label == t.label(tn);
}

bool matches_at(const TwigQuery& q, int qn, const Tree& t, int tn);

bool some_descendant_matches(const TwigQuery& q, int qn, const Tree& t, int tn) {
    for (int c : t.children(tn)) {
        if (matches_at(q, qn, t, c)) return true;
        if (some_descendant_matches(q, qn, t, c)) return true;
    }
    return false;
}

bool matches_at(const TwigQuery& q, int qn, const Tree& t, int tn) {
    if (!label_ok(q, qn, t, tn)) return false;
    for (const auto& [qc, kind] : q.nodes[qn].edges) {
        bool ok = false;
        if (kind == EdgeKind::Child) {
            for (int c : t.children(tn)) {
                if (matches_at(q, qc, t, c)) {
                    ok = true;
                    break;
                }
            }
        } else {
            ok = some_descendant_matches(q, qc, t, tn);
        }
        if (!ok) return false;
    }
    return true;
}

}  // namespace

bool naive_tree_matches(const Tree& t, const TwigQuery& q) {
    return matches_at(q, q.root, t, t.root);
}

// ── Bounded query analysis ──────────────────────────────────────────────────

namespace {

bool budget_admits(const Schema& s, const EnumBudget& budget) {
    return s.alphabet.size() <= budget.max_alphabet;
}

}  // namespace

BoundedTreeResult naive_query_sat(const Schema& s, const TwigQuery& q, const EnumBudget& budget) {
    if (!budget_admits(s, budget)) return {BoundedVerdict::Exhausted, std::nullopt};
    bool exhausted = false;
    for (const auto& t : enumerate_valid_trees(s, budget.max_tree_nodes, budget.max_items,
                                               &exhausted)) {
        if (naive_tree_matches(t, q)) return {BoundedVerdict::True, t};
    }
    if (exhausted) return {BoundedVerdict::Exhausted, std::nullopt};
    return {BoundedVerdict::False, std::nullopt};
}

BoundedTreeResult naive_query_impl(const Schema& s, const TwigQuery& q, const EnumBudget& budget) {
    if (!budget_admits(s, budget)) return {BoundedVerdict::Exhausted, std::nullopt};
    bool exhausted = false;
    for (const auto& t : enumerate_valid_trees(s, budget.max_tree_nodes, budget.max_items,
                                               &exhausted)) {
        if (!naive_tree_matches(t, q)) return {BoundedVerdict::False, t};
    }
    if (exhausted) return {BoundedVerdict::Exhausted, std::nullopt};
    return {BoundedVerdict::True, std::nullopt};
}

BoundedTreeResult naive_query_contained(const Schema& s, const TwigQuery& p, const TwigQuery& q,
                                        const EnumBudget& budget) {
    if (!budget_admits(s, budget)) return {BoundedVerdict::Exhausted, std::nullopt};
    bool exhausted = false;
    for (const auto& t : enumerate_valid_trees(s, budget.max_tree_nodes, budget.max_items,
                                               &exhausted)) {
        if (naive_tree_matches(t, p) && !naive_tree_matches(t, q)) {
            return {BoundedVerdict::False, t};
        }
    }
    if (exhausted) return {BoundedVerdict::Exhausted, std::nullopt};
    return {BoundedVerdict::True, std::nullopt};
}

}  // namespace oracle
}  // namespace udime
