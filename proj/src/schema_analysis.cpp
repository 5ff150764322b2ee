// ============================================================================
// schema_analysis.cpp — Schema-level decision problems
// ============================================================================

#include "udime/schema_analysis.hpp"

#include <algorithm>
#include <cassert>
#include <deque>

namespace udime {

namespace {

constexpr Nat kCostInf = UINT64_MAX;
constexpr Nat kWitnessNodeBudget = 1000000;

Nat sat_add(Nat a, Nat b) { return (a > kCostInf - b) ? kCostInf : a + b; }

Nat sat_mul(Nat a, Nat b) {
    if (a == 0 || b == 0) return 0;
    if (a > kCostInf / b) return kCostInf;
    return a * b;
}

// Reduced rules plus the productivity fixpoint state.
struct Analysis {
    const Schema& schema;
    std::vector<Dime> reduced;         // by symbol id
    std::vector<Nat> cost;             // kCostInf = not (yet) productive
    std::vector<UnorderedWord> recipe; // cheapest child word found so far

    explicit Analysis(const Schema& s) : schema(s) {
        const Alphabet& alphabet = s.alphabet;
        reduced.reserve(alphabet.size());
        for (const auto& name : alphabet.names()) reduced.push_back(reduce(s.rule(name)));
        cost.assign(alphabet.size(), kCostInf);
        recipe.assign(alphabet.size(), UnorderedWord{});
        run_fixpoint();
    }

    void run_fixpoint() {
        const Alphabet& alphabet = schema.alphabet;
        auto cost_fn = [&](SymbolId b) -> std::optional<Nat> {
            if (cost[b] == kCostInf) return std::nullopt;
            return cost[b];
        };
        bool changed = true;
        while (changed) {
            changed = false;
            for (SymbolId a = 0; a < alphabet.size(); ++a) {
                auto word = minimal_word(reduced[a], alphabet, cost_fn);
                if (!word) continue;
                Nat c = 1;
                for (const auto& [b, k] : word->entries()) {
                    c = sat_add(c, sat_mul(k, cost[b]));
                }
                if (c < cost[a]) {
                    cost[a] = c;
                    recipe[a] = *word;
                    changed = true;
                }
            }
        }
    }

    bool productive(SymbolId a) const { return cost[a] != kCostInf; }

    // Materializes the recipe tree; nullopt when it would exceed the budget.
    std::optional<Tree> materialize(SymbolId a) const {
        if (!productive(a)) return std::nullopt;
        if (cost[a] > kWitnessNodeBudget) return std::nullopt;
        Tree t;
        t.root = build(a, t);
        return t;
    }

    int build(SymbolId a, Tree& t) const {
        int id = t.add_node(schema.alphabet.name(a));
        for (const auto& [b, k] : recipe[a].entries()) {
            for (Nat i = 0; i < k; ++i) t.add_child(id, build(b, t));
        }
        return id;
    }

    // Existential successors under a rule with unproductive symbols
    // deleted: b may appear among the children in some valid tree.
    std::set<SymbolId> exists_successors(const Dime& pruned_rule) const {
        CompactTuple tuple = characterizing_tuple(reduce(pruned_rule), schema.alphabet);
        std::set<SymbolId> out;
        for (SymbolId b = 0; b < schema.alphabet.size(); ++b) {
            if (!tuple.card[b].hi || *tuple.card[b].hi >= 1) out.insert(b);
        }
        return out;
    }
};

// Restricts the rule to words avoiding the given symbols.  Returns nullopt
// when the restriction empties the language (the owner is unproductive).
std::optional<Dime> delete_symbols(const Dime& d, const std::set<std::string>& gone) {
    Dime out;
    for (const ClauseExpr& cl : d.clauses) {
        ClauseExpr next;
        next.interval = cl.interval;
        bool epsilon_alternative = false;
        for (const AtomExpr& atom : cl.atoms) {
            AtomExpr kept;
            kept.interval = atom.interval;
            bool lost_required = false;
            for (const SymbolUse& su : atom.symbols) {
                if (!gone.count(su.name)) {
                    kept.symbols.push_back(su);
                } else if (!su.optional) {
                    lost_required = true;
                }
            }
            if (lost_required) {
                // The atom can no longer be instantiated; zero iterations
                // contribute epsilon when the interval admits them.
                if (atom.interval.admits_zero()) epsilon_alternative = true;
                continue;
            }
            if (kept.symbols.empty()) {
                epsilon_alternative = true;
                continue;
            }
            next.atoms.push_back(std::move(kept));
        }
        if (next.atoms.empty()) {
            if (epsilon_alternative || cl.interval.admits_zero()) continue;
            return std::nullopt;  // clause demands an instantiation but has none
        }
        if (epsilon_alternative) {
            // Preserve the lost epsilon alternative: the siblings become
            // optional (an empty atom would serve the same purpose).
            AtomExpr marker;
            marker.interval = Interval::zero();
            next.atoms.push_back(std::move(marker));
        }
        out.clauses.push_back(std::move(next));
    }
    return out;
}

struct PrunedSchema {
    Analysis analysis;
    std::vector<Dime> pruned;              // rules with unproductive symbols deleted
    std::set<SymbolId> reachable;          // via existential edges, root first
    std::map<SymbolId, SymbolId> parent;   // reachability tree for path extraction

    explicit PrunedSchema(const Schema& s) : analysis(s) {
        const Alphabet& alphabet = s.alphabet;
        std::set<std::string> gone;
        for (SymbolId a = 0; a < alphabet.size(); ++a) {
            if (!analysis.productive(a)) gone.insert(alphabet.name(a));
        }
        pruned.resize(alphabet.size());
        for (SymbolId a = 0; a < alphabet.size(); ++a) {
            if (!analysis.productive(a)) continue;
            auto d = delete_symbols(s.rule(alphabet.name(a)), gone);
            if (!d) throw std::logic_error("productive symbol lost its rule in deletion");
            pruned[a] = std::move(*d);
        }
        auto root = alphabet.find(s.root_label);
        if (root && analysis.productive(*root)) {
            std::deque<SymbolId> queue{*root};
            reachable.insert(*root);
            while (!queue.empty()) {
                SymbolId a = queue.front();
                queue.pop_front();
                for (SymbolId b : analysis.exists_successors(pruned[a])) {
                    if (!analysis.productive(b)) continue;
                    if (reachable.insert(b).second) {
                        parent.emplace(b, a);
                        queue.push_back(b);
                    }
                }
            }
        }
    }

    ProductivityReport report() const {
        ProductivityReport r;
        const Alphabet& alphabet = analysis.schema.alphabet;
        for (SymbolId a = 0; a < alphabet.size(); ++a) {
            if (analysis.productive(a)) {
                r.productive.insert(alphabet.name(a));
                if (auto t = analysis.materialize(a)) r.witness.emplace(alphabet.name(a), *t);
            }
        }
        for (SymbolId a : reachable) r.reachable.insert(alphabet.name(a));
        return r;
    }
};

}  // namespace

// ── schema_satisfiable ──────────────────────────────────────────────────────

SatResult schema_satisfiable(const Schema& s) {
    PrunedSchema pruned(s);
    SatResult result;
    result.report = pruned.report();
    auto root = s.alphabet.find(s.root_label);
    result.satisfiable = root && pruned.analysis.productive(*root);
    if (result.satisfiable) result.witness = pruned.analysis.materialize(*root);
    return result;
}

// ── trim ────────────────────────────────────────────────────────────────────

TrimResult trim(const Schema& s) {
    PrunedSchema pruned(s);
    auto root = s.alphabet.find(s.root_label);
    if (!root || !pruned.analysis.productive(*root)) {
        throw UnsatisfiableSchema("schema '" + s.root_label + "' has an empty language");
    }

    TrimResult out;
    out.report = pruned.report();
    out.schema.root_label = s.root_label;
    std::set<std::string> mentioned{s.root_label};
    for (SymbolId a : pruned.reachable) {
        const std::string& name = s.alphabet.name(a);
        // Keep untouched rules verbatim; normalize only where a deletion
        // left markers behind.
        const Dime& original = s.rule(name);
        bool touched = false;
        for (const auto& sym : dime_symbols(original)) {
            if (!pruned.analysis.productive(s.alphabet.require(sym))) touched = true;
        }
        Dime rule = touched ? reduce(pruned.pruned[a]) : original;
        mentioned.insert(name);
        for (const auto& sym : dime_symbols(rule)) mentioned.insert(sym);
        if (!rule.clauses.empty() || s.rules.count(name)) {
            out.schema.rules.emplace(name, std::move(rule));
        }
    }
    out.schema.alphabet = Alphabet(std::vector<std::string>(mentioned.begin(), mentioned.end()));
    return out;
}

// ── schema_contains ─────────────────────────────────────────────────────────

SchemaContainsResult schema_contains(const Schema& s1, const Schema& s2) {
    TrimResult t1 = trim(s1);  // throws when s1 is unsatisfiable
    SatResult sat2 = schema_satisfiable(s2);
    if (!sat2.satisfiable) {
        throw UnsatisfiableSchema("schema '" + s2.root_label + "' has an empty language");
    }
    if (s1.root_label != s2.root_label) {
        return SchemaContainsResult{false, s1.root_label};
    }
    for (const auto& name : t1.report.reachable) {
        if (!dime_contains(s2.rule(name), t1.schema.rule(name))) {
            return SchemaContainsResult{false, name};
        }
    }
    return SchemaContainsResult{true, std::nullopt};
}

// ── witness_tree_with_word ──────────────────────────────────────────────────

std::optional<Tree> witness_tree_with_word(const Schema& s, const std::string& symbol,
                                           const UnorderedWord& w) {
    PrunedSchema pruned(s);
    const Alphabet& alphabet = s.alphabet;
    auto target = alphabet.find(symbol);
    if (!target || !pruned.reachable.count(*target)) return std::nullopt;
    for (const auto& [b, k] : w.entries()) {
        if (b >= alphabet.size()) {
            throw std::out_of_range("witness word is not over the schema's alphabet");
        }
        if (!pruned.analysis.productive(b)) return std::nullopt;
    }

    // Path of symbols from the root to the target along existential edges.
    std::vector<SymbolId> path{*target};
    while (true) {
        auto it = pruned.parent.find(path.back());
        if (it == pruned.parent.end()) break;
        path.push_back(it->second);
    }
    std::reverse(path.begin(), path.end());

    auto cost_fn = [&](SymbolId b) -> std::optional<Nat> {
        if (!pruned.analysis.productive(b)) return std::nullopt;
        return pruned.analysis.cost[b];
    };

    Tree t;
    auto build_witness = [&](auto&& self, SymbolId a) -> int {
        int id = t.add_node(alphabet.name(a));
        for (const auto& [b, k] : pruned.analysis.recipe[a].entries()) {
            for (Nat i = 0; i < k; ++i) t.add_child(id, self(self, b));
        }
        return id;
    };

    std::optional<int> result_root;
    int parent_node = -1;
    for (std::size_t i = 0; i < path.size(); ++i) {
        SymbolId a = path[i];
        int node = t.add_node(alphabet.name(a));
        if (parent_node >= 0) t.add_child(parent_node, node);
        if (!result_root) result_root = node;
        UnorderedWord children;
        if (i + 1 < path.size()) {
            auto word = minimal_word(reduce(pruned.pruned[a]), alphabet, cost_fn, {path[i + 1]});
            if (!word) return std::nullopt;
            children = *word;
            children.set(path[i + 1], children.count(path[i + 1]) - 1);  // the path child
        } else {
            children = w;
        }
        for (const auto& [b, k] : children.entries()) {
            for (Nat n = 0; n < k; ++n) t.add_child(node, build_witness(build_witness, b));
        }
        parent_node = node;
    }
    t.root = *result_root;
    return t;
}

}  // namespace udime
