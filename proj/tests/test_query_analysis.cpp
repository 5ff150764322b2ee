#include "doctest.h"

#include <fstream>
#include <sstream>

#include "testutil.hpp"
#include "udime/oracle.hpp"
#include "udime/query_analysis.hpp"
#include "udime/schema_analysis.hpp"
#include "udime/syntax.hpp"
#include "udime/validator.hpp"

using namespace udime;
using testutil::Rng;

namespace {

std::string slurp(const std::string& name) {
    std::ifstream in(std::string(UDIME_TEST_DATA_DIR) + "/" + name, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Schema nested_schema() { return parse_schema(slurp("nested.ims")); }

std::set<std::pair<std::string, std::string>> named_edges(const DepGraph& g) {
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& [a, b] : g.edge_set()) {
        out.emplace(g.alphabet.name(a), g.alphabet.name(b));
    }
    return out;
}

}  // namespace

TEST_CASE("eval_query: sample tree and small cases") {
    // t0: r with children a (child b), b (child a), c (child b whose child is a).
    Tree t0 = parse_tree("<r><a><b/></a><b><a/></b><c><b><a/></b></c></r>");
    TwigQuery q0 = parse_query("r/*[*]//a");
    auto emb = eval_query(t0, q0);
    REQUIRE(emb);
    // The embedding respects edges and labels by construction; spot check root.
    CHECK(emb->assignment[q0.root] == t0.root);

    Tree single = parse_tree("<r/>");
    CHECK(eval_query(single, parse_query("r")));
    CHECK_FALSE(eval_query(single, parse_query("r//a")));
    CHECK(eval_query(single, parse_query("*")));

    // Non-injective embeddings are allowed.
    Tree two = parse_tree("<r><a><b/></a></r>");
    CHECK(eval_query(two, parse_query("r[a/b][a]")));
}

TEST_CASE("eval_query agrees with the recursive oracle evaluation") {
    Rng rng(7601);
    auto labels = testutil::letters(3);
    for (int i = 0; i < 150; ++i) {
        Tree t = testutil::random_tree(rng, labels, 8);
        TwigQuery q = testutil::random_query(rng, labels, 5);
        CHECK(eval_query(t, q).has_value() == oracle::naive_tree_matches(t, q));
    }
}

TEST_CASE("ime_symbols: examples") {
    Dime e0 = parse_dime("(a || b?)[5,6] || c+");
    Alphabet ab(dime_symbols(e0));
    auto sets = ime_symbols(e0, ab);
    CHECK(sets.forall == std::set<SymbolId>{ab.require("a"), ab.require("c")});
    CHECK(sets.exists ==
          std::set<SymbolId>{ab.require("a"), ab.require("b"), ab.require("c")});

    auto eps_sets = ime_symbols(parse_dime("eps"), ab);
    CHECK(eps_sets.forall.empty());
    CHECK(eps_sets.exists.empty());

    Dime opt = parse_dime("a? || b");
    Alphabet ab2(dime_symbols(opt));
    auto s2 = ime_symbols(opt, ab2);
    CHECK(s2.forall == std::set<SymbolId>{ab2.require("b")});
    CHECK(s2.exists == std::set<SymbolId>{ab2.require("a"), ab2.require("b")});

    CHECK_THROWS_AS(ime_symbols(parse_dime("(a|b)"), ab), std::invalid_argument);
}

TEST_CASE("ime_symbols matches the word-level oracle") {
    Rng rng(7602);
    auto pool = testutil::letters(3);
    Alphabet ab(pool);
    for (int i = 0; i < 50; ++i) {
        Dime e = testutil::random_dime(rng, pool, /*disjunction_free=*/true);
        auto sets = ime_symbols(e, ab);
        Ure ure = dime_to_ure(e);
        Nat bound = oracle::containment_bound(e, e, ab);
        std::set<SymbolId> seen_somewhere;
        std::set<SymbolId> seen_everywhere{0, 1, 2};
        for (const auto& w : oracle::enumerate_words(ab, bound)) {
            if (!oracle::ure_membership_bruteforce(w, ure, ab)) continue;
            for (SymbolId a = 0; a < ab.size(); ++a) {
                if (w.count(a) > 0) {
                    seen_somewhere.insert(a);
                } else {
                    seen_everywhere.erase(a);
                }
            }
        }
        CHECK(sets.exists == seen_somewhere);
        CHECK(sets.forall == seen_everywhere);
    }
}

TEST_CASE("dependency graphs: golden edge sets") {
    auto [ge, gf] = dependency_graphs(nested_schema());
    std::set<std::pair<std::string, std::string>> expected_exists{
        {"r", "a"}, {"r", "b"}, {"r", "c"}, {"b", "a"}, {"b", "c"}, {"b", "d"}, {"a", "d"}};
    std::set<std::pair<std::string, std::string>> expected_forall{
        {"r", "b"}, {"r", "c"}, {"b", "a"}, {"b", "d"}};
    CHECK(named_edges(ge) == expected_exists);
    CHECK(named_edges(gf) == expected_forall);

    auto [ge2, gf2] = dependency_graphs(parse_schema("root: r\n"));
    CHECK(ge2.edge_set().empty());
    CHECK(gf2.edge_set().empty());

    auto [gp, gu] = dependency_graphs(parse_schema(slurp("peers.ims")));
    std::set<std::pair<std::string, std::string>> peers_exists{
        {"peers", "user"}, {"peers", "vip"},   {"user", "upload"},
        {"user", "download"}, {"vip", "upload"}, {"vip", "download"}};
    std::set<std::pair<std::string, std::string>> peers_forall{{"vip", "upload"}};
    CHECK(named_edges(gp) == peers_exists);
    CHECK(named_edges(gu) == peers_forall);

    CHECK_THROWS_AS(dependency_graphs(parse_schema(slurp("events.dims"))),
                    std::invalid_argument);
}

TEST_CASE("embedding queries into dependency graphs") {
    auto [ge, gf] = dependency_graphs(nested_schema());
    TwigQuery q = parse_query("r[a]/b//d");
    CHECK(embed_query_in_graph(q, ge));
    CHECK_FALSE(embed_query_in_graph(q, gf));
    TwigQuery q2 = parse_query("r/b//d");
    CHECK(embed_query_in_graph(q2, gf));

    // The witness satisfies all four embedding conditions.
    auto emb = embed_query_in_graph(q, ge);
    REQUIRE(emb);
    CHECK(ge.alphabet.name(emb->assignment[q.root]) == "r");
}

TEST_CASE("simulation: small cases") {
    DepGraph edgeless;
    edgeless.alphabet = Alphabet({"r"});
    edgeless.root = 0;
    edgeless.succ.resize(1);
    Tree single = parse_tree("<r/>");
    CHECK(simulate_graph_in_tree(edgeless, single));

    DepGraph ra;
    ra.alphabet = Alphabet({"a", "r"});
    ra.root = ra.alphabet.require("r");
    ra.succ.resize(2);
    ra.succ[ra.alphabet.require("r")].push_back(ra.alphabet.require("a"));
    CHECK_FALSE(simulate_graph_in_tree(ra, single));

    DepGraph cyclic;
    cyclic.alphabet = Alphabet({"r"});
    cyclic.root = 0;
    cyclic.succ.assign(1, {0});
    CHECK_THROWS_AS(simulate_graph_in_tree(cyclic, single), std::invalid_argument);
}

TEST_CASE("the universal graph simulates in every valid tree") {
    Rng rng(7603);
    for (int i = 0; i < 12; ++i) {
        Schema s = testutil::random_ims(rng, testutil::letters(3));
        TrimResult trimmed = trim(s);
        auto [ge, gf] = dependency_graphs(trimmed.schema);
        bool exhausted = false;
        for (const auto& t :
             oracle::enumerate_valid_trees(trimmed.schema, 6, 20000, &exhausted)) {
            CHECK(simulate_graph_in_tree(gf, t));
        }
        REQUIRE_FALSE(exhausted);
    }
}

TEST_CASE("unfolding: the diamond graph duplicates shared suffixes") {
    DepGraph g;
    g.alphabet = Alphabet({"a", "b", "c", "d", "e", "r"});
    g.root = g.alphabet.require("r");
    g.succ.resize(6);
    auto edge = [&](const char* x, const char* y) {
        g.succ[g.alphabet.require(x)].push_back(g.alphabet.require(y));
    };
    edge("r", "a");
    edge("r", "b");
    edge("r", "c");
    edge("b", "d");
    edge("c", "d");
    edge("d", "e");
    for (auto& lst : g.succ) std::sort(lst.begin(), lst.end());

    Tree u = unfold_graph(g);
    CHECK(u.size() == 8);  // r, a, b, c and d,e twice
    CHECK(tree_to_string(u) == "<r><a/><b><d><e/></d></b><c><d><e/></d></c></r>");

    DepGraph edgeless;
    edgeless.alphabet = Alphabet({"r"});
    edgeless.root = 0;
    edgeless.succ.resize(1);
    CHECK(unfold_graph(edgeless).size() == 1);

    // Two stacked diamonds: sizes grow exponentially.
    DepGraph g2;
    g2.alphabet = Alphabet({"a1", "a2", "b", "c1", "c2", "d", "r"});
    g2.root = g2.alphabet.require("r");
    g2.succ.resize(7);
    auto edge2 = [&](const char* x, const char* y) {
        g2.succ[g2.alphabet.require(x)].push_back(g2.alphabet.require(y));
    };
    edge2("r", "a1");
    edge2("r", "a2");
    edge2("a1", "b");
    edge2("a2", "b");
    edge2("b", "c1");
    edge2("b", "c2");
    edge2("c1", "d");
    edge2("c2", "d");
    for (auto& lst : g2.succ) std::sort(lst.begin(), lst.end());
    CHECK(unfold_graph(g2).size() == 13);
}

TEST_CASE("min_nb") {
    Dime e = parse_dime("(a || b?)[5,6] || c+");
    Alphabet ab(dime_symbols(e));
    CHECK(min_nb(e, ab, ab.require("a")) == 5);
    CHECK(min_nb(e, ab, ab.require("b")) == 0);
    CHECK(min_nb(e, ab, ab.require("c")) == 1);

    Dime e2 = parse_dime("a[2,3] || c*");
    Alphabet ab2(testutil::letters(4));
    CHECK(min_nb(e2, ab2, ab2.require("c")) == 0);
    CHECK(min_nb(e2, ab2, ab2.require("d")) == 0);  // absent symbol
    CHECK(min_nb(e2, ab2, ab2.require("a")) == 2);
}

TEST_CASE("simulation iff embedding of the unfolding (graphs vs trees)") {
    Rng rng(7604);
    for (int i = 0; i < 220; ++i) {
        DepGraph g = testutil::random_acyclic_graph(rng, rng.between(2, 5));
        Tree u = unfold_graph(g);
        if (u.size() > 40) continue;
        Tree t = testutil::random_tree(rng, g.alphabet.names(), 8);
        bool sim = simulate_graph_in_tree(g, t);
        bool emb = eval_query(t, testutil::tree_as_query(u)).has_value();
        CAPTURE(tree_to_string(u));
        CAPTURE(tree_to_string(t));
        CHECK(sim == emb);
    }
}

TEST_CASE("graph embedding iff embedding into the unfolding (queries)") {
    Rng rng(7605);
    for (int i = 0; i < 220; ++i) {
        DepGraph g = testutil::random_acyclic_graph(rng, rng.between(2, 5));
        Tree u = unfold_graph(g);
        if (u.size() > 40) continue;
        TwigQuery q = testutil::random_query(rng, g.alphabet.names(), 5);
        bool in_graph = embed_query_in_graph(q, g).has_value();
        bool in_tree = eval_query(u, q).has_value();
        CAPTURE(query_to_string(q));
        CHECK(in_graph == in_tree);
    }
}

TEST_CASE("query satisfiability: nested schema battery") {
    Schema s = nested_schema();
    auto sat = query_satisfiable(s, parse_query("r[a]/b//d"));
    CHECK(sat.satisfiable);
    REQUIRE(sat.witness);
    CHECK(validate_tree(s, *sat.witness).accepted);
    CHECK(eval_query(*sat.witness, parse_query("r[a]/b//d")));

    CHECK(query_satisfiable(s, parse_query("r")).satisfiable);
    CHECK_FALSE(query_satisfiable(s, parse_query("r/d")).satisfiable);
}

TEST_CASE("query implication: nested schema battery") {
    Schema s = nested_schema();
    CHECK(query_implied(s, parse_query("r/b//d")).implied);

    auto not_implied = query_implied(s, parse_query("r[a]/b//d"));
    CHECK_FALSE(not_implied.implied);
    REQUIRE(not_implied.counterexample);
    CHECK(validate_tree(s, *not_implied.counterexample).accepted);
    CHECK_FALSE(eval_query(*not_implied.counterexample, parse_query("r[a]/b//d")));

    CHECK(query_implied(s, parse_query("*")).implied);
}

TEST_CASE("characteristic graph enumeration: counts and a layered instance") {
    Schema s = nested_schema();
    TrimResult trimmed = trim(s);

    // One embedding and no descendant edges: exactly one graph.
    {
        CharGraphStream stream(parse_query("r/c"), trimmed.schema);
        int count = 0;
        while (stream.next()) ++count;
        CHECK(count == 1);
    }
    // r//d has one embedding and three acyclic connecting paths.
    {
        CharGraphStream stream(parse_query("r//d"), trimmed.schema);
        std::set<std::string> paths;
        int count = 0;
        while (auto g = stream.next()) {
            ++count;
            CHECK(g->vertices.size() <= 2 * 5 * 5);
            // The chosen connecting path is the unique route from the root
            // image (vertex 0) to the d image (vertex 1); grafted closure
            // copies never reach a query image.
            std::string key;
            std::vector<int> route;
            auto dfs = [&](auto&& self, int v) -> bool {
                if (v == 1) return true;
                for (int u : g->vertices[static_cast<std::size_t>(v)].succ) {
                    route.push_back(u);
                    if (self(self, u)) return true;
                    route.pop_back();
                }
                return false;
            };
            REQUIRE(dfs(dfs, 0));
            for (int v : route) {
                if (v == 1) break;
                key += trimmed.schema.alphabet.name(g->vertices[static_cast<std::size_t>(v)].label);
            }
            paths.insert(key);
        }
        CHECK(count == 3);
        CHECK(paths == std::set<std::string>{"a", "b", "ba"});
    }

    // A layered schema: r needs c, c needs a1 a2, both need b, and b may
    // optionally have a c below.
    Schema fig = parse_schema("root: r\n"
                              "r -> c\n"
                              "c -> a1 || a2\n"
                              "a1 -> b\n"
                              "a2 -> b\n"
                              "b -> c?\n");
    TrimResult fig_trim = trim(fig);
    TwigQuery q = parse_query("r[//*[//*//*]]//b/c");
    CharGraphStream stream(q, fig_trim.schema);
    bool found = false;
    int graphs = 0;
    while (auto g = stream.next()) {
        ++graphs;
        REQUIRE(graphs < 100000);
        if (g->vertices.size() != 29) continue;
        std::map<std::string, int> labels;
        int marked = 0;
        for (const auto& v : g->vertices) {
            labels[fig.alphabet.name(v.label)]++;
            marked += v.marked;
        }
        if (marked == 6 && labels["r"] == 1 && labels["c"] == 5 && labels["a1"] == 6 &&
            labels["a2"] == 7 && labels["b"] == 10) {
            found = true;
            break;
        }
    }
    CHECK(found);
}

TEST_CASE("query containment: nested schema cases") {
    Schema s = nested_schema();
    CHECK(query_contained(s, parse_query("r/b"), parse_query("r/b")).verdict == Verdict::Yes);
    CHECK(query_contained(s, parse_query("r/b"), parse_query("r/b[d]")).verdict == Verdict::Yes);

    auto r = query_contained(s, parse_query("r"), parse_query("r/a"));
    CHECK(r.verdict == Verdict::No);
    REQUIRE(r.counterexample);
    CHECK(validate_tree(s, *r.counterexample).accepted);
    CHECK(eval_query(*r.counterexample, parse_query("r")));
    CHECK_FALSE(eval_query(*r.counterexample, parse_query("r/a")));
}

TEST_CASE("query containment: forced fusion flips the naive graph answer") {
    // With at most one a child, both predicates land on the same a node.
    Schema one = parse_schema("root: r\nr -> a\na -> b? || c?\n");
    CHECK(query_contained(one, parse_query("r[a/b][a/c]"), parse_query("r/a[b][c]")).verdict ==
          Verdict::Yes);

    // With a+ the two a children stay separate.
    Schema many = parse_schema("root: r\nr -> a+\na -> b? || c?\n");
    auto r = query_contained(many, parse_query("r[a/b][a/c]"), parse_query("r/a[b][c]"));
    CHECK(r.verdict == Verdict::No);
    REQUIRE(r.counterexample);
    CHECK(validate_tree(many, *r.counterexample).accepted);
    CHECK_FALSE(eval_query(*r.counterexample, parse_query("r/a[b][c]")));
}

TEST_CASE("query containment respects the enumeration cap") {
    Schema s = nested_schema();
    QueryAnalysisOptions opts;
    opts.graph_cap = 0;
    auto r = query_contained(s, parse_query("r/b"), parse_query("r/c"), opts);
    CHECK(r.verdict == Verdict::Indeterminate);
}

TEST_CASE("satisfiability and implication agree with the bounded oracle") {
    Rng rng(7606);
    oracle::EnumBudget budget;
    budget.max_alphabet = 4;
    int agreements = 0;
    for (int i = 0; i < 60; ++i) {
        Schema s = testutil::random_ims(rng, testutil::letters(3));
        TwigQuery q = testutil::random_query(rng, s.alphabet.names(), 4);
        auto sat = query_satisfiable(s, q);
        auto oracle_sat = oracle::naive_query_sat(s, q, budget);
        if (oracle_sat.verdict == oracle::BoundedVerdict::True) {
            CHECK(sat.satisfiable);
            ++agreements;
        }
        if (sat.satisfiable) {
            REQUIRE(sat.witness);
            CHECK(validate_tree(s, *sat.witness).accepted);
            CHECK(eval_query(*sat.witness, q));
            if (sat.witness->size() <= budget.max_tree_nodes &&
                oracle_sat.verdict != oracle::BoundedVerdict::Exhausted) {
                CHECK(oracle_sat.verdict == oracle::BoundedVerdict::True);
            }
        }

        auto impl = query_implied(s, q);
        auto oracle_impl = oracle::naive_query_impl(s, q, budget);
        if (oracle_impl.verdict == oracle::BoundedVerdict::False) {
            CHECK_FALSE(impl.implied);
        }
        if (!impl.implied && impl.counterexample) {
            CHECK(validate_tree(s, *impl.counterexample).accepted);
            CHECK_FALSE(eval_query(*impl.counterexample, q));
        }
        if (impl.implied && oracle_impl.verdict == oracle::BoundedVerdict::True) ++agreements;
    }
    CHECK(agreements > 0);
}

TEST_CASE("containment counterexamples are always machine verified") {
    Rng rng(7607);
    oracle::EnumBudget budget;
    budget.max_alphabet = 4;
    int decided = 0;
    for (int i = 0; i < 40 || decided < 25; ++i) {
        REQUIRE(i < 200);
        Schema s = testutil::random_ims(rng, testutil::letters(3));
        TwigQuery p = testutil::random_query(rng, s.alphabet.names(), 3);
        TwigQuery q = testutil::random_query(rng, s.alphabet.names(), 3);
        QueryAnalysisOptions opts;
        opts.graph_cap = 20000;
        auto r = query_contained(s, p, q, opts);
        if (r.verdict == Verdict::Indeterminate) continue;
        ++decided;
        if (r.verdict == Verdict::No) {
            REQUIRE(r.counterexample);
            CHECK(validate_tree(s, *r.counterexample).accepted);
            CHECK(eval_query(*r.counterexample, p));
            CHECK_FALSE(eval_query(*r.counterexample, q));
        } else {
            auto sweep = oracle::naive_query_contained(s, p, q, budget);
            CHECK(sweep.verdict != oracle::BoundedVerdict::False);
        }
    }
}

TEST_CASE("disjunction-free DTD analysis agrees with a naive tree sweep") {
    Rng rng(7608);
    auto dtd_tree_valid = [](const DtdSchema& d, const Tree& t) {
        if (t.label(t.root) != d.root_label) return false;
        for (std::size_t n = 0; n < t.nodes.size(); ++n) {
            auto id = d.alphabet.find(t.label(static_cast<int>(n)));
            if (!id) return false;
            UnorderedWord w;
            for (int c : t.children(static_cast<int>(n))) {
                auto cid = d.alphabet.find(t.label(c));
                if (!cid) return false;
                w.add(*cid, 1);
            }
            if (!oracle::ure_membership_bruteforce(w, dtd_to_ure(d.rule(t.label(
                                                       static_cast<int>(n)))),
                                                   d.alphabet)) {
                return false;
            }
        }
        return true;
    };
    auto random_regex = [&](auto&& self, const std::vector<std::string>& pool,
                            int depth) -> DtdRegex {
        DtdRegex e;
        int kind = rng.between(0, depth <= 0 ? 1 : 5);
        switch (kind) {
            case 0: e.kind = DtdRegex::Kind::Epsilon; break;
            case 1:
                e.kind = DtdRegex::Kind::Symbol;
                e.symbol = rng.pick(pool);
                break;
            case 2:
            case 3: {
                e.kind = DtdRegex::Kind::Concat;
                int parts = rng.between(2, 3);
                for (int i = 0; i < parts; ++i) {
                    e.children.push_back(self(self, pool, depth - 1));
                }
                break;
            }
            default: {
                e.kind = kind == 4 ? (rng.chance(0.5) ? DtdRegex::Kind::Star
                                                      : DtdRegex::Kind::Opt)
                                   : DtdRegex::Kind::Plus;
                e.children.push_back(self(self, pool, depth - 1));
                break;
            }
        }
        return e;
    };

    int checked = 0;
    for (int iter = 0; iter < 60 && checked < 30; ++iter) {
        auto names = testutil::letters(3);
        DtdSchema d;
        d.root_label = names.front();
        std::set<std::string> mentioned{d.root_label};
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (rng.chance(0.3)) continue;
            // Rules draw only from later symbols, keeping everything
            // productive.
            std::vector<std::string> later(names.begin() + static_cast<long>(i) + 1,
                                           names.end());
            if (later.empty()) continue;
            DtdRegex rule = random_regex(random_regex, later, 2);
            d.rules.emplace(names[i], std::move(rule));
            mentioned.insert(names[i]);
        }
        for (const auto& [head, rule] : d.rules) {
            std::function<void(const DtdRegex&)> walk = [&](const DtdRegex& r) {
                if (r.kind == DtdRegex::Kind::Symbol) mentioned.insert(r.symbol);
                for (const auto& c : r.children) walk(c);
            };
            walk(rule);
        }
        d.alphabet = Alphabet(std::vector<std::string>(mentioned.begin(), mentioned.end()));

        std::vector<Tree> valid;
        for (const auto& t : oracle::enumerate_trees(d.alphabet, 6)) {
            if (dtd_tree_valid(d, t)) valid.push_back(t);
        }
        // The smallest valid tree can exceed the sweep budget; such schemas
        // tell the sweep nothing.
        if (valid.empty()) continue;
        ++checked;

        TwigQuery q = testutil::random_query(rng, d.alphabet.names(), 3);
        auto impl = dtd_query_implied(d, q);
        bool sweep_implied = true;
        for (const auto& t : valid) sweep_implied &= oracle::naive_tree_matches(t, q);
        if (impl.implied) {
            CHECK(sweep_implied);
        }
        if (!impl.implied && impl.counterexample) {
            CHECK(dtd_tree_valid(d, *impl.counterexample));
            CHECK_FALSE(oracle::naive_tree_matches(*impl.counterexample, q));
        }

        TwigQuery p = testutil::random_query(rng, d.alphabet.names(), 3);
        auto cont = dtd_query_contained(d, p, q);
        if (cont.verdict == Verdict::No) {
            REQUIRE(cont.counterexample);
            CHECK(dtd_tree_valid(d, *cont.counterexample));
            CHECK(oracle::naive_tree_matches(*cont.counterexample, p));
            CHECK_FALSE(oracle::naive_tree_matches(*cont.counterexample, q));
        } else if (cont.verdict == Verdict::Yes) {
            for (const auto& t : valid) {
                if (oracle::naive_tree_matches(t, p)) {
                    CHECK(oracle::naive_tree_matches(t, q));
                }
            }
        }
    }
    CHECK(checked >= 20);
}

TEST_CASE("self-descendant queries on recursive schemas") {
    // The existential graph has a self-loop; connecting paths may start and
    // end at the same symbol.
    Schema s = parse_schema("root: r\nr -> r?\n");
    auto sat = query_satisfiable(s, parse_query("r//r"));
    CHECK(sat.satisfiable);
    REQUIRE(sat.witness);
    CHECK(validate_tree(s, *sat.witness).accepted);
    CHECK(eval_query(*sat.witness, parse_query("r//r")));
    CHECK_FALSE(query_implied(s, parse_query("r//r")).implied);
    // Only chains exist, so r//r and r/r coincide on this language.
    CHECK(query_contained(s, parse_query("r//r"), parse_query("r/r")).verdict == Verdict::Yes);
    CHECK(query_contained(s, parse_query("r/r"), parse_query("r//r")).verdict == Verdict::Yes);

    // Wildcard root queries embed anywhere.
    CHECK(query_satisfiable(s, parse_query("*")).satisfiable);
    CHECK(query_implied(s, parse_query("*")).implied);
}

TEST_CASE("query analysis rejects schemas with disjunction") {
    Schema events = parse_schema("root: r\nr -> (a|b)\n");
    CHECK_THROWS_AS(query_satisfiable(events, parse_query("r")), std::invalid_argument);
}

TEST_CASE("disjunction-free DTDs: parsing and symbol sets") {
    DtdSchema d = parse_dtd_schema("root: r\nr -> a.(b?).c+\n");
    auto [forall, exists] = dtd_symbols(d.rule("r"), d.alphabet);
    CHECK(forall == std::set<SymbolId>{d.alphabet.require("a"), d.alphabet.require("c")});
    CHECK(exists == std::set<SymbolId>{d.alphabet.require("a"), d.alphabet.require("b"),
                                       d.alphabet.require("c")});

    auto [f2, e2] = dtd_symbols(DtdRegex{}, d.alphabet);
    CHECK(f2.empty());
    CHECK(e2.empty());

    DtdSchema star = parse_dtd_schema("root: r\nr -> (a.b)*\n");
    auto [f3, e3] = dtd_symbols(star.rule("r"), star.alphabet);
    CHECK(f3.empty());
    CHECK(e3.size() == 2);

    // min_nb adds across concatenation and sees through +.
    DtdSchema twice = parse_dtd_schema("root: r\nr -> a.a\n");
    CHECK(dtd_min_nb(twice.rule("r"), twice.alphabet.require("a"), twice.alphabet) == 2);
    CHECK(dtd_min_nb(parse_dtd_schema("root: r\nr -> (a.b)+\n").rule("r"), 0,
                     Alphabet({"a", "b", "r"})) == 1);
}

TEST_CASE("dtd_symbols agree with ordered-word brute force") {
    // Enumerate ordered words by derivation, length-capped, and compare the
    // presence sets.
    auto ordered_words = [](const DtdRegex& e, std::size_t max_len) {
        std::set<std::vector<std::string>> words;
        auto rec = [&](auto&& self, const DtdRegex& r) -> std::set<std::vector<std::string>> {
            std::set<std::vector<std::string>> out;
            switch (r.kind) {
                case DtdRegex::Kind::Epsilon:
                    out.insert(std::vector<std::string>{});
                    break;
                case DtdRegex::Kind::Symbol:
                    out.insert({r.symbol});
                    break;
                case DtdRegex::Kind::Opt: {
                    out = self(self, r.children[0]);
                    out.insert(std::vector<std::string>{});
                    break;
                }
                case DtdRegex::Kind::Star:
                case DtdRegex::Kind::Plus: {
                    auto base = self(self, r.children[0]);
                    std::set<std::vector<std::string>> acc{{}};
                    out = r.kind == DtdRegex::Kind::Star ? acc
                                                         : std::set<std::vector<std::string>>{};
                    for (std::size_t i = 0; i < max_len + 1; ++i) {
                        std::set<std::vector<std::string>> next;
                        for (const auto& w1 : acc) {
                            for (const auto& w2 : base) {
                                auto w = w1;
                                w.insert(w.end(), w2.begin(), w2.end());
                                if (w.size() <= max_len) next.insert(std::move(w));
                            }
                        }
                        if (next.empty()) break;
                        out.insert(next.begin(), next.end());
                        acc = std::move(next);
                    }
                    break;
                }
                case DtdRegex::Kind::Concat: {
                    std::set<std::vector<std::string>> acc{{}};
                    for (const auto& c : r.children) {
                        auto part = self(self, c);
                        std::set<std::vector<std::string>> next;
                        for (const auto& w1 : acc) {
                            for (const auto& w2 : part) {
                                auto w = w1;
                                w.insert(w.end(), w2.begin(), w2.end());
                                if (w.size() <= max_len) next.insert(std::move(w));
                            }
                        }
                        acc = std::move(next);
                    }
                    out = std::move(acc);
                    break;
                }
            }
            return out;
        };
        words = rec(rec, e);
        return words;
    };

    const char* bodies[] = {"a.(b?).c+", "eps", "(a.b)*", "a.a", "(a+).b?", "a?.b",
                            "((a.b)+)?", "a*.b.c?"};
    for (const char* body : bodies) {
        DtdSchema d = parse_dtd_schema(std::string("root: r\nr -> ") + body + "\n");
        const DtdRegex& e = d.rule("r");
        auto words = ordered_words(e, 4);
        REQUIRE(!words.empty());
        std::set<SymbolId> brute_exists;
        std::set<SymbolId> brute_forall;
        bool first = true;
        for (const auto& w : words) {
            std::set<SymbolId> present;
            for (const auto& sym : w) present.insert(d.alphabet.require(sym));
            brute_exists.insert(present.begin(), present.end());
            if (first) {
                brute_forall = present;
                first = false;
            } else {
                std::set<SymbolId> keep;
                for (SymbolId a : brute_forall) {
                    if (present.count(a)) keep.insert(a);
                }
                brute_forall = std::move(keep);
            }
        }
        auto [forall, exists] = dtd_symbols(e, d.alphabet);
        CAPTURE(body);
        CHECK(exists == brute_exists);
        CHECK(forall == brute_forall);
    }
}

TEST_CASE("disjunction-free DTD implication and containment battery") {
    DtdSchema d1 = parse_dtd_schema("root: r\nr -> a.b\n");
    CHECK(dtd_query_implied(d1, parse_query("r[a][b]")).implied);

    DtdSchema d2 = parse_dtd_schema("root: r\nr -> a?.b\n");
    auto impl = dtd_query_implied(d2, parse_query("r/a"));
    CHECK_FALSE(impl.implied);
    REQUIRE(impl.counterexample);
    CHECK(tree_to_string(*impl.counterexample) == "<r><b/></r>");

    DtdSchema d3 = parse_dtd_schema("root: r\nr -> a.a\n");
    CHECK(dtd_query_contained(d3, parse_query("r/a"), parse_query("r[a]/a")).verdict ==
          Verdict::Yes);

    // A containment counterexample in the DTD lane is verified too.
    DtdSchema d4 = parse_dtd_schema("root: r\nr -> a.a?\na -> b?\n");
    auto r = dtd_query_contained(d4, parse_query("r/a"), parse_query("r/a/b"));
    CHECK(r.verdict == Verdict::No);
    REQUIRE(r.counterexample);
    CHECK_FALSE(eval_query(*r.counterexample, parse_query("r/a/b")));

    // Universal cycle from the root: unsatisfiable.
    CHECK_THROWS_AS(dtd_query_implied(parse_dtd_schema("root: r\nr -> a\na -> r\n"),
                                      parse_query("r")),
                    UnsatisfiableSchema);
}
