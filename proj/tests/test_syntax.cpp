#include "doctest.h"

#include "testutil.hpp"
#include "udime/dime.hpp"
#include "udime/syntax.hpp"

using namespace udime;
using testutil::Rng;

TEST_CASE("parse_ure: shapes and sugar") {
    Ure e = parse_ure("(a || (b | c))*");
    REQUIRE(e.kind == Ure::Kind::Repeat);
    CHECK(e.interval == Interval::star());
    REQUIRE(e.children[0].kind == Ure::Kind::Concat);
    CHECK(e.children[0].children[0].symbol == "a");
    CHECK(e.children[0].children[1].kind == Ure::Kind::Disjunction);

    CHECK(parse_ure("eps").kind == Ure::Kind::Epsilon);

    Ure d = parse_ure("d[5,inf]");
    REQUIRE(d.kind == Ure::Kind::Repeat);
    CHECK(d.interval == Interval(5, std::nullopt));
    CHECK(d.children[0].symbol == "d");

    Ure opt = parse_ure("a[2,3]?");
    CHECK(opt.interval == Interval(2, Nat{3}, true));
}

TEST_CASE("parse_ure error positions") {
    try {
        parse_ure("(a || b");
        FAIL("expected throw");
    } catch (const ParseError& e) {
        CHECK(e.kind == ParseErrorKind::UnbalancedParen);
    }
    try {
        parse_ure("a[3,2]");
        FAIL("expected throw");
    } catch (const ParseError& e) {
        CHECK(e.kind == ParseErrorKind::BadInterval);
        CHECK(e.column == 2);
    }
    CHECK_THROWS_AS(parse_ure(""), ParseError);
    CHECK_THROWS_AS(parse_ure("a ||"), ParseError);
    CHECK_THROWS_AS(parse_ure("inf"), ParseError);
}

TEST_CASE("parse_dime: accepted and rejected shapes") {
    Dime d = parse_dime("(a | (b||c?))+ || (d[3,4] | e*)");
    REQUIRE(d.clauses.size() == 2);
    CHECK(d.clauses[0].interval == Interval::plus());
    CHECK(d.clauses[0].atoms.size() == 2);
    CHECK(d.clauses[1].interval == Interval::one());
    CHECK(d.clauses[1].atoms.size() == 2);

    try {
        parse_dime("(a||b?)+ || (a|c)");
        FAIL("expected throw");
    } catch (const ParseError& e) {
        CHECK(e.kind == ParseErrorKind::DuplicateSymbol);
    }

    try {
        parse_dime("(a? || b+) | c");
        FAIL("expected throw");
    } catch (const ParseError& e) {
        CHECK(e.kind == ParseErrorKind::NotADime);
        // The error names the violated grammar restriction.
        CHECK(std::string(e.what()).find("atom") != std::string::npos);
    }
}

TEST_CASE("parse_dime: more shape violations with named restrictions") {
    try {
        parse_dime("(a* | b)+");
        FAIL("expected throw");
    } catch (const ParseError& e) {
        CHECK(e.kind == ParseErrorKind::NotADime);
        CHECK(std::string(e.what()).find("simple") != std::string::npos);
    }
    try {
        parse_dime("(a | b)[2,3]");
        FAIL("expected throw");
    } catch (const ParseError& e) {
        CHECK(e.kind == ParseErrorKind::NotADime);
        CHECK(std::string(e.what()).find("clause") != std::string::npos);
    }
    try {
        parse_dime("a || (b | eps)");
        FAIL("expected throw");
    } catch (const ParseError& e) {
        CHECK(e.kind == ParseErrorKind::NotADime);
        CHECK(std::string(e.what()).find("eps") != std::string::npos);
    }
    // A single interval atom is a valid one-clause expression.
    CHECK(parse_dime("a[2,3]").clauses.size() == 1);
}

TEST_CASE("parse_schema: examples") {
    Schema peers = parse_schema("root: peers\n"
                                "peers -> user* || vip*\n"
                                "user -> (upload || download?)[0,99]\n"
                                "vip -> (upload || download?)[100,inf]\n");
    CHECK(peers.rules.size() == 3);
    CHECK(peers.kind() == SchemaKind::Ims);
    CHECK(peers.alphabet.size() == 5);

    Schema events = parse_schema("root: events\n"
                                 "events -> event*\n"
                                 "event -> date || ((play || theater) | (movie || cinema))\n");
    CHECK(events.kind() == SchemaKind::Dims);

    Schema tiny = parse_schema("root: r\n");
    CHECK(tiny.rules.empty());
    CHECK(tiny.alphabet.size() == 1);
    CHECK(tiny.rule("r").clauses.empty());
}

TEST_CASE("parse_schema: errors") {
    CHECK_THROWS_AS(parse_schema(""), ParseError);
    try {
        parse_schema("root: r\nr -> a\nr -> b\n");
        FAIL("expected throw");
    } catch (const ParseError& e) {
        CHECK(e.kind == ParseErrorKind::DuplicateRule);
        CHECK(e.line == 3);
    }
    try {
        parse_schema("r -> a\n");
        FAIL("expected throw");
    } catch (const ParseError& e) {
        CHECK(e.kind == ParseErrorKind::UnexpectedToken);
    }
    try {
        parse_schema("root: r\nr -> (a || a?)\n");
        FAIL("expected throw");
    } catch (const ParseError& e) {
        CHECK(e.kind == ParseErrorKind::DuplicateSymbol);
        CHECK(std::string(e.what()).find("in rule for 'r'") != std::string::npos);
    }
}

TEST_CASE("parse_tree: examples and errors") {
    Tree t1 = parse_tree("<r><a><b/></a><a><b/></a></r>");
    CHECK(t1.size() == 5);
    CHECK(t1.label(t1.root) == "r");
    CHECK(t1.children(t1.root).size() == 2);

    Tree single = parse_tree("<r/>");
    CHECK(single.size() == 1);

    try {
        parse_tree("<r><a></b></r>");
        FAIL("expected throw");
    } catch (const ParseError& e) {
        CHECK(e.kind == ParseErrorKind::BadTag);
    }
    try {
        parse_tree("<r attr=\"x\"/>");
        FAIL("expected throw");
    } catch (const ParseError& e) {
        CHECK(e.kind == ParseErrorKind::UnsupportedXmlFeature);
    }
    CHECK_THROWS_AS(parse_tree("<r>text</r>"), ParseError);
    CHECK_THROWS_AS(parse_tree("<!-- c --><r/>"), ParseError);
    CHECK_THROWS_AS(parse_tree("<?xml version=\"1.0\"?><r/>"), ParseError);
    CHECK_THROWS_AS(parse_tree("<r/><r/>"), ParseError);
}

TEST_CASE("read_events: examples") {
    auto evs = read_events("<r><a/></r>");
    REQUIRE(evs.size() == 4);
    CHECK(evs[0].kind == TreeEvent::Kind::Open);
    CHECK(evs[0].symbol == "r");
    CHECK(evs[1].symbol == "a");
    CHECK(evs[2].kind == TreeEvent::Kind::Close);
    CHECK(evs[3].symbol == "r");

    auto lines = read_events("open r\nclose r\n");
    REQUIRE(lines.size() == 2);
    CHECK(lines[0].kind == TreeEvent::Kind::Open);
    CHECK(lines[1].kind == TreeEvent::Kind::Close);

    try {
        read_events("<r><a/>");
        FAIL("expected throw");
    } catch (const ParseError& e) {
        CHECK(e.kind == ParseErrorKind::BadTag);
        CHECK(std::string(e.what()).find("truncated") != std::string::npos);
    }
    CHECK_THROWS_AS(read_events("open r\nclose q\n"), ParseError);
    CHECK_THROWS_AS(read_events("   "), ParseError);
}

TEST_CASE("parse_tree equals the tree assembled from read_events") {
    Rng rng(7101);
    auto labels = testutil::letters(3);
    for (int i = 0; i < 50; ++i) {
        Tree t = testutil::random_tree(rng, labels, 10);
        std::string text = tree_to_string(t);
        CHECK(tree_isomorphic(parse_tree(text), tree_from_events(read_events(text))));
    }
}

TEST_CASE("parse_query: examples") {
    TwigQuery q0 = parse_query("r/*[*]//a");
    CHECK(q0.size() == 4);
    CHECK(q0.nodes[q0.root].label == "r");
    REQUIRE(q0.nodes[q0.root].edges.size() == 1);
    int star = q0.nodes[q0.root].edges[0].first;
    CHECK(q0.nodes[q0.root].edges[0].second == EdgeKind::Child);
    CHECK(q0.nodes[star].wildcard);
    REQUIRE(q0.nodes[star].edges.size() == 2);
    CHECK(q0.nodes[star].edges[0].second == EdgeKind::Child);
    CHECK(q0.nodes[star].edges[1].second == EdgeKind::Descendant);

    TwigQuery q = parse_query("r[a]/b//d");
    CHECK(query_canonical_key(q) == "(r/(a)/(b//(d)))");

    CHECK(parse_query("r").size() == 1);
    CHECK(query_isomorphic(parse_query("r//a"), parse_query("/r//a")));
    CHECK(query_isomorphic(parse_query("r[//c1][//c2]"),
                           parse_query("r[//c2][//c1]")));

    CHECK_THROWS_AS(parse_query(""), ParseError);
    CHECK_THROWS_AS(parse_query("r//"), ParseError);
    CHECK_THROWS_AS(parse_query("r[a"), ParseError);
    CHECK_THROWS_AS(parse_query("//r"), ParseError);
}

TEST_CASE("round trips: expressions, schemas, queries") {
    Rng rng(7102);
    auto pool = testutil::letters(6);
    for (int i = 0; i < 200; ++i) {
        // Reparsing preserves the language, and the printed form is stable
        // from the first reparse on (the raw value may use an equivalent
        // structure that normalizes once).
        Dime d = testutil::random_dime(rng, pool);
        Dime back = parse_dime(dime_to_string(d));
        CAPTURE(dime_to_string(d));
        CHECK(dime_equivalent(d, back));
        Dime again = parse_dime(dime_to_string(back));
        CHECK(dime_to_string(again) == dime_to_string(back));
        CHECK(dime_equivalent(back, again));
    }
    for (int i = 0; i < 100; ++i) {
        Schema s = testutil::random_ims(rng, testutil::letters(4));
        Schema back = parse_schema(schema_to_string(s));
        CHECK(schema_to_string(back) == schema_to_string(s));
    }
    for (int i = 0; i < 200; ++i) {
        TwigQuery q = testutil::random_query(rng, testutil::letters(3), 6);
        TwigQuery back = parse_query(query_to_string(q));
        CHECK(query_isomorphic(q, back));
    }
}

TEST_CASE("ure round trip preserves the language on sampled words") {
    Rng rng(7103);
    auto pool = testutil::letters(3);
    for (int i = 0; i < 50; ++i) {
        Dime d = testutil::random_dime(rng, pool);
        Ure e = dime_to_ure(d);
        Ure back = parse_ure(ure_to_string(e));
        CHECK(ure_to_string(back) == ure_to_string(e));
    }
}

TEST_CASE("malformed inputs throw ParseError, never crash") {
    Rng rng(7104);
    const std::string charset = "abc()[]|?*+,09<>/ eps inf:x=\"";
    auto random_text = [&]() {
        std::string out;
        int n = rng.between(0, 24);
        for (int i = 0; i < n; ++i) {
            out += charset[static_cast<std::size_t>(
                rng.between(0, static_cast<int>(charset.size()) - 1))];
        }
        return out;
    };
    for (int i = 0; i < 600; ++i) {
        std::string text = random_text();
        try { parse_ure(text); } catch (const ParseError&) {}
        try { parse_dime(text); } catch (const ParseError&) {}
        try { parse_tree(text); } catch (const ParseError&) {}
        try { parse_query(text); } catch (const ParseError&) {}
        try { read_events(text); } catch (const ParseError&) {}
        try { parse_schema("root: r\nr -> " + text + "\n"); } catch (const ParseError&) {}
    }
}

TEST_CASE("word literals") {
    Alphabet base(testutil::letters(2));
    auto [w, ab] = parse_word_literal("a:2,b:1,c:1", base);
    CHECK(ab.size() == 3);
    CHECK(w.count(ab.require("a")) == 2);
    CHECK(w.count(ab.require("c")) == 1);
    auto [eps, ab2] = parse_word_literal("eps", base);
    CHECK(eps.empty());
    auto [zero, ab3] = parse_word_literal("a:0", base);
    CHECK(zero.empty());
    CHECK_THROWS_AS(parse_word_literal("a:x", base), ParseError);
}
