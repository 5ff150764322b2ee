#include "doctest.h"

#include "testutil.hpp"
#include "udime/oracle.hpp"
#include "udime/syntax.hpp"

using namespace udime;
using testutil::Rng;

namespace {

bool member(const char* expr, const char* literal) {
    Ure e = parse_ure(expr);
    auto [w, ab] = parse_word_literal(literal, Alphabet(ure_symbols(e)));
    return oracle::ure_membership_bruteforce(w, e, ab);
}

}  // namespace

TEST_CASE("brute-force membership on general expressions") {
    CHECK(member("a+ || ((b||c?)+ | d[5,inf])", "a:2,b:2,c:1"));

    // Balanced counts under (a||(b|c))*.
    CHECK(member("(a || (b|c))*", "a:3,b:2,c:1"));
    CHECK_FALSE(member("(a || (b|c))*", "a:2,b:2,c:1"));

    // b's bounded by a's; the expression repeats the symbol a.
    CHECK_FALSE(member("(a||b?)+ || (a|c)?", "a:1,b:2"));
    CHECK(member("(a||b?)+ || (a|c)?", "a:2,b:1"));

    // Symbol repetition is exclusive oracle territory.
    CHECK(member("a || a?", "a:1"));
    CHECK(member("a || a?", "a:2"));
    CHECK_FALSE(member("a || a?", "a:3"));
}

TEST_CASE("enumerate_words") {
    Alphabet one({"a"});
    auto w1 = oracle::enumerate_words(one, 2);
    CHECK(w1.size() == 3);  // eps, a, aa

    Alphabet two(testutil::letters(2));
    CHECK(oracle::enumerate_words(two, 1).size() == 3);  // eps, a, b

    Alphabet three(testutil::letters(3));
    CHECK(oracle::enumerate_words(three, 4).size() == 35);  // C(7,3)
}

TEST_CASE("containment_bound") {
    Dime e0 = parse_dime("a+ || ((b||c?)+ | d[5,inf])");
    Dime other = parse_dime("a* || b* || c* || d[5,inf]?");
    Alphabet four(testutil::letters(4));
    CHECK(oracle::containment_bound(e0, other, four) == 28);

    Dime eps = parse_dime("eps");
    Alphabet two(testutil::letters(2));
    CHECK(oracle::containment_bound(eps, eps, two) == 4);  // |Sigma| * 2

    Dime bounded = parse_dime("(a||b?)[0,5]");
    Dime star = parse_dime("(a||b?)*");
    CHECK(oracle::containment_bound(bounded, star, two) == 14);
    // The known witness a^6 lies within the bound.
    auto [w, ab] = parse_word_literal("a:6", two);
    CHECK(w.size() <= 14);
    CHECK(oracle::ure_membership_bruteforce(w, dime_to_ure(star), two));
    CHECK_FALSE(oracle::ure_membership_bruteforce(w, dime_to_ure(bounded), two));
}

TEST_CASE("enumerate_trees counts") {
    Alphabet one({"r"});
    CHECK(oracle::enumerate_trees(one, 2).size() == 2);  // r, r(r)

    Alphabet two({"a", "r"});
    CHECK(oracle::enumerate_trees(two, 2).size() == 6);

    // Unlabeled rooted unordered trees with exactly 4 nodes: 4 shapes.
    auto trees = oracle::enumerate_trees(one, 4);
    int with4 = 0;
    for (const auto& t : trees) with4 += t.size() == 4;
    CHECK(with4 == 4);
}

TEST_CASE("naive_validate spot checks") {
    Schema peers = parse_schema("root: peers\n"
                                "peers -> user* || vip*\n"
                                "user -> (upload || download?)[0,99]\n"
                                "vip -> (upload || download?)[100,inf]\n");
    Tree ok = parse_tree("<peers><user><upload/><upload/><download/></user></peers>");
    CHECK(oracle::naive_validate(peers, ok));
    Tree bad = parse_tree("<peers><user><download/></user></peers>");
    CHECK_FALSE(oracle::naive_validate(peers, bad));
    Tree wrong_root = parse_tree("<user/>");
    CHECK_FALSE(oracle::naive_validate(peers, wrong_root));
}

TEST_CASE("valid-tree enumeration equals the filtered full sweep") {
    Rng rng(7301);
    for (int i = 0; i < 10; ++i) {
        Schema s = testutil::random_ims(rng, testutil::letters(3));
        bool exhausted = false;
        auto valid = oracle::enumerate_valid_trees(s, 5, 100000, &exhausted);
        REQUIRE_FALSE(exhausted);
        std::set<std::string> keys;
        for (const auto& t : valid) keys.insert(tree_canonical_key(t));
        REQUIRE(keys.size() == valid.size());

        std::set<std::string> expected;
        for (const auto& t : oracle::enumerate_trees(s.alphabet, 5)) {
            if (oracle::naive_validate(s, t)) expected.insert(tree_canonical_key(t));
        }
        CHECK(keys == expected);
    }
}

TEST_CASE("naive query procedures") {
    Schema nested = parse_schema("root: r\n"
                              "r -> (a? || b)[1,10] || c\n"
                              "a -> d?\n"
                              "b -> a[2,3] || c* || d+\n");
    oracle::EnumBudget budget;
    budget.max_alphabet = 5;

    auto sat = oracle::naive_query_sat(nested, parse_query("r[a]/b//d"), budget);
    CHECK(sat.verdict == oracle::BoundedVerdict::True);
    REQUIRE(sat.evidence);
    CHECK(oracle::naive_validate(nested, *sat.evidence));
    CHECK(oracle::naive_tree_matches(*sat.evidence, parse_query("r[a]/b//d")));

    Schema tiny = parse_schema("root: r\n");
    auto unsat = oracle::naive_query_sat(tiny, parse_query("r//a"), budget);
    CHECK(unsat.verdict == oracle::BoundedVerdict::False);

    auto cont = oracle::naive_query_contained(nested, parse_query("r"), parse_query("r/a"), budget);
    CHECK(cont.verdict == oracle::BoundedVerdict::False);
    REQUIRE(cont.evidence);
    CHECK(oracle::naive_validate(nested, *cont.evidence));
    CHECK_FALSE(oracle::naive_tree_matches(*cont.evidence, parse_query("r/a")));
    CHECK(cont.evidence->size() <= 8);
}

TEST_CASE("exhaustion is reported, not mistaken for an answer") {
    Schema nested = parse_schema("root: r\n"
                              "r -> (a? || b)[1,10] || c\n"
                              "a -> d?\n"
                              "b -> a[2,3] || c* || d+\n");
    oracle::EnumBudget tiny_budget;
    tiny_budget.max_alphabet = 5;
    tiny_budget.max_items = 1;
    auto r = oracle::naive_query_impl(nested, parse_query("r//d"), tiny_budget);
    CHECK(r.verdict == oracle::BoundedVerdict::Exhausted);
}

TEST_CASE("raising the repetition cap never changes membership verdicts") {
    Rng rng(7302);
    auto pool = testutil::letters(3);
    Alphabet ab(pool);
    auto words = oracle::enumerate_words(ab, 5);
    for (int i = 0; i < 40; ++i) {
        Dime d = testutil::random_dime(rng, pool);
        Ure e = dime_to_ure(d);
        for (const auto& w : words) {
            bool base = oracle::ure_membership_bruteforce(w, e, ab);
            CHECK(base == oracle::ure_membership_bruteforce(w, e, ab, 3));
        }
    }
}

TEST_CASE("derivable_words matches per-word membership") {
    Rng rng(7303);
    auto pool = testutil::letters(3);
    Alphabet ab(pool);
    for (int i = 0; i < 20; ++i) {
        Dime d = testutil::random_dime(rng, pool);
        Ure e = dime_to_ure(d);
        UnorderedWord limit;
        for (SymbolId a = 0; a < ab.size(); ++a) limit.set(a, 4);
        std::set<UnorderedWord> from_set;
        for (const auto& w : oracle::derivable_words(e, ab, limit)) from_set.insert(w);
        UnorderedWord current;
        auto rec = [&](auto&& self, SymbolId a) -> void {
            if (a == ab.size()) {
                CHECK(from_set.count(current) ==
                      (oracle::ure_membership_bruteforce(current, e, ab) ? 1u : 0u));
                return;
            }
            for (Nat k = 0; k <= 4; ++k) {
                current.set(a, k);
                self(self, a + 1);
            }
            current.set(a, 0);
        };
        rec(rec, 0);
    }
}
