#include "doctest.h"

#include <fstream>
#include <sstream>
#include <thread>

#include "testutil.hpp"
#include "udime/oracle.hpp"
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

Schema load_schema(const std::string& name) { return parse_schema(slurp(name)); }

}  // namespace

TEST_CASE("the bibliography schema accepts its document") {
    CompiledSchema cs(load_schema("dblp.dims"));
    Tree t = parse_tree(slurp("dblp_sample.xml"));
    StreamStats stats;
    auto outcome = validate_tree(cs, t, &stats);
    CHECK(outcome.accepted);
    CHECK(stats.max_stack_depth == t.height());
}

TEST_CASE("two titles and no author: earliest rejection at the second title") {
    CompiledSchema cs(load_schema("dblp.dims"));
    StreamStats stats;
    auto outcome = validate_events_text(cs, slurp("dblp_two_titles.xml"), &stats);
    REQUIRE_FALSE(outcome.accepted);
    CHECK(outcome.rejection->reason == RejectReason::MaxCountExceeded);
    CHECK(outcome.rejection->detail == "title");
    // open dblp, open article, open title, close title, open title -> 5.
    CHECK(outcome.rejection->event_index == 5);
    CHECK(stats.events_consumed == 5);
    CHECK(outcome.to_string() ==
          "REJECT at event #5, path dblp/article, reason=MaxCountExceeded(title)");
}

TEST_CASE("conflicting siblings are rejected at the second conflicting open") {
    CompiledSchema cs(load_schema("events.dims"));
    auto outcome = validate_events_text(
        cs, "<events><event><date/><play/><cinema/></event></events>");
    REQUIRE_FALSE(outcome.accepted);
    CHECK(outcome.rejection->reason == RejectReason::ConflictViolated);
    // open events, open event, open date, close date, open play, close play,
    // open cinema -> event 7, before cinema's subtree is entered.
    CHECK(outcome.rejection->event_index == 7);
    CHECK(outcome.rejection->detail == "cinema,play");
}

TEST_CASE("peers schema: acceptance and cardinality rejection") {
    CompiledSchema cs(load_schema("peers.ims"));
    CHECK(validate_events_text(cs, "<peers><user><upload/><upload/><download/></user></peers>")
              .accepted);

    // A vip needs at least 100 uploads; 99 fail at the close tag.
    std::string vip99 = "<peers><vip>";
    for (int i = 0; i < 99; ++i) vip99 += "<upload/>";
    vip99 += "</vip></peers>";
    auto outcome = validate_events_text(cs, vip99);
    REQUIRE_FALSE(outcome.accepted);
    CHECK(outcome.rejection->reason == RejectReason::CardinalityViolated);
    CHECK(outcome.rejection->detail == "upload");
    CHECK(outcome.rejection->node_path == std::vector<std::string>{"peers", "vip"});
}

TEST_CASE("trivial schemas and error reasons") {
    CompiledSchema cs(parse_schema("root: r\n"));
    CHECK(validate_events_text(cs, "<r/>").accepted);

    auto unknown = validate_events_text(cs, "<r><zz/></r>");
    REQUIRE_FALSE(unknown.accepted);
    CHECK(unknown.rejection->reason == RejectReason::UnknownLabel);

    auto mismatch = validate_events_text(cs, "<q/>");
    REQUIRE_FALSE(mismatch.accepted);
    CHECK(mismatch.rejection->reason == RejectReason::RootMismatch);
    CHECK(mismatch.rejection->event_index == 1);

    CHECK_THROWS_AS(validate_events_text(cs, "<r>"), ParseError);
}

TEST_CASE("required-symbol rejection happens at the close tag") {
    CompiledSchema cs(load_schema("dblp.dims"));
    // A book with title and year but neither authors nor editors.
    auto outcome =
        validate_events_text(cs, "<dblp><book><title/><year/></book></dblp>");
    REQUIRE_FALSE(outcome.accepted);
    CHECK(outcome.rejection->reason == RejectReason::RequiredMissing);
    CHECK(outcome.rejection->detail == "{author,editor}");
    CHECK(outcome.rejection->event_index == 7);  // the book close tag
}

TEST_CASE("counting rejection at close") {
    CompiledSchema cs(load_schema("peers.ims"));
    auto outcome = validate_events_text(
        cs, "<peers><user><upload/><download/><download/></user></peers>");
    REQUIRE_FALSE(outcome.accepted);
    CHECK(outcome.rejection->reason == RejectReason::CountingViolated);
    CHECK(outcome.rejection->detail == "upload,download");
}

TEST_CASE("agreement with the oracle on random schemas and trees") {
    Rng rng(7401);
    for (int i = 0; i < 30; ++i) {
        Schema s = testutil::random_ims(rng, testutil::letters(3));
        CompiledSchema cs(s);
        auto labels = s.alphabet.names();
        for (int j = 0; j < 20; ++j) {
            Tree t = testutil::random_tree(rng, labels, 7);
            CHECK(validate_tree(cs, t).accepted == oracle::naive_validate(s, t));
        }
    }
}

TEST_CASE("validation is oblivious to sibling order") {
    Rng rng(7402);
    Schema dblp = load_schema("dblp.dims");
    CompiledSchema cs(dblp);
    auto report = schema_satisfiable(dblp).report;
    for (int i = 0; i < 60; ++i) {
        Tree t = testutil::random_valid_tree(rng, dblp, report, 3);
        REQUIRE(validate_tree(cs, t).accepted);
        Tree shuffled = testutil::shuffle_siblings(rng, t);
        CHECK(validate_tree(cs, shuffled).accepted);
    }
    // And permuting siblings of invalid trees never flips them to accepted.
    for (int i = 0; i < 40; ++i) {
        Tree t = testutil::random_tree(rng, dblp.alphabet.names(), 7);
        bool accepted = validate_tree(cs, t).accepted;
        Tree shuffled = testutil::shuffle_siblings(rng, t);
        CHECK(validate_tree(cs, shuffled).accepted == accepted);
    }
}

TEST_CASE("earliest rejection for max-count violations") {
    // If a node has more than max occurrences of b among its children, the
    // rejection lands exactly on the (max+1)-th open of b.
    CompiledSchema cs(parse_schema("root: r\nr -> a[0,2] || b*\n"));
    // open r, open b, close b, open a, close a, open a, close a,
    // open b, close b, open a  <- third a, event #10.
    auto outcome = validate_events_text(
        cs, "<r><b/><a/><a/><b/><a/><b/></r>");
    REQUIRE_FALSE(outcome.accepted);
    CHECK(outcome.rejection->reason == RejectReason::MaxCountExceeded);
    CHECK(outcome.rejection->detail == "a");
    CHECK(outcome.rejection->event_index == 10);
}

TEST_CASE("stack depth tracks the deepest open element") {
    CompiledSchema cs(parse_schema("root: r\nr -> r?\n"));
    StreamStats stats;
    CHECK(validate_events_text(cs, "<r><r><r/></r></r>", &stats).accepted);
    CHECK(stats.max_stack_depth == 3);
    CHECK(stats.events_consumed == 6);
}

TEST_CASE("one compiled schema serves concurrent validation runs") {
    Rng rng(7403);
    Schema dblp = load_schema("dblp.dims");
    CompiledSchema cs(dblp);
    auto report = schema_satisfiable(dblp).report;
    std::vector<Tree> trees;
    std::vector<bool> expected;
    for (int i = 0; i < 40; ++i) {
        Tree t = i % 2 == 0 ? testutil::random_valid_tree(rng, dblp, report, 3)
                            : testutil::random_tree(rng, dblp.alphabet.names(), 6);
        expected.push_back(validate_tree(cs, t).accepted);
        trees.push_back(std::move(t));
    }
    std::vector<char> got(trees.size(), 0);
    std::vector<std::thread> workers;
    for (int w = 0; w < 4; ++w) {
        workers.emplace_back([&, w] {
            for (std::size_t i = static_cast<std::size_t>(w); i < trees.size(); i += 4) {
                got[i] = validate_tree(cs, trees[i]).accepted;
            }
        });
    }
    for (auto& t : workers) t.join();
    for (std::size_t i = 0; i < trees.size(); ++i) CHECK(static_cast<bool>(got[i]) == expected[i]);
}

TEST_CASE("line-format events validate the same as the tree") {
    CompiledSchema cs(load_schema("dblp.dims"));
    std::string lines =
        "open dblp\nopen article\nopen title\nclose title\nopen year\nclose year\n"
        "open author\nclose author\nclose article\nclose dblp\n";
    CHECK(validate_events_text(cs, lines).accepted);
}
