// ============================================================================
// udime_main.cpp — command line interface
// ============================================================================
//
// One subcommand per library operation.  Exit codes: 0 = yes/accepted,
// 1 = no/rejected, 2 = input error, 3 = indeterminate (cap or interrupt).
// Output is plain text by default; --format json emits one JSON object per
// line so results can be piped back in for verification.
//
// ============================================================================

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "udime/core.hpp"
#include "udime/dime.hpp"
#include "udime/oracle.hpp"
#include "udime/query_analysis.hpp"
#include "udime/schema_analysis.hpp"
#include "udime/syntax.hpp"
#include "udime/validator.hpp"

namespace {

using nlohmann::json;
using namespace udime;

constexpr int kExitYes = 0;
constexpr int kExitNo = 1;
constexpr int kExitInputError = 2;
constexpr int kExitIndeterminate = 3;

std::atomic<bool> g_interrupted{false};

void handle_interrupt(int) { g_interrupted.store(true); }

std::string read_input(const std::string& path) {
    if (path == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        return buf.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct Output {
    bool json_mode = false;

    void line(const std::string& text, json object) const {
        if (json_mode) {
            std::cout << object.dump() << "\n";
        } else {
            std::cout << text << "\n";
        }
    }
};

std::size_t default_cap() {
    if (const char* env = std::getenv("UDIME_CAP")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return 1000000;
}

QueryAnalysisOptions analysis_options(std::size_t cap) {
    QueryAnalysisOptions opts;
    opts.graph_cap = cap;
    opts.cancelled = [] { return g_interrupted.load(); };
    return opts;
}

oracle::BoundedVerdict run_oracle_query(const std::string& kind, const Schema& schema,
                                        const TwigQuery& q, const TwigQuery* q2,
                                        const oracle::EnumBudget& budget, const Output& out) {
    oracle::BoundedTreeResult r;
    if (kind == "query-sat") {
        r = oracle::naive_query_sat(schema, q, budget);
    } else if (kind == "query-impl") {
        r = oracle::naive_query_impl(schema, q, budget);
    } else {
        r = oracle::naive_query_contained(schema, q, *q2, budget);
    }
    json j{{"cmd", "oracle-" + kind}};
    std::string text;
    switch (r.verdict) {
        case oracle::BoundedVerdict::True:
            text = "TRUE";
            break;
        case oracle::BoundedVerdict::False:
            text = "FALSE";
            break;
        case oracle::BoundedVerdict::Exhausted:
            text = "EXHAUSTED";
            break;
    }
    j["verdict"] = text;
    if (r.evidence) {
        j["tree"] = tree_to_string(*r.evidence);
        text += " " + tree_to_string(*r.evidence);
    }
    out.line(text, j);
    return r.verdict;
}

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, handle_interrupt);

    CLI::App app{"schema tools for unordered XML: restricted expressions, streaming "
                 "validation, and twig-query static analysis"};
    app.require_subcommand(1);
    // Let global options (--format) appear after the subcommand name.
    app.fallthrough();

    std::string format = "text";
    app.add_option("--format", format, "output format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();

    // Common option storage.
    std::string dime_text, sup_text, sub_text, word_text, schema_path, tree_path, events_path;
    std::string query_text, query2_text, ure_text;
    bool want_witness = false;
    bool want_reduced = false;
    bool dtd_mode = false;
    std::size_t cap = default_cap();
    Nat max_word = 6;
    Nat max_nodes = 8;
    std::size_t max_items = 200000;

    auto* cmd_parse = app.add_subcommand("parse-dime", "parse and echo a restricted expression");
    cmd_parse->fallthrough();
    cmd_parse->add_option("--dime", dime_text)->required();
    cmd_parse->add_flag("--reduced", want_reduced, "print the reduced normal form");

    auto* cmd_tuple = app.add_subcommand("tuple", "print the canonical characterizing tuple");
    cmd_tuple->fallthrough();
    cmd_tuple->add_option("--dime", dime_text)->required();

    auto* cmd_member = app.add_subcommand("member", "word membership in an expression");
    cmd_member->fallthrough();
    cmd_member->add_option("--dime", dime_text)->required();
    cmd_member->add_option("--word", word_text)->required();

    auto* cmd_contains = app.add_subcommand("dime-contains", "expression language containment");
    cmd_contains->fallthrough();
    cmd_contains->add_option("--sup", sup_text)->required();
    cmd_contains->add_option("--sub", sub_text)->required();

    auto* cmd_validate = app.add_subcommand("validate", "validate a tree against a schema");
    cmd_validate->fallthrough();
    cmd_validate->add_option("--schema", schema_path)->required();
    auto* tree_opt = cmd_validate->add_option("--tree", tree_path);
    auto* events_opt = cmd_validate->add_option("--events", events_path);
    tree_opt->excludes(events_opt);
    events_opt->excludes(tree_opt);

    auto* cmd_ssat = app.add_subcommand("schema-sat", "schema satisfiability");
    cmd_ssat->fallthrough();
    cmd_ssat->add_option("--schema", schema_path)->required();
    cmd_ssat->add_flag("--witness", want_witness);

    auto* cmd_scont = app.add_subcommand("schema-contains", "schema containment");
    cmd_scont->fallthrough();
    cmd_scont->add_option("--sub", sub_text, "contained schema file")->required();
    cmd_scont->add_option("--sup", sup_text, "containing schema file")->required();

    auto add_query_common = [&](CLI::App* cmd, bool two_queries) {
        cmd->fallthrough();
        cmd->add_option("--schema", schema_path)->required();
        cmd->add_option("--query", query_text)->required();
        if (two_queries) cmd->add_option("--query2", query2_text)->required();
        cmd->add_flag("--witness", want_witness);
        cmd->add_option("--cap", cap);
        cmd->add_flag("--dtd", dtd_mode, "rule bodies are disjunction-free regexes");
    };
    auto* cmd_qsat = app.add_subcommand("query-sat", "query satisfiability by schema");
    add_query_common(cmd_qsat, false);
    auto* cmd_qimpl = app.add_subcommand("query-impl", "query implication by schema");
    add_query_common(cmd_qimpl, false);
    auto* cmd_qcont = app.add_subcommand("query-contains",
                                         "query containment in the presence of a schema");
    add_query_common(cmd_qcont, true);

    auto* cmd_eval = app.add_subcommand("eval", "evaluate a query on a tree");
    cmd_eval->fallthrough();
    cmd_eval->add_option("--tree", tree_path)->required();
    cmd_eval->add_option("--query", query_text)->required();

    auto* cmd_oracle = app.add_subcommand("oracle", "brute-force reference procedures");
    cmd_oracle->fallthrough();
    cmd_oracle->require_subcommand(1);
    auto* omember = cmd_oracle->add_subcommand("member", "exact expression membership");
    omember->fallthrough();
    omember->add_option("--ure", ure_text)->required();
    omember->add_option("--word", word_text)->required();
    auto* ocontains = cmd_oracle->add_subcommand("contains", "bounded containment sweep");
    ocontains->fallthrough();
    ocontains->add_option("--sup", sup_text)->required();
    ocontains->add_option("--sub", sub_text)->required();
    ocontains->add_option("--max-word", max_word);
    auto* ovalidate = cmd_oracle->add_subcommand("validate", "exact tree validation");
    ovalidate->fallthrough();
    ovalidate->add_option("--schema", schema_path)->required();
    ovalidate->add_option("--tree", tree_path)->required();
    auto add_oracle_query = [&](const std::string& name, bool two) {
        auto* c = cmd_oracle->add_subcommand(name, "bounded sweep");
        c->fallthrough();
        c->add_option("--schema", schema_path)->required();
        c->add_option("--query", query_text)->required();
        if (two) c->add_option("--query2", query2_text)->required();
        c->add_option("--max-nodes", max_nodes);
        c->add_option("--max-items", max_items);
        return c;
    };
    auto* oqsat = add_oracle_query("query-sat", false);
    auto* oqimpl = add_oracle_query("query-impl", false);
    auto* oqcont = add_oracle_query("query-contains", true);

    CLI11_PARSE(app, argc, argv);

    Output out{format == "json"};

    try {
        if (cmd_parse->parsed()) {
            Dime d = parse_dime(dime_text);
            if (want_reduced) d = reduce(d);
            std::string text = dime_to_string(d);
            out.line(text, json{{"cmd", "parse-dime"}, {"expression", text}});
            return kExitYes;
        }

        if (cmd_tuple->parsed()) {
            Dime d = parse_dime(dime_text);
            Alphabet alphabet(dime_symbols(d));
            CompactTuple t = characterizing_tuple(reduce(d), alphabet);
            std::string text = tuple_to_string(t);
            if (out.json_mode) {
                out.line(text, json{{"cmd", "tuple"}, {"tuple", text}});
            } else {
                std::cout << text;
            }
            return kExitYes;
        }

        if (cmd_member->parsed()) {
            Dime d = parse_dime(dime_text);
            auto [word, alphabet] = parse_word_literal(word_text, Alphabet(dime_symbols(d)));
            bool yes = membership(word, d, alphabet);
            out.line(yes ? "MEMBER" : "NOT-MEMBER",
                     json{{"cmd", "member"}, {"member", yes}});
            return yes ? kExitYes : kExitNo;
        }

        if (cmd_contains->parsed()) {
            Dime sup = parse_dime(sup_text);
            Dime sub = parse_dime(sub_text);
            bool yes = dime_contains(sup, sub);
            out.line(yes ? "CONTAINED" : "NOT-CONTAINED",
                     json{{"cmd", "dime-contains"}, {"contained", yes}});
            return yes ? kExitYes : kExitNo;
        }

        if (cmd_validate->parsed()) {
            if (tree_path.empty() == events_path.empty()) {
                std::cerr << "validate: exactly one of --tree / --events is required\n";
                return kExitInputError;
            }
            Schema schema = parse_schema(read_input(schema_path));
            CompiledSchema compiled(schema);
            StreamStats stats;
            std::string text = read_input(tree_path.empty() ? events_path : tree_path);
            if (!tree_path.empty()) parse_tree(text);  // enforce the tree subset
            ValidationOutcome outcome = validate_events_text(compiled, text, &stats);
            json j{{"cmd", "validate"},
                   {"accepted", outcome.accepted},
                   {"events_consumed", stats.events_consumed},
                   {"max_stack_depth", stats.max_stack_depth}};
            if (!outcome.accepted) j["rejection"] = outcome.to_string();
            out.line(outcome.to_string(), j);
            return outcome.accepted ? kExitYes : kExitNo;
        }

        if (cmd_ssat->parsed()) {
            Schema schema = parse_schema(read_input(schema_path));
            SatResult r = schema_satisfiable(schema);
            json j{{"cmd", "schema-sat"}, {"satisfiable", r.satisfiable}};
            std::string text = r.satisfiable ? "SAT" : "UNSAT";
            if (r.satisfiable && want_witness && r.witness) {
                std::string w = tree_to_string(*r.witness);
                j["witness"] = w;
                text += " " + w;
            }
            out.line(text, j);
            return r.satisfiable ? kExitYes : kExitNo;
        }

        if (cmd_scont->parsed()) {
            Schema s1 = parse_schema(read_input(sub_text));
            Schema s2 = parse_schema(read_input(sup_text));
            SchemaContainsResult r = schema_contains(s1, s2);
            json j{{"cmd", "schema-contains"}, {"contained", r.contained}};
            std::string text = r.contained ? "CONTAINED" : "NOT-CONTAINED";
            if (!r.contained && r.differing_symbol) {
                j["symbol"] = *r.differing_symbol;
                text += " symbol=" + *r.differing_symbol;
            }
            out.line(text, j);
            return r.contained ? kExitYes : kExitNo;
        }

        if (cmd_qsat->parsed() || cmd_qimpl->parsed() || cmd_qcont->parsed()) {
            TwigQuery q = parse_query(query_text);
            QueryAnalysisOptions opts = analysis_options(cap);
            if (dtd_mode && cmd_qsat->parsed()) {
                std::cerr << "query-sat does not support --dtd (only implication and "
                             "containment are defined for disjunction-free DTDs)\n";
                return kExitInputError;
            }
            if (cmd_qsat->parsed()) {
                Schema schema = parse_schema(read_input(schema_path));
                QuerySatOutcome r = query_satisfiable(schema, q, opts);
                json j{{"cmd", "query-sat"}, {"satisfiable", r.satisfiable}};
                std::string text = r.satisfiable ? "SAT" : "UNSAT";
                if (want_witness && r.witness) {
                    std::string w = tree_to_string(*r.witness);
                    j["witness"] = w;
                    text += " " + w;
                }
                out.line(text, j);
                return r.satisfiable ? kExitYes : kExitNo;
            }
            if (cmd_qimpl->parsed()) {
                QueryImplOutcome r;
                if (dtd_mode) {
                    r = dtd_query_implied(parse_dtd_schema(read_input(schema_path)), q, opts);
                } else {
                    r = query_implied(parse_schema(read_input(schema_path)), q, opts);
                }
                json j{{"cmd", "query-impl"}, {"implied", r.implied}};
                std::string text = r.implied ? "IMPLIED" : "NOT-IMPLIED";
                if (want_witness && r.counterexample) {
                    std::string w = tree_to_string(*r.counterexample);
                    j["counterexample"] = w;
                    text += " " + w;
                }
                out.line(text, j);
                return r.implied ? kExitYes : kExitNo;
            }
            TwigQuery q2 = parse_query(query2_text);
            QueryContainOutcome r;
            if (dtd_mode) {
                r = dtd_query_contained(parse_dtd_schema(read_input(schema_path)), q, q2, opts);
            } else {
                r = query_contained(parse_schema(read_input(schema_path)), q, q2, opts);
            }
            json j{{"cmd", "query-contains"}};
            std::string text;
            int code;
            switch (r.verdict) {
                case Verdict::Yes:
                    text = "CONTAINED";
                    code = kExitYes;
                    break;
                case Verdict::No:
                    text = "NOT-CONTAINED";
                    code = kExitNo;
                    break;
                default:
                    text = "INDETERMINATE";
                    code = kExitIndeterminate;
                    break;
            }
            j["verdict"] = text;
            if (want_witness && r.counterexample) {
                std::string w = tree_to_string(*r.counterexample);
                j["counterexample"] = w;
                text += " " + w;
            }
            out.line(text, j);
            return code;
        }

        if (cmd_eval->parsed()) {
            Tree t = parse_tree(read_input(tree_path));
            TwigQuery q = parse_query(query_text);
            bool yes = eval_query(t, q).has_value();
            out.line(yes ? "MATCH" : "NO-MATCH", json{{"cmd", "eval"}, {"match", yes}});
            return yes ? kExitYes : kExitNo;
        }

        if (omember->parsed()) {
            Ure e = parse_ure(ure_text);
            auto [word, alphabet] = parse_word_literal(word_text, Alphabet(ure_symbols(e)));
            bool yes = oracle::ure_membership_bruteforce(word, e, alphabet);
            out.line(yes ? "MEMBER" : "NOT-MEMBER",
                     json{{"cmd", "oracle-member"}, {"member", yes}});
            return yes ? kExitYes : kExitNo;
        }

        if (ocontains->parsed()) {
            Dime sup = parse_dime(sup_text);
            Dime sub = parse_dime(sub_text);
            std::vector<std::string> names = dime_symbols(sup);
            for (auto& s : dime_symbols(sub)) names.push_back(s);
            Alphabet alphabet(names);
            Nat bound = std::min<Nat>(max_word, oracle::containment_bound(sup, sub, alphabet));
            Ure sup_ure = dime_to_ure(sup);
            Ure sub_ure = dime_to_ure(sub);
            for (const auto& w : oracle::enumerate_words(alphabet, bound)) {
                if (g_interrupted.load()) {
                    out.line("INDETERMINATE", json{{"cmd", "oracle-contains"},
                                                   {"verdict", "INDETERMINATE"}});
                    return kExitIndeterminate;
                }
                if (oracle::ure_membership_bruteforce(w, sub_ure, alphabet) &&
                    !oracle::ure_membership_bruteforce(w, sup_ure, alphabet)) {
                    std::string cex = word_to_string(w, alphabet);
                    out.line("NOT-CONTAINED " + cex,
                             json{{"cmd", "oracle-contains"},
                                  {"contained", false},
                                  {"counterexample", cex}});
                    return kExitNo;
                }
            }
            out.line("CONTAINED (no counterexample up to size " + std::to_string(bound) + ")",
                     json{{"cmd", "oracle-contains"}, {"contained", true}, {"bound", bound}});
            return kExitYes;
        }

        if (ovalidate->parsed()) {
            Schema schema = parse_schema(read_input(schema_path));
            Tree t = parse_tree(read_input(tree_path));
            bool yes = oracle::naive_validate(schema, t);
            out.line(yes ? "ACCEPT" : "REJECT",
                     json{{"cmd", "oracle-validate"}, {"accepted", yes}});
            return yes ? kExitYes : kExitNo;
        }

        if (oqsat->parsed() || oqimpl->parsed() || oqcont->parsed()) {
            Schema schema = parse_schema(read_input(schema_path));
            TwigQuery q = parse_query(query_text);
            std::optional<TwigQuery> q2;
            if (oqcont->parsed()) q2 = parse_query(query2_text);
            oracle::EnumBudget budget;
            budget.max_tree_nodes = max_nodes;
            budget.max_items = max_items;
            budget.max_alphabet = schema.alphabet.size();
            std::string kind = oqsat->parsed()    ? "query-sat"
                               : oqimpl->parsed() ? "query-impl"
                                                  : "query-contains";
            auto verdict = run_oracle_query(kind, schema, q, q2 ? &*q2 : nullptr, budget, out);
            switch (verdict) {
                case oracle::BoundedVerdict::True:
                    return kExitYes;
                case oracle::BoundedVerdict::False:
                    return kExitNo;
                case oracle::BoundedVerdict::Exhausted:
                    return kExitIndeterminate;
            }
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const UnsatisfiableSchema& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }

    std::cerr << "no subcommand executed\n";
    return kExitInputError;
}
