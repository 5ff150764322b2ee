// ============================================================================
// dime.cpp — Restricted expression engine
// ============================================================================

#include "udime/dime.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <sstream>
#include <stdexcept>

namespace udime {

// ── check_dime ──────────────────────────────────────────────────────────────

namespace {

void flatten(const Ure& e, Ure::Kind kind, std::vector<const Ure*>& out) {
    if (e.kind == kind) {
        for (const auto& c : e.children) flatten(c, kind, out);
    } else {
        out.push_back(&e);
    }
}

std::vector<const Ure*> flatten_concat(const Ure& e) {
    std::vector<const Ure*> out;
    flatten(e, Ure::Kind::Concat, out);
    return out;
}

std::vector<const Ure*> flatten_disjunction(const Ure& e) {
    std::vector<const Ure*> out;
    flatten(e, Ure::Kind::Disjunction, out);
    return out;
}

class DimeChecker {
public:
    std::variant<Dime, std::vector<DimeViolation>> run(const Ure& e) {
        check_symbol_occurrences(e);
        Dime d;
        if (e.kind != Ure::Kind::Epsilon) {
            for (const Ure* item : flatten_concat(e)) {
                if (auto clause = parse_clause(*item)) d.clauses.push_back(std::move(*clause));
            }
        }
        if (!violations_.empty()) return std::move(violations_);
        return d;
    }

private:
    std::vector<DimeViolation> violations_;

    void report(DimeViolationKind kind, std::size_t pos, std::string message) {
        violations_.push_back(DimeViolation{kind, std::move(message), pos});
    }

    void check_symbol_occurrences(const Ure& e) {
        std::map<std::string, int> seen;
        walk_symbols(e, seen);
    }

    void walk_symbols(const Ure& e, std::map<std::string, int>& seen) {
        if (e.kind == Ure::Kind::Symbol) {
            if (++seen[e.symbol] == 2) {
                report(DimeViolationKind::SymbolRepeated, e.src_pos,
                       "symbol '" + e.symbol + "' occurs more than once");
            }
        }
        for (const auto& c : e.children) walk_symbols(c, seen);
    }

    static bool is_opt_interval(const Interval& iv) { return iv == Interval::opt(); }
    static bool is_one_interval(const Interval& iv) { return iv == Interval::one(); }

    // Atom: unordered concatenation of symbols, each with multiplicity 1 or ?.
    std::optional<AtomExpr> parse_atom(const Ure& e) {
        AtomExpr atom;
        for (const Ure* part : flatten_concat(e)) {
            if (part->kind == Ure::Kind::Symbol) {
                atom.symbols.push_back(SymbolUse{part->symbol, false});
            } else if (part->kind == Ure::Kind::Repeat &&
                       part->children[0].kind == Ure::Kind::Symbol &&
                       (is_opt_interval(part->interval) || is_one_interval(part->interval))) {
                atom.symbols.push_back(
                    SymbolUse{part->children[0].symbol, is_opt_interval(part->interval)});
            } else if (part->kind == Ure::Kind::Epsilon) {
                report(DimeViolationKind::EpsilonInside, part->src_pos,
                       "'eps' may only stand alone, not inside an expression");
                return std::nullopt;
            } else {
                report(DimeViolationKind::NotAnAtom, part->src_pos,
                       "not an atom: inside an atom every symbol carries multiplicity 1 or ?");
                return std::nullopt;
            }
        }
        return atom;
    }

    std::optional<AtomExpr> parse_atom_with_interval(const Ure& e) {
        if (e.kind == Ure::Kind::Repeat) {
            const Ure& inner = e.children[0];
            bool symbol_mult = inner.kind == Ure::Kind::Symbol &&
                               (is_opt_interval(e.interval) || is_one_interval(e.interval));
            if (!symbol_mult) {
                auto atom = parse_atom(inner);
                if (!atom) return std::nullopt;
                atom->interval = e.interval;
                return atom;
            }
        }
        return parse_atom(e);
    }

    static bool is_clause_interval(const Interval& iv) {
        return iv == Interval::one() || iv == Interval::opt() || iv == Interval::plus() ||
               iv == Interval::star();
    }

    std::optional<ClauseExpr> parse_clause(const Ure& item) {
        ClauseExpr clause;
        const Ure* body = &item;
        // A repetition over a disjunction is a clause interval; over another
        // repetition it is a clause interval only when it has clause shape,
        // otherwise the whole item reads as one atom with interval (e.g.
        // `a?[3,5]`).
        if (item.kind == Ure::Kind::Repeat &&
            (item.children[0].kind == Ure::Kind::Disjunction ||
             (item.children[0].kind == Ure::Kind::Repeat && is_clause_interval(item.interval)))) {
            clause.interval = item.interval;
            body = &item.children[0];
        }
        if (body->kind == Ure::Kind::Epsilon) {
            report(DimeViolationKind::EpsilonInside, body->src_pos,
                   "'eps' may only stand alone, not inside an expression");
            return std::nullopt;
        }
        if (body->kind == Ure::Kind::Disjunction) {
            for (const Ure* alt : flatten_disjunction(*body)) {
                auto atom = parse_atom_with_interval(*alt);
                if (!atom) return std::nullopt;
                clause.atoms.push_back(std::move(*atom));
            }
        } else {
            auto atom = parse_atom_with_interval(*body);
            if (!atom) return std::nullopt;
            clause.atoms.push_back(std::move(*atom));
        }

        const Interval& iv = clause.interval;
        bool is_plus_star = iv == Interval::plus() || iv == Interval::star();
        bool is_one_opt = iv == Interval::one() || iv == Interval::opt();
        if (!is_plus_star && !is_one_opt) {
            report(DimeViolationKind::BadClauseInterval, item.src_pos,
                   "a clause carries interval 1, ?, + or *; arbitrary intervals attach to atoms");
            return std::nullopt;
        }
        if (is_plus_star) {
            for (const auto& atom : clause.atoms) {
                if (!(atom.interval == Interval::one() || atom.interval == Interval::opt())) {
                    report(DimeViolationKind::NonSimpleClauseUnderRepeat, item.src_pos,
                           "a clause under + or * must be simple: atom intervals only 1 or ?");
                    return std::nullopt;
                }
            }
        }
        return clause;
    }
};

}  // namespace

std::variant<Dime, std::vector<DimeViolation>> check_dime(const Ure& e) {
    return DimeChecker().run(e);
}

bool is_ime(const Dime& d) {
    for (const auto& cl : d.clauses) {
        if (cl.atoms.size() >= 2) return false;
    }
    return true;
}

// ── reduce ──────────────────────────────────────────────────────────────────

namespace {

bool atom_defines_epsilon(const AtomExpr& atom) {
    return atom.symbols.empty() || atom.interval.admits_zero();
}

AtomExpr normalized_atom(AtomExpr atom) {
    if (atom.symbols.empty()) {
        atom.interval = Interval::zero();
    } else if (atom.all_optional()) {
        // All-optional atoms admit zero per iteration, so the floor drops.
        atom.interval = Interval(0, atom.interval.hi, false);
    }
    return atom;
}

bool atoms_equal(const AtomExpr& a, const AtomExpr& b) {
    if (!(a.interval == b.interval) || a.symbols.size() != b.symbols.size()) return false;
    for (std::size_t i = 0; i < a.symbols.size(); ++i) {
        if (a.symbols[i].name != b.symbols[i].name) return false;
        if (a.symbols[i].optional != b.symbols[i].optional) return false;
    }
    return true;
}

bool dimes_equal(const Dime& a, const Dime& b) {
    if (a.clauses.size() != b.clauses.size()) return false;
    for (std::size_t i = 0; i < a.clauses.size(); ++i) {
        const auto& ca = a.clauses[i];
        const auto& cb = b.clauses[i];
        if (!(ca.interval == cb.interval) || ca.atoms.size() != cb.atoms.size()) return false;
        for (std::size_t j = 0; j < ca.atoms.size(); ++j) {
            if (!atoms_equal(ca.atoms[j], cb.atoms[j])) return false;
        }
    }
    return true;
}

Dime reduce_pass(const Dime& d) {
    Dime out;
    for (const ClauseExpr& raw : d.clauses) {
        ClauseExpr cl;
        cl.interval = raw.interval;
        for (const AtomExpr& atom : raw.atoms) cl.atoms.push_back(normalized_atom(atom));

        if (cl.interval.is_empty_only()) continue;  // whole clause contributes epsilon

        bool some_epsilon = false;
        for (const auto& atom : cl.atoms) some_epsilon |= atom_defines_epsilon(atom);

        std::vector<ClauseExpr> emitted;
        if (cl.interval == Interval::star() ||
            (cl.interval == Interval::plus() && some_epsilon)) {
            // Distribute the repetition over the atoms; atom multiplicities
            // 1 and ? both collapse under iteration.
            for (const AtomExpr& atom : cl.atoms) {
                if (atom.symbols.empty()) continue;
                ClauseExpr single;
                AtomExpr a = atom;
                a.interval = Interval::star();
                single.atoms.push_back(std::move(a));
                emitted.push_back(std::move(single));
            }
        } else if (cl.interval == Interval::plus()) {
            if (cl.atoms.size() >= 2) {
                emitted.push_back(cl);  // type 1 as is
            } else {
                ClauseExpr single;
                AtomExpr a = cl.atoms[0];
                a.interval = Interval::plus();
                single.atoms.push_back(std::move(a));
                emitted.push_back(std::move(single));
            }
        } else if (cl.interval == Interval::opt()) {
            ClauseExpr flat;
            for (AtomExpr atom : cl.atoms) {
                atom.interval = atom.interval.with_optional();
                flat.atoms.push_back(std::move(atom));
            }
            emitted.push_back(std::move(flat));
        } else {
            // Outer interval 1.  When any atom derives the empty word, every
            // other atom becomes optional too.
            ClauseExpr flat;
            for (AtomExpr atom : cl.atoms) {
                if (some_epsilon) atom.interval = atom.interval.with_optional();
                flat.atoms.push_back(std::move(atom));
            }
            emitted.push_back(std::move(flat));
        }

        for (ClauseExpr& e : emitted) {
            auto& atoms = e.atoms;
            atoms.erase(std::remove_if(atoms.begin(), atoms.end(),
                                       [](const AtomExpr& a) {
                                           return a.symbols.empty() ||
                                                  a.interval.is_empty_only();
                                       }),
                        atoms.end());
            if (atoms.empty()) continue;
            out.clauses.push_back(std::move(e));
        }
    }
    return out;
}

}  // namespace

std::optional<ClauseType> classify_clause(const ClauseExpr& clause) {
    if (clause.interval == Interval::plus()) {
        if (clause.atoms.size() < 2) return std::nullopt;
        for (const auto& atom : clause.atoms) {
            if (!(atom.interval == Interval::one())) return std::nullopt;
            if (!atom.has_required_symbol()) return std::nullopt;
        }
        return ClauseType::Type1;
    }
    if (!(clause.interval == Interval::one())) return std::nullopt;
    bool all_zero = true;
    bool all_required_nonzero = true;
    for (const auto& atom : clause.atoms) {
        if (!atom.interval.admits_zero()) all_zero = false;
        if (atom.interval.admits_zero() || !atom.has_required_symbol()) {
            all_required_nonzero = false;
        }
    }
    if (all_zero) return ClauseType::Type3;
    if (all_required_nonzero) return ClauseType::Type2;
    return std::nullopt;
}

ClauseType clause_type(const ClauseExpr& clause) {
    auto t = classify_clause(clause);
    if (!t) throw std::logic_error("unclassifiable clause (reduction bug)");
    return *t;
}

Dime reduce(const Dime& d) {
    Dime once = reduce_pass(d);
    Dime twice = reduce_pass(once);
    if (!dimes_equal(once, twice)) {
        throw std::logic_error("reduce did not reach a fixpoint in one pass");
    }
    for (const auto& cl : once.clauses) clause_type(cl);
    return once;
}

// ── characterizing_tuple ────────────────────────────────────────────────────

CompactTuple characterizing_tuple(const Dime& d, const Alphabet& alphabet) {
    CompactTuple t;
    t.alphabet = alphabet;
    t.card.assign(alphabet.size(), Interval::zero());

    for (const ClauseExpr& cl : d.clauses) {
        ClauseType type = clause_type(cl);

        // Cardinality map.
        for (const AtomExpr& atom : cl.atoms) {
            for (const SymbolUse& su : atom.symbols) {
                SymbolId a = alphabet.require(su.name);
                if (type == ClauseType::Type1) {
                    t.card[a] = Interval::star();
                } else if (su.optional) {
                    t.card[a] = Interval(0, atom.interval.hi, false);
                } else if (cl.atoms.size() == 1) {
                    t.card[a] = atom.interval;
                } else {
                    t.card[a] = atom.interval.with_optional();
                }
            }
        }

        // Conflicts: cross-atom pairs within a clause of type 2 or 3.
        if (type != ClauseType::Type1 && cl.atoms.size() >= 2) {
            for (std::size_t i = 0; i < cl.atoms.size(); ++i) {
                for (std::size_t j = 0; j < cl.atoms.size(); ++j) {
                    if (i == j) continue;
                    for (const SymbolUse& sa : cl.atoms[i].symbols) {
                        for (const SymbolUse& sb : cl.atoms[j].symbols) {
                            t.conflicts.emplace(alphabet.require(sa.name),
                                                alphabet.require(sb.name));
                        }
                    }
                }
            }
        }

        // Counting dependencies: within an atom, a required symbol bounds
        // every other symbol of the atom.
        for (const AtomExpr& atom : cl.atoms) {
            for (const SymbolUse& sa : atom.symbols) {
                if (sa.optional) continue;
                for (const SymbolUse& sb : atom.symbols) {
                    if (sa.name == sb.name) continue;
                    t.counting.emplace(alphabet.require(sa.name), alphabet.require(sb.name));
                }
            }
        }

        // Required-symbol collections for clauses of type 1 or 2.
        if (type != ClauseType::Type3) {
            std::vector<SymbolId> phi;
            for (const AtomExpr& atom : cl.atoms) {
                std::optional<SymbolId> least;
                for (const SymbolUse& su : atom.symbols) {
                    if (su.optional) continue;
                    SymbolId id = alphabet.require(su.name);
                    if (!least || id < *least) least = id;
                }
                assert(least && "type 1/2 atoms carry a required symbol");
                phi.push_back(*least);
            }
            std::sort(phi.begin(), phi.end());
            phi.erase(std::unique(phi.begin(), phi.end()), phi.end());
            t.required.push_back(std::move(phi));
        }
    }
    std::sort(t.required.begin(), t.required.end());
    t.required.erase(std::unique(t.required.begin(), t.required.end()), t.required.end());
    return t;
}

std::set<SymbolId> impl_set(const CompactTuple& t, const std::set<SymbolId>& x) {
    std::set<SymbolId> out = x;
    for (SymbolId b : x) {
        for (SymbolId a = 0; a < t.alphabet.size(); ++a) {
            if (a == b) continue;
            if (t.counting.count({a, b}) && t.counting.count({b, a})) out.insert(a);
        }
    }
    return out;
}

namespace {

std::string card_string(const Interval& iv) {
    std::string s = iv.suffix_string();
    return s.empty() ? "1" : s;
}

}  // namespace

std::string tuple_to_string(const CompactTuple& t) {
    std::ostringstream out;
    out << "C:";
    for (const auto& [a, b] : t.conflicts) {
        out << " (" << t.alphabet.name(a) << "," << t.alphabet.name(b) << ")";
    }
    out << "\nN:";
    for (SymbolId a = 0; a < t.alphabet.size(); ++a) {
        out << " " << t.alphabet.name(a) << ":" << card_string(t.card[a]);
    }
    out << "\nP:";
    for (const auto& set : t.required) {
        out << " {";
        for (std::size_t i = 0; i < set.size(); ++i) {
            if (i) out << ",";
            out << t.alphabet.name(set[i]);
        }
        out << "}";
    }
    out << "\nK:";
    for (const auto& [a, b] : t.counting) {
        out << " (" << t.alphabet.name(a) << "," << t.alphabet.name(b) << ")";
    }
    out << "\n";
    return out.str();
}

// ── word_satisfies ──────────────────────────────────────────────────────────

const char* tuple_component_name(TupleComponent c) {
    switch (c) {
        case TupleComponent::Conflicts:   return "conflicts";
        case TupleComponent::Cardinality: return "card_map";
        case TupleComponent::Required:    return "required";
        case TupleComponent::Counting:    return "counting";
    }
    return "?";
}

SatisfyReport word_satisfies(const UnorderedWord& w, const CompactTuple& t) {
    for (const auto& [a, b] : t.conflicts) {
        if (w.count(a) > 0 && w.count(b) > 0) {
            return SatisfyReport{false, TupleComponent::Conflicts,
                                 "(" + t.alphabet.name(a) + "," + t.alphabet.name(b) + ")"};
        }
    }
    for (SymbolId a = 0; a < t.alphabet.size(); ++a) {
        if (!t.card[a].contains(w.count(a))) {
            return SatisfyReport{false, TupleComponent::Cardinality,
                                 t.alphabet.name(a) + ":" + std::to_string(w.count(a)) +
                                     " not in " + card_string(t.card[a])};
        }
    }
    for (const auto& set : t.required) {
        bool hit = false;
        for (SymbolId a : set) hit |= w.count(a) > 0;
        if (!hit) {
            std::string detail = "{";
            for (std::size_t i = 0; i < set.size(); ++i) {
                if (i) detail += ",";
                detail += t.alphabet.name(set[i]);
            }
            detail += "}";
            return SatisfyReport{false, TupleComponent::Required, detail};
        }
    }
    for (const auto& [a, b] : t.counting) {
        if (w.count(a) < w.count(b)) {
            return SatisfyReport{false, TupleComponent::Counting,
                                 "(" + t.alphabet.name(a) + "," + t.alphabet.name(b) + ")"};
        }
    }
    return SatisfyReport{};
}

// ── tuple_subsumes ──────────────────────────────────────────────────────────

namespace {

// The stored conflict and counting sets are the syntactic ones; a pair can
// also hold vacuously through the cardinality map (a symbol that never
// occurs conflicts with everything, and its count is dominated by
// everything).  Subsumption must compare the definitional sets, so these
// two predicates close the stored sets over the cardinality map.

bool never_occurs(const CompactTuple& t, SymbolId a) {
    return t.card[a].hi && *t.card[a].hi == 0;
}

bool conflict_holds(const CompactTuple& t, SymbolId x, SymbolId y) {
    if (t.conflicts.count({x, y})) return true;
    return never_occurs(t, x) || never_occurs(t, y);
}

// Every word carries at least as many x as y.  Outside a shared atom the
// two counts vary independently, so the dependency holds exactly when the
// least possible x count dominates the greatest possible y count.
bool counting_holds(const CompactTuple& t, SymbolId x, SymbolId y) {
    if (x == y) return true;
    if (t.counting.count({x, y})) return true;
    const Interval& cy = t.card[y];
    if (!cy.hi) return false;
    return t.card[x].min_count() >= *cy.hi;
}

std::set<SymbolId> impl_definitional(const CompactTuple& t, const std::vector<SymbolId>& x) {
    std::set<SymbolId> out(x.begin(), x.end());
    for (SymbolId b : x) {
        for (SymbolId a = 0; a < t.alphabet.size(); ++a) {
            if (a == b) continue;
            if (counting_holds(t, a, b) && counting_holds(t, b, a)) out.insert(a);
        }
    }
    return out;
}

}  // namespace

bool tuple_subsumes(const CompactTuple& sub, const CompactTuple& sup) {
    if (!(sub.alphabet == sup.alphabet)) {
        throw std::invalid_argument("tuple_subsumes requires a shared alphabet");
    }
    const std::size_t n = sup.alphabet.size();
    for (SymbolId a = 0; a < n; ++a) {
        if (!sup.card[a].contains_interval(sub.card[a])) return false;
    }
    for (SymbolId x = 0; x < n; ++x) {
        for (SymbolId y = 0; y < n; ++y) {
            if (x == y) continue;
            if (conflict_holds(sup, x, y) && !conflict_holds(sub, x, y)) return false;
            if (counting_holds(sup, x, y) && !counting_holds(sub, x, y)) return false;
        }
    }
    for (const auto& x : sup.required) {
        std::set<SymbolId> implied = impl_definitional(sub, x);
        bool found = false;
        for (const auto& y : sub.required) {
            bool subset = true;
            for (SymbolId s : y) subset &= implied.count(s) != 0;
            if (subset) {
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

// ── Whole-expression operations ─────────────────────────────────────────────

bool membership(const UnorderedWord& w, const Dime& d, const Alphabet& alphabet) {
    CompactTuple t = characterizing_tuple(reduce(d), alphabet);
    return word_satisfies(w, t).ok;
}

namespace {

Alphabet joint_alphabet(const Dime& a, const Dime& b) {
    std::vector<std::string> names = dime_symbols(a);
    for (auto& s : dime_symbols(b)) names.push_back(s);
    return Alphabet(names);
}

}  // namespace

bool dime_contains(const Dime& sup, const Dime& sub) {
    Alphabet alphabet = joint_alphabet(sup, sub);
    CompactTuple tsup = characterizing_tuple(reduce(sup), alphabet);
    CompactTuple tsub = characterizing_tuple(reduce(sub), alphabet);
    return tuple_subsumes(tsub, tsup);
}

bool dime_equivalent(const Dime& e1, const Dime& e2) {
    Alphabet alphabet = joint_alphabet(e1, e2);
    CompactTuple t1 = characterizing_tuple(reduce(e1), alphabet);
    CompactTuple t2 = characterizing_tuple(reduce(e2), alphabet);
    return tuple_subsumes(t1, t2) && tuple_subsumes(t2, t1);
}

// ── minimal_word ────────────────────────────────────────────────────────────

namespace {

constexpr Nat kCostInf = UINT64_MAX;

Nat sat_add(Nat a, Nat b) { return (a > kCostInf - b) ? kCostInf : a + b; }

Nat sat_mul(Nat a, Nat b) {
    if (a == 0 || b == 0) return 0;
    if (a > kCostInf / b) return kCostInf;
    return a * b;
}

struct AtomPlan {
    bool usable = false;
    Nat iterations = 0;          // instantiation count when chosen
    Nat per_iteration_cost = 0;  // sum of required-symbol costs
    SymbolId least_required = 0;
};

AtomPlan plan_atom(const AtomExpr& atom, const Alphabet& alphabet, const SymbolCostFn& cost) {
    AtomPlan plan;
    plan.usable = true;
    plan.least_required = static_cast<SymbolId>(alphabet.size());
    for (const SymbolUse& su : atom.symbols) {
        if (su.optional) continue;
        SymbolId id = alphabet.require(su.name);
        auto c = cost(id);
        if (!c) {
            plan.usable = false;
            return plan;
        }
        plan.per_iteration_cost = sat_add(plan.per_iteration_cost, *c);
        plan.least_required = std::min(plan.least_required, id);
    }
    return plan;
}

// Smallest positive iteration count admitted by the interval; nullopt when
// the interval is {0} only.
std::optional<Nat> min_positive(const Interval& iv) {
    if (iv.hi && *iv.hi == 0) return std::nullopt;
    return std::max<Nat>(iv.lo, 1);
}

void add_instantiation(UnorderedWord& w, const AtomExpr& atom, const Alphabet& alphabet,
                       Nat iterations, const std::set<SymbolId>& needed) {
    for (const SymbolUse& su : atom.symbols) {
        SymbolId id = alphabet.require(su.name);
        if (!su.optional) {
            w.add(id, iterations);
        } else if (needed.count(id)) {
            w.add(id, 1);
        }
    }
}

}  // namespace

std::optional<UnorderedWord> minimal_word(const Dime& reduced, const Alphabet& alphabet,
                                          const SymbolCostFn& cost,
                                          const std::set<SymbolId>& must) {
    UnorderedWord w;
    std::set<SymbolId> covered;

    for (const ClauseExpr& cl : reduced.clauses) {
        ClauseType type = clause_type(cl);

        // Which of the requested symbols live in this clause, and where.
        std::set<SymbolId> needed;
        std::vector<std::set<SymbolId>> needed_by_atom(cl.atoms.size());
        for (std::size_t i = 0; i < cl.atoms.size(); ++i) {
            for (const SymbolUse& su : cl.atoms[i].symbols) {
                SymbolId id = alphabet.require(su.name);
                if (must.count(id)) {
                    needed.insert(id);
                    needed_by_atom[i].insert(id);
                }
            }
        }
        for (SymbolId id : needed) covered.insert(id);

        if (type == ClauseType::Type1) {
            bool instantiated = false;
            for (std::size_t i = 0; i < cl.atoms.size(); ++i) {
                if (needed_by_atom[i].empty()) continue;
                AtomPlan plan = plan_atom(cl.atoms[i], alphabet, cost);
                if (!plan.usable) return std::nullopt;
                add_instantiation(w, cl.atoms[i], alphabet, 1, needed_by_atom[i]);
                instantiated = true;
            }
            if (!instantiated) {
                // The + demands at least one instantiation: pick the cheapest atom.
                std::optional<std::size_t> best;
                Nat best_cost = kCostInf;
                SymbolId best_sym = 0;
                for (std::size_t i = 0; i < cl.atoms.size(); ++i) {
                    AtomPlan plan = plan_atom(cl.atoms[i], alphabet, cost);
                    if (!plan.usable) continue;
                    if (!best || plan.per_iteration_cost < best_cost ||
                        (plan.per_iteration_cost == best_cost && plan.least_required < best_sym)) {
                        best = i;
                        best_cost = plan.per_iteration_cost;
                        best_sym = plan.least_required;
                    }
                }
                if (!best) return std::nullopt;
                add_instantiation(w, cl.atoms[*best], alphabet, 1, {});
            }
        } else {
            // Types 2 and 3: a word uses exactly one atom of the clause.
            std::optional<std::size_t> chosen;
            for (std::size_t i = 0; i < cl.atoms.size(); ++i) {
                if (needed_by_atom[i].empty()) continue;
                if (chosen) return std::nullopt;  // demanded symbols conflict
                chosen = i;
            }
            if (chosen) {
                const AtomExpr& atom = cl.atoms[*chosen];
                AtomPlan plan = plan_atom(atom, alphabet, cost);
                if (!plan.usable) return std::nullopt;
                auto iters = min_positive(atom.interval);
                if (!iters) return std::nullopt;
                add_instantiation(w, atom, alphabet, *iters, needed_by_atom[*chosen]);
            } else if (type == ClauseType::Type2) {
                std::optional<std::size_t> best;
                Nat best_cost = kCostInf;
                SymbolId best_sym = 0;
                for (std::size_t i = 0; i < cl.atoms.size(); ++i) {
                    AtomPlan plan = plan_atom(cl.atoms[i], alphabet, cost);
                    if (!plan.usable) continue;
                    auto iters = min_positive(cl.atoms[i].interval);
                    if (!iters) continue;
                    Nat total = sat_mul(*iters, plan.per_iteration_cost);
                    if (!best || total < best_cost ||
                        (total == best_cost && plan.least_required < best_sym)) {
                        best = i;
                        best_cost = total;
                        best_sym = plan.least_required;
                    }
                }
                if (!best) return std::nullopt;
                add_instantiation(w, cl.atoms[*best], alphabet,
                                  *min_positive(cl.atoms[*best].interval), {});
            }
            // Type 3 with nothing demanded contributes the empty word.
        }
    }

    for (SymbolId id : must) {
        if (!covered.count(id)) return std::nullopt;
    }
    return w;
}

}  // namespace udime
