// ============================================================================
// core.cpp — Foundational domain types
// ============================================================================

#include "udime/core.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>
#include <stdexcept>

namespace udime {

// ── Alphabet ────────────────────────────────────────────────────────────────

Alphabet::Alphabet(std::vector<std::string> symbols) : names_(std::move(symbols)) {
    std::sort(names_.begin(), names_.end());
    names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
    for (const auto& n : names_) {
        if (!valid_symbol_name(n)) {
            throw std::invalid_argument("invalid symbol name: '" + n + "'");
        }
    }
}

bool Alphabet::valid_symbol_name(std::string_view name) {
    if (name.empty()) return false;
    auto head = [](char c) {
        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
    };
    auto tail = [&](char c) {
        return head(c) || (c >= '0' && c <= '9') || c == '-';
    };
    if (!head(name[0])) return false;
    for (std::size_t i = 1; i < name.size(); ++i) {
        if (!tail(name[i])) return false;
    }
    return name != "eps" && name != "inf";
}

std::optional<SymbolId> Alphabet::find(std::string_view name) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), name);
    if (it == names_.end() || *it != name) return std::nullopt;
    return static_cast<SymbolId>(it - names_.begin());
}

SymbolId Alphabet::require(std::string_view name) const {
    auto id = find(name);
    if (!id) throw std::out_of_range("symbol not in alphabet: '" + std::string(name) + "'");
    return *id;
}

// ── UnorderedWord ───────────────────────────────────────────────────────────

Nat UnorderedWord::count(SymbolId a) const {
    auto it = counts_.find(a);
    return it == counts_.end() ? 0 : it->second;
}

void UnorderedWord::add(SymbolId a, Nat n) {
    if (n == 0) return;
    counts_[a] += n;
}

void UnorderedWord::set(SymbolId a, Nat n) {
    if (n == 0) {
        counts_.erase(a);
    } else {
        counts_[a] = n;
    }
}

Nat UnorderedWord::size() const {
    Nat total = 0;
    for (const auto& [sym, n] : counts_) total += n;
    return total;
}

UnorderedWord word_union(const UnorderedWord& w1, const UnorderedWord& w2) {
    UnorderedWord out = w1;
    for (const auto& [sym, n] : w2.entries()) out.add(sym, n);
    return out;
}

Nat word_size(const UnorderedWord& w) { return w.size(); }

std::string word_to_string(const UnorderedWord& w, const Alphabet& alphabet) {
    if (w.empty()) return "eps";
    std::ostringstream out;
    bool first = true;
    for (const auto& [sym, n] : w.entries()) {
        if (!first) out << ",";
        first = false;
        out << alphabet.name(sym) << ":" << n;
    }
    return out.str();
}

// ── Interval ────────────────────────────────────────────────────────────────

Interval::Interval(Nat lo_, std::optional<Nat> hi_, bool opt)
    : lo(lo_), hi(hi_), optional_zero(opt) {
    if (hi && *hi < lo) throw std::invalid_argument("interval with hi < lo");
    if (optional_zero && lo <= 1) {
        lo = 0;
        optional_zero = false;
    }
    if (lo == 0) optional_zero = false;
}

bool Interval::contains(Nat i) const {
    if (optional_zero && i == 0) return true;
    return lo <= i && (!hi || i <= *hi);
}

bool Interval::contains_interval(const Interval& inner) const {
    if (inner.admits_zero() && !admits_zero()) return false;
    // Core part of inner: [max(lo,1), hi]; empty when hi == 0.
    Nat inner_lo = std::max<Nat>(inner.lo, 1);
    if (inner.hi && *inner.hi < inner_lo) return true;  // inner is {0} or empty
    Nat outer_lo = std::max<Nat>(lo, 1);
    if (hi && *hi < outer_lo) return false;  // outer core empty, inner core not
    if (inner_lo < outer_lo) return false;
    if (!inner.hi) return !hi;
    return !hi || *inner.hi <= *hi;
}

std::string Interval::suffix_string() const {
    if (*this == Interval::one()) return "";
    if (*this == Interval::opt()) return "?";
    if (*this == Interval::star()) return "*";
    if (*this == Interval::plus()) return "+";
    std::ostringstream out;
    out << "[" << lo << ",";
    if (hi) {
        out << *hi;
    } else {
        out << "inf";
    }
    out << "]";
    if (optional_zero) out << "?";
    return out.str();
}

Nat max_finite_endpoint(const Interval& iv) {
    Nat m = iv.lo;
    if (iv.hi) m = std::max(m, *iv.hi);
    return m;
}

// ── Ure ─────────────────────────────────────────────────────────────────────

Ure Ure::epsilon() {
    return Ure{};
}

Ure Ure::sym(std::string name) {
    Ure e;
    e.kind = Kind::Symbol;
    e.symbol = std::move(name);
    return e;
}

Ure Ure::disjunction(std::vector<Ure> parts) {
    Ure e;
    e.kind = Kind::Disjunction;
    e.children = std::move(parts);
    return e;
}

Ure Ure::concat(std::vector<Ure> parts) {
    Ure e;
    e.kind = Kind::Concat;
    e.children = std::move(parts);
    return e;
}

Ure Ure::repeat(Ure child, Interval iv) {
    Ure e;
    e.kind = Kind::Repeat;
    e.children.push_back(std::move(child));
    e.interval = iv;
    return e;
}

static void collect_ure_symbols(const Ure& e, std::set<std::string>& out) {
    if (e.kind == Ure::Kind::Symbol) out.insert(e.symbol);
    for (const auto& c : e.children) collect_ure_symbols(c, out);
}

std::vector<std::string> ure_symbols(const Ure& e) {
    std::set<std::string> s;
    collect_ure_symbols(e, s);
    return {s.begin(), s.end()};
}

// ── Dime ────────────────────────────────────────────────────────────────────

bool AtomExpr::all_optional() const {
    for (const auto& su : symbols) {
        if (!su.optional) return false;
    }
    return true;
}

bool AtomExpr::has_required_symbol() const {
    for (const auto& su : symbols) {
        if (!su.optional) return true;
    }
    return false;
}

std::vector<std::string> dime_symbols(const Dime& d) {
    std::set<std::string> s;
    for (const auto& cl : d.clauses) {
        for (const auto& at : cl.atoms) {
            for (const auto& su : at.symbols) s.insert(su.name);
        }
    }
    return {s.begin(), s.end()};
}

Ure dime_to_ure(const Dime& d) {
    auto atom_to_ure = [](const AtomExpr& at) {
        std::vector<Ure> parts;
        for (const auto& su : at.symbols) {
            Ure s = Ure::sym(su.name);
            if (su.optional) s = Ure::repeat(std::move(s), Interval::opt());
            parts.push_back(std::move(s));
        }
        Ure body = parts.empty()       ? Ure::epsilon()
                   : parts.size() == 1 ? std::move(parts[0])
                                       : Ure::concat(std::move(parts));
        if (at.interval == Interval::one()) return body;
        return Ure::repeat(std::move(body), at.interval);
    };

    std::vector<Ure> clause_parts;
    for (const auto& cl : d.clauses) {
        std::vector<Ure> alts;
        for (const auto& at : cl.atoms) alts.push_back(atom_to_ure(at));
        Ure body = alts.empty()       ? Ure::epsilon()
                   : alts.size() == 1 ? std::move(alts[0])
                                      : Ure::disjunction(std::move(alts));
        if (!(cl.interval == Interval::one())) {
            body = Ure::repeat(std::move(body), cl.interval);
        }
        clause_parts.push_back(std::move(body));
    }
    if (clause_parts.empty()) return Ure::epsilon();
    if (clause_parts.size() == 1) return std::move(clause_parts[0]);
    return Ure::concat(std::move(clause_parts));
}

// ── Tree ────────────────────────────────────────────────────────────────────

int Tree::add_node(std::string label) {
    nodes.push_back(Node{std::move(label), {}});
    return static_cast<int>(nodes.size()) - 1;
}

void Tree::add_child(int parent, int child) {
    nodes[parent].children.push_back(child);
}

std::size_t Tree::height() const {
    if (nodes.empty()) return 0;
    // Iterative postorder; trees may be deep.
    std::vector<std::size_t> h(nodes.size(), 1);
    std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
    while (!stack.empty()) {
        auto& [n, idx] = stack.back();
        if (idx < nodes[n].children.size()) {
            int c = nodes[n].children[idx++];
            stack.emplace_back(c, 0);
        } else {
            for (int c : nodes[n].children) h[n] = std::max(h[n], h[c] + 1);
            stack.pop_back();
        }
    }
    return h[root];
}

UnorderedWord Tree::child_word(int n, const Alphabet& alphabet) const {
    UnorderedWord w;
    for (int c : nodes[n].children) w.add(alphabet.require(nodes[c].label), 1);
    return w;
}

std::string tree_canonical_key(const Tree& t, int node) {
    if (node < 0) node = t.root;
    std::vector<std::string> parts;
    for (int c : t.children(node)) parts.push_back(tree_canonical_key(t, c));
    std::sort(parts.begin(), parts.end());
    std::string out = "(" + t.label(node);
    for (const auto& p : parts) out += p;
    out += ")";
    return out;
}

bool tree_isomorphic(const Tree& a, const Tree& b) {
    return tree_canonical_key(a) == tree_canonical_key(b);
}

static int copy_subtree_rec(const Tree& src, int node, Tree& dst) {
    int id = dst.add_node(src.label(node));
    for (int c : src.children(node)) {
        int cid = copy_subtree_rec(src, c, dst);
        dst.add_child(id, cid);
    }
    return id;
}

Tree subtree_copy(const Tree& t, int node) {
    Tree out;
    out.root = copy_subtree_rec(t, node, out);
    return out;
}

std::vector<std::string> tree_labels(const Tree& t) {
    std::set<std::string> s;
    for (const auto& n : t.nodes) s.insert(n.label);
    return {s.begin(), s.end()};
}

// ── TwigQuery ───────────────────────────────────────────────────────────────

int TwigQuery::add_node(std::string label, bool wildcard) {
    nodes.push_back(Node{std::move(label), wildcard, {}});
    return static_cast<int>(nodes.size()) - 1;
}

void TwigQuery::add_edge(int parent, int child, EdgeKind kind) {
    nodes[parent].edges.emplace_back(child, kind);
}

std::string query_canonical_key(const TwigQuery& q, int node) {
    if (node < 0) node = q.root;
    std::vector<std::string> parts;
    for (const auto& [c, kind] : q.nodes[node].edges) {
        parts.push_back((kind == EdgeKind::Child ? "/" : "//") + query_canonical_key(q, c));
    }
    std::sort(parts.begin(), parts.end());
    std::string out = "(";
    out += q.nodes[node].wildcard ? "*" : q.nodes[node].label;
    for (const auto& p : parts) out += p;
    out += ")";
    return out;
}

bool query_isomorphic(const TwigQuery& a, const TwigQuery& b) {
    return query_canonical_key(a) == query_canonical_key(b);
}

// ── Schema ──────────────────────────────────────────────────────────────────

SchemaKind Schema::kind() const {
    for (const auto& [sym, rule] : rules) {
        for (const auto& cl : rule.clauses) {
            if (cl.atoms.size() >= 2) return SchemaKind::Dims;
        }
    }
    return SchemaKind::Ims;
}

const Dime& Schema::rule(const std::string& symbol) const {
    static const Dime kEpsilonRule{};
    auto it = rules.find(symbol);
    return it == rules.end() ? kEpsilonRule : it->second;
}

}  // namespace udime
