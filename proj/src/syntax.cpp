// ============================================================================
// syntax.cpp — Parsers and serializers
// ============================================================================

#include "udime/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "udime/dime.hpp"

namespace udime {

// ── ParseError ──────────────────────────────────────────────────────────────

const char* parse_error_kind_name(ParseErrorKind k) {
    switch (k) {
        case ParseErrorKind::UnexpectedToken:       return "UnexpectedToken";
        case ParseErrorKind::UnbalancedParen:       return "UnbalancedParen";
        case ParseErrorKind::BadInterval:           return "BadInterval";
        case ParseErrorKind::DuplicateRule:         return "DuplicateRule";
        case ParseErrorKind::DuplicateSymbol:       return "DuplicateSymbol";
        case ParseErrorKind::NotADime:              return "NotADime";
        case ParseErrorKind::BadTag:                return "BadTag";
        case ParseErrorKind::UnsupportedXmlFeature: return "UnsupportedXmlFeature";
    }
    return "?";
}

static std::string format_parse_error(ParseErrorKind kind, int line, int column,
                                      const std::string& message) {
    std::ostringstream out;
    out << parse_error_kind_name(kind) << " at " << line << ":" << column << ": " << message;
    return out.str();
}

ParseError::ParseError(ParseErrorKind kind_, int line_, int column_, const std::string& message)
    : std::runtime_error(format_parse_error(kind_, line_, column_, message)),
      kind(kind_),
      line(line_),
      column(column_) {}

std::pair<int, int> line_column_at(std::string_view text, std::size_t offset) {
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

namespace {

[[noreturn]] void fail_at(std::string_view text, std::size_t offset, ParseErrorKind kind,
                          const std::string& msg) {
    auto [line, col] = line_column_at(text, offset);
    throw ParseError(kind, line, col, msg);
}

bool is_name_head(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

bool is_name_tail(char c) {
    return is_name_head(c) || (c >= '0' && c <= '9') || c == '-';
}

// ── Expression parser ───────────────────────────────────────────────────────

class ExprParser {
public:
    explicit ExprParser(std::string_view text) : text_(text) {}

    Ure parse() {
        skip_ws();
        if (eof()) fail(ParseErrorKind::UnexpectedToken, pos_, "expected expression");
        Ure e = parse_disjunction();
        skip_ws();
        if (!eof()) fail(ParseErrorKind::UnexpectedToken, pos_, "trailing input after expression");
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
    }

    [[noreturn]] void fail(ParseErrorKind kind, std::size_t at, const std::string& msg) {
        fail_at(text_, at, kind, msg);
    }

    bool try_consume(std::string_view tok) {
        if (text_.substr(pos_, tok.size()) == tok) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    Ure parse_disjunction() {
        std::size_t start = pos_;
        std::vector<Ure> parts;
        parts.push_back(parse_concat());
        while (true) {
            skip_ws();
            // '|' but not '||'
            if (!eof() && peek() == '|' && text_.substr(pos_, 2) != "||") {
                ++pos_;
                skip_ws();
                parts.push_back(parse_concat());
            } else {
                break;
            }
        }
        if (parts.size() == 1) return std::move(parts[0]);
        Ure e = Ure::disjunction(std::move(parts));
        e.src_pos = start;
        return e;
    }

    Ure parse_concat() {
        std::size_t start = pos_;
        std::vector<Ure> parts;
        parts.push_back(parse_postfix());
        while (true) {
            skip_ws();
            if (try_consume("||")) {
                skip_ws();
                parts.push_back(parse_postfix());
            } else {
                break;
            }
        }
        if (parts.size() == 1) return std::move(parts[0]);
        Ure e = Ure::concat(std::move(parts));
        e.src_pos = start;
        return e;
    }

    Ure parse_postfix() {
        std::size_t start = pos_;
        Ure e = parse_primary();
        while (true) {
            skip_ws();
            if (eof()) break;
            char c = peek();
            if (c == '?') {
                ++pos_;
                e = Ure::repeat(std::move(e), Interval::opt());
            } else if (c == '*') {
                ++pos_;
                e = Ure::repeat(std::move(e), Interval::star());
            } else if (c == '+') {
                ++pos_;
                e = Ure::repeat(std::move(e), Interval::plus());
            } else if (c == '[') {
                Interval iv = parse_interval();
                e = Ure::repeat(std::move(e), iv);
            } else {
                break;
            }
            e.src_pos = start;
        }
        return e;
    }

    Interval parse_interval() {
        std::size_t start = pos_;
        ++pos_;  // '['
        skip_ws();
        Nat lo = parse_nat();
        skip_ws();
        if (eof() || peek() != ',') fail(ParseErrorKind::BadInterval, pos_, "expected ',' in interval");
        ++pos_;
        skip_ws();
        std::optional<Nat> hi;
        if (try_consume("inf")) {
            hi = std::nullopt;
        } else {
            hi = parse_nat();
        }
        skip_ws();
        if (eof() || peek() != ']') fail(ParseErrorKind::BadInterval, pos_, "expected ']' in interval");
        ++pos_;
        if (hi && *hi < lo) fail(ParseErrorKind::BadInterval, start, "interval upper bound below lower bound");
        skip_ws();
        bool opt = false;
        if (!eof() && peek() == '?') {
            ++pos_;
            opt = true;
        }
        return Interval(lo, hi, opt);
    }

    Nat parse_nat() {
        if (eof() || !std::isdigit(static_cast<unsigned char>(peek()))) {
            fail(ParseErrorKind::BadInterval, pos_, "expected number");
        }
        Nat value = 0;
        while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
            Nat digit = static_cast<Nat>(peek() - '0');
            if (value > (UINT64_MAX - digit) / 10) {
                fail(ParseErrorKind::BadInterval, pos_, "interval endpoint too large");
            }
            value = value * 10 + digit;
            ++pos_;
        }
        return value;
    }

    Ure parse_primary() {
        skip_ws();
        if (eof()) fail(ParseErrorKind::UnexpectedToken, pos_, "expected expression");
        std::size_t start = pos_;
        char c = peek();
        if (c == '(') {
            ++pos_;
            Ure e = parse_disjunction();
            skip_ws();
            if (eof() || peek() != ')') {
                fail(ParseErrorKind::UnbalancedParen, eof() ? start : pos_, "missing ')'");
            }
            ++pos_;
            return e;
        }
        if (is_name_head(c)) {
            std::size_t name_start = pos_;
            while (!eof() && is_name_tail(peek())) ++pos_;
            std::string name(text_.substr(name_start, pos_ - name_start));
            if (name == "eps") {
                Ure e = Ure::epsilon();
                e.src_pos = start;
                return e;
            }
            if (name == "inf") {
                fail(ParseErrorKind::UnexpectedToken, name_start, "'inf' is only valid inside an interval");
            }
            Ure e = Ure::sym(std::move(name));
            e.src_pos = start;
            return e;
        }
        fail(ParseErrorKind::UnexpectedToken, pos_, std::string("unexpected character '") + c + "'");
    }
};

}  // namespace

Ure parse_ure(std::string_view text) {
    return ExprParser(text).parse();
}

Dime parse_dime(std::string_view text) {
    Ure e = parse_ure(text);
    auto result = check_dime(e);
    if (auto* d = std::get_if<Dime>(&result)) return std::move(*d);
    const auto& violations = std::get<std::vector<DimeViolation>>(result);
    const DimeViolation& v = violations.front();
    auto [line, col] = line_column_at(text, v.src_pos);
    ParseErrorKind kind = v.kind == DimeViolationKind::SymbolRepeated
                              ? ParseErrorKind::DuplicateSymbol
                              : ParseErrorKind::NotADime;
    throw ParseError(kind, line, col, v.message);
}

// ── Expression serializers ──────────────────────────────────────────────────

namespace {

// Precedence levels for parenthesization: disjunction < concat < postfix.
enum class Prec { Disj = 0, Concat = 1, Postfix = 2 };

std::string ure_to_string_prec(const Ure& e, Prec context) {
    switch (e.kind) {
        case Ure::Kind::Epsilon:
            return "eps";
        case Ure::Kind::Symbol:
            return e.symbol;
        case Ure::Kind::Disjunction: {
            std::string out;
            for (std::size_t i = 0; i < e.children.size(); ++i) {
                if (i) out += " | ";
                out += ure_to_string_prec(e.children[i], Prec::Disj);
            }
            if (context > Prec::Disj) return "(" + out + ")";
            return out;
        }
        case Ure::Kind::Concat: {
            std::string out;
            for (std::size_t i = 0; i < e.children.size(); ++i) {
                if (i) out += " || ";
                out += ure_to_string_prec(e.children[i], Prec::Concat);
            }
            if (context > Prec::Concat) return "(" + out + ")";
            return out;
        }
        case Ure::Kind::Repeat: {
            std::string inner = ure_to_string_prec(e.children[0], Prec::Postfix);
            // A nested repetition needs parentheses: `a[0,2]?` would read
            // back as one flagged interval rather than two repetitions.
            if (e.children[0].kind == Ure::Kind::Repeat) inner = "(" + inner + ")";
            std::string suffix = e.interval.suffix_string();
            if (suffix.empty()) suffix = "[1,1]";
            return inner + suffix;
        }
    }
    return "?";
}

}  // namespace

std::string ure_to_string(const Ure& e) {
    return ure_to_string_prec(e, Prec::Disj);
}

std::string dime_to_string(const Dime& d) {
    if (d.clauses.empty()) return "eps";
    auto atom_str = [](const AtomExpr& at) {
        std::string body;
        for (std::size_t i = 0; i < at.symbols.size(); ++i) {
            if (i) body += " || ";
            body += at.symbols[i].name;
            if (at.symbols[i].optional) body += "?";
        }
        if (at.symbols.empty()) body = "eps";
        std::string suffix = at.interval.suffix_string();
        if (suffix.empty()) return body;
        if (at.symbols.size() > 1) body = "(" + body + ")";
        return body + suffix;
    };
    std::string out;
    for (std::size_t ci = 0; ci < d.clauses.size(); ++ci) {
        ClauseExpr cl = d.clauses[ci];
        // A one-atom clause whose atom carries no interval of its own prints
        // as the atom with the clause interval; the two forms coincide.
        if (cl.atoms.size() == 1 && cl.atoms[0].interval == Interval::one()) {
            cl.atoms[0].interval = cl.interval;
            cl.interval = Interval::one();
        }
        if (ci) out += " || ";
        std::string body;
        for (std::size_t i = 0; i < cl.atoms.size(); ++i) {
            if (i) body += " | ";
            body += atom_str(cl.atoms[i]);
        }
        std::string suffix = cl.interval.suffix_string();
        bool needs_paren = cl.atoms.size() > 1 || !suffix.empty();
        if (needs_paren) body = "(" + body + ")";
        out += body + suffix;
    }
    return out;
}

// ── Schema parser ───────────────────────────────────────────────────────────

Schema parse_schema(std::string_view text) {
    Schema schema;
    bool seen_root = false;
    std::set<std::string> mentioned;

    std::size_t line_start = 0;
    int line_no = 0;
    while (line_start <= text.size()) {
        std::size_t line_end = text.find('\n', line_start);
        if (line_end == std::string_view::npos) line_end = text.size();
        std::string_view raw = text.substr(line_start, line_end - line_start);
        ++line_no;

        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        std::size_t begin = line.find_first_not_of(" \t\r");
        if (begin == std::string_view::npos) {
            line_start = line_end + 1;
            if (line_end == text.size()) break;
            continue;
        }
        std::size_t end = line.find_last_not_of(" \t\r") + 1;
        std::string_view content = line.substr(begin, end - begin);
        int col = static_cast<int>(begin) + 1;

        auto fail_line = [&](ParseErrorKind kind, int column, const std::string& msg) -> void {
            throw ParseError(kind, line_no, column, msg);
        };

        if (!seen_root) {
            if (content.substr(0, 5) != "root:") {
                fail_line(ParseErrorKind::UnexpectedToken, col,
                          "expected 'root: <symbol>' header before any rule");
            }
            std::string_view rest = content.substr(5);
            std::size_t s = rest.find_first_not_of(" \t");
            if (s == std::string_view::npos) {
                fail_line(ParseErrorKind::UnexpectedToken, col + 5, "missing root symbol");
            }
            std::string name(rest.substr(s));
            if (!Alphabet::valid_symbol_name(name)) {
                fail_line(ParseErrorKind::UnexpectedToken, col + 5 + static_cast<int>(s),
                          "invalid root symbol '" + name + "'");
            }
            schema.root_label = name;
            mentioned.insert(name);
            seen_root = true;
        } else {
            if (content.substr(0, 5) == "root:") {
                fail_line(ParseErrorKind::DuplicateRule, col, "duplicate 'root:' header");
            }
            std::size_t arrow = content.find("->");
            if (arrow == std::string_view::npos) {
                fail_line(ParseErrorKind::UnexpectedToken, col, "expected '<symbol> -> <expression>'");
            }
            std::string_view head_part = content.substr(0, arrow);
            std::size_t he = head_part.find_last_not_of(" \t");
            if (he == std::string_view::npos) {
                fail_line(ParseErrorKind::UnexpectedToken, col, "missing rule head");
            }
            std::size_t hb = head_part.find_first_not_of(" \t");
            std::string head(head_part.substr(hb, he - hb + 1));
            if (!Alphabet::valid_symbol_name(head)) {
                fail_line(ParseErrorKind::UnexpectedToken, col + static_cast<int>(hb),
                          "invalid rule head '" + head + "'");
            }
            if (schema.rules.count(head)) {
                fail_line(ParseErrorKind::DuplicateRule, col + static_cast<int>(hb),
                          "duplicate rule for '" + head + "'");
            }
            std::string_view body = content.substr(arrow + 2);
            std::size_t bb = body.find_first_not_of(" \t");
            if (bb == std::string_view::npos) {
                fail_line(ParseErrorKind::UnexpectedToken,
                          col + static_cast<int>(arrow) + 2, "missing rule body");
            }
            body = body.substr(bb);
            int body_col = col + static_cast<int>(arrow) + 2 + static_cast<int>(bb);
            Dime rule;
            try {
                rule = parse_dime(body);
            } catch (const ParseError& e) {
                throw ParseError(e.kind, line_no, body_col + e.column - 1,
                                 "in rule for '" + head + "': " + std::string(e.what()));
            }
            mentioned.insert(head);
            for (const auto& s : dime_symbols(rule)) mentioned.insert(s);
            schema.rules.emplace(head, std::move(rule));
        }

        if (line_end == text.size()) break;
        line_start = line_end + 1;
    }

    if (!seen_root) {
        throw ParseError(ParseErrorKind::UnexpectedToken, 1, 1, "missing 'root:' header");
    }
    schema.alphabet = Alphabet(std::vector<std::string>(mentioned.begin(), mentioned.end()));
    return schema;
}

std::string schema_to_string(const Schema& s) {
    std::ostringstream out;
    out << "root: " << s.root_label << "\n";
    for (const auto& [head, rule] : s.rules) {
        out << head << " -> " << dime_to_string(rule) << "\n";
    }
    return out.str();
}

// ── Event reader ────────────────────────────────────────────────────────────

EventReader::EventReader(std::string_view text) : text_(text) {
    std::size_t i = 0;
    while (i < text_.size() && std::isspace(static_cast<unsigned char>(text_[i]))) ++i;
    xml_mode_ = i >= text_.size() || text_[i] == '<';
}

void EventReader::fail(ParseErrorKind kind, std::size_t at, const std::string& msg) const {
    fail_at(text_, at, kind, msg);
}

std::optional<TreeEvent> EventReader::next() {
    if (pending_) {
        TreeEvent ev = *pending_;
        pending_.reset();
        return ev;
    }
    return xml_mode_ ? next_xml() : next_lines();
}

std::optional<TreeEvent> EventReader::next_xml() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ >= text_.size()) {
        if (depth_ > 0) {
            fail(ParseErrorKind::BadTag, pos_,
                 "truncated stream: " + std::to_string(depth_) + " unclosed element(s)");
        }
        if (!seen_root_) fail(ParseErrorKind::UnexpectedToken, pos_, "empty stream");
        return std::nullopt;
    }
    std::size_t at = pos_;
    char c = text_[pos_];
    if (c != '<') {
        fail(ParseErrorKind::UnsupportedXmlFeature, at, "text content is not supported");
    }
    if (seen_root_ && depth_ == 0) {
        fail(ParseErrorKind::BadTag, at, "content after the root element closed");
    }
    ++pos_;
    if (pos_ >= text_.size()) fail(ParseErrorKind::BadTag, at, "truncated tag");
    c = text_[pos_];
    if (c == '!' || c == '?') {
        fail(ParseErrorKind::UnsupportedXmlFeature, at,
             c == '?' ? "processing instructions are not supported"
                      : "comments and declarations are not supported");
    }
    bool closing = false;
    if (c == '/') {
        closing = true;
        ++pos_;
    }
    std::size_t name_start = pos_;
    while (pos_ < text_.size() && is_name_tail(text_[pos_])) ++pos_;
    std::string name(text_.substr(name_start, pos_ - name_start));
    if (name.empty() || !is_name_head(name[0])) {
        fail(ParseErrorKind::BadTag, name_start, "expected tag name");
    }
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                   text_[pos_] == '\n' || text_[pos_] == '\r')) {
        ++pos_;
    }
    if (pos_ >= text_.size()) fail(ParseErrorKind::BadTag, at, "truncated tag");
    c = text_[pos_];
    if (closing) {
        if (c != '>') fail(ParseErrorKind::BadTag, pos_, "malformed close tag");
        ++pos_;
        if (open_tags_.empty()) fail(ParseErrorKind::BadTag, at, "close tag without open");
        if (open_tags_.back() != name) {
            fail(ParseErrorKind::BadTag, name_start,
                 "mismatched close tag '" + name + "', expected '" + open_tags_.back() + "'");
        }
        open_tags_.pop_back();
        --depth_;
        return TreeEvent{TreeEvent::Kind::Close, name};
    }
    if (c == '/') {
        ++pos_;
        if (pos_ >= text_.size() || text_[pos_] != '>') {
            fail(ParseErrorKind::BadTag, pos_, "malformed self-closing tag");
        }
        ++pos_;
        // Self-closing: emit Open now, queue the matching Close.
        pending_ = TreeEvent{TreeEvent::Kind::Close, name};
        seen_root_ = true;
        return TreeEvent{TreeEvent::Kind::Open, name};
    }
    if (c == '>') {
        ++pos_;
        open_tags_.push_back(name);
        ++depth_;
        seen_root_ = true;
        return TreeEvent{TreeEvent::Kind::Open, name};
    }
    fail(ParseErrorKind::UnsupportedXmlFeature, pos_, "attributes are not supported");
}

std::optional<TreeEvent> EventReader::next_lines() {
    while (true) {
        while (pos_ < text_.size() && (text_[pos_] == '\n' || text_[pos_] == '\r' ||
                                       text_[pos_] == ' ' || text_[pos_] == '\t')) {
            ++pos_;
        }
        if (pos_ >= text_.size()) {
            if (depth_ > 0) {
                fail(ParseErrorKind::BadTag, pos_,
                     "truncated stream: " + std::to_string(depth_) + " unclosed element(s)");
            }
            if (!seen_root_) fail(ParseErrorKind::UnexpectedToken, pos_, "empty stream");
            return std::nullopt;
        }
        std::size_t at = pos_;
        std::size_t eol = text_.find('\n', pos_);
        if (eol == std::string::npos) eol = text_.size();
        std::string_view line = std::string_view(text_).substr(pos_, eol - pos_);
        pos_ = eol;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
            line.remove_suffix(1);
        }
        if (line.empty()) continue;

        bool open;
        std::string_view rest;
        if (line.substr(0, 5) == "open ") {
            open = true;
            rest = line.substr(5);
        } else if (line.substr(0, 6) == "close ") {
            open = false;
            rest = line.substr(6);
        } else {
            fail(ParseErrorKind::UnexpectedToken, at, "expected 'open <sym>' or 'close <sym>'");
        }
        std::size_t sb = rest.find_first_not_of(" \t");
        if (sb == std::string_view::npos) {
            fail(ParseErrorKind::UnexpectedToken, at, "missing symbol");
        }
        std::string name(rest.substr(sb));
        if (!is_name_head(name[0])) fail(ParseErrorKind::UnexpectedToken, at, "bad symbol name");
        if (open) {
            if (seen_root_ && depth_ == 0) {
                fail(ParseErrorKind::BadTag, at, "content after the root element closed");
            }
            open_tags_.push_back(name);
            ++depth_;
            seen_root_ = true;
            return TreeEvent{TreeEvent::Kind::Open, name};
        }
        if (open_tags_.empty()) fail(ParseErrorKind::BadTag, at, "close without open");
        if (open_tags_.back() != name) {
            fail(ParseErrorKind::BadTag, at,
                 "mismatched close '" + name + "', expected '" + open_tags_.back() + "'");
        }
        open_tags_.pop_back();
        --depth_;
        return TreeEvent{TreeEvent::Kind::Close, name};
    }
}

std::vector<TreeEvent> read_events(std::string_view text) {
    EventReader reader(text);
    std::vector<TreeEvent> out;
    while (auto ev = reader.next()) out.push_back(*ev);
    return out;
}

// ── Trees ───────────────────────────────────────────────────────────────────

Tree tree_from_events(const std::vector<TreeEvent>& events) {
    Tree t;
    std::vector<int> stack;
    for (const auto& ev : events) {
        if (ev.kind == TreeEvent::Kind::Open) {
            int id = t.add_node(ev.symbol);
            if (stack.empty()) {
                t.root = id;
            } else {
                t.add_child(stack.back(), id);
            }
            stack.push_back(id);
        } else {
            stack.pop_back();
        }
    }
    return t;
}

std::vector<TreeEvent> tree_to_events(const Tree& t) {
    std::vector<TreeEvent> out;
    // Iterative DFS with explicit close markers.
    std::vector<std::pair<int, bool>> stack{{t.root, false}};
    while (!stack.empty()) {
        auto [n, closing] = stack.back();
        stack.pop_back();
        if (closing) {
            out.push_back(TreeEvent{TreeEvent::Kind::Close, t.label(n)});
            continue;
        }
        out.push_back(TreeEvent{TreeEvent::Kind::Open, t.label(n)});
        stack.emplace_back(n, true);
        const auto& ch = t.children(n);
        for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.emplace_back(*it, false);
    }
    return out;
}

Tree parse_tree(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size() || text[i] != '<') {
        fail_at(text, i, ParseErrorKind::UnexpectedToken, "expected '<'");
    }
    return tree_from_events(read_events(text));
}

std::string tree_to_string(const Tree& t) {
    std::string out;
    std::vector<std::pair<int, bool>> stack{{t.root, false}};
    while (!stack.empty()) {
        auto [n, closing] = stack.back();
        stack.pop_back();
        if (closing) {
            out += "</" + t.label(n) + ">";
            continue;
        }
        if (t.children(n).empty()) {
            out += "<" + t.label(n) + "/>";
            continue;
        }
        out += "<" + t.label(n) + ">";
        stack.emplace_back(n, true);
        const auto& ch = t.children(n);
        for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.emplace_back(*it, false);
    }
    return out;
}

// ── Query parser ────────────────────────────────────────────────────────────

namespace {

class QueryParser {
public:
    explicit QueryParser(std::string_view text) : text_(text) {}

    TwigQuery parse() {
        skip_ws();
        if (try_consume("//")) {
            fail(ParseErrorKind::UnexpectedToken, 0, "query must start with a step, not '//'");
        }
        try_consume("/");  // optional leading '/'
        int root = parse_spine(-1, EdgeKind::Child);
        skip_ws();
        if (pos_ < text_.size()) {
            fail(ParseErrorKind::UnexpectedToken, pos_, "trailing input after query");
        }
        q_.root = root;
        return std::move(q_);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    TwigQuery q_;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool try_consume(std::string_view tok) {
        if (text_.substr(pos_, tok.size()) == tok) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(ParseErrorKind kind, std::size_t at, const std::string& msg) {
        fail_at(text_, at, kind, msg);
    }

    // Parses `step (axis step)*`, attaching the first step to `parent` with
    // edge kind `incoming` (parent < 0 means this step becomes the root).
    // Returns the id of the first step.
    int parse_spine(int parent, EdgeKind incoming) {
        int first = parse_step(parent, incoming);
        int current = first;
        while (true) {
            skip_ws();
            if (try_consume("//")) {
                current = parse_step(current, EdgeKind::Descendant);
            } else if (try_consume("/")) {
                current = parse_step(current, EdgeKind::Child);
            } else {
                break;
            }
        }
        return first;
    }

    int parse_step(int parent, EdgeKind incoming) {
        skip_ws();
        if (pos_ >= text_.size()) fail(ParseErrorKind::UnexpectedToken, pos_, "empty step");
        int node;
        if (try_consume("*")) {
            node = q_.add_node("", true);
        } else if (is_name_head(text_[pos_])) {
            std::size_t start = pos_;
            while (pos_ < text_.size() && is_name_tail(text_[pos_])) ++pos_;
            node = q_.add_node(std::string(text_.substr(start, pos_ - start)));
        } else {
            fail(ParseErrorKind::UnexpectedToken, pos_, "expected step label, '*' or '['");
        }
        if (parent >= 0) q_.add_edge(parent, node, incoming);
        // Predicates
        while (true) {
            skip_ws();
            if (!try_consume("[")) break;
            skip_ws();
            EdgeKind kind = EdgeKind::Child;
            if (try_consume("//")) {
                kind = EdgeKind::Descendant;
            } else {
                try_consume("/");
            }
            parse_spine(node, kind);
            skip_ws();
            if (!try_consume("]")) {
                fail(ParseErrorKind::UnbalancedParen, pos_, "missing ']' in predicate");
            }
        }
        return node;
    }
};

std::string query_node_to_string(const TwigQuery& q, int node) {
    const auto& n = q.nodes[node];
    std::string out = n.wildcard ? "*" : n.label;
    std::size_t k = n.edges.size();
    for (std::size_t i = 0; i + 1 < k; ++i) {
        const auto& [child, kind] = n.edges[i];
        out += "[";
        if (kind == EdgeKind::Descendant) out += "//";
        out += query_node_to_string(q, child);
        out += "]";
    }
    if (k > 0) {
        const auto& [child, kind] = n.edges[k - 1];
        out += kind == EdgeKind::Descendant ? "//" : "/";
        out += query_node_to_string(q, child);
    }
    return out;
}

}  // namespace

TwigQuery parse_query(std::string_view text) {
    return QueryParser(text).parse();
}

std::string query_to_string(const TwigQuery& q) {
    return query_node_to_string(q, q.root);
}

// ── Word literals ───────────────────────────────────────────────────────────

std::pair<UnorderedWord, Alphabet> parse_word_literal(std::string_view text,
                                                      const Alphabet& base) {
    std::map<std::string, Nat> counts;
    std::size_t i = 0;
    auto skip = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    skip();
    if (i < text.size() && text.substr(i, 3) == "eps") {
        i += 3;
        skip();
    }
    while (i < text.size()) {
        std::size_t start = i;
        while (i < text.size() && is_name_tail(text[i])) ++i;
        std::string name(text.substr(start, i - start));
        if (name.empty() || !is_name_head(name[0])) {
            fail_at(text, start, ParseErrorKind::UnexpectedToken, "expected symbol name");
        }
        skip();
        if (i >= text.size() || text[i] != ':') {
            fail_at(text, i, ParseErrorKind::UnexpectedToken, "expected ':' after symbol");
        }
        ++i;
        skip();
        if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i]))) {
            fail_at(text, i, ParseErrorKind::UnexpectedToken, "expected count");
        }
        Nat n = 0;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            n = n * 10 + static_cast<Nat>(text[i] - '0');
            ++i;
        }
        counts[name] += n;
        skip();
        if (i < text.size()) {
            if (text[i] != ',') {
                fail_at(text, i, ParseErrorKind::UnexpectedToken, "expected ','");
            }
            ++i;
            skip();
        }
    }

    std::vector<std::string> names = base.names();
    for (const auto& [name, n] : counts) names.push_back(name);
    Alphabet extended(names);
    UnorderedWord w;
    for (const auto& [name, n] : counts) w.add(extended.require(name), n);
    return {w, extended};
}

}  // namespace udime
