// ============================================================================
// validator.cpp — Streaming tree-against-schema validation
// ============================================================================

#include "udime/validator.hpp"

#include <algorithm>
#include <sstream>

namespace udime {

// ── CompiledSchema ──────────────────────────────────────────────────────────

CompiledSchema::CompiledSchema(const Schema& s) : schema_(std::make_shared<Schema>(s)) {
    root_ = schema_->alphabet.require(schema_->root_label);
    tuples_.reserve(schema_->alphabet.size());
    for (const auto& name : schema_->alphabet.names()) {
        tuples_.push_back(characterizing_tuple(reduce(schema_->rule(name)), schema_->alphabet));
    }
}

// ── Outcome rendering ───────────────────────────────────────────────────────

const char* reject_reason_name(RejectReason r) {
    switch (r) {
        case RejectReason::MaxCountExceeded:    return "MaxCountExceeded";
        case RejectReason::ConflictViolated:    return "ConflictViolated";
        case RejectReason::CardinalityViolated: return "CardinalityViolated";
        case RejectReason::RequiredMissing:     return "RequiredMissing";
        case RejectReason::CountingViolated:    return "CountingViolated";
        case RejectReason::UnknownLabel:        return "UnknownLabel";
        case RejectReason::RootMismatch:        return "RootMismatch";
    }
    return "?";
}

std::string ValidationOutcome::to_string() const {
    if (accepted) return "ACCEPT";
    std::ostringstream out;
    const Rejection& r = *rejection;
    out << "REJECT at event #" << r.event_index << ", path ";
    if (r.node_path.empty()) out << "-";
    for (std::size_t i = 0; i < r.node_path.size(); ++i) {
        if (i) out << "/";
        out << r.node_path[i];
    }
    out << ", reason=" << reject_reason_name(r.reason) << "(" << r.detail << ")";
    return out.str();
}

// ── validate_stream ─────────────────────────────────────────────────────────

namespace {

struct Frame {
    SymbolId label;
    std::vector<Nat> counts;          // dense, one slot per alphabet symbol
    std::vector<SymbolId> seen;       // symbols with a nonzero count
};

}  // namespace

ValidationOutcome validate_stream(const CompiledSchema& cs, EventReader& events,
                                  StreamStats* stats) {
    const Alphabet& alphabet = cs.alphabet();
    std::size_t consumed = 0;
    std::size_t max_depth = 0;
    std::vector<Frame> stack;

    auto publish_stats = [&] {
        if (stats) {
            stats->events_consumed = consumed;
            stats->max_stack_depth = max_depth;
        }
    };
    auto path_of_stack = [&](std::size_t frames) {
        std::vector<std::string> path;
        for (std::size_t i = 0; i < frames; ++i) path.push_back(alphabet.name(stack[i].label));
        return path;
    };
    auto reject = [&](std::size_t frames, RejectReason reason,
                      std::string detail) -> ValidationOutcome {
        publish_stats();
        ValidationOutcome out;
        out.accepted = false;
        out.rejection = Rejection{consumed, path_of_stack(frames), reason, std::move(detail)};
        return out;
    };
    auto push_frame = [&](SymbolId sym) {
        stack.push_back(Frame{sym, std::vector<Nat>(alphabet.size(), 0), {}});
        max_depth = std::max(max_depth, stack.size());
    };

    // Root open tag.
    auto first = events.next();
    if (!first) {
        // EventReader guarantees a nonempty stream, so this is unreachable;
        // treat it as a mismatch for safety.
        return reject(0, RejectReason::RootMismatch, "empty stream");
    }
    ++consumed;
    if (first->symbol != alphabet.name(cs.root())) {
        return reject(0, RejectReason::RootMismatch,
                      "expected " + alphabet.name(cs.root()) + ", got " + first->symbol);
    }
    push_frame(cs.root());

    while (!stack.empty()) {
        auto ev = events.next();
        if (!ev) {
            // The reader reports truncation itself; defensive guard.
            throw ParseError(ParseErrorKind::BadTag, 1, 1, "truncated stream");
        }
        ++consumed;
        if (ev->kind == TreeEvent::Kind::Open) {
            auto sym = alphabet.find(ev->symbol);
            if (!sym) {
                return reject(stack.size(), RejectReason::UnknownLabel, ev->symbol);
            }
            Frame& top = stack.back();
            const CompactTuple& tuple = cs.tuple(top.label);
            Nat& count = top.counts[*sym];
            if (count == 0) top.seen.push_back(*sym);
            ++count;
            const Interval& card = tuple.card_of(*sym);
            if (card.hi && count > *card.hi) {
                return reject(stack.size(), RejectReason::MaxCountExceeded, ev->symbol);
            }
            // Conflicts are checked against the nonzero counters only.
            for (SymbolId other : top.seen) {
                if (other == *sym) continue;
                if (tuple.conflicts.count({*sym, other})) {
                    return reject(stack.size(), RejectReason::ConflictViolated,
                                  alphabet.name(std::min(*sym, other)) + "," +
                                      alphabet.name(std::max(*sym, other)));
                }
            }
            push_frame(*sym);
        } else {
            Frame& top = stack.back();
            const CompactTuple& tuple = cs.tuple(top.label);
            for (SymbolId a = 0; a < alphabet.size(); ++a) {
                if (!tuple.card_of(a).contains(top.counts[a])) {
                    return reject(stack.size(), RejectReason::CardinalityViolated,
                                  alphabet.name(a));
                }
            }
            for (const auto& set : tuple.required) {
                bool hit = false;
                for (SymbolId a : set) hit |= top.counts[a] > 0;
                if (!hit) {
                    std::string detail = "{";
                    for (std::size_t i = 0; i < set.size(); ++i) {
                        if (i) detail += ",";
                        detail += alphabet.name(set[i]);
                    }
                    detail += "}";
                    return reject(stack.size(), RejectReason::RequiredMissing, detail);
                }
            }
            for (const auto& [a, b] : tuple.counting) {
                if (top.counts[a] < top.counts[b]) {
                    return reject(stack.size(), RejectReason::CountingViolated,
                                  alphabet.name(a) + "," + alphabet.name(b));
                }
            }
            stack.pop_back();
        }
    }

    publish_stats();
    ValidationOutcome out;
    out.accepted = true;
    return out;
}

ValidationOutcome validate_events_text(const CompiledSchema& cs, std::string_view text,
                                       StreamStats* stats) {
    EventReader reader(text);
    return validate_stream(cs, reader, stats);
}

ValidationOutcome validate_tree(const CompiledSchema& cs, const Tree& t, StreamStats* stats) {
    EventReader reader(tree_to_string(t));
    return validate_stream(cs, reader, stats);
}

ValidationOutcome validate_tree(const Schema& s, const Tree& t) {
    CompiledSchema cs(s);
    return validate_tree(cs, t, nullptr);
}

}  // namespace udime
