// ============================================================================
// udime/validator.hpp — Streaming tree-against-schema validation
// ============================================================================
//
// Earliest-rejection single-pass validation.  The per-symbol tuples are
// compiled once per schema; a validation run keeps one counter frame per
// open element, so space is proportional to the height of the (partial)
// tree times the square of the alphabet size.
//
// Checks per event, in Algorithm order: at an open tag the maximum
// cardinality and the conflicting pairs; at the matching close the full
// cardinality map, the required-symbol collections, and the counting
// dependencies.  The root label is checked before anything else.
//
// ============================================================================

#ifndef UDIME_VALIDATOR_HPP
#define UDIME_VALIDATOR_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "udime/core.hpp"
#include "udime/dime.hpp"
#include "udime/syntax.hpp"

namespace udime {

// ── Compiled schema ─────────────────────────────────────────────────────────
// Immutable after construction; shareable across concurrent validation runs.

class CompiledSchema {
public:
    explicit CompiledSchema(const Schema& s);

    const Schema& schema() const { return *schema_; }
    const Alphabet& alphabet() const { return schema_->alphabet; }
    SymbolId root() const { return root_; }
    const CompactTuple& tuple(SymbolId a) const { return tuples_[a]; }

private:
    // Owned copy; the compiled form must not dangle.
    std::shared_ptr<const Schema> schema_;
    SymbolId root_;
    std::vector<CompactTuple> tuples_;
};

// ── Outcomes ────────────────────────────────────────────────────────────────

enum class RejectReason {
    MaxCountExceeded,
    ConflictViolated,
    CardinalityViolated,
    RequiredMissing,
    CountingViolated,
    UnknownLabel,
    RootMismatch,
};

const char* reject_reason_name(RejectReason r);

struct Rejection {
    std::size_t event_index = 0;            // 1-based count of events consumed
    std::vector<std::string> node_path;     // labels from the root
    RejectReason reason = RejectReason::RootMismatch;
    std::string detail;
};

struct ValidationOutcome {
    bool accepted = false;
    std::optional<Rejection> rejection;

    // One-line rendering, e.g.
    // "REJECT at event #5, path dblp/article, reason=MaxCountExceeded(title)".
    std::string to_string() const;
};

struct StreamStats {
    std::size_t max_stack_depth = 0;
    std::size_t events_consumed = 0;
};

// ── Validation ──────────────────────────────────────────────────────────────

// Pulls events from the reader until acceptance, rejection, or a stream
// error (which propagates as ParseError).  On rejection no further events
// are consumed.
ValidationOutcome validate_stream(const CompiledSchema& cs, EventReader& events,
                                  StreamStats* stats = nullptr);

ValidationOutcome validate_events_text(const CompiledSchema& cs, std::string_view text,
                                       StreamStats* stats = nullptr);

ValidationOutcome validate_tree(const CompiledSchema& cs, const Tree& t,
                                StreamStats* stats = nullptr);

// Convenience entry points that compile on the fly.
ValidationOutcome validate_tree(const Schema& s, const Tree& t);

}  // namespace udime

#endif  // UDIME_VALIDATOR_HPP
