#ifndef TACT_TRACE_HPP_
#define TACT_TRACE_HPP_

#include <optional>
#include <string>
#include <vector>

#include "tact/types.hpp"

namespace tact {

// Trace grammar
// -------------
// A trace is three tagged segments, in order, with nothing but whitespace
// outside them:
//
//   <perceive>
//   sensor=<id> hardness=<int> roughness=<int> protrusion=<int> [material=<token>]
//   ... one line per sensor ...
//   </perceive>
//   <compare>
//   hardness=<int> roughness=<int> protrusion=<int> [material=<token>]
//   </compare>
//   <conclude>
//   answer=<value>
//   </conclude>
//
// Keys are space-separated and lowercase; tags are lowercase and
// case-sensitive. The answer value is typed by the question tier.

inline constexpr int kNumTemplates = 5;

// One perceive or compare line. A nullopt field was absent, duplicated,
// malformed, or out of range -- unparsable fields are flagged, never guessed.
struct TraceLine {
  std::optional<SensorId> sensor;
  std::optional<int> hardness;
  std::optional<int> roughness;
  std::optional<int> protrusion;
  std::optional<int> material;

  std::optional<int> ordinal(Attribute a) const;
};

struct ParsedTrace {
  // True iff all six tags appear exactly once, in order, with only whitespace
  // outside the segments. Segment bodies do not affect this flag.
  bool parse_ok = false;
  // Per-segment extraction flags: a segment body is only read when its own
  // open/close tags appear exactly once and in order.
  bool perceive_extracted = false;
  bool compare_extracted = false;
  bool conclude_extracted = false;

  std::vector<TraceLine> perceive_lines;
  TraceLine compare_line;
  // Raw value following "answer=" in the conclude segment, if present.
  std::optional<std::string> conclude_raw;

  // Ordinal summary for sensor `s` from the perceive segment, on attribute `a`.
  std::optional<int> perceive_value(SensorId s, Attribute a) const;
};

// Deterministic, total parser: any byte string yields a ParsedTrace.
ParsedTrace parse_trace(const std::string& text, int k_levels);

// Tag-structure predicate on its own (the format reward is its indicator).
bool tags_well_formed(const std::string& text);

// Slot assignment consumed by the renderer.
struct TraceSlots {
  int template_id = 0;
  std::vector<TraceLine> perceive;  // all fields set, one line per sensor
  TraceLine compare;
  Answer answer;
};

// Template 0 renders a grammar-conforming trace; templates 1..4 render
// specific violations: 1 drops a closing tag, 2 duplicates the perceive
// block, 3 swaps perceive/compare order, 4 puts junk before the first tag.
// Unknown template ids are rejected.
std::string render_trace(const QAItem& item, const TraceSlots& slots);

std::string answer_to_text(const Answer& answer);

// Typed extraction of the conclude value for the item's tier. nullopt means
// unparsable: absent, out of range, or ill-typed.
std::optional<Answer> extract_answer(const ParsedTrace& parsed, const QAItem& item,
                                     int k_levels);

}  // namespace tact

#endif  // TACT_TRACE_HPP_
