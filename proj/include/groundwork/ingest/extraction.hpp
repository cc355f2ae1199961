#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groundwork/gateway/gateway.hpp"
#include "groundwork/ingest/parser.hpp"
#include "groundwork/store/metrics_store.hpp"

namespace groundwork::ingest {

using store::ExtractedMetrics;

// Value in the field's canonical unit (GHz, V*cm, dB, fJ/bit), or nullopt
// for an unknown unit. Accepts THz/GHz/MHz, V*cm/V*mm, dB, pJ/fJ/aJ with or
// without a "/bit" suffix; the middle dot, '*', '-' or a space may join V
// and its length unit.
std::optional<double> to_canonical_unit(std::string_view field, double value, std::string_view unit);

// Regular-expression pass over the full text. First match in document order
// wins per field. Captures 3-dB bandwidth, V-pi-L and insertion loss; every
// captured field is marked deterministic.
ExtractedMetrics extract_deterministic(std::string_view text);
ExtractedMetrics extract_deterministic(const StructuredDocument& doc);

inline constexpr std::size_t kExcerptTokens = 4000;

// Abstract and results-like sections (falling back to every section),
// concatenated and cut to about `tokens` tokens at a UTF-8 boundary.
std::string select_excerpt(const StructuredDocument& doc, std::size_t tokens = kExcerptTokens);

// JSON template the reasoning model fills in.
std::string metrics_schema_template();

struct ReasoningOutcome {
  ExtractedMetrics metrics;  // only fields absent from `deterministic`
  std::vector<std::string> rejected;  // field names whose values failed validation
  std::optional<std::string> warning;  // set when the gateway gave up
  gateway::CompletionUsage usage;
};

// Asks the reasoning model for the fields the deterministic pass missed.
// The reply must be a JSON object over the schema keys; each value is null,
// a number in the canonical unit, or a "<number> <unit>" string. Values for
// fields the deterministic pass already holds are dropped, invalid values
// are rejected field by field. Schema exhaustion yields an empty result
// with a warning.
ReasoningOutcome extract_reasoning(std::string_view excerpt, const ExtractedMetrics& deterministic,
                                   const gateway::Gateway& gw);

// Field-wise union: deterministic values first, reasoning fills the gaps.
ExtractedMetrics combine_passes(const ExtractedMetrics& deterministic, const ExtractedMetrics& reasoning);

}  // namespace groundwork::ingest
