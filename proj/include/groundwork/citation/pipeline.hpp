#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groundwork/citation/claims.hpp"
#include "groundwork/citation/markers.hpp"
#include "groundwork/retrieval/types.hpp"

namespace groundwork::citation {

using retrieval::EvidenceItem;
using retrieval::EvidenceKey;

struct Support {
  CanonicalId doc_id;
  int span_id = 0;
  retrieval::CharSpan offsets;
  bool operator==(const Support&) const = default;
};

struct ClaimEvidenceRow {
  int claim_id = 0;
  std::vector<Support> supports;
  bool operator==(const ClaimEvidenceRow&) const = default;
};

struct RejectedCitation {
  std::string raw;          // marker text as written
  std::size_t position = 0; // byte offset in the draft
  std::optional<CanonicalId> id;
  int span_id = 0;
};

struct Alignment {
  std::vector<Marker> markers;
  std::vector<Claim> claims;
  std::vector<ClaimEvidenceRow> rows;   // claims with >= 1 evidence-resident support
  std::vector<std::size_t> accepted;    // marker indices resolving into evidence
  std::vector<RejectedCitation> rejected;
};

// Resolves every marker against the evidence pool by (doc_id, span_id).
// Throws MarkerParseError on malformed marker syntax.
Alignment align_citations(std::string_view draft, const std::vector<EvidenceItem>& evidence);

struct FidelityReport {
  double fabricated_rate = 0.0;
  double title_match_rate = 1.0;
  double claim_coverage = 1.0;

  std::size_t rejected = 0;
  std::size_t aligned = 0;
  std::size_t title_matches = 0;
  std::size_t claims_total = 0;
  std::size_t claims_supported = 0;

  bool fabricated_vacuous = false;  // no citations at all
  bool title_vacuous = false;       // no aligned citations
  bool coverage_vacuous = false;    // no claims
};

// Titles a draft rendered for the sources it cites, keyed by canonical id.
// A cited source without an entry is rendered from evidence metadata.
using RenderedTitles = std::map<CanonicalId, std::string>;

FidelityReport compute_fidelity(const Alignment& alignment, const std::vector<EvidenceItem>& evidence,
                                const RenderedTitles& rendered = {});

struct ClosedWorldPolicy {
  // Abstain when fewer than this fraction of claims keep a support. A draft
  // whose claims all lost their support always abstains.
  double min_claim_coverage = 0.0;
  double min_title_match = 1.0;
};

struct ClosedWorldResult {
  bool abstain = false;
  std::string abstain_reason;
  std::string text;  // draft with out-of-evidence markers removed
  std::vector<EvidenceItem> citations;  // unique, first-appearance order
  std::vector<Claim> claims;            // of the final text
  std::vector<ClaimEvidenceRow> table;  // of the final text
  std::vector<RejectedCitation> rejected;
  FidelityReport draft_report;
  FidelityReport final_report;
};

// Pure and deterministic. Never throws on malformed drafts: a marker syntax
// error is reported as an abstention.
ClosedWorldResult enforce_closed_world(std::string_view draft, const std::vector<EvidenceItem>& evidence,
                                       const ClosedWorldPolicy& policy = {}, const RenderedTitles& rendered = {});

// Keeps the first `limit` items after ranking by similarity descending with
// (doc_id, span_id) as tie-break.
std::vector<EvidenceItem> trim_citations(std::vector<EvidenceItem> citations, std::size_t limit = 3);

// One JSON object per row, newline-delimited, field order
// claim_id, claim_text, supports[{doc_id, span_id, offsets}].
std::string export_claim_table(const std::vector<ClaimEvidenceRow>& rows, const std::vector<Claim>& claims);

// "References" block for a final answer, titles from evidence metadata.
std::string render_references(const std::vector<EvidenceItem>& citations);

}  // namespace groundwork::citation
