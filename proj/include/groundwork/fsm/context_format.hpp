#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "groundwork/retrieval/types.hpp"

namespace groundwork::fsm {

// Evidence as shown to the model, ranked, one entry per item:
//
//   [E1] [[cite: doi:10.1/x # 0]] title: <title> | year: 2021 | similarity: 0.81
//   <chunk text, newlines flattened>
//
// The marker is exactly what a draft must copy to cite the item.
std::string format_evidence_block(std::vector<retrieval::EvidenceItem> evidence);

struct EvidenceEntry {
  std::string marker;
  std::string title;
  int year = 0;
  double similarity = 0.0;
  std::string text;
};

// Inverse of format_evidence_block for any text that embeds one; lines that
// are not part of an entry are skipped.
std::vector<EvidenceEntry> parse_evidence_block(std::string_view text);

// Distinct source titles, best-ranked first, as "- title (year)" lines.
std::string format_summaries(std::vector<retrieval::EvidenceItem> evidence, std::size_t limit);

}  // namespace groundwork::fsm
