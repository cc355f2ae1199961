#include "groundwork/citation/pipeline.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

#include "groundwork/core/text.hpp"

namespace groundwork::citation {

namespace {

std::map<EvidenceKey, const EvidenceItem*> index_evidence(const std::vector<EvidenceItem>& evidence) {
  std::map<EvidenceKey, const EvidenceItem*> out;
  for (const auto& e : evidence) out.emplace(e.key(), &e);
  return out;
}

double ratio(std::size_t num, std::size_t den) { return static_cast<double>(num) / static_cast<double>(den); }

}  // namespace

Alignment align_citations(std::string_view draft, const std::vector<EvidenceItem>& evidence) {
  Alignment a;
  a.markers = parse_markers(draft);
  a.claims = extract_claims(draft, a.markers);
  auto pool = index_evidence(evidence);

  std::vector<bool> ok(a.markers.size(), false);
  for (std::size_t i = 0; i < a.markers.size(); ++i) {
    const auto& m = a.markers[i];
    if (m.id && pool.count(EvidenceKey{*m.id, m.span_id}) > 0) {
      ok[i] = true;
      a.accepted.push_back(i);
    } else {
      a.rejected.push_back(RejectedCitation{m.raw(draft), m.begin, m.id, m.span_id});
    }
  }

  for (const auto& claim : a.claims) {
    ClaimEvidenceRow row;
    row.claim_id = claim.claim_id;
    std::set<EvidenceKey> seen;
    for (std::size_t mi : claim.markers) {
      if (!ok[mi]) continue;
      EvidenceKey key{*a.markers[mi].id, a.markers[mi].span_id};
      if (!seen.insert(key).second) continue;
      row.supports.push_back(Support{key.doc_id, key.span_id, pool.at(key)->chunk.offsets});
    }
    if (!row.supports.empty()) a.rows.push_back(std::move(row));
  }
  return a;
}

FidelityReport compute_fidelity(const Alignment& alignment, const std::vector<EvidenceItem>& evidence,
                                const RenderedTitles& rendered) {
  FidelityReport r;
  auto pool = index_evidence(evidence);
  r.rejected = alignment.rejected.size();
  r.aligned = alignment.accepted.size();
  std::size_t cited = r.rejected + r.aligned;
  r.fabricated_vacuous = cited == 0;
  r.fabricated_rate = cited == 0 ? 0.0 : ratio(r.rejected, cited);

  for (std::size_t mi : alignment.accepted) {
    const auto& m = alignment.markers[mi];
    const auto* item = pool.at(EvidenceKey{*m.id, m.span_id});
    auto it = rendered.find(*m.id);
    const std::string& shown = it != rendered.end() ? it->second : item->chunk.metadata.title;
    if (text::normalize_title(shown) == text::normalize_title(item->chunk.metadata.title)) ++r.title_matches;
  }
  r.title_vacuous = r.aligned == 0;
  r.title_match_rate = r.aligned == 0 ? 1.0 : ratio(r.title_matches, r.aligned);

  r.claims_total = alignment.claims.size();
  r.claims_supported = alignment.rows.size();
  r.coverage_vacuous = r.claims_total == 0;
  r.claim_coverage = r.claims_total == 0 ? 1.0 : ratio(r.claims_supported, r.claims_total);
  return r;
}

ClosedWorldResult enforce_closed_world(std::string_view draft, const std::vector<EvidenceItem>& evidence,
                                       const ClosedWorldPolicy& policy, const RenderedTitles& rendered) {
  ClosedWorldResult out;
  Alignment draft_alignment;
  try {
    draft_alignment = align_citations(draft, evidence);
  } catch (const MarkerParseError& e) {
    out.abstain = true;
    out.abstain_reason = std::string("malformed citation syntax: ") + e.what();
    return out;
  }
  out.draft_report = compute_fidelity(draft_alignment, evidence, rendered);
  out.rejected = draft_alignment.rejected;

  // Strip rejected markers together with one preceding blank.
  std::string text;
  std::size_t cursor = 0;
  for (const auto& rej : draft_alignment.rejected) {
    std::size_t start = rej.position;
    std::size_t cut = start;
    if (cut > cursor && (draft[cut - 1] == ' ' || draft[cut - 1] == '\t')) --cut;
    text.append(draft.substr(cursor, cut - cursor));
    cursor = start + rej.raw.size();
  }
  text.append(draft.substr(cursor));
  out.text = std::move(text);

  auto final_alignment = align_citations(out.text, evidence);
  out.final_report = compute_fidelity(final_alignment, evidence, rendered);
  out.claims = final_alignment.claims;
  out.table = final_alignment.rows;

  auto pool = index_evidence(evidence);
  std::set<EvidenceKey> seen;
  for (std::size_t mi : final_alignment.accepted) {
    const auto& m = final_alignment.markers[mi];
    EvidenceKey key{*m.id, m.span_id};
    if (seen.insert(key).second) out.citations.push_back(*pool.at(key));
  }

  const auto& fr = out.final_report;
  if (fr.claims_total > 0 && fr.claims_supported == 0) {
    out.abstain = true;
    out.abstain_reason = "no claim retains a supporting evidence span";
  } else if (!fr.coverage_vacuous && fr.claim_coverage < policy.min_claim_coverage) {
    out.abstain = true;
    out.abstain_reason = "claim coverage " + text::format_fixed(fr.claim_coverage, 3) + " below policy minimum";
  } else if (!fr.title_vacuous && fr.title_match_rate < policy.min_title_match) {
    out.abstain = true;
    out.abstain_reason = "title match rate " + text::format_fixed(fr.title_match_rate, 3) + " below policy minimum";
  }
  if (out.abstain) out.citations.clear();
  return out;
}

std::vector<EvidenceItem> trim_citations(std::vector<EvidenceItem> citations, std::size_t limit) {
  std::stable_sort(citations.begin(), citations.end(), retrieval::ranks_before);
  if (citations.size() > limit) citations.resize(limit);
  return citations;
}

std::string export_claim_table(const std::vector<ClaimEvidenceRow>& rows, const std::vector<Claim>& claims) {
  std::map<int, const Claim*> by_id;
  for (const auto& c : claims) by_id.emplace(c.claim_id, &c);
  std::ostringstream os;
  for (const auto& row : rows) {
    nlohmann::ordered_json rec;
    rec["claim_id"] = row.claim_id;
    auto it = by_id.find(row.claim_id);
    rec["claim_text"] = it == by_id.end() ? std::string() : it->second->text;
    auto supports = nlohmann::ordered_json::array();
    for (const auto& s : row.supports) {
      nlohmann::ordered_json sj;
      sj["doc_id"] = s.doc_id.to_string();
      sj["span_id"] = s.span_id;
      sj["offsets"] = {s.offsets.start, s.offsets.end};
      supports.push_back(std::move(sj));
    }
    rec["supports"] = std::move(supports);
    os << rec.dump() << '\n';
  }
  return os.str();
}

std::string render_references(const std::vector<EvidenceItem>& citations) {
  if (citations.empty()) return {};
  std::ostringstream os;
  os << "References:\n";
  std::set<CanonicalId> listed;
  int n = 0;
  for (const auto& c : citations) {
    if (!listed.insert(c.chunk.doc_id).second) continue;
    const auto& md = c.chunk.metadata;
    os << '[' << ++n << "] " << (md.title.empty() ? "(untitled)" : md.title);
    if (!md.venue.empty() || md.year > 0) {
      os << " (";
      if (!md.venue.empty()) os << md.venue;
      if (!md.venue.empty() && md.year > 0) os << ", ";
      if (md.year > 0) os << md.year;
      os << ')';
    }
    os << ' ' << c.chunk.doc_id.to_string() << '\n';
  }
  return os.str();
}

}  // namespace groundwork::citation
