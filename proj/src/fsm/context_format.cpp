#include "groundwork/fsm/context_format.hpp"

#include <algorithm>
#include <regex>
#include <set>
#include <sstream>

#include "groundwork/citation/markers.hpp"
#include "groundwork/core/text.hpp"

namespace groundwork::fsm {

namespace {

std::string one_line(std::string_view s) {
  std::string out(s);
  std::replace(out.begin(), out.end(), '\n', ' ');
  std::replace(out.begin(), out.end(), '\r', ' ');
  return out;
}

}  // namespace

std::string format_evidence_block(std::vector<retrieval::EvidenceItem> evidence) {
  if (evidence.empty()) return "(no evidence retrieved)\n";
  std::stable_sort(evidence.begin(), evidence.end(), retrieval::ranks_before);
  std::ostringstream os;
  int n = 0;
  for (const auto& e : evidence) {
    const auto& md = e.chunk.metadata;
    os << "[E" << ++n << "] " << citation::format_marker(e.chunk.doc_id, e.chunk.span_id)
       << " title: " << one_line(md.title) << " | year: " << md.year
       << " | similarity: " << text::format_fixed(e.similarity, 2) << '\n'
       << one_line(e.chunk.text) << '\n';
  }
  return os.str();
}

std::vector<EvidenceEntry> parse_evidence_block(std::string_view text) {
  static const std::regex kHeader(
      R"(^\[E\d+\] (\[\[cite: [^\]]*\]\]) title: (.*) \| year: (-?\d+) \| similarity: (-?[0-9.]+)$)");
  std::vector<EvidenceEntry> out;
  std::istringstream is{std::string(text)};
  std::string line;
  bool want_text = false;
  while (std::getline(is, line)) {
    std::smatch m;
    if (std::regex_match(line, m, kHeader)) {
      EvidenceEntry e;
      e.marker = m[1].str();
      e.title = m[2].str();
      e.year = std::stoi(m[3].str());
      e.similarity = std::stod(m[4].str());
      out.push_back(std::move(e));
      want_text = true;
    } else if (want_text) {
      out.back().text = line;
      want_text = false;
    }
  }
  return out;
}

std::string format_summaries(std::vector<retrieval::EvidenceItem> evidence, std::size_t limit) {
  std::stable_sort(evidence.begin(), evidence.end(), retrieval::ranks_before);
  std::ostringstream os;
  std::set<CanonicalId> seen;
  for (const auto& e : evidence) {
    if (seen.size() >= limit) break;
    if (!seen.insert(e.chunk.doc_id).second) continue;
    const auto& md = e.chunk.metadata;
    os << "- " << (md.title.empty() ? e.chunk.doc_id.to_string() : one_line(md.title));
    if (md.year > 0) os << " (" << md.year << ')';
    os << '\n';
  }
  if (seen.empty()) return "(knowledge base is empty)\n";
  return os.str();
}

}  // namespace groundwork::fsm
