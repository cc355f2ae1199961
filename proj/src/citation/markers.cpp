#include "groundwork/citation/markers.hpp"

#include <charconv>

#include "groundwork/citation/canonicalize.hpp"
#include "groundwork/core/text.hpp"

namespace groundwork::citation {

namespace {
constexpr std::string_view kOpen = "[[cite:";
constexpr std::string_view kClose = "]]";
}  // namespace

MarkerParseError::MarkerParseError(std::size_t position, const std::string& what)
    : Error("citation marker at byte " + std::to_string(position) + ": " + what), position_(position) {}

std::vector<Marker> parse_markers(std::string_view t) {
  std::vector<Marker> out;
  std::size_t pos = 0;
  while ((pos = t.find(kOpen, pos)) != std::string_view::npos) {
    auto close = t.find(kClose, pos + kOpen.size());
    auto next_open = t.find("[[", pos + 2);
    if (close == std::string_view::npos || (next_open != std::string_view::npos && next_open < close)) {
      throw MarkerParseError(pos, "unterminated marker");
    }
    std::string_view body = text::trim(t.substr(pos + kOpen.size(), close - pos - kOpen.size()));
    auto hash = body.rfind('#');
    if (hash == std::string_view::npos) throw MarkerParseError(pos, "missing '# <span_id>'");
    std::string_view id_text = text::trim(body.substr(0, hash));
    std::string_view span_text = text::trim(body.substr(hash + 1));
    auto colon = id_text.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 >= id_text.size()) {
      throw MarkerParseError(pos, "expected '<kind>:<value>'");
    }
    Marker m;
    m.begin = pos;
    m.end = close + kClose.size();
    m.kind = text::to_lower(text::trim(id_text.substr(0, colon)));
    m.value = std::string(text::trim(id_text.substr(colon + 1)));
    if (m.kind != "doi" && m.kind != "isbn" && m.kind != "urlhash") {
      throw MarkerParseError(pos, "unknown kind '" + m.kind + "'");
    }
    if (span_text.empty()) throw MarkerParseError(pos, "empty span id");
    for (char c : span_text) {
      if (c < '0' || c > '9') throw MarkerParseError(pos, "span id is not a non-negative integer");
    }
    auto res = std::from_chars(span_text.data(), span_text.data() + span_text.size(), m.span_id);
    if (res.ec != std::errc{}) throw MarkerParseError(pos, "span id out of range");
    try {
      m.id = canonicalize_marker_id(m.kind, m.value);
    } catch (const UncitableSource&) {
      m.id = std::nullopt;
    }
    out.push_back(std::move(m));
    pos = close + kClose.size();
  }
  return out;
}

std::string format_marker(const CanonicalId& id, int span_id) {
  return "[[cite: " + id.to_string() + " # " + std::to_string(span_id) + "]]";
}

}  // namespace groundwork::citation
