#include "groundwork/citation/claims.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "groundwork/core/text.hpp"

namespace groundwork::citation {

namespace {

constexpr std::array<std::string_view, 28> kAbbreviations = {
    "e.g", "i.e", "al",  "fig", "figs", "eq",   "eqs", "ref", "refs", "vs", "approx", "dr", "prof", "mr",
    "mrs", "ms",  "no",  "nos", "sec",  "secs", "cf",  "ca",  "resp", "incl", "vol",  "pp", "ch",   "tab"};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']' || c == '*' || c == '_'; }

class MarkerCursor {
 public:
  explicit MarkerCursor(const std::vector<Marker>& markers) : markers_(markers) {}
  // Index of the marker starting exactly at pos, if any.
  std::optional<std::size_t> at(std::size_t pos) const {
    auto it = std::lower_bound(markers_.begin(), markers_.end(), pos,
                               [](const Marker& m, std::size_t p) { return m.begin < p; });
    if (it != markers_.end() && it->begin == pos) return static_cast<std::size_t>(it - markers_.begin());
    return std::nullopt;
  }
  const Marker& operator[](std::size_t i) const { return markers_[i]; }

 private:
  const std::vector<Marker>& markers_;
};

// Word immediately before position `dot`, from the previous whitespace or
// opening bracket/quote.
std::string_view word_before(std::string_view t, std::size_t dot) {
  std::size_t b = dot;
  while (b > 0 && !is_space(t[b - 1]) && t[b - 1] != '(' && t[b - 1] != '"' && t[b - 1] != '[') --b;
  return t.substr(b, dot - b);
}

bool at_line_start(std::string_view t, std::size_t pos) {
  while (pos > 0) {
    char c = t[pos - 1];
    if (c == '\n') return true;
    if (c != ' ' && c != '\t' && c != '-' && c != '*') return false;
    --pos;
  }
  return true;
}

bool is_abbreviation(std::string_view t, std::size_t dot) {
  std::string_view word = word_before(t, dot);
  if (word.empty()) return false;
  std::string lower = text::to_lower(word);
  if (std::find(kAbbreviations.begin(), kAbbreviations.end(), lower) != kAbbreviations.end()) return true;
  if (word.size() == 1 && is_alpha(word[0])) return true;  // initial: "J. Smith"
  if (lower.find('.') != std::string::npos) {
    // Dotted letter groups such as "u.s" or "a.k.a".
    bool all_short_alpha = true;
    for (const auto& piece : text::split(lower, '.')) {
      if (piece.empty() || piece.size() > 2 || !std::all_of(piece.begin(), piece.end(), is_alpha)) {
        all_short_alpha = false;
      }
    }
    if (all_short_alpha) return true;
  }
  bool digits = std::all_of(word.begin(), word.end(), is_digit);
  return digits && at_line_start(t, dot - word.size());  // list numbering: "1."
}

}  // namespace

std::vector<Segment> split_segments(std::string_view t, const std::vector<Marker>& markers) {
  MarkerCursor cursor(markers);
  std::vector<Segment> out;
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t seg_start = kNone;
  std::size_t content_end = 0;
  std::vector<std::size_t> seg_markers;

  auto close = [&](std::size_t end, bool declarative) {
    if (seg_start == kNone) return;
    out.push_back(Segment{{seg_start, end}, declarative, std::move(seg_markers)});
    seg_markers.clear();
    seg_start = kNone;
  };

  std::size_t i = 0;
  const std::size_t n = t.size();
  while (i < n) {
    if (auto mi = cursor.at(i)) {
      if (seg_start == kNone) seg_start = i;
      seg_markers.push_back(*mi);
      i = cursor[*mi].end;
      content_end = i;
      continue;
    }
    char c = t[i];
    if (c == '\n') {
      close(content_end, false);
      ++i;
      continue;
    }
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (seg_start == kNone) seg_start = i;
    content_end = i + 1;
    if (c == '.' || c == '!' || c == '?') {
      std::size_t j = i + 1;
      while (j < n && is_closer(t[j]) && !cursor.at(j)) ++j;
      bool followed_ok = j >= n || is_space(t[j]) || cursor.at(j).has_value();
      if (followed_ok && !(c == '.' && is_abbreviation(t, i))) {
        std::size_t end = j;
        std::size_t k = j;
        while (true) {
          while (k < n && (t[k] == ' ' || t[k] == '\t')) ++k;
          auto mi = k < n ? cursor.at(k) : std::nullopt;
          if (!mi) break;
          seg_markers.push_back(*mi);
          k = cursor[*mi].end;
          end = k;
        }
        close(end, c != '?');
        i = end;
        content_end = end;
        continue;
      }
    }
    ++i;
  }
  close(content_end, false);
  return out;
}

std::vector<Claim> extract_claims(std::string_view t, const std::vector<Marker>& markers) {
  std::vector<Claim> claims;
  for (auto& seg : split_segments(t, markers)) {
    if (!seg.declarative) continue;
    std::string plain;
    std::size_t i = seg.span.start;
    std::size_t mk = 0;
    while (i < seg.span.end) {
      if (mk < seg.markers.size() && markers[seg.markers[mk]].begin == i) {
        i = markers[seg.markers[mk]].end;
        ++mk;
        plain += ' ';
        continue;
      }
      plain += t[i++];
    }
    std::string collapsed = text::join(text::split_words(plain), " ");
    // Drop list bullets and numbering.
    std::string_view body = collapsed;
    if (body.starts_with("- ") || body.starts_with("* ") || body.starts_with("+ ")) body.remove_prefix(2);
    std::size_t d = 0;
    while (d < body.size() && is_digit(body[d])) ++d;
    if (d > 0 && d + 1 < body.size() && body[d] == '.' && body[d + 1] == ' ') body.remove_prefix(d + 2);
    // Markers left a space before the punctuation: "claim [[..]]." -> "claim ."
    std::string cleaned;
    for (std::size_t p = 0; p < body.size(); ++p) {
      if (body[p] == ' ' && p + 1 < body.size() && (body[p + 1] == '.' || body[p + 1] == '!') &&
          (p + 2 == body.size() || body[p + 2] == ' ')) {
        continue;
      }
      cleaned += body[p];
    }
    if (std::none_of(cleaned.begin(), cleaned.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)); })) {
      continue;
    }
    Claim claim;
    claim.claim_id = static_cast<int>(claims.size()) + 1;
    claim.text = std::move(cleaned);
    claim.sentence_span = {seg.span.start, seg.span.end};
    claim.markers = std::move(seg.markers);
    claims.push_back(std::move(claim));
  }
  return claims;
}

}  // namespace groundwork::citation
