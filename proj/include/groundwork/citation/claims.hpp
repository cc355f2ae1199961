#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "groundwork/citation/markers.hpp"

namespace groundwork::citation {

struct TextSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const TextSpan&) const = default;
};

// One sentence-level segment of an answer. Markers that immediately follow
// the terminal punctuation belong to the sentence before them.
struct Segment {
  TextSpan span;               // sentence text plus any trailing markers
  bool declarative = false;    // ends in '.' or '!'
  std::vector<std::size_t> markers;  // indices into the marker list
};

struct Claim {
  int claim_id = 0;        // 1-based, document order
  std::string text;        // sentence with markers removed, whitespace collapsed
  TextSpan sentence_span;  // byte range in the answer text
  std::vector<std::size_t> markers;
};

// Deterministic splitter. Boundaries: '.', '!' or '?' followed by whitespace,
// a marker or end of text, and every line break. Not boundaries: decimal
// points, list numbering ("1."), single-letter initials, and common
// abbreviations (e.g., i.e., et al., Fig., Eq., vs., approx., ...). Markers
// are opaque; punctuation inside them never splits.
std::vector<Segment> split_segments(std::string_view text, const std::vector<Marker>& markers);

// Declarative segments with at least one alphanumeric character outside
// markers, numbered from 1.
std::vector<Claim> extract_claims(std::string_view text, const std::vector<Marker>& markers);

}  // namespace groundwork::citation
