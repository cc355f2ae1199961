#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groundwork/core/canonical_id.hpp"
#include "groundwork/core/error.hpp"

namespace groundwork::citation {

// Citation marker syntax used in drafts and final answers:
//
//   [[cite: <kind>:<value> # <span_id>]]
//
// kind is doi, isbn or urlhash; span_id is a non-negative integer.

class MarkerParseError : public Error {
 public:
  MarkerParseError(std::size_t position, const std::string& what);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

struct Marker {
  std::size_t begin = 0;  // byte offset of "[["
  std::size_t end = 0;    // one past "]]"
  std::string kind;
  std::string value;      // as written
  int span_id = 0;
  // Canonical form of kind:value, or nullopt when the value does not
  // normalize (such a marker can never match evidence).
  std::optional<CanonicalId> id;

  std::string raw(std::string_view text) const { return std::string(text.substr(begin, end - begin)); }
};

// All markers in document order. Throws MarkerParseError on an unterminated
// marker, a missing kind prefix, a missing '#', or a non-integer span id.
std::vector<Marker> parse_markers(std::string_view text);

std::string format_marker(const CanonicalId& id, int span_id);

}  // namespace groundwork::citation
