#pragma once

#include <compare>
#include <functional>
#include <string>
#include <string_view>

namespace groundwork {

// Normalized identity of a citable source. Construction from raw references
// goes through citation::canonicalize; this type only carries the result.
struct CanonicalId {
  enum class Kind { Doi, Isbn, UrlHash };

  Kind kind = Kind::Doi;
  std::string value;

  auto operator<=>(const CanonicalId&) const = default;

  // "doi:10.1364/oe.1", "isbn:9780131103627", "urlhash:<sha1>"
  std::string to_string() const;

  // Inverse of to_string. The value is taken as already normalized.
  // Throws InvalidInput on an unknown kind or empty value.
  static CanonicalId parse(std::string_view text);
};

std::string_view kind_name(CanonicalId::Kind kind);

}  // namespace groundwork

template <>
struct std::hash<groundwork::CanonicalId> {
  std::size_t operator()(const groundwork::CanonicalId& id) const noexcept {
    return std::hash<std::string>{}(id.value) ^ (static_cast<std::size_t>(id.kind) * 0x9E3779B97F4A7C15ULL);
  }
};
