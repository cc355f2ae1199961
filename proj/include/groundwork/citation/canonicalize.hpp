#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "groundwork/core/canonical_id.hpp"
#include "groundwork/core/error.hpp"

namespace groundwork::citation {

class UncitableSource : public Error {
 public:
  using Error::Error;
};

struct RawReference {
  std::optional<std::string> doi;
  std::optional<std::string> isbn;
  std::optional<std::string> url;
  std::optional<std::string> title;
};

// DOI: resolver prefixes ("https://doi.org/", "dx.doi.org/", "doi:") removed,
// lower-cased; must start with "10.". Returns nullopt for anything else.
std::optional<std::string> normalize_doi(std::string_view raw);

// ISBN: digits and X only; ISBN-10 is promoted to ISBN-13 (978 prefix,
// recomputed check digit). Returns nullopt unless 10 or 13 characters remain.
std::optional<std::string> normalize_isbn(std::string_view raw);

// URL: scheme and host lower-cased, default port, fragment and trailing slash
// dropped. Returns nullopt for text without a scheme.
std::optional<std::string> normalize_url(std::string_view raw);

// Priority doi > isbn > urlhash; a field that fails normalization falls
// through to the next. Throws UncitableSource when nothing identifies the
// source (a title alone does not).
CanonicalId canonicalize(const RawReference& ref);

// Resolves the "<kind>:<value>" text of a citation marker, normalizing the
// value for its kind. Throws UncitableSource if the value does not normalize.
CanonicalId canonicalize_marker_id(std::string_view kind, std::string_view value);

}  // namespace groundwork::citation
