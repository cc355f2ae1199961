#include "groundwork/core/canonical_id.hpp"

#include "groundwork/core/error.hpp"

namespace groundwork {

std::string_view kind_name(CanonicalId::Kind kind) {
  switch (kind) {
    case CanonicalId::Kind::Doi:
      return "doi";
    case CanonicalId::Kind::Isbn:
      return "isbn";
    case CanonicalId::Kind::UrlHash:
      return "urlhash";
  }
  return "doi";
}

std::string CanonicalId::to_string() const {
  std::string out(kind_name(kind));
  out += ':';
  out += value;
  return out;
}

CanonicalId CanonicalId::parse(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos || colon + 1 >= text.size()) {
    throw InvalidInput("not a canonical id: '" + std::string(text) + "'");
  }
  auto kind = text.substr(0, colon);
  CanonicalId id;
  id.value = std::string(text.substr(colon + 1));
  if (kind == "doi") {
    id.kind = Kind::Doi;
  } else if (kind == "isbn") {
    id.kind = Kind::Isbn;
  } else if (kind == "urlhash") {
    id.kind = Kind::UrlHash;
  } else {
    throw InvalidInput("unknown canonical id kind: '" + std::string(kind) + "'");
  }
  return id;
}

}  // namespace groundwork
