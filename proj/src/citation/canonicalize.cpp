#include "groundwork/citation/canonicalize.hpp"

#include <array>
#include <cctype>

#include "groundwork/core/hash.hpp"
#include "groundwork/core/text.hpp"

namespace groundwork::citation {

std::optional<std::string> normalize_doi(std::string_view raw) {
  std::string_view s = text::trim(raw);
  static constexpr std::array<std::string_view, 7> kPrefixes = {
      "https://doi.org/", "http://doi.org/", "https://dx.doi.org/", "http://dx.doi.org/",
      "doi.org/",         "dx.doi.org/",     "doi:"};
  bool stripped = true;
  while (stripped) {
    stripped = false;
    for (auto p : kPrefixes) {
      if (text::starts_with_icase(s, p)) {
        s = text::trim(s.substr(p.size()));
        stripped = true;
      }
    }
  }
  std::string doi = text::to_lower(s);
  if (doi.size() < 4 || doi.rfind("10.", 0) != 0 || doi.find('/') == std::string::npos) return std::nullopt;
  for (char c : doi) {
    if (std::isspace(static_cast<unsigned char>(c))) return std::nullopt;
  }
  return doi;
}

std::optional<std::string> normalize_isbn(std::string_view raw) {
  std::string digits;
  for (char c : raw) {
    if (c >= '0' && c <= '9') {
      digits += c;
    } else if (c == 'x' || c == 'X') {
      digits += 'X';
    }
  }
  auto x_pos = digits.find('X');
  if (digits.size() == 13) {
    if (x_pos != std::string::npos) return std::nullopt;
    return digits;
  }
  if (digits.size() != 10) return std::nullopt;
  if (x_pos != std::string::npos && x_pos != 9) return std::nullopt;
  std::string isbn13 = "978" + digits.substr(0, 9);
  int sum = 0;
  for (std::size_t i = 0; i < 12; ++i) sum += (isbn13[i] - '0') * (i % 2 == 0 ? 1 : 3);
  isbn13 += static_cast<char>('0' + (10 - sum % 10) % 10);
  return isbn13;
}

std::optional<std::string> normalize_url(std::string_view raw) {
  std::string_view s = text::trim(raw);
  auto scheme_end = s.find("://");
  if (scheme_end == std::string_view::npos || scheme_end == 0) return std::nullopt;
  std::string scheme = text::to_lower(s.substr(0, scheme_end));
  std::string_view rest = s.substr(scheme_end + 3);
  if (auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
  auto path_start = rest.find_first_of("/?");
  std::string host = text::to_lower(rest.substr(0, path_start));
  std::string path = path_start == std::string_view::npos ? std::string() : std::string(rest.substr(path_start));
  if (host.empty()) return std::nullopt;
  if ((scheme == "http" && host.ends_with(":80")) || (scheme == "https" && host.ends_with(":443"))) {
    host.erase(host.rfind(':'));
  }
  // Trailing slash on the path (not the query) is insignificant.
  auto q = path.find('?');
  std::string query = q == std::string::npos ? std::string() : path.substr(q);
  path = path.substr(0, q);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return scheme + "://" + host + path + query;
}

CanonicalId canonicalize(const RawReference& ref) {
  if (ref.doi) {
    if (auto doi = normalize_doi(*ref.doi)) return {CanonicalId::Kind::Doi, *doi};
  }
  if (ref.isbn) {
    if (auto isbn = normalize_isbn(*ref.isbn)) return {CanonicalId::Kind::Isbn, *isbn};
  }
  if (ref.url) {
    if (auto url = normalize_url(*ref.url)) return {CanonicalId::Kind::UrlHash, sha1_hex(*url)};
  }
  throw UncitableSource("reference has no usable DOI, ISBN or URL" +
                        (ref.title ? " (title: '" + *ref.title + "')" : std::string()));
}

CanonicalId canonicalize_marker_id(std::string_view kind, std::string_view value) {
  if (kind == "doi") {
    if (auto doi = normalize_doi(value)) return {CanonicalId::Kind::Doi, *doi};
  } else if (kind == "isbn") {
    if (auto isbn = normalize_isbn(value)) return {CanonicalId::Kind::Isbn, *isbn};
  } else if (kind == "urlhash") {
    std::string h = text::to_lower(text::trim(value));
    if (is_sha1_hex(h)) return {CanonicalId::Kind::UrlHash, h};
  } else {
    throw UncitableSource("unknown citation kind '" + std::string(kind) + "'");
  }
  throw UncitableSource("malformed " + std::string(kind) + " value '" + std::string(value) + "'");
}

}  // namespace groundwork::citation
