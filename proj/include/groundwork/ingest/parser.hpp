#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "groundwork/core/error.hpp"

namespace groundwork::ingest {

// Malformed or truncated document. Routes the record to NeedsManualFix.
class ParseError : public Error {
 public:
  using Error::Error;
};

struct Section {
  std::string heading;
  std::vector<std::string> paragraphs;
  bool operator==(const Section&) const = default;
};

struct StructuredDocument {
  std::string title;
  std::vector<Section> sections;
  std::vector<std::string> references;  // raw reference strings, in order

  // Title, then every section heading and paragraph, newline separated.
  std::string full_text() const;
  bool operator==(const StructuredDocument&) const = default;
};

// Turns raw document bytes into sections. Implementations may call out to an
// external structured-text service; the one shipped here reads plain text.
class DocumentParser {
 public:
  virtual ~DocumentParser() = default;
  // Throws InvalidInput on empty bytes, ParseError on malformed input.
  virtual StructuredDocument parse(std::string_view bytes) const = 0;
};

// Line-oriented test format:
//
//   %DOC v1
//   %TITLE <title>
//   %SECTION <heading>
//   <paragraph lines; a blank line ends a paragraph>
//   %REFERENCES
//   <one reference per line>
//   %END
//
// A missing %END (truncated file), text before the first section, an
// unknown directive or a document without sections is a ParseError.
class PlainTextParser final : public DocumentParser {
 public:
  StructuredDocument parse(std::string_view bytes) const override;
};

// Inverse of PlainTextParser::parse for documents it can represent.
std::string render_plain_text(const StructuredDocument& doc);

}  // namespace groundwork::ingest
