#include "groundwork/ingest/parser.hpp"

#include "groundwork/core/text.hpp"

namespace groundwork::ingest {

std::string StructuredDocument::full_text() const {
  std::string out = title;
  for (const auto& s : sections) {
    out += "\n" + s.heading;
    for (const auto& p : s.paragraphs) out += "\n" + p;
  }
  return out;
}

namespace {

std::vector<std::string_view> lines_of(std::string_view bytes) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= bytes.size()) {
    auto nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) {
      if (pos < bytes.size()) out.push_back(bytes.substr(pos));
      break;
    }
    auto line = bytes.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    pos = nl + 1;
  }
  return out;
}

std::string_view directive_arg(std::string_view line, std::string_view name) {
  return text::trim(line.substr(name.size()));
}

}  // namespace

StructuredDocument PlainTextParser::parse(std::string_view bytes) const {
  if (bytes.empty()) throw InvalidInput("document bytes are empty");
  auto lines = lines_of(bytes);
  if (lines.empty() || text::trim(lines.front()) != "%DOC v1") throw ParseError("missing '%DOC v1' header");

  StructuredDocument doc;
  enum class Mode { Preamble, Section, References } mode = Mode::Preamble;
  std::string paragraph;
  bool ended = false;

  auto end_paragraph = [&] {
    if (!paragraph.empty()) {
      doc.sections.back().paragraphs.push_back(paragraph);
      paragraph.clear();
    }
  };

  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (ended) {
      if (!text::trim(line).empty()) throw ParseError("content after %END");
      continue;
    }
    if (line.starts_with("%")) {
      if (mode == Mode::Section) end_paragraph();
      if (line.starts_with("%TITLE")) {
        if (mode != Mode::Preamble) throw ParseError("%TITLE after the first section");
        doc.title = std::string(directive_arg(line, "%TITLE"));
      } else if (line.starts_with("%SECTION")) {
        if (mode == Mode::References) throw ParseError("%SECTION after %REFERENCES");
        doc.sections.push_back({std::string(directive_arg(line, "%SECTION")), {}});
        mode = Mode::Section;
      } else if (line.starts_with("%REFERENCES")) {
        mode = Mode::References;
      } else if (line.starts_with("%END")) {
        ended = true;
      } else {
        throw ParseError("unknown directive '" + std::string(line) + "'");
      }
      continue;
    }
    auto body = text::trim(line);
    switch (mode) {
      case Mode::Preamble:
        if (!body.empty()) throw ParseError("text before the first section");
        break;
      case Mode::Section:
        if (body.empty()) {
          end_paragraph();
        } else {
          if (!paragraph.empty()) paragraph += ' ';
          paragraph += body;
        }
        break;
      case Mode::References:
        if (!body.empty()) doc.references.emplace_back(body);
        break;
    }
  }
  if (!ended) throw ParseError("truncated document: no %END");
  if (doc.sections.empty()) throw ParseError("document has no sections");
  return doc;
}

std::string render_plain_text(const StructuredDocument& doc) {
  std::string out = "%DOC v1\n";
  out += "%TITLE " + doc.title + "\n";
  for (const auto& s : doc.sections) {
    out += "%SECTION " + s.heading + "\n";
    for (std::size_t i = 0; i < s.paragraphs.size(); ++i) {
      if (i > 0) out += "\n";
      out += s.paragraphs[i] + "\n";
    }
  }
  if (!doc.references.empty()) {
    out += "%REFERENCES\n";
    for (const auto& r : doc.references) out += r + "\n";
  }
  out += "%END\n";
  return out;
}

}  // namespace groundwork::ingest
