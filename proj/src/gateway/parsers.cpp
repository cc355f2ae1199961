#include "groundwork/gateway/parsers.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <set>

#include <json.hpp>

#include "groundwork/core/text.hpp"

namespace groundwork::gateway {

namespace {

constexpr std::array<double, 5> kScores = {0.0, 0.25, 0.5, 0.75, 1.0};

[[noreturn]] void violation(const std::string& why) { throw SchemaViolation(why); }

std::string preview(std::string_view s) {
  constexpr std::size_t kMax = 60;
  std::string p(s.substr(0, kMax));
  if (s.size() > kMax) p += "...";
  return p;
}

}  // namespace

bool ConfidenceScore::valid(double value) {
  return std::find(kScores.begin(), kScores.end(), value) != kScores.end();
}

std::optional<ConfidenceScore> ConfidenceScore::try_from(double value) {
  if (!valid(value)) return std::nullopt;
  return ConfidenceScore(value + 0.0);  // folds -0.0
}

ConfidenceScore ConfidenceScore::from(double value) {
  auto s = try_from(value);
  if (!s) violation("confidence score " + text::format_shortest(value) + " is not one of 0.0, 0.25, 0.5, 0.75, 1.0");
  return *s;
}

ConfidenceLabel label_for(ConfidenceScore score) {
  if (score.value() >= 0.75) return ConfidenceLabel::High;
  if (score.value() >= 0.5) return ConfidenceLabel::Medium;
  return ConfidenceLabel::Low;
}

std::string_view label_name(ConfidenceLabel label) {
  switch (label) {
    case ConfidenceLabel::Low:
      return "Low";
    case ConfidenceLabel::Medium:
      return "Medium";
    case ConfidenceLabel::High:
      return "High";
  }
  return "Low";
}

bool parse_relevance(std::string_view reply) {
  auto t = text::trim(reply);
  if (t == "Relevant: Yes") return true;
  if (t == "Relevant: No") return false;
  violation("relevance reply must be 'Relevant: Yes' or 'Relevant: No', got '" + preview(t) + "'");
}

ConfidenceVerdict parse_confidence(std::string_view reply) {
  auto j = nlohmann::json::parse(reply, nullptr, false);
  if (j.is_discarded()) violation("confidence reply is not valid JSON");
  if (!j.is_object()) violation("confidence reply must be a JSON object");
  static const std::set<std::string> kKeys = {"confidence_score", "confident", "reasoning"};
  for (const auto& [key, _] : j.items()) {
    if (kKeys.count(key) == 0) violation("unexpected key '" + key + "' in confidence reply");
  }
  for (const auto& key : kKeys) {
    if (!j.contains(key)) violation("missing key '" + key + "' in confidence reply");
  }
  const auto& score = j["confidence_score"];
  if (!score.is_number()) violation("confidence_score must be a number");
  if (!j["confident"].is_boolean()) violation("confident must be a boolean");
  if (!j["reasoning"].is_string()) violation("reasoning must be a string");

  ConfidenceVerdict v;
  v.confidence_score = ConfidenceScore::from(score.get<double>());
  v.confident = j["confident"].get<bool>();
  v.reasoning = j["reasoning"].get<std::string>();
  if (v.confident != (v.confidence_score.value() >= 0.75)) {
    violation("confident must be true exactly when confidence_score >= 0.75");
  }
  if (v.reasoning.find_first_of("\r\n") != std::string::npos) violation("reasoning must be a single line");
  if (text::trim(v.reasoning).empty()) violation("reasoning is empty");
  if (text::split_words(v.reasoning).size() > kMaxReasoningWords) violation("reasoning exceeds 25 words");
  return v;
}

ConfidenceScore parse_self_eval(std::string_view reply) {
  auto t = text::trim(reply);
  double value = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || p != t.data() + t.size()) {
    violation("self-evaluation reply must be a bare number, got '" + preview(t) + "'");
  }
  return ConfidenceScore::from(value);
}

namespace {

class ListLiteralParser {
 public:
  explicit ListLiteralParser(std::string_view s) : s_(s) {}

  std::vector<std::string> parse() {
    skip_ws();
    expect('[');
    std::vector<std::string> items;
    skip_ws();
    if (peek() == ']') {
      ++pos_;
    } else {
      while (true) {
        skip_ws();
        char c = peek();
        if (c == '[' || c == '{' || c == '(') violation("nested structure at offset " + std::to_string(pos_));
        if (c != '"' && c != '\'') violation("list item at offset " + std::to_string(pos_) + " is not a string");
        items.push_back(read_string());
        skip_ws();
        char sep = peek();
        if (sep == ',') {
          ++pos_;
          skip_ws();
          if (peek() == ']') {  // trailing comma
            ++pos_;
            break;
          }
          continue;
        }
        if (sep == ']') {
          ++pos_;
          break;
        }
        violation("expected ',' or ']' at offset " + std::to_string(pos_));
      }
    }
    skip_ws();
    if (pos_ != s_.size()) violation("trailing text after list literal");
    return items;
  }

 private:
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  void expect(char c) {
    if (peek() != c) violation(std::string("expected '") + c + "' at offset " + std::to_string(pos_));
    ++pos_;
  }
  std::string read_string() {
    char quote = s_[pos_++];
    std::string out;
    while (true) {
      if (pos_ >= s_.size()) violation("unterminated string literal");
      char c = s_[pos_++];
      if (c == quote) return out;
      if (c == '\n') violation("newline inside string literal");
      if (c != '\\') {
        out += c;
        continue;
      }
      if (pos_ >= s_.size()) violation("unterminated escape");
      char e = s_[pos_++];
      switch (e) {
        case '\\':
        case '\'':
        case '"':
          out += e;
          break;
        case 'n':
          out += '\n';
          break;
        case 't':
          out += '\t';
          break;
        default:
          violation(std::string("unsupported escape '\\") + e + "'");
      }
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::string> parse_decomposition(std::string_view reply) {
  auto raw = ListLiteralParser(reply).parse();
  if (raw.size() < 2 || raw.size() > 3) {
    violation("decomposition must list 2 or 3 subtopics, got " + std::to_string(raw.size()));
  }
  std::vector<std::string> items;
  std::set<std::string> seen;
  for (const auto& r : raw) {
    std::string item(text::trim(r));
    if (item.empty()) violation("empty subtopic");
    if (!seen.insert(text::normalize_title(item)).second) violation("duplicate subtopic '" + preview(item) + "'");
    items.push_back(std::move(item));
  }
  return items;
}

std::string parse_title(std::string_view reply) {
  auto t = text::trim(reply);
  while (t.size() >= 2 && (t.front() == '"' || t.front() == '\'') && t.back() == t.front()) {
    t = text::trim(t.substr(1, t.size() - 2));
  }
  auto words = text::split_words(t);
  if (words.size() < kMinTitleWords || words.size() > kMaxTitleWords) {
    violation("title must have 3 to 6 words, got " + std::to_string(words.size()));
  }
  return text::join(words, " ");
}

bool parse_judge(std::string_view reply) {
  auto t = text::to_lower(text::trim(reply));
  if (t == "yes") return true;
  if (t == "no") return false;
  violation("judge reply must be YES or NO, got '" + preview(t) + "'");
}

std::string serialize_relevance(bool relevant) { return relevant ? "Relevant: Yes" : "Relevant: No"; }

std::string serialize_confidence(const ConfidenceVerdict& verdict) {
  nlohmann::ordered_json j;
  j["confidence_score"] = verdict.confidence_score.value();
  j["confident"] = verdict.confident;
  j["reasoning"] = verdict.reasoning;
  return j.dump();
}

std::string serialize_self_eval(ConfidenceScore score) { return text::format_shortest(score.value()); }

std::string serialize_decomposition(const std::vector<std::string>& subtopics) {
  std::string out = "[";
  for (std::size_t i = 0; i < subtopics.size(); ++i) {
    if (i > 0) out += ", ";
    out += '"';
    for (char c : subtopics[i]) {
      switch (c) {
        case '"':
          out += "\\\"";
          break;
        case '\\':
          out += "\\\\";
          break;
        case '\n':
          out += "\\n";
          break;
        case '\t':
          out += "\\t";
          break;
        default:
          out += c;
      }
    }
    out += '"';
  }
  out += ']';
  return out;
}

}  // namespace groundwork::gateway
