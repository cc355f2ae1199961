#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groundwork/core/error.hpp"

namespace groundwork::gateway {

// A reply that does not match its schema. Retryable.
class SchemaViolation : public Error {
 public:
  using Error::Error;
};

// A score from the closed set {0.0, 0.25, 0.5, 0.75, 1.0}.
class ConfidenceScore {
 public:
  ConfidenceScore() = default;
  // Throws SchemaViolation outside the set.
  static ConfidenceScore from(double value);
  static std::optional<ConfidenceScore> try_from(double value);
  static bool valid(double value);

  double value() const { return value_; }
  auto operator<=>(const ConfidenceScore&) const = default;

 private:
  explicit ConfidenceScore(double v) : value_(v) {}
  double value_ = 0.0;
};

enum class ConfidenceLabel { Low, Medium, High };

// {0.0, 0.25} -> Low, 0.5 -> Medium, {0.75, 1.0} -> High.
ConfidenceLabel label_for(ConfidenceScore score);
std::string_view label_name(ConfidenceLabel label);

struct ConfidenceVerdict {
  ConfidenceScore confidence_score;
  bool confident = false;
  std::string reasoning;
  bool operator==(const ConfidenceVerdict&) const = default;
};

inline constexpr std::size_t kMaxReasoningWords = 25;
inline constexpr std::size_t kMinTitleWords = 3;
inline constexpr std::size_t kMaxTitleWords = 6;

// Each parser throws SchemaViolation with a reason on any deviation.

// Exactly "Relevant: Yes" or "Relevant: No", surrounding whitespace allowed.
bool parse_relevance(std::string_view reply);
// One JSON object with exactly {confidence_score, confident, reasoning}.
ConfidenceVerdict parse_confidence(std::string_view reply);
// A bare number from the 5-point set.
ConfidenceScore parse_self_eval(std::string_view reply);
// A flat list literal of 2 or 3 distinct, non-empty strings, single or
// double quoted. Items are trimmed.
std::vector<std::string> parse_decomposition(std::string_view reply);
// 3 to 6 words; surrounding quotes and whitespace removed, inner whitespace
// collapsed.
std::string parse_title(std::string_view reply);
// "YES" or "NO", case-insensitive.
bool parse_judge(std::string_view reply);

// Canonical replies that the matching parser accepts and maps back to the
// same value.
std::string serialize_relevance(bool relevant);
std::string serialize_confidence(const ConfidenceVerdict& verdict);
std::string serialize_self_eval(ConfidenceScore score);
std::string serialize_decomposition(const std::vector<std::string>& subtopics);

}  // namespace groundwork::gateway
