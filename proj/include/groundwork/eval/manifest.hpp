#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "groundwork/gateway/types.hpp"

namespace groundwork::eval {

// The six question families of the evaluation set.
const std::vector<std::string>& question_categories();
bool is_question_category(std::string_view category);

struct Question {
  std::string question_id;
  std::string category;
  std::string text;
  std::optional<std::string> gold_answer;
  std::vector<std::string> gold_sources;
  bool operator==(const Question&) const = default;
};

// JSON lines: {"question_id", "category", "text", "gold_answer"?,
// "gold_sources": [...]}. Throws ValidationError on unknown categories,
// duplicate ids or malformed lines.
std::vector<Question> parse_questions(std::string_view text);
std::vector<Question> load_questions(const std::filesystem::path& path);

struct RunConfig {
  std::string system_id = "groundwork";
  std::string question_id;
  std::string category;
  std::string relevance_model;
  std::string confidence_model;
  std::string knowledge_model;
  int retrieval_k = 8;
  gateway::ReasoningEffort reasoning_level = gateway::ReasoningEffort::Medium;
  std::optional<double> temperature;  // nullopt: model default
  bool allow_online_search = true;
  std::uint64_t seed = 0;
  bool operator==(const RunConfig&) const = default;
};

// Declared levels per factor. Every list must be non-empty.
struct Factors {
  std::string system_id = "groundwork";
  std::vector<std::string> relevance_models{"gpt-4o-mini"};
  std::vector<std::string> confidence_models{"o4-mini"};
  std::vector<std::string> knowledge_models{"o3", "o4-mini"};
  std::vector<int> retrieval_ks{4, 8, 12};
  std::vector<gateway::ReasoningEffort> reasoning_levels{gateway::ReasoningEffort::Low,
                                                         gateway::ReasoningEffort::Medium,
                                                         gateway::ReasoningEffort::High};
  std::vector<std::optional<double>> temperatures{std::nullopt};
  std::vector<bool> allow_online_search{true};

  std::size_t settings() const;  // product of level counts
  void validate() const;          // throws ConfigError
};

struct RunManifest {
  std::uint64_t seed = 0;
  std::vector<RunConfig> runs;
};

// Full grid of settings times questions. Questions keep their input order;
// each question's settings appear in a seeded random order (Fisher-Yates
// over mt19937_64 draws). Every run gets its own seed derived from the
// manifest seed and its position.
RunManifest build_manifest(const Factors& factors, const std::vector<Question>& questions, std::uint64_t seed);

// Unbiased draw in [0, bound) from raw mt19937_64 output; the same on every
// platform, unlike std::uniform_int_distribution.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound);

}  // namespace groundwork::eval
