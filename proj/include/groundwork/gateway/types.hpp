#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "groundwork/core/error.hpp"

namespace groundwork::gateway {

enum class Role { Relevance, Confidence, Knowledge, FastTitle, Judge };
enum class ReasoningEffort { Low, Medium, High };

std::string_view role_name(Role role);
std::string_view effort_name(ReasoningEffort effort);
// Throws InvalidInput for anything but low/medium/high.
ReasoningEffort parse_effort(std::string_view text);

struct ModelRoleBinding {
  Role role = Role::Knowledge;
  std::string model_id;
  std::optional<ReasoningEffort> reasoning_effort;
  std::optional<double> temperature;  // nullopt: provider preset
};

// Reasoning effort is only accepted by o-series reasoning models (o1, o3,
// o4-mini, ...). Other models get the provider default.
bool accepts_reasoning_effort(std::string_view model_id);

// The binding as it will actually be sent: effort dropped for models that do
// not accept it.
ModelRoleBinding effective_binding(ModelRoleBinding binding);

// Default per-role assignments (medium mode).
struct ModelBindings {
  ModelRoleBinding relevance{Role::Relevance, "gpt-4o-mini", std::nullopt, std::nullopt};
  ModelRoleBinding confidence{Role::Confidence, "o4-mini", ReasoningEffort::Medium, std::nullopt};
  ModelRoleBinding knowledge{Role::Knowledge, "o4-mini", ReasoningEffort::Medium, std::nullopt};
  ModelRoleBinding fast_title{Role::FastTitle, "gpt-4o-mini", std::nullopt, std::nullopt};
  ModelRoleBinding judge{Role::Judge, "o4-mini", ReasoningEffort::Medium, std::nullopt};

  const ModelRoleBinding& for_role(Role role) const;
};

struct CompletionUsage {
  long long token_in = 0;
  long long token_out = 0;
  double cost_usd = 0.0;

  CompletionUsage& operator+=(const CompletionUsage& o) {
    token_in += o.token_in;
    token_out += o.token_out;
    cost_usd += o.cost_usd;
    return *this;
  }
  bool operator==(const CompletionUsage&) const = default;
};

// USD per 1K tokens, per model.
struct Rate {
  double rate_in = 0.0;
  double rate_out = 0.0;
};

class RateTable {
 public:
  RateTable() = default;
  explicit RateTable(std::map<std::string, Rate, std::less<>> rates);

  // JSON object: { "<model_id>": {"rate_in": x, "rate_out": y}, ... }
  static RateTable from_json(std::string_view text);
  static RateTable load(const std::filesystem::path& path);

  void set(std::string model_id, Rate rate);
  const Rate* find(std::string_view model_id) const;

  // token_in/1000 * rate_in + token_out/1000 * rate_out; unknown models cost 0.
  CompletionUsage usage(std::string_view model_id, long long token_in, long long token_out) const;

 private:
  std::map<std::string, Rate, std::less<>> rates_;
};

}  // namespace groundwork::gateway
