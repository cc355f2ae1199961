#include "groundwork/gateway/types.hpp"

#include <json.hpp>

#include "groundwork/core/fs.hpp"

namespace groundwork::gateway {

std::string_view role_name(Role role) {
  switch (role) {
    case Role::Relevance:
      return "relevance";
    case Role::Confidence:
      return "confidence";
    case Role::Knowledge:
      return "knowledge";
    case Role::FastTitle:
      return "fast_title";
    case Role::Judge:
      return "judge";
  }
  return "knowledge";
}

std::string_view effort_name(ReasoningEffort effort) {
  switch (effort) {
    case ReasoningEffort::Low:
      return "low";
    case ReasoningEffort::Medium:
      return "medium";
    case ReasoningEffort::High:
      return "high";
  }
  return "medium";
}

ReasoningEffort parse_effort(std::string_view text) {
  if (text == "low") return ReasoningEffort::Low;
  if (text == "medium") return ReasoningEffort::Medium;
  if (text == "high") return ReasoningEffort::High;
  throw InvalidInput("reasoning level must be one of low, medium, high (got '" + std::string(text) + "')");
}

bool accepts_reasoning_effort(std::string_view model_id) {
  return model_id.size() >= 2 && model_id[0] == 'o' && model_id[1] >= '0' && model_id[1] <= '9';
}

ModelRoleBinding effective_binding(ModelRoleBinding binding) {
  if (!accepts_reasoning_effort(binding.model_id)) binding.reasoning_effort.reset();
  return binding;
}

const ModelRoleBinding& ModelBindings::for_role(Role role) const {
  switch (role) {
    case Role::Relevance:
      return relevance;
    case Role::Confidence:
      return confidence;
    case Role::Knowledge:
      return knowledge;
    case Role::FastTitle:
      return fast_title;
    case Role::Judge:
      return judge;
  }
  return knowledge;
}

RateTable::RateTable(std::map<std::string, Rate, std::less<>> rates) : rates_(std::move(rates)) {}

RateTable RateTable::from_json(std::string_view text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("rate table must be a JSON object");
  RateTable table;
  for (const auto& [model, entry] : j.items()) {
    if (!entry.is_object() || !entry.contains("rate_in") || !entry.contains("rate_out") ||
        !entry["rate_in"].is_number() || !entry["rate_out"].is_number()) {
      throw ConfigError("rate table entry for '" + model + "' needs numeric rate_in and rate_out");
    }
    Rate r{entry["rate_in"].get<double>(), entry["rate_out"].get<double>()};
    if (r.rate_in < 0 || r.rate_out < 0) throw ConfigError("rate table entry for '" + model + "' is negative");
    table.set(model, r);
  }
  return table;
}

RateTable RateTable::load(const std::filesystem::path& path) { return from_json(fs::read_file(path)); }

void RateTable::set(std::string model_id, Rate rate) { rates_[std::move(model_id)] = rate; }

const Rate* RateTable::find(std::string_view model_id) const {
  auto it = rates_.find(model_id);
  return it == rates_.end() ? nullptr : &it->second;
}

CompletionUsage RateTable::usage(std::string_view model_id, long long token_in, long long token_out) const {
  CompletionUsage u{token_in, token_out, 0.0};
  if (const Rate* r = find(model_id)) {
    u.cost_usd = static_cast<double>(token_in) / 1000.0 * r->rate_in +
                 static_cast<double>(token_out) / 1000.0 * r->rate_out;
  }
  return u;
}

}  // namespace groundwork::gateway
