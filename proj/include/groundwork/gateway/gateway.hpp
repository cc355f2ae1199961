#pragma once

#include <memory>
#include <string>
#include <type_traits>
#include <utility>

#include <spdlog/spdlog.h>

#include "groundwork/gateway/parsers.hpp"
#include "groundwork/gateway/prompts.hpp"
#include "groundwork/gateway/provider.hpp"

namespace groundwork::gateway {

// Every attempt failed. Carries the last raw reply (empty if the provider
// never replied) and the usage of all attempts.
class SchemaExhausted : public Error {
 public:
  SchemaExhausted(const std::string& what, std::string last_raw, CompletionUsage usage, int attempts)
      : Error(what), last_raw_(std::move(last_raw)), usage_(usage), attempts_(attempts) {}
  const std::string& last_raw() const { return last_raw_; }
  const CompletionUsage& usage() const { return usage_; }
  int attempts() const { return attempts_; }

 private:
  std::string last_raw_;
  CompletionUsage usage_;
  int attempts_;
};

template <typename T>
struct Completion {
  T value;
  CompletionUsage usage;  // summed over attempts
  int attempts = 0;
  std::string raw;  // accepted reply
};

inline constexpr int kDefaultSchemaBudget = 3;

// Calls the provider up to `budget` times, re-issuing the same request when
// the parser throws SchemaViolation or the provider throws ProviderError.
// Returns the first successful parse.
template <typename Parser>
auto complete_with_retry(Provider& provider, const RateTable& rates, const ModelRoleBinding& binding,
                         std::string_view state_tag, const std::string& prompt, Parser&& parser,
                         int budget = kDefaultSchemaBudget)
    -> Completion<std::decay_t<std::invoke_result_t<Parser, std::string_view>>> {
  using T = std::decay_t<std::invoke_result_t<Parser, std::string_view>>;
  if (budget < 1) throw InvalidInput("schema-retry budget must be at least 1");
  CompletionRequest request{effective_binding(binding), std::string(state_tag), prompt};
  CompletionUsage total;
  std::string last_raw;
  std::string last_error;
  for (int attempt = 1; attempt <= budget; ++attempt) {
    CompletionReply reply;
    try {
      reply = provider.complete(request);
    } catch (const ProviderError& e) {
      last_error = e.what();
      spdlog::warn("{} attempt {}/{}: provider error: {}", state_tag, attempt, budget, last_error);
      continue;
    }
    total += rates.usage(request.binding.model_id, reply.token_in, reply.token_out);
    last_raw = reply.text;
    try {
      T value = parser(std::string_view(reply.text));
      return Completion<T>{std::move(value), total, attempt, std::move(reply.text)};
    } catch (const SchemaViolation& e) {
      last_error = e.what();
      spdlog::debug("{} attempt {}/{}: schema violation: {}", state_tag, attempt, budget, last_error);
    }
  }
  throw SchemaExhausted(std::string(state_tag) + ": no valid reply in " + std::to_string(budget) +
                            " attempt(s); last error: " + last_error,
                        std::move(last_raw), total, budget);
}

// Provider plus the per-role bindings, rate table and retry budget that a
// run uses. Stateless apart from configuration; safe to share.
class Gateway {
 public:
  Gateway(std::shared_ptr<Provider> provider, ModelBindings bindings = {}, RateTable rates = {},
          int budget = kDefaultSchemaBudget)
      : provider_(std::move(provider)), bindings_(std::move(bindings)), rates_(std::move(rates)), budget_(budget) {
    if (!provider_) throw ConfigError("gateway needs a provider");
    if (budget_ < 1) throw ConfigError("schema-retry budget must be at least 1");
  }

  template <typename Parser>
  auto call(Role role, std::string_view state_tag, const std::string& prompt, Parser&& parser) const {
    return complete_with_retry(*provider_, rates_, bindings_.for_role(role), state_tag, prompt,
                               std::forward<Parser>(parser), budget_);
  }

  // Unvalidated free-text call (one attempt); provider errors propagate.
  Completion<std::string> call_text(Role role, std::string_view state_tag, const std::string& prompt) const {
    CompletionRequest request{effective_binding(bindings_.for_role(role)), std::string(state_tag), prompt};
    auto reply = provider_->complete(request);
    auto usage = rates_.usage(request.binding.model_id, reply.token_in, reply.token_out);
    return Completion<std::string>{reply.text, usage, 1, reply.text};
  }

  Provider& provider() const { return *provider_; }
  const ModelBindings& bindings() const { return bindings_; }
  const RateTable& rates() const { return rates_; }
  int budget() const { return budget_; }

 private:
  std::shared_ptr<Provider> provider_;
  ModelBindings bindings_;
  RateTable rates_;
  int budget_;
};

}  // namespace groundwork::gateway
