#include "groundwork/gateway/http_provider.hpp"

#include <httplib.h>

#include <json.hpp>

namespace groundwork::gateway {

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw ConfigError("provider base_url is empty");
}

CompletionReply HttpProvider::complete(const CompletionRequest& request) {
  nlohmann::json body;
  body["model"] = request.binding.model_id;
  body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}});
  if (request.binding.reasoning_effort) body["reasoning_effort"] = effort_name(*request.binding.reasoning_effort);
  if (request.binding.temperature) body["temperature"] = *request.binding.temperature;

  httplib::Client client(config_.base_url);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto res = client.Post(config_.path, headers, body.dump(), "application/json");
  if (!res) throw ProviderError("request to " + config_.base_url + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw ProviderError("provider returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  }
  auto j = nlohmann::json::parse(res->body, nullptr, false);
  if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    throw ProviderError("provider response has no choices");
  }
  const auto& message = j["choices"][0]["message"];
  if (!message.is_object() || !message.contains("content") || !message["content"].is_string()) {
    throw ProviderError("provider response has no message content");
  }
  CompletionReply reply;
  reply.text = message["content"].get<std::string>();
  reply.token_in = estimate_tokens(request.prompt);
  reply.token_out = estimate_tokens(reply.text);
  if (j.contains("usage") && j["usage"].is_object()) {
    const auto& u = j["usage"];
    if (u.contains("prompt_tokens") && u["prompt_tokens"].is_number_integer()) {
      reply.token_in = u["prompt_tokens"].get<long long>();
    }
    if (u.contains("completion_tokens") && u["completion_tokens"].is_number_integer()) {
      reply.token_out = u["completion_tokens"].get<long long>();
    }
  }
  return reply;
}

}  // namespace groundwork::gateway
