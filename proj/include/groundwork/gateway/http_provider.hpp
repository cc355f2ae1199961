#pragma once

#include <chrono>
#include <string>

#include "groundwork/gateway/provider.hpp"

namespace groundwork::gateway {

struct HttpProviderConfig {
  // Scheme, host and optional port, e.g. "https://api.openai.com" or
  // "http://127.0.0.1:8089". Requests go to <base_url><path>.
  std::string base_url = "https://api.openai.com";
  std::string path = "/v1/chat/completions";
  std::string api_key;
  std::chrono::seconds timeout{120};
};

// Client for an OpenAI-compatible chat-completions endpoint. The prompt is
// sent as a single user message; reasoning effort and temperature are sent
// only when the effective binding carries them. Token usage is taken from
// the response, or estimated when the server omits it.
class HttpProvider final : public Provider {
 public:
  explicit HttpProvider(HttpProviderConfig config);
  CompletionReply complete(const CompletionRequest& request) override;

 private:
  HttpProviderConfig config_;
};

}  // namespace groundwork::gateway
