#pragma once

#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "groundwork/gateway/types.hpp"

namespace groundwork::gateway {

// Transport or vendor failure. Retryable from the gateway's point of view.
class ProviderError : public Error {
 public:
  using Error::Error;
};

struct CompletionRequest {
  ModelRoleBinding binding;
  std::string state_tag;  // e.g. "relevance", "confidence", "self_eval"
  std::string prompt;
};

struct CompletionReply {
  std::string text;
  long long token_in = 0;
  long long token_out = 0;
};

// Text in, text out, declared token usage.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual CompletionReply complete(const CompletionRequest& request) = 0;
};

// ceil(chars / 4), the usual rough token estimate.
long long estimate_tokens(std::string_view text);

// Deterministic offline backend. Replies come, per state tag, from a FIFO
// queue; when the queue is empty, from a handler; then from a default reply.
// A tag with none of the three raises ProviderError. Every call is logged.
class ScriptedProvider final : public Provider {
 public:
  using Handler = std::function<std::string(const CompletionRequest&)>;
  // A scripted entry that raises instead of replying.
  struct Failure {
    std::string message;
  };

  void push(const std::string& tag, std::string reply);
  void push_failure(const std::string& tag, std::string message);
  void set_default(const std::string& tag, std::string reply);
  void set_handler(const std::string& tag, Handler handler);

  CompletionReply complete(const CompletionRequest& request) override;

  std::vector<CompletionRequest> calls() const;
  std::size_t call_count(std::string_view tag) const;
  std::size_t pending(const std::string& tag) const;
  void clear_log();

 private:
  struct Entry {
    std::optional<std::string> reply;
    std::optional<Failure> failure;
  };
  mutable std::mutex mu_;
  std::map<std::string, std::deque<Entry>, std::less<>> queues_;
  std::map<std::string, std::string, std::less<>> defaults_;
  std::map<std::string, Handler, std::less<>> handlers_;
  std::vector<CompletionRequest> log_;
};

}  // namespace groundwork::gateway
