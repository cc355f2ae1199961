#include "groundwork/gateway/provider.hpp"

#include <algorithm>

namespace groundwork::gateway {

long long estimate_tokens(std::string_view text) { return static_cast<long long>((text.size() + 3) / 4); }

void ScriptedProvider::push(const std::string& tag, std::string reply) {
  std::lock_guard lock(mu_);
  queues_[tag].push_back(Entry{std::move(reply), std::nullopt});
}

void ScriptedProvider::push_failure(const std::string& tag, std::string message) {
  std::lock_guard lock(mu_);
  queues_[tag].push_back(Entry{std::nullopt, Failure{std::move(message)}});
}

void ScriptedProvider::set_default(const std::string& tag, std::string reply) {
  std::lock_guard lock(mu_);
  defaults_[tag] = std::move(reply);
}

void ScriptedProvider::set_handler(const std::string& tag, Handler handler) {
  std::lock_guard lock(mu_);
  handlers_[tag] = std::move(handler);
}

CompletionReply ScriptedProvider::complete(const CompletionRequest& request) {
  std::optional<std::string> reply;
  Handler handler;
  {
    std::lock_guard lock(mu_);
    log_.push_back(request);
    auto q = queues_.find(request.state_tag);
    if (q != queues_.end() && !q->second.empty()) {
      Entry e = std::move(q->second.front());
      q->second.pop_front();
      if (e.failure) throw ProviderError("scripted failure for '" + request.state_tag + "': " + e.failure->message);
      reply = std::move(e.reply);
    } else if (auto h = handlers_.find(request.state_tag); h != handlers_.end()) {
      handler = h->second;
    } else if (auto d = defaults_.find(request.state_tag); d != defaults_.end()) {
      reply = d->second;
    } else {
      throw ProviderError("no scripted reply for state tag '" + request.state_tag + "'");
    }
  }
  // Handlers run outside the lock so they may be slow or re-entrant.
  if (!reply) reply = handler(request);
  return CompletionReply{*reply, estimate_tokens(request.prompt), estimate_tokens(*reply)};
}

std::vector<CompletionRequest> ScriptedProvider::calls() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::size_t ScriptedProvider::call_count(std::string_view tag) const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(
      std::count_if(log_.begin(), log_.end(), [&](const CompletionRequest& r) { return r.state_tag == tag; }));
}

std::size_t ScriptedProvider::pending(const std::string& tag) const {
  std::lock_guard lock(mu_);
  auto q = queues_.find(tag);
  return q == queues_.end() ? 0 : q->second.size();
}

void ScriptedProvider::clear_log() {
  std::lock_guard lock(mu_);
  log_.clear();
}

}  // namespace groundwork::gateway
