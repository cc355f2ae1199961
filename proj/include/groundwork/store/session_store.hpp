#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "groundwork/core/time.hpp"
#include "groundwork/gateway/gateway.hpp"

namespace groundwork::store {

enum class MessageRole { User, Assistant, System };

std::string_view role_name(MessageRole role);
MessageRole parse_role(std::string_view name);  // throws ValidationError

struct MessageEntry {
  MessageRole role = MessageRole::User;
  std::string content;
  Timestamp timestamp;
  std::optional<gateway::CompletionUsage> usage;
  bool operator==(const MessageEntry&) const = default;
};

struct SessionRecord {
  std::string session_id;
  std::string title;
  Timestamp created_at;
  std::vector<MessageEntry> messages;
  bool operator==(const SessionRecord&) const = default;
};

// Throws ValidationError: id not a UUID4, title outside 3-6 words, or
// message timestamps decreasing.
void validate(const SessionRecord& record);

// {session_id, title, created_at, messages: [{role, content, timestamp, usage}]}
std::string to_json(const SessionRecord& record);
SessionRecord session_from_json(std::string_view text);  // throws ValidationError

// One JSON document per session, <dir>/<session_id>.json, written atomically.
// Last write wins. Writes to one session are serialized; different sessions
// proceed in parallel.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path dir);

  void persist(const SessionRecord& record);
  SessionRecord load(const std::string& session_id) const;  // throws NotFound
  bool exists(const std::string& session_id) const;
  // Ordered by created_at, then id.
  std::vector<SessionRecord> list() const;

  // Loads a record (NotFound if absent), applies `fn` and writes it back, all
  // under the session's lock.
  template <typename Fn>
  SessionRecord update(const std::string& session_id, Fn&& fn);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path path_for(const std::string& session_id) const;
  void write_unlocked(const SessionRecord& record);
  std::mutex& lock_for(const std::string& session_id);

  std::filesystem::path dir_;
  std::mutex locks_mu_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

template <typename Fn>
SessionRecord SessionStore::update(const std::string& session_id, Fn&& fn) {
  std::lock_guard lock(lock_for(session_id));
  SessionRecord record = load(session_id);
  fn(record);
  validate(record);
  write_unlocked(record);
  return record;
}

// Asks the title model for a 3-6 word title. Out-of-range replies are
// retried within the gateway budget; after that a reply longer than six words
// is cut to its first six, anything else gives "Untitled Session YYYY-MM-DD".
std::string title_session(std::string_view first_exchange, const gateway::Gateway& gw, Timestamp now,
                          gateway::CompletionUsage* usage = nullptr);
std::string fallback_title(Timestamp now);

}  // namespace groundwork::store
