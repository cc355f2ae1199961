#include "groundwork/store/session_store.hpp"

#include <algorithm>

#include <json.hpp>

#include "groundwork/core/fs.hpp"
#include "groundwork/core/hash.hpp"
#include "groundwork/core/text.hpp"

namespace groundwork::store {

using nlohmann::ordered_json;

std::string_view role_name(MessageRole role) {
  switch (role) {
    case MessageRole::User:
      return "user";
    case MessageRole::Assistant:
      return "assistant";
    case MessageRole::System:
      return "system";
  }
  return "user";
}

MessageRole parse_role(std::string_view name) {
  if (name == "user") return MessageRole::User;
  if (name == "assistant") return MessageRole::Assistant;
  if (name == "system") return MessageRole::System;
  throw ValidationError("unknown message role '" + std::string(name) + "'");
}

void validate(const SessionRecord& record) {
  if (!is_uuid4(record.session_id)) throw ValidationError("session id '" + record.session_id + "' is not a UUID4");
  auto words = text::split_words(record.title).size();
  if (words < gateway::kMinTitleWords || words > gateway::kMaxTitleWords) {
    throw ValidationError("session title must have 3 to 6 words");
  }
  for (std::size_t i = 1; i < record.messages.size(); ++i) {
    if (record.messages[i].timestamp < record.messages[i - 1].timestamp) {
      throw ValidationError("message timestamps decrease at index " + std::to_string(i));
    }
  }
}

std::string to_json(const SessionRecord& record) {
  ordered_json j;
  j["session_id"] = record.session_id;
  j["title"] = record.title;
  j["created_at"] = format_iso8601(record.created_at);
  auto messages = ordered_json::array();
  for (const auto& m : record.messages) {
    ordered_json mj;
    mj["role"] = role_name(m.role);
    mj["content"] = m.content;
    mj["timestamp"] = format_iso8601(m.timestamp);
    if (m.usage) {
      mj["usage"] = {{"token_in", m.usage->token_in}, {"token_out", m.usage->token_out}, {"cost_usd", m.usage->cost_usd}};
    } else {
      mj["usage"] = nullptr;
    }
    messages.push_back(std::move(mj));
  }
  j["messages"] = std::move(messages);
  return j.dump(2) + "\n";
}

namespace {

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("session record lacks '") + key + "'");
  return j.at(key);
}

std::string string_field(const nlohmann::json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) throw ValidationError(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

SessionRecord session_from_json(std::string_view text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ValidationError("session record is not valid JSON");
  SessionRecord r;
  r.session_id = string_field(j, "session_id");
  r.title = string_field(j, "title");
  r.created_at = parse_iso8601(string_field(j, "created_at"));
  const auto& messages = field(j, "messages");
  if (!messages.is_array()) throw ValidationError("'messages' must be an array");
  for (const auto& mj : messages) {
    if (!mj.is_object() || mj.size() != 4) {
      throw ValidationError("a message entry must have exactly role, content, timestamp, usage");
    }
    MessageEntry m;
    m.role = parse_role(string_field(mj, "role"));
    m.content = string_field(mj, "content");
    m.timestamp = parse_iso8601(string_field(mj, "timestamp"));
    const auto& u = field(mj, "usage");
    if (!u.is_null()) {
      if (!u.is_object()) throw ValidationError("'usage' must be an object or null");
      gateway::CompletionUsage usage;
      usage.token_in = field(u, "token_in").get<long long>();
      usage.token_out = field(u, "token_out").get<long long>();
      usage.cost_usd = field(u, "cost_usd").get<double>();
      m.usage = usage;
    }
    r.messages.push_back(std::move(m));
  }
  return r;
}

SessionStore::SessionStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw StoreError("cannot create session directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path SessionStore::path_for(const std::string& session_id) const {
  // The id doubles as a file name, so only accept well-formed ids.
  if (!is_uuid4(session_id)) throw NotFound("no session '" + session_id + "'");
  return dir_ / (session_id + ".json");
}

std::mutex& SessionStore::lock_for(const std::string& session_id) {
  std::lock_guard lock(locks_mu_);
  auto& m = locks_[session_id];
  if (!m) m = std::make_unique<std::mutex>();
  return *m;
}

void SessionStore::write_unlocked(const SessionRecord& record) {
  fs::write_file_atomic(path_for(record.session_id), to_json(record));
}

void SessionStore::persist(const SessionRecord& record) {
  validate(record);
  std::lock_guard lock(lock_for(record.session_id));
  write_unlocked(record);
}

SessionRecord SessionStore::load(const std::string& session_id) const {
  auto path = path_for(session_id);
  if (!std::filesystem::exists(path)) throw NotFound("no session '" + session_id + "'");
  return session_from_json(fs::read_file(path));
}

bool SessionStore::exists(const std::string& session_id) const {
  return is_uuid4(session_id) && std::filesystem::exists(dir_ / (session_id + ".json"));
}

std::vector<SessionRecord> SessionStore::list() const {
  std::vector<SessionRecord> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    const auto& p = entry.path();
    if (p.extension() != ".json" || !is_uuid4(p.stem().string())) continue;
    out.push_back(session_from_json(fs::read_file(p)));
  }
  std::sort(out.begin(), out.end(), [](const SessionRecord& a, const SessionRecord& b) {
    return std::tie(a.created_at, a.session_id) < std::tie(b.created_at, b.session_id);
  });
  return out;
}

std::string fallback_title(Timestamp now) {
  auto day = std::chrono::floor<std::chrono::days>(now);
  std::chrono::year_month_day ymd{day};
  Date d{static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day())};
  return "Untitled Session " + d.to_string();
}

std::string title_session(std::string_view first_exchange, const gateway::Gateway& gw, Timestamp now,
                          gateway::CompletionUsage* usage) {
  if (text::trim(first_exchange).empty()) throw InvalidInput("cannot title an empty exchange");
  std::string prompt = gateway::render(gateway::builtin_template(gateway::tags::kTitle),
                                       {{"exchange", std::string(first_exchange)}});
  try {
    auto result = gw.call(gateway::Role::FastTitle, gateway::tags::kTitle, prompt, gateway::parse_title);
    if (usage) *usage += result.usage;
    return result.value;
  } catch (const gateway::SchemaExhausted& e) {
    if (usage) *usage += e.usage();
    auto words = text::split_words(e.last_raw());
    if (words.size() > gateway::kMaxTitleWords) {
      words.resize(gateway::kMaxTitleWords);
      return text::join(words, " ");
    }
    return fallback_title(now);
  }
}

}  // namespace groundwork::store
