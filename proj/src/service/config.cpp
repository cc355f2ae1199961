#include "groundwork/service/config.hpp"

#include <json.hpp>
#include <set>

#include "groundwork/core/fs.hpp"

namespace groundwork::service {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

void read_binding(const json& j, gateway::ModelRoleBinding& b, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  reject_unknown(j, {"model", "reasoning_effort", "temperature"}, where);
  if (j.contains("model")) b.model_id = j["model"].get<std::string>();
  if (j.contains("reasoning_effort")) {
    if (j["reasoning_effort"].is_null()) {
      b.reasoning_effort.reset();
    } else {
      try {
        b.reasoning_effort = gateway::parse_effort(j["reasoning_effort"].get<std::string>());
      } catch (const InvalidInput& e) {
        throw ConfigError(where + ": " + e.what());
      }
    }
  }
  if (j.contains("temperature")) {
    if (j["temperature"].is_null()) {
      b.temperature.reset();
    } else {
      b.temperature = j["temperature"].get<double>();
    }
  }
}

}  // namespace

ServiceConfig ServiceConfig::from_json(std::string_view text) {
  ServiceConfig c;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    reject_unknown(j,
                   {"models", "retrieval", "answer_gate", "retry_budget", "schema_budget", "allow_online_search",
                    "generate_titles", "data_dir", "corpus_dir", "rate_table", "api_base_url", "api_key_env", "host",
                    "port"},
                   "config");
    if (j.contains("models")) {
      const auto& m = j["models"];
      if (!m.is_object()) throw ConfigError("config.models: expected an object");
      reject_unknown(m, {"relevance", "confidence", "knowledge", "fast_title", "judge"}, "config.models");
      if (m.contains("relevance")) read_binding(m["relevance"], c.bindings.relevance, "config.models.relevance");
      if (m.contains("confidence")) read_binding(m["confidence"], c.bindings.confidence, "config.models.confidence");
      if (m.contains("knowledge")) read_binding(m["knowledge"], c.bindings.knowledge, "config.models.knowledge");
      if (m.contains("fast_title")) read_binding(m["fast_title"], c.bindings.fast_title, "config.models.fast_title");
      if (m.contains("judge")) read_binding(m["judge"], c.bindings.judge, "config.models.judge");
    }
    if (j.contains("retrieval")) {
      const auto& r = j["retrieval"];
      if (!r.is_object()) throw ConfigError("config.retrieval: expected an object");
      reject_unknown(r, {"start_k", "batch_increment", "max_k", "similarity_threshold", "top_l"}, "config.retrieval");
      auto& rc = c.engine.retrieval;
      if (r.contains("start_k")) rc.start_k = r["start_k"].get<std::size_t>();
      if (r.contains("batch_increment")) rc.batch_increment = r["batch_increment"].get<std::size_t>();
      if (r.contains("max_k")) rc.max_k = r["max_k"].get<std::size_t>();
      if (r.contains("similarity_threshold")) rc.similarity_threshold = r["similarity_threshold"].get<double>();
      if (r.contains("top_l")) rc.top_l = r["top_l"].get<std::size_t>();
    }
    if (j.contains("answer_gate")) c.engine.answer_gate = j["answer_gate"].get<double>();
    if (j.contains("retry_budget")) c.engine.retry_budget = j["retry_budget"].get<int>();
    if (j.contains("schema_budget")) c.schema_budget = j["schema_budget"].get<int>();
    if (j.contains("allow_online_search")) c.engine.allow_online_search = j["allow_online_search"].get<bool>();
    if (j.contains("generate_titles")) c.engine.generate_titles = j["generate_titles"].get<bool>();
    if (j.contains("data_dir")) c.data_dir = j["data_dir"].get<std::string>();
    if (j.contains("corpus_dir")) c.corpus_dir = std::filesystem::path(j["corpus_dir"].get<std::string>());
    if (j.contains("rate_table")) c.rate_table = std::filesystem::path(j["rate_table"].get<std::string>());
    if (j.contains("api_base_url")) c.api_base_url = j["api_base_url"].get<std::string>();
    if (j.contains("api_key_env")) c.api_key_env = j["api_key_env"].get<std::string>();
    if (j.contains("host")) c.host = j["host"].get<std::string>();
    if (j.contains("port")) c.port = j["port"].get<int>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ServiceConfig ServiceConfig::load(const std::filesystem::path& path) {
  std::string text;
  try {
    text = fs::read_file(path);
  } catch (const Error& e) {
    throw ConfigError("cannot read config " + path.string() + ": " + e.what());
  }
  auto c = from_json(text);
  // Relative paths in the file are relative to the file.
  auto base = path.parent_path();
  auto resolve = [&base](std::filesystem::path& p) {
    if (p.is_relative() && !base.empty()) p = base / p;
  };
  resolve(c.data_dir);
  if (c.corpus_dir) resolve(*c.corpus_dir);
  if (c.rate_table) resolve(*c.rate_table);
  return c;
}

void ServiceConfig::validate() const {
  engine.validate();
  if (schema_budget < 1) throw ConfigError("schema budget must be at least 1");
  if (data_dir.empty()) throw ConfigError("data_dir must be set");
  if (port < 0 || port > 65535) throw ConfigError("port must be in 0..65535");
  if (api_key_env.empty()) throw ConfigError("api_key_env must name an environment variable");
  for (const auto* b : {&bindings.relevance, &bindings.confidence, &bindings.knowledge, &bindings.fast_title,
                        &bindings.judge}) {
    if (b->model_id.empty()) throw ConfigError("empty model id for role " + std::string(gateway::role_name(b->role)));
    if (b->temperature && (*b->temperature < 0.0 || *b->temperature > 2.0)) {
      throw ConfigError("temperature must be in [0, 2]");
    }
  }
}

}  // namespace groundwork::service
