#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "groundwork/fsm/engine.hpp"
#include "groundwork/gateway/gateway.hpp"

namespace groundwork::service {

// Startup configuration. JSON form (every key optional):
//
//   {
//     "models": {"relevance": {"model": "gpt-4o-mini"},
//                "knowledge": {"model": "o3", "reasoning_effort": "high", "temperature": 0.2}, ...},
//     "retrieval": {"start_k": 3, "batch_increment": 3, "max_k": 12,
//                   "similarity_threshold": 0.75, "top_l": 12},
//     "answer_gate": 0.5, "retry_budget": 5, "schema_budget": 3,
//     "allow_online_search": true, "generate_titles": true,
//     "data_dir": "groundwork-data", "corpus_dir": "corpus", "rate_table": "rates.json",
//     "api_base_url": "https://api.openai.com", "api_key_env": "OPENAI_API_KEY",
//     "host": "127.0.0.1", "port": 8080
//   }
//
// Credentials are never stored in the file; the key is read from the
// environment variable named by api_key_env.
struct ServiceConfig {
  gateway::ModelBindings bindings;
  fsm::EngineConfig engine;
  int schema_budget = gateway::kDefaultSchemaBudget;
  std::filesystem::path data_dir = "groundwork-data";
  std::optional<std::filesystem::path> corpus_dir;
  std::optional<std::filesystem::path> rate_table;
  std::string api_base_url = "https://api.openai.com";
  std::string api_key_env = "OPENAI_API_KEY";
  std::string host = "127.0.0.1";
  int port = 8080;

  // Throws ConfigError on unknown keys, wrong types or invalid values.
  static ServiceConfig from_json(std::string_view text);
  static ServiceConfig load(const std::filesystem::path& path);

  void validate() const;  // throws ConfigError
};

}  // namespace groundwork::service
