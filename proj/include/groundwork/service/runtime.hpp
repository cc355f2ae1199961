#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "groundwork/fsm/engine.hpp"
#include "groundwork/ingest/pipeline.hpp"
#include "groundwork/service/config.hpp"
#include "groundwork/store/metrics_store.hpp"
#include "groundwork/store/session_store.hpp"

namespace groundwork::service {

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// Reads the process environment; empty values count as unset.
std::optional<std::string> process_env(const std::string& name);

struct RuntimeOptions {
  EnvLookup env = process_env;
  // Replaces the configured backend (tests and scripted runs).
  std::shared_ptr<gateway::Provider> provider;
  std::shared_ptr<const Clock> clock;  // null: system clock
};

// Everything a request needs: stores under data_dir, the model backend, the
// engine and the ingestion pipeline. Shared by the HTTP service and the CLI.
//
// Store layout under data_dir:
//   index/             vector indexes
//   sessions/          one JSON document per session
//   metrics.csv        normalized device metrics
//   dedup.jsonl        admission keys
//   missing-list.ndjson
//   records.jsonl      document status records
class Runtime {
 public:
  // Throws ConfigError for an invalid configuration and StoreError when a
  // store cannot be opened. Without credentials (and no provider override)
  // the offline backend is used and a warning is logged.
  static std::shared_ptr<Runtime> open(const ServiceConfig& config, RuntimeOptions options = {});

  const ServiceConfig& config() const { return config_; }
  bool offline() const { return offline_; }

  std::shared_ptr<const gateway::Gateway> gateway() const { return gateway_; }
  std::shared_ptr<gateway::Provider> provider() const { return provider_; }
  std::shared_ptr<retrieval::KnowledgeBase> knowledge() const { return stores_.knowledge; }
  std::shared_ptr<store::SessionStore> sessions() const { return sessions_; }
  const ingest::PipelineStores& stores() const { return stores_; }
  std::shared_ptr<const Clock> clock() const { return clock_; }

  // Engine with the configured settings and bindings.
  std::shared_ptr<const fsm::Engine> engine() const { return engine_; }
  // Engine for other settings over the same stores and backend. Sessions are
  // persisted only when `persist_sessions` is set.
  std::shared_ptr<const fsm::Engine> engine_for(const fsm::EngineConfig& config, const gateway::ModelBindings& bindings,
                                                bool persist_sessions) const;

  ingest::IngestionPipeline& pipeline() { return *pipeline_; }

  // Writes the vector indexes to disk (other stores write through).
  void flush() const;

 private:
  Runtime() = default;

  ServiceConfig config_;
  bool offline_ = false;
  std::shared_ptr<gateway::Provider> provider_;
  std::shared_ptr<const gateway::Gateway> gateway_;
  std::shared_ptr<const Clock> clock_;
  std::shared_ptr<store::SessionStore> sessions_;
  std::shared_ptr<fsm::SearchProvider> search_;
  ingest::PipelineStores stores_;
  std::shared_ptr<const fsm::Engine> engine_;
  std::unique_ptr<ingest::IngestionPipeline> pipeline_;
  mutable std::mutex flush_mu_;
};

}  // namespace groundwork::service
