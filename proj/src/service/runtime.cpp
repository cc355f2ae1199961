#include "groundwork/service/runtime.hpp"

#include <spdlog/spdlog.h>

#include <cstdlib>

#include "groundwork/fsm/offline_backend.hpp"
#include "groundwork/fsm/search.hpp"
#include "groundwork/gateway/http_provider.hpp"
#include "groundwork/ingest/corpus.hpp"
#include "groundwork/retrieval/embedder.hpp"

namespace groundwork::service {

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

std::shared_ptr<Runtime> Runtime::open(const ServiceConfig& config, RuntimeOptions options) {
  config.validate();
  std::shared_ptr<Runtime> rt(new Runtime());
  rt->config_ = config;
  const auto& dir = config.data_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir / "sessions", ec);
  if (ec) throw StoreError("cannot create data directory " + dir.string() + ": " + ec.message());

  rt->clock_ = options.clock ? options.clock : std::make_shared<SystemClock>();

  if (options.provider) {
    rt->provider_ = options.provider;
  } else if (auto key = options.env ? options.env(config.api_key_env) : std::nullopt) {
    gateway::HttpProviderConfig hc;
    hc.base_url = config.api_base_url;
    hc.api_key = *key;
    rt->provider_ = std::make_shared<gateway::HttpProvider>(hc);
  } else {
    spdlog::warn("*** {} is not set: running on the OFFLINE heuristic backend; answers do not come from a model ***",
                 config.api_key_env);
    rt->provider_ = fsm::make_offline_provider();
    rt->offline_ = true;
  }
  gateway::RateTable rates = config.rate_table ? gateway::RateTable::load(*config.rate_table) : gateway::RateTable{};
  rt->gateway_ = std::make_shared<gateway::Gateway>(rt->provider_, config.bindings, rates, config.schema_budget);

  auto kb = std::make_shared<retrieval::KnowledgeBase>(std::make_shared<retrieval::HashingEmbedder>());
  kb->load(dir / "index");
  rt->stores_.knowledge = kb;
  rt->stores_.metrics = std::make_shared<store::MetricsStore>(dir / "metrics.csv");
  rt->stores_.dedup = std::make_shared<ingest::DedupStore>(dir / "dedup.jsonl");
  rt->stores_.missing = std::make_shared<ingest::MissingList>(dir / "missing-list.ndjson");
  rt->stores_.records = std::make_shared<ingest::RecordRegistry>(dir / "records.jsonl");
  rt->sessions_ = std::make_shared<store::SessionStore>(dir / "sessions");
  rt->search_ = std::make_shared<fsm::KnowledgeBaseSearch>(kb);
  rt->engine_ = rt->engine_for(config.engine, config.bindings, true);

  std::vector<std::shared_ptr<ingest::SourceAdapter>> adapters;
  std::shared_ptr<const ingest::CitationGraph> graph = std::make_shared<ingest::MapCitationGraph>();
  ingest::PipelineConfig pc;
  if (config.corpus_dir) {
    auto corpus = ingest::SyntheticCorpus::load(*config.corpus_dir);
    adapters = corpus.adapters();
    graph = corpus.graph();
    pc.axes = corpus.axes();
  }
  rt->pipeline_ = std::make_unique<ingest::IngestionPipeline>(rt->stores_, std::move(adapters), std::move(graph),
                                                              std::make_shared<ingest::PlainTextParser>(),
                                                              rt->gateway_, rt->clock_, pc);
  return rt;
}

std::shared_ptr<const fsm::Engine> Runtime::engine_for(const fsm::EngineConfig& config,
                                                       const gateway::ModelBindings& bindings,
                                                       bool persist_sessions) const {
  auto gw = std::make_shared<gateway::Gateway>(provider_, bindings, gateway_->rates(), config_.schema_budget);
  return std::make_shared<const fsm::Engine>(
      fsm::EngineDeps{gw, stores_.knowledge, search_, persist_sessions ? sessions_ : nullptr, clock_}, config);
}

void Runtime::flush() const {
  std::lock_guard lock(flush_mu_);
  stores_.knowledge->save(config_.data_dir / "index");
}

}  // namespace groundwork::service
