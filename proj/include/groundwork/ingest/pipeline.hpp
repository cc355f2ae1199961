#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "groundwork/gateway/gateway.hpp"
#include "groundwork/ingest/extraction.hpp"
#include "groundwork/ingest/parser.hpp"
#include "groundwork/ingest/sources.hpp"
#include "groundwork/ingest/stores.hpp"
#include "groundwork/retrieval/knowledge_base.hpp"
#include "groundwork/store/metrics_store.hpp"

namespace groundwork::ingest {

// Points inside dual_write where a fault hook may throw.
enum class WritePoint { BeforeIndex, AfterIndex, AfterMetrics };
std::string_view write_point_name(WritePoint p);

using FaultHook = std::function<void(WritePoint)>;

struct DualWriteResult {
  bool committed = false;
  std::string error;  // set when rolled back
};

// Writes the chunks to the main vector index and upserts the metrics row as
// one unit: if anything throws (store failure or injected fault), both stores
// are put back exactly as they were. Calls are serialized.
DualWriteResult dual_write(const DocumentRecord& doc, const std::vector<retrieval::Chunk>& chunks,
                           const ExtractedMetrics& metrics, retrieval::KnowledgeBase& kb, store::MetricsStore& ms,
                           Timestamp now, const FaultHook& fault = {});

struct PipelineStores {
  std::shared_ptr<retrieval::KnowledgeBase> knowledge;
  std::shared_ptr<store::MetricsStore> metrics;
  std::shared_ptr<DedupStore> dedup;
  std::shared_ptr<MissingList> missing;
  std::shared_ptr<RecordRegistry> records;
};

struct PipelineConfig {
  KeywordAxes axes;
  retrieval::ChunkingConfig chunking;
  bool snowball = true;
  double saturation = 0.9;
  bool reasoning_pass = true;  // needs a gateway
};

enum class ProcessOutcome { Duplicate, Ingested, AbstractOnly, NeedsManualFix, WriteFailed };
std::string_view outcome_name(ProcessOutcome o);

struct RunReport {
  std::size_t tuples = 0;
  std::size_t candidates = 0;
  std::size_t duplicates = 0;
  std::size_t ingested = 0;
  std::size_t abstract_only = 0;
  std::size_t needs_manual_fix = 0;
  std::size_t write_failures = 0;
  std::size_t snowball_discovered = 0;
  std::size_t snowball_waves = 0;
  std::vector<std::string> warnings;
  gateway::CompletionUsage usage;
};

class PipelineBusy : public Error {
 public:
  using Error::Error;
};

// Crawl -> dedup -> paywall/parse -> extract -> dual write, plus snowball
// expansion and upload re-entry. One run at a time.
class IngestionPipeline {
 public:
  IngestionPipeline(PipelineStores stores, std::vector<std::shared_ptr<SourceAdapter>> adapters,
                    std::shared_ptr<const CitationGraph> graph, std::shared_ptr<const DocumentParser> parser,
                    std::shared_ptr<const gateway::Gateway> gateway, std::shared_ptr<const Clock> clock,
                    PipelineConfig config);

  // Full pass over the keyword matrix. Throws PipelineBusy if a run or an
  // upload is in progress.
  RunReport run();

  // One candidate through dedup and the rest of the pipeline.
  ProcessOutcome process(const Candidate& candidate, RunReport& report);

  // Paywalled path: abstract chunks and any metrics the abstract states go
  // through dual_write; status AbstractOnly; Missing-List entry added.
  ProcessOutcome handle_paywall(const Candidate& candidate, RunReport& report);

  // Re-enters an AbstractOnly or NeedsManualFix document at the parsing
  // stage with curator-supplied bytes. Throws NotFound for any other id,
  // InvalidInput for empty bytes.
  DocumentRecord requeue_upload(std::string_view bytes, const CanonicalId& canonical);

  void set_fault_hook(FaultHook hook);
  const PipelineStores& stores() const { return stores_; }
  const PipelineConfig& config() const { return config_; }

 private:
  ProcessOutcome ingest_parsed(DocumentRecord record, const StructuredDocument& doc, RunReport& report);
  void route_manual_fix(DocumentRecord record, const std::string& why, RunReport& report);
  std::vector<retrieval::Chunk> make_chunks(const DocumentRecord& record, std::string_view text) const;
  std::optional<Candidate> resolve(const CanonicalId& id) const;

  PipelineStores stores_;
  std::vector<std::shared_ptr<SourceAdapter>> adapters_;
  std::shared_ptr<const CitationGraph> graph_;
  std::shared_ptr<const DocumentParser> parser_;
  std::shared_ptr<const gateway::Gateway> gateway_;
  std::shared_ptr<const Clock> clock_;
  PipelineConfig config_;
  FaultHook fault_;
  std::mutex run_mu_;
};

}  // namespace groundwork::ingest
