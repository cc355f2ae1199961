#include "groundwork/ingest/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <set>

#include "groundwork/core/hash.hpp"

namespace groundwork::ingest {

std::string_view write_point_name(WritePoint p) {
  switch (p) {
    case WritePoint::BeforeIndex:
      return "before_index";
    case WritePoint::AfterIndex:
      return "after_index";
    case WritePoint::AfterMetrics:
      return "after_metrics";
  }
  return "?";
}

DualWriteResult dual_write(const DocumentRecord& doc, const std::vector<retrieval::Chunk>& chunks,
                           const ExtractedMetrics& metrics, retrieval::KnowledgeBase& kb, store::MetricsStore& ms,
                           Timestamp now, const FaultHook& fault) {
  static std::mutex write_mu;
  std::lock_guard lock(write_mu);

  auto& index = kb.index(retrieval::KnowledgeBase::kMainIndex);
  const auto previous_row = ms.find(doc.canonical);
  retrieval::IndexUndo undo;
  bool metrics_touched = false;
  try {
    if (fault) fault(WritePoint::BeforeIndex);
    kb.index_add(chunks, retrieval::KnowledgeBase::kMainIndex, &undo);
    if (fault) fault(WritePoint::AfterIndex);
    metrics_touched = true;
    ms.upsert(doc.canonical, doc.pub_date, metrics, now);
    if (fault) fault(WritePoint::AfterMetrics);
  } catch (const std::exception& e) {
    if (metrics_touched) ms.restore(doc.canonical, previous_row);
    index.rollback(undo);
    spdlog::warn("dual write for {} rolled back: {}", doc.canonical.to_string(), e.what());
    return {false, e.what()};
  }
  return {true, {}};
}

std::string_view outcome_name(ProcessOutcome o) {
  switch (o) {
    case ProcessOutcome::Duplicate:
      return "duplicate";
    case ProcessOutcome::Ingested:
      return "ingested";
    case ProcessOutcome::AbstractOnly:
      return "abstract_only";
    case ProcessOutcome::NeedsManualFix:
      return "needs_manual_fix";
    case ProcessOutcome::WriteFailed:
      return "write_failed";
  }
  return "?";
}

IngestionPipeline::IngestionPipeline(PipelineStores stores, std::vector<std::shared_ptr<SourceAdapter>> adapters,
                                     std::shared_ptr<const CitationGraph> graph,
                                     std::shared_ptr<const DocumentParser> parser,
                                     std::shared_ptr<const gateway::Gateway> gateway,
                                     std::shared_ptr<const Clock> clock, PipelineConfig config)
    : stores_(std::move(stores)),
      adapters_(std::move(adapters)),
      graph_(std::move(graph)),
      parser_(std::move(parser)),
      gateway_(std::move(gateway)),
      clock_(std::move(clock)),
      config_(std::move(config)) {
  if (!stores_.knowledge || !stores_.metrics || !stores_.dedup || !stores_.missing || !stores_.records) {
    throw ConfigError("ingestion pipeline needs every store");
  }
  if (!parser_) throw ConfigError("ingestion pipeline needs a document parser");
  if (!clock_) throw ConfigError("ingestion pipeline needs a clock");
  if (config_.chunking.window == 0 || config_.chunking.overlap >= config_.chunking.window) {
    throw ConfigError("chunk overlap must be smaller than the window");
  }
  if (!(config_.saturation > 0.0 && config_.saturation <= 1.0)) {
    throw ConfigError("snowball saturation must be in (0, 1]");
  }
}

void IngestionPipeline::set_fault_hook(FaultHook hook) { fault_ = std::move(hook); }

std::vector<retrieval::Chunk> IngestionPipeline::make_chunks(const DocumentRecord& record,
                                                             std::string_view text) const {
  retrieval::ChunkMetadata meta{record.title, record.authors, record.pub_date.year, record.venue, record.tier};
  return retrieval::chunk_text(record.canonical, text, meta, config_.chunking);
}

namespace {

DedupKey key_of(const DocumentRecord& r) { return {r.sha1_pdf, r.canonical.to_string()}; }

}  // namespace

ProcessOutcome IngestionPipeline::process(const Candidate& candidate, RunReport& report) {
  DocumentRecord record = candidate.record;
  record.status = DocStatus::New;
  record.history = {DocStatus::New};
  record.sha1_pdf = candidate.pdf_bytes ? std::optional(sha1_hex(*candidate.pdf_bytes)) : std::nullopt;
  if (graph_) {
    record.citations_out = graph_->references(record.canonical);
    record.cited_by = graph_->cited_by(record.canonical);
  }

  if (stores_.dedup->check_and_insert(key_of(record)) == DedupDecision::Duplicate) {
    ++report.duplicates;
    return ProcessOutcome::Duplicate;
  }
  stores_.records->put(record);

  if (!candidate.pdf_bytes) {
    Candidate admitted = candidate;
    admitted.record = record;
    return handle_paywall(admitted, report);
  }

  StructuredDocument doc;
  try {
    doc = parser_->parse(*candidate.pdf_bytes);
  } catch (const std::exception& e) {
    route_manual_fix(record, e.what(), report);
    return ProcessOutcome::NeedsManualFix;
  }
  record.move_to(DocStatus::Parsed);
  stores_.records->put(record);
  auto outcome = ingest_parsed(record, doc, report);
  if (outcome == ProcessOutcome::WriteFailed) {
    // Forget the admission so that the next run retries the document.
    stores_.records->erase(record.canonical);
    stores_.dedup->erase(key_of(record));
  }
  return outcome;
}

ProcessOutcome IngestionPipeline::handle_paywall(const Candidate& candidate, RunReport& report) {
  DocumentRecord record = stores_.records->find(candidate.record.canonical).value_or(candidate.record);
  if (record.status != DocStatus::New) {
    throw InvalidInput("paywall handling needs a New record, " + record.canonical.to_string() + " is " +
                       std::string(status_name(record.status)));
  }
  auto chunks = make_chunks(record, candidate.abstract);
  auto metrics = extract_deterministic(std::string_view(candidate.abstract));
  auto result = dual_write(record, chunks, metrics, *stores_.knowledge, *stores_.metrics, clock_->now(), fault_);
  if (!result.committed) {
    ++report.write_failures;
    report.warnings.push_back("write failed for " + record.canonical.to_string() + ": " + result.error);
    stores_.records->erase(record.canonical);
    stores_.dedup->erase(key_of(record));
    return ProcessOutcome::WriteFailed;
  }
  record.move_to(DocStatus::AbstractOnly);
  stores_.records->put(record);
  stores_.missing->add({record.canonical, record.title, record.tier, clock_->now()});
  ++report.abstract_only;
  return ProcessOutcome::AbstractOnly;
}

void IngestionPipeline::route_manual_fix(DocumentRecord record, const std::string& why, RunReport& report) {
  record.move_to(DocStatus::NeedsManualFix);
  stores_.records->put(record);
  stores_.missing->add({record.canonical, record.title, record.tier, clock_->now()});
  ++report.needs_manual_fix;
  report.warnings.push_back(record.canonical.to_string() + " needs a manual fix: " + why);
  spdlog::warn("{} needs a manual fix: {}", record.canonical.to_string(), why);
}

ProcessOutcome IngestionPipeline::ingest_parsed(DocumentRecord record, const StructuredDocument& doc,
                                                RunReport& report) {
  auto metrics = extract_deterministic(doc);
  if (config_.reasoning_pass && gateway_) {
    auto reasoning = extract_reasoning(select_excerpt(doc), metrics, *gateway_);
    report.usage += reasoning.usage;
    if (reasoning.warning) report.warnings.push_back(record.canonical.to_string() + ": " + *reasoning.warning);
    metrics = combine_passes(metrics, reasoning.metrics);
  }
  auto chunks = make_chunks(record, doc.full_text());
  auto result = dual_write(record, chunks, metrics, *stores_.knowledge, *stores_.metrics, clock_->now(), fault_);
  if (!result.committed) {
    ++report.write_failures;
    report.warnings.push_back("write failed for " + record.canonical.to_string() + ": " + result.error);
    return ProcessOutcome::WriteFailed;
  }
  record.move_to(DocStatus::Ingested);
  stores_.records->put(record);
  stores_.missing->remove(record.canonical);
  ++report.ingested;
  return ProcessOutcome::Ingested;
}

std::optional<Candidate> IngestionPipeline::resolve(const CanonicalId& id) const {
  for (int tier = 1; tier <= 5; ++tier) {
    for (const auto& adapter : adapters_) {
      if (!adapter || adapter->tier() != tier) continue;
      try {
        if (auto c = adapter->fetch(id)) {
          c->record.tier = tier;
          return c;
        }
      } catch (const std::exception& e) {
        spdlog::warn("tier {} ({}) fetch of {} failed: {}", tier, adapter->name(), id.to_string(), e.what());
      }
    }
  }
  return std::nullopt;
}

RunReport IngestionPipeline::run() {
  std::unique_lock lock(run_mu_, std::try_to_lock);
  if (!lock.owns_lock()) throw PipelineBusy("an ingestion run or upload is already in progress");

  RunReport report;
  auto tuples = expand_matrix(config_.axes);
  report.tuples = tuples.size();
  std::vector<CanonicalId> seeds;
  std::set<CanonicalId> seed_set;
  for (const auto& tuple : tuples) {
    CrawlResult crawl;
    try {
      crawl = crawl_tiers(tuple, adapters_);
    } catch (const CrawlError& e) {
      report.warnings.push_back(e.what());
      spdlog::warn("{}", e.what());
      continue;
    }
    for (auto& w : crawl.warnings) report.warnings.push_back(std::move(w));
    for (const auto& c : crawl.candidates) {
      ++report.candidates;
      if (seed_set.insert(c.record.canonical).second) seeds.push_back(c.record.canonical);
      process(c, report);
    }
  }

  if (config_.snowball && graph_ && !seeds.empty()) {
    auto dedup = stores_.dedup;
    auto expansion = snowball(
        seeds, *graph_, [&](const CanonicalId& id) { return dedup->contains_id(id.to_string()); },
        config_.saturation);
    report.snowball_waves = expansion.waves.size();
    report.snowball_discovered = expansion.discovered.size();
    for (const auto& id : expansion.discovered) {
      auto candidate = resolve(id);
      if (!candidate) {
        report.warnings.push_back("snowball found " + id.to_string() + " but no source resolves it");
        continue;
      }
      ++report.candidates;
      process(*candidate, report);
    }
  }
  spdlog::info("ingestion run: {} tuples, {} candidates, {} ingested, {} abstract-only, {} manual-fix, {} duplicates",
               report.tuples, report.candidates, report.ingested, report.abstract_only, report.needs_manual_fix,
               report.duplicates);
  return report;
}

DocumentRecord IngestionPipeline::requeue_upload(std::string_view bytes, const CanonicalId& canonical) {
  if (bytes.empty()) throw InvalidInput("uploaded document is empty");
  std::unique_lock lock(run_mu_, std::try_to_lock);
  if (!lock.owns_lock()) throw PipelineBusy("an ingestion run or upload is already in progress");

  auto found = stores_.records->find(canonical);
  if (!found || (found->status != DocStatus::AbstractOnly && found->status != DocStatus::NeedsManualFix)) {
    throw NotFound("no Missing-List or manual-fix document " + canonical.to_string());
  }
  DocumentRecord record = *found;
  record.move_to(DocStatus::New);
  const auto sha1 = sha1_hex(bytes);
  record.sha1_pdf = sha1;
  stores_.records->put(record);

  RunReport report;
  StructuredDocument doc;
  try {
    doc = parser_->parse(bytes);
  } catch (const std::exception& e) {
    route_manual_fix(record, e.what(), report);
    return *stores_.records->find(canonical);
  }
  record.move_to(DocStatus::Parsed);
  stores_.records->put(record);
  if (ingest_parsed(record, doc, report) == ProcessOutcome::WriteFailed) {
    route_manual_fix(*stores_.records->find(canonical), "write failed after upload", report);
  } else {
    try {
      stores_.dedup->attach_sha1(canonical.to_string(), sha1);
    } catch (const NotFound&) {
      stores_.dedup->check_and_insert({sha1, canonical.to_string()});
    }
  }
  return *stores_.records->find(canonical);
}

}  // namespace groundwork::ingest
