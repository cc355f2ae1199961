#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "groundwork/eval/manifest.hpp"
#include "groundwork/eval/metrics.hpp"
#include "groundwork/fsm/engine.hpp"

namespace groundwork::eval {

struct RunRecord {
  RunConfig config;
  std::string answers;
  std::vector<std::string> citations_raw;  // "doi:...#span"
  std::vector<std::string> cited_titles;   // for citation alignment
  double latency_s = 0.0;
  long long token_in = 0;
  long long token_out = 0;
  bool confidence_flag = false;  // abstained or carried a disclaimer
  double confidence_score = 0.0;
  double cost_usd = 0.0;
  bool failed = false;
  bool irrelevant = false;
  std::string error;
  fsm::Trace trace;  // partial for failed runs
};

// Builds the engine a run should use. Called once per run.
using EngineFactory = std::function<std::shared_ptr<const fsm::Engine>(const RunConfig&)>;

// Engine settings and model bindings for a run: the role models, knowledge
// reasoning effort and temperature, online search flag, and a retrieval
// depth of retrieval_k (top_L = retrieval_k, the dynamic-k ladder capped at
// it).
fsm::EngineConfig engine_config_for(const RunConfig& run, fsm::EngineConfig base = {});
gateway::ModelBindings bindings_for(const RunConfig& run, gateway::ModelBindings base = {});

// One question through a fresh session. Never throws for engine failures:
// those come back as a row with failed = true, the error text and the trace
// so far. `latency_clock` measures latency_s (steady clock when null).
RunRecord execute_run(const RunConfig& config, const Question& question, const EngineFactory& factory,
                      const Clock* latency_clock = nullptr);

struct SweepOptions {
  std::size_t workers = 1;
  // Per-run latency clock; null means the steady clock.
  std::function<std::shared_ptr<const Clock>()> latency_clock;
};

// Runs the manifest on a worker pool. Output is in manifest order.
std::vector<RunRecord> execute_manifest(const RunManifest& manifest, const std::vector<Question>& questions,
                                        const EngineFactory& factory, const SweepOptions& options = {});

// Fixed column order of the results file.
const std::vector<std::string>& results_header();
std::string results_csv(const std::vector<RunRecord>& records);
// Reads back the columns of results_header (trace, titles and irrelevant
// are not stored). Throws ValidationError.
std::vector<RunRecord> parse_results_csv(std::string_view text);

// Decides whether an answer is correct.
class Judge {
 public:
  virtual ~Judge() = default;
  virtual bool correct(const Question& question, const std::string& answer) = 0;
};

// Asks the judge model through the gateway; a question without a gold
// answer is judged against an empty reference.
class GatewayJudge final : public Judge {
 public:
  explicit GatewayJudge(std::shared_ptr<const gateway::Gateway> gw) : gw_(std::move(gw)) {}
  bool correct(const Question& question, const std::string& answer) override;

 private:
  std::shared_ptr<const gateway::Gateway> gw_;
};

class FunctionJudge final : public Judge {
 public:
  using Fn = std::function<bool(const Question&, const std::string&)>;
  explicit FunctionJudge(Fn fn) : fn_(std::move(fn)) {}
  bool correct(const Question& question, const std::string& answer) override { return fn_(question, answer); }

 private:
  Fn fn_;
};

// Confidence/correctness pairs for the rows that did not fail and were not
// refused as irrelevant. Throws NotFound for a row whose question is missing.
std::vector<ScoredItem> score_records(const std::vector<RunRecord>& records, const std::vector<Question>& questions,
                                      Judge& judge);

struct EfficiencyReport {
  Summary latency_s;
  Summary cost_usd;
  Summary token_in;
  Summary token_out;
  std::size_t runs = 0;
  std::size_t failed = 0;
};

// Failed rows are counted but left out of every summary. Throws
// UndefinedMetric when no row succeeded.
EfficiencyReport aggregate_efficiency(const std::vector<RunRecord>& records);

}  // namespace groundwork::eval
