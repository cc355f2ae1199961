#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "groundwork/citation/pipeline.hpp"
#include "groundwork/fsm/search.hpp"
#include "groundwork/fsm/state.hpp"
#include "groundwork/gateway/gateway.hpp"
#include "groundwork/retrieval/knowledge_base.hpp"
#include "groundwork/store/session_store.hpp"

namespace groundwork::fsm {

using gateway::ConfidenceLabel;
using gateway::ConfidenceScore;

struct Subtopic {
  std::string text;
  std::optional<ConfidenceScore> score;  // unset until first self-evaluation
  ConfidenceLabel label = ConfidenceLabel::Low;
};

struct SessionContext {
  std::string session_id;
  std::string question;
  FsmState state = FsmState::Idle;
  int iteration_i = 0;
  std::vector<Subtopic> subtopics;
  std::vector<EvidenceItem> evidence;  // unique keys, insertion order, never shrinks
  double mean_similarity = 0.0;        // of the pool, clamped to [0, 1]
  bool ingest_flag = false;
  std::vector<store::MessageEntry> messages;  // this run's messages

  Trace trace;
  bool back_edge_taken = false;
  std::optional<ConfidenceScore> initial_confidence;
  std::string confidence_reasoning;
  std::string fast_draft;  // logged only
  std::vector<std::string> warnings;
  gateway::CompletionUsage usage;
};

// Appends a transition record and moves to the next state. Throws
// InvalidTransition (leaving ctx untouched) when (state, event) is not an
// edge; Done has no outgoing edges.
void advance(SessionContext& ctx, StateEvent event, Timestamp now);

// Adds items whose (doc_id, span_id) is not yet in the pool, tagging them
// with `iteration`. Returns the number added.
std::size_t merge_evidence(SessionContext& ctx, const std::vector<EvidenceItem>& items, int iteration);

struct EngineConfig {
  retrieval::RetrievalConfig retrieval;
  double answer_gate = 0.5;
  int retry_budget = 5;         // refinement iterations
  bool allow_online_search = true;
  std::size_t search_k = 3;     // results per targeted sub-question
  bool fast_draft = false;
  bool generate_titles = true;
  citation::ClosedWorldPolicy citation_policy;
  std::size_t summaries_limit = 8;

  void validate() const;  // throws ConfigError
};

struct AnswerRecord {
  std::string answer_text;
  std::vector<EvidenceItem> citations;  // subset of the session evidence
  ConfidenceScore final_confidence;
  bool abstained = false;
  std::optional<std::string> disclaimer;
  std::string abstain_reason;
  std::vector<citation::Claim> claims;
  std::vector<citation::ClaimEvidenceRow> claim_table;
  citation::FidelityReport draft_fidelity;
  citation::FidelityReport fidelity;
};

enum class Outcome { Answered, Irrelevant };

struct RunResult {
  Outcome outcome = Outcome::Answered;
  std::optional<AnswerRecord> answer;  // absent for irrelevant questions
  std::string message;                 // answer text or refusal
};

// The run could not finish (schema budget exhausted). Carries what happened
// so far.
class RunAborted : public Error {
 public:
  RunAborted(const std::string& what, std::string session_id, Trace trace, gateway::CompletionUsage usage,
             std::string last_raw)
      : Error(what),
        session_id_(std::move(session_id)),
        trace_(std::move(trace)),
        usage_(usage),
        last_raw_(std::move(last_raw)) {}
  const std::string& session_id() const { return session_id_; }
  const Trace& trace() const { return trace_; }
  const gateway::CompletionUsage& usage() const { return usage_; }
  const std::string& last_raw() const { return last_raw_; }

 private:
  std::string session_id_;
  Trace trace_;
  gateway::CompletionUsage usage_;
  std::string last_raw_;
};

struct EngineDeps {
  std::shared_ptr<const gateway::Gateway> gateway;
  std::shared_ptr<retrieval::KnowledgeBase> knowledge;
  std::shared_ptr<SearchProvider> search;       // null: every round comes back empty
  std::shared_ptr<store::SessionStore> sessions;  // null: nothing persisted
  std::shared_ptr<const Clock> clock;           // null: system clock
};

inline constexpr std::string_view kRefusalMessage =
    "This question is outside the scope of the knowledge base, so I cannot answer it.";
inline constexpr std::string_view kAbstainMessage =
    "I cannot give a reliable answer to this question from the available evidence.";

// Drives one question through the state machine. Thread-safe: distinct
// sessions may run concurrently on one engine.
class Engine {
 public:
  Engine(EngineDeps deps, EngineConfig config);

  // Throws InvalidInput for an empty question, NotFound for an unknown
  // session id. The returned context is in RelevanceCheck.
  SessionContext start_session(const std::string& question, bool ingest_flag,
                               const std::optional<std::string>& session_id = std::nullopt) const;

  // Requires ctx.state == RelevanceCheck. Ends in Done or throws RunAborted.
  RunResult run_question(SessionContext& ctx) const;

  const EngineConfig& config() const { return config_; }
  Timestamp now() const { return clock_->now(); }

 private:
  struct PassResult;

  bool check_relevance(SessionContext& ctx) const;
  gateway::ConfidenceVerdict check_confidence(SessionContext& ctx) const;
  void decompose(SessionContext& ctx) const;
  void self_evaluate(SessionContext& ctx, bool first_round) const;
  void refine_round(SessionContext& ctx) const;
  AnswerRecord compose(SessionContext& ctx, ConfidenceScore final_confidence, bool unresolved) const;
  void finish(SessionContext& ctx, const std::string& reply, const gateway::CompletionUsage& reply_usage) const;
  void ingest_exchange(const SessionContext& ctx, const std::string& reply) const;

  EngineDeps deps_;
  EngineConfig config_;
  std::shared_ptr<const Clock> clock_;
};

// Disclaimer wording for an answer whose loop ended unresolved and/or below
// the gate. Deterministic.
std::string make_disclaimer(const std::vector<Subtopic>& unresolved, ConfidenceScore final_confidence,
                            double gate, bool below_gate);

}  // namespace groundwork::fsm
