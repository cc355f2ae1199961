#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groundwork/core/error.hpp"
#include "groundwork/core/time.hpp"

namespace groundwork::fsm {

enum class FsmState { Idle, RelevanceCheck, ConfidenceCheck, Decomposition, SelfEvaluation, SearchOnline, Answer, Done };

enum class StateEvent {
  QuestionReceived,     // Idle -> RelevanceCheck
  Irrelevant,           // RelevanceCheck -> Done
  Relevant,             // RelevanceCheck -> ConfidenceCheck
  Confident,            // ConfidenceCheck -> Answer
  NotConfident,         // ConfidenceCheck -> Decomposition
  Decomposed,           // Decomposition -> SelfEvaluation
  AllConfident,         // SelfEvaluation -> Answer
  NeedsSearch,          // SelfEvaluation -> SearchOnline
  BudgetExhausted,      // SelfEvaluation -> Answer, i >= retry budget
  SearchDisabled,       // SelfEvaluation -> Answer, online search turned off
  SearchCompleted,      // SearchOnline -> SelfEvaluation
  Answered,             // Answer -> Done
  CitationCheckFailed,  // Answer -> RelevanceCheck, at most once per run
};

std::string_view state_name(FsmState s);
std::string_view event_name(StateEvent e);
FsmState parse_state(std::string_view name);  // throws InvalidInput
StateEvent parse_event(std::string_view name);

struct Edge {
  FsmState from;
  StateEvent event;
  FsmState to;
};

// The complete transition table.
const std::vector<Edge>& transition_table();

// Target of (from, event), or nullopt if the pair is not an edge.
std::optional<FsmState> next_state(FsmState from, StateEvent event);
bool is_edge(FsmState from, FsmState to);

// Each event has a single target state, so an illegal (state, event) pair
// still names two endpoints.
FsmState event_target(StateEvent event);

class InvalidTransition : public Error {
 public:
  InvalidTransition(FsmState from, StateEvent event);
  FsmState from() const { return from_; }
  FsmState to() const { return to_; }
  StateEvent event() const { return event_; }

 private:
  FsmState from_;
  FsmState to_;
  StateEvent event_;
};

struct TransitionRecord {
  FsmState from;
  FsmState to;
  StateEvent event;
  Timestamp timestamp;
  int iteration_i = 0;
  bool operator==(const TransitionRecord&) const = default;
};

using Trace = std::vector<TransitionRecord>;

// One JSON object per line: {from, to, event, timestamp, iteration_i}.
std::string export_trace(const Trace& trace);
Trace import_trace(std::string_view text);  // throws ValidationError

// True when every record is an edge and consecutive records chain.
bool trace_is_legal(const Trace& trace);

}  // namespace groundwork::fsm
