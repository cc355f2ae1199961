#include "groundwork/fsm/state.hpp"

#include <array>
#include <sstream>

#include <json.hpp>

namespace groundwork::fsm {

namespace {

constexpr std::array<std::string_view, 8> kStateNames = {"Idle",           "RelevanceCheck", "ConfidenceCheck",
                                                         "Decomposition",  "SelfEvaluation", "SearchOnline",
                                                         "Answer",         "Done"};

constexpr std::array<std::string_view, 13> kEventNames = {
    "QuestionReceived", "Irrelevant",      "Relevant",       "Confident",       "NotConfident",
    "Decomposed",       "AllConfident",    "NeedsSearch",    "BudgetExhausted", "SearchDisabled",
    "SearchCompleted",  "Answered",        "CitationCheckFailed"};

}  // namespace

std::string_view state_name(FsmState s) { return kStateNames[static_cast<std::size_t>(s)]; }
std::string_view event_name(StateEvent e) { return kEventNames[static_cast<std::size_t>(e)]; }

FsmState parse_state(std::string_view name) {
  for (std::size_t i = 0; i < kStateNames.size(); ++i) {
    if (kStateNames[i] == name) return static_cast<FsmState>(i);
  }
  throw InvalidInput("unknown state '" + std::string(name) + "'");
}

StateEvent parse_event(std::string_view name) {
  for (std::size_t i = 0; i < kEventNames.size(); ++i) {
    if (kEventNames[i] == name) return static_cast<StateEvent>(i);
  }
  throw InvalidInput("unknown event '" + std::string(name) + "'");
}

const std::vector<Edge>& transition_table() {
  using S = FsmState;
  using E = StateEvent;
  static const std::vector<Edge> kEdges = {
      {S::Idle, E::QuestionReceived, S::RelevanceCheck},
      {S::RelevanceCheck, E::Irrelevant, S::Done},
      {S::RelevanceCheck, E::Relevant, S::ConfidenceCheck},
      {S::ConfidenceCheck, E::Confident, S::Answer},
      {S::ConfidenceCheck, E::NotConfident, S::Decomposition},
      {S::Decomposition, E::Decomposed, S::SelfEvaluation},
      {S::SelfEvaluation, E::AllConfident, S::Answer},
      {S::SelfEvaluation, E::NeedsSearch, S::SearchOnline},
      {S::SelfEvaluation, E::BudgetExhausted, S::Answer},
      {S::SelfEvaluation, E::SearchDisabled, S::Answer},
      {S::SearchOnline, E::SearchCompleted, S::SelfEvaluation},
      {S::Answer, E::Answered, S::Done},
      {S::Answer, E::CitationCheckFailed, S::RelevanceCheck},
  };
  return kEdges;
}

std::optional<FsmState> next_state(FsmState from, StateEvent event) {
  for (const auto& e : transition_table()) {
    if (e.from == from && e.event == event) return e.to;
  }
  return std::nullopt;
}

bool is_edge(FsmState from, FsmState to) {
  for (const auto& e : transition_table()) {
    if (e.from == from && e.to == to) return true;
  }
  return false;
}

FsmState event_target(StateEvent event) {
  for (const auto& e : transition_table()) {
    if (e.event == event) return e.to;
  }
  return FsmState::Done;
}

InvalidTransition::InvalidTransition(FsmState from, StateEvent event)
    : Error("invalid transition " + std::string(state_name(from)) + " -> " +
            std::string(state_name(event_target(event))) + " on " + std::string(event_name(event))),
      from_(from),
      to_(event_target(event)),
      event_(event) {}

std::string export_trace(const Trace& trace) {
  std::ostringstream os;
  for (const auto& t : trace) {
    nlohmann::ordered_json j;
    j["from"] = state_name(t.from);
    j["to"] = state_name(t.to);
    j["event"] = event_name(t.event);
    j["timestamp"] = format_iso8601(t.timestamp);
    j["iteration_i"] = t.iteration_i;
    os << j.dump() << '\n';
  }
  return os.str();
}

Trace import_trace(std::string_view text) {
  Trace trace;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ValidationError("trace line is not a JSON object");
    try {
      trace.push_back(TransitionRecord{parse_state(j.at("from").get<std::string>()),
                                       parse_state(j.at("to").get<std::string>()),
                                       parse_event(j.at("event").get<std::string>()),
                                       parse_iso8601(j.at("timestamp").get<std::string>()),
                                       j.at("iteration_i").get<int>()});
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("malformed trace record: ") + e.what());
    } catch (const InvalidInput& e) {
      throw ValidationError(e.what());
    }
  }
  return trace;
}

bool trace_is_legal(const Trace& trace) {
  for (std::size_t i = 0; i < trace.size(); ++i) {
    auto to = next_state(trace[i].from, trace[i].event);
    if (!to || *to != trace[i].to) return false;
    if (i > 0 && trace[i - 1].to != trace[i].from) return false;
  }
  return true;
}

}  // namespace groundwork::fsm
