#include "groundwork/fsm/engine.hpp"

#include <algorithm>
#include <set>

#include <spdlog/spdlog.h>

#include "groundwork/core/hash.hpp"
#include "groundwork/core/text.hpp"
#include "groundwork/fsm/context_format.hpp"

namespace groundwork::fsm {

namespace gw = groundwork::gateway;

void advance(SessionContext& ctx, StateEvent event, Timestamp now) {
  auto to = next_state(ctx.state, event);
  if (!to) throw InvalidTransition(ctx.state, event);
  ctx.trace.push_back(TransitionRecord{ctx.state, *to, event, now, ctx.iteration_i});
  ctx.state = *to;
}

std::size_t merge_evidence(SessionContext& ctx, const std::vector<EvidenceItem>& items, int iteration) {
  std::set<retrieval::EvidenceKey> keys;
  for (const auto& e : ctx.evidence) keys.insert(e.key());
  std::size_t added = 0;
  for (auto item : items) {
    if (!keys.insert(item.key()).second) continue;
    item.retrieved_at_iteration = iteration;
    ctx.evidence.push_back(std::move(item));
    ++added;
  }
  ctx.mean_similarity = std::clamp(retrieval::mean_similarity(ctx.evidence), 0.0, 1.0);
  return added;
}

void EngineConfig::validate() const {
  retrieval.validate();
  if (!(answer_gate > 0.0 && answer_gate <= 1.0)) throw ConfigError("answer gate must be in (0, 1]");
  if (retry_budget < 0) throw ConfigError("retry budget must be non-negative");
  if (search_k < 1) throw ConfigError("search k must be at least 1");
  if (citation_policy.min_claim_coverage < 0.0 || citation_policy.min_claim_coverage > 1.0 ||
      citation_policy.min_title_match < 0.0 || citation_policy.min_title_match > 1.0) {
    throw ConfigError("citation policy thresholds must be in [0, 1]");
  }
}

std::string make_disclaimer(const std::vector<Subtopic>& unresolved, ConfidenceScore final_confidence,
                            double gate, bool below_gate) {
  std::string out;
  if (!unresolved.empty()) {
    std::vector<std::string> names;
    for (const auto& s : unresolved) names.push_back("\"" + s.text + "\"");
    out += "Low confidence: the assistant could not reach high confidence on " + text::join(names, ", ") + ". ";
  }
  out += "Final confidence score: " + text::format_fixed(final_confidence.value(), 2) + ".";
  if (below_gate) out += " This is below the answer gate of " + text::format_fixed(gate, 2) + ", so no answer is given.";
  return out;
}

Engine::Engine(EngineDeps deps, EngineConfig config) : deps_(std::move(deps)), config_(std::move(config)) {
  if (!deps_.gateway) throw ConfigError("engine needs a gateway");
  if (!deps_.knowledge) throw ConfigError("engine needs a knowledge base");
  config_.validate();
  clock_ = deps_.clock ? deps_.clock : std::shared_ptr<const Clock>(&system_clock(), [](const Clock*) {});
}

SessionContext Engine::start_session(const std::string& question, bool ingest_flag,
                                     const std::optional<std::string>& session_id) const {
  if (text::trim(question).empty()) throw InvalidInput("question is empty");
  SessionContext ctx;
  ctx.question = question;
  ctx.ingest_flag = ingest_flag;
  if (session_id) {
    if (deps_.sessions && !deps_.sessions->exists(*session_id)) throw NotFound("no session '" + *session_id + "'");
    ctx.session_id = *session_id;
  } else {
    ctx.session_id = make_uuid4();
    if (deps_.sessions) {
      auto now = clock_->now();
      deps_.sessions->persist(store::SessionRecord{ctx.session_id, store::fallback_title(now), now, {}});
    }
  }
  auto now = clock_->now();
  ctx.messages.push_back(store::MessageEntry{store::MessageRole::User, question, now, std::nullopt});
  advance(ctx, StateEvent::QuestionReceived, now);
  return ctx;
}

bool Engine::check_relevance(SessionContext& ctx) const {
  auto retrieved = deps_.knowledge->dynamic_k_retrieve(ctx.question, config_.retrieval);
  merge_evidence(ctx, retrieved.evidence, ctx.iteration_i);
  std::string prompt = gw::render(gw::builtin_template(gw::tags::kRelevance),
                                  {{"question", ctx.question},
                                   {"summaries_text", format_summaries(ctx.evidence, config_.summaries_limit)},
                                   {"sim_score", retrieved.mean_similarity}});
  auto result = deps_.gateway->call(gw::Role::Relevance, gw::tags::kRelevance, prompt, gw::parse_relevance);
  ctx.usage += result.usage;
  return result.value;
}

gw::ConfidenceVerdict Engine::check_confidence(SessionContext& ctx) const {
  std::string context = format_evidence_block(ctx.evidence);
  std::string prompt = gw::render(gw::builtin_template(gw::tags::kConfidence),
                                  {{"question", ctx.question}, {"base_context", context}, {"mean_sim", ctx.mean_similarity}});
  auto result = deps_.gateway->call(gw::Role::Confidence, gw::tags::kConfidence, prompt, gw::parse_confidence);
  ctx.usage += result.usage;
  ctx.initial_confidence = result.value.confidence_score;
  ctx.confidence_reasoning = result.value.reasoning;

  if (config_.fast_draft) {
    std::string draft_prompt = gw::render(gw::builtin_template(gw::tags::kFastDraft),
                                          {{"question", ctx.question}, {"base_context", context}});
    try {
      auto draft = deps_.gateway->call_text(gw::Role::Confidence, gw::tags::kFastDraft, draft_prompt);
      ctx.usage += draft.usage;
      ctx.fast_draft = draft.value;
      spdlog::debug("session {} fast draft: {}", ctx.session_id, ctx.fast_draft);
    } catch (const gw::ProviderError& e) {
      ctx.warnings.push_back(std::string("fast draft failed: ") + e.what());
    }
  }
  return result.value;
}

void Engine::decompose(SessionContext& ctx) const {
  std::string prompt = gw::render(gw::builtin_template(gw::tags::kDecomposition),
                                  {{"question", ctx.question}, {"base_context", format_evidence_block(ctx.evidence)}});
  auto result = deps_.gateway->call(gw::Role::Knowledge, gw::tags::kDecomposition, prompt, gw::parse_decomposition);
  ctx.usage += result.usage;
  ctx.subtopics.clear();
  for (auto& t : result.value) ctx.subtopics.push_back(Subtopic{std::move(t), std::nullopt, ConfidenceLabel::Low});
}

void Engine::self_evaluate(SessionContext& ctx, bool first_round) const {
  std::string context = format_evidence_block(ctx.evidence);
  for (auto& s : ctx.subtopics) {
    if (!first_round && s.label == ConfidenceLabel::High) continue;
    std::string prompt = gw::render(gw::builtin_template(gw::tags::kSelfEval),
                                    {{"topic", s.text}, {"base_context", context}});
    auto result = deps_.gateway->call(gw::Role::Confidence, gw::tags::kSelfEval, prompt, gw::parse_self_eval);
    ctx.usage += result.usage;
    s.score = result.value;
    s.label = gw::label_for(result.value);
  }
}

void Engine::refine_round(SessionContext& ctx) const {
  int next_iteration = ctx.iteration_i + 1;
  for (const auto& s : ctx.subtopics) {
    if (s.label == ConfidenceLabel::High) continue;
    if (!deps_.search) {
      ctx.warnings.push_back("round " + std::to_string(next_iteration) + ": no search provider configured");
      break;
    }
    try {
      merge_evidence(ctx, deps_.search->search(s.text, config_.search_k), next_iteration);
    } catch (const SearchUnavailable& e) {
      spdlog::warn("session {} round {}: search unavailable: {}", ctx.session_id, next_iteration, e.what());
      ctx.warnings.push_back("round " + std::to_string(next_iteration) + ": " + e.what());
    }
  }
  ctx.iteration_i = next_iteration;
}

AnswerRecord Engine::compose(SessionContext& ctx, ConfidenceScore final_confidence, bool unresolved) const {
  AnswerRecord rec;
  rec.final_confidence = final_confidence;
  std::vector<Subtopic> open;
  if (unresolved) {
    for (const auto& s : ctx.subtopics) {
      if (s.label != ConfidenceLabel::High) open.push_back(s);
    }
  }
  bool below_gate = final_confidence.value() < config_.answer_gate;
  if (unresolved || below_gate) rec.disclaimer = make_disclaimer(open, final_confidence, config_.answer_gate, below_gate);
  if (below_gate) {
    rec.abstained = true;
    rec.abstain_reason = "final confidence below the answer gate";
    rec.answer_text = std::string(kAbstainMessage);
    return rec;
  }

  std::string prompt = gw::render(gw::builtin_template(gw::tags::kAnswer),
                                  {{"question", ctx.question},
                                   {"base_context", format_evidence_block(ctx.evidence)},
                                   {"confidence", final_confidence.value()},
                                   {"mean_sim", ctx.mean_similarity}});
  auto draft_parser = [](std::string_view reply) {
    if (text::trim(reply).empty()) throw gw::SchemaViolation("empty answer");
    try {
      citation::parse_markers(reply);
    } catch (const citation::MarkerParseError& e) {
      throw gw::SchemaViolation(std::string("malformed citation marker: ") + e.what());
    }
    return std::string(text::trim(reply));
  };
  auto draft = deps_.gateway->call(gw::Role::Knowledge, gw::tags::kAnswer, prompt, draft_parser);
  ctx.usage += draft.usage;

  auto cw = citation::enforce_closed_world(draft.value, ctx.evidence, config_.citation_policy);
  rec.draft_fidelity = cw.draft_report;
  rec.fidelity = cw.final_report;
  if (cw.abstain) {
    rec.abstained = true;
    rec.abstain_reason = cw.abstain_reason;
    return rec;
  }
  rec.answer_text = std::move(cw.text);
  rec.citations = std::move(cw.citations);
  rec.claims = std::move(cw.claims);
  rec.claim_table = std::move(cw.table);
  return rec;
}

void Engine::ingest_exchange(const SessionContext& ctx, const std::string& reply) const {
  std::size_t exchange = 0;
  if (deps_.sessions && deps_.sessions->exists(ctx.session_id)) {
    for (const auto& m : deps_.sessions->load(ctx.session_id).messages) {
      if (m.role == store::MessageRole::User) ++exchange;
    }
  }
  std::string url = "groundwork://session/" + ctx.session_id + "/" + std::to_string(exchange);
  CanonicalId doc{CanonicalId::Kind::UrlHash, sha1_hex(url)};
  retrieval::ChunkMetadata md;
  md.title = "Session " + ctx.session_id.substr(0, 8) + ": " + ctx.question;
  auto now = std::chrono::floor<std::chrono::days>(clock_->now());
  md.year = static_cast<int>(std::chrono::year_month_day{now}.year());
  md.venue = "session";
  auto chunks = retrieval::chunk_text(doc, "Question: " + ctx.question + "\nAnswer: " + reply, md);
  deps_.knowledge->index_add(chunks, retrieval::KnowledgeBase::kSessionIndex);
}

void Engine::finish(SessionContext& ctx, const std::string& reply, const gw::CompletionUsage& reply_usage) const {
  ctx.messages.push_back(store::MessageEntry{store::MessageRole::Assistant, reply, clock_->now(), reply_usage});
  if (ctx.ingest_flag) ingest_exchange(ctx, reply);
  if (!deps_.sessions) return;
  deps_.sessions->update(ctx.session_id, [&](store::SessionRecord& rec) {
    bool first_exchange = rec.messages.empty();
    for (const auto& m : ctx.messages) rec.messages.push_back(m);
    if (first_exchange && config_.generate_titles) {
      gw::CompletionUsage title_usage;
      rec.title = store::title_session("User: " + ctx.question + "\nAssistant: " + reply, *deps_.gateway,
                                       clock_->now(), &title_usage);
      ctx.usage += title_usage;
    }
  });
}

RunResult Engine::run_question(SessionContext& ctx) const {
  if (ctx.state != FsmState::RelevanceCheck) {
    throw InvalidInput("run_question needs a session in RelevanceCheck, not " + std::string(state_name(ctx.state)));
  }
  try {
    while (true) {
      if (!check_relevance(ctx)) {
        advance(ctx, StateEvent::Irrelevant, clock_->now());
        RunResult result{Outcome::Irrelevant, std::nullopt, std::string(kRefusalMessage)};
        finish(ctx, result.message, ctx.usage);
        return result;
      }
      advance(ctx, StateEvent::Relevant, clock_->now());

      auto verdict = check_confidence(ctx);
      ConfidenceScore final_confidence = verdict.confidence_score;
      bool unresolved = false;
      if (verdict.confident) {
        advance(ctx, StateEvent::Confident, clock_->now());
      } else {
        advance(ctx, StateEvent::NotConfident, clock_->now());
        decompose(ctx);
        advance(ctx, StateEvent::Decomposed, clock_->now());
        bool first_round = true;
        while (true) {
          self_evaluate(ctx, first_round);
          first_round = false;
          bool all_high = std::all_of(ctx.subtopics.begin(), ctx.subtopics.end(),
                                      [](const Subtopic& s) { return s.label == ConfidenceLabel::High; });
          if (all_high) {
            advance(ctx, StateEvent::AllConfident, clock_->now());
            break;
          }
          if (ctx.iteration_i >= config_.retry_budget) {
            unresolved = true;
            advance(ctx, StateEvent::BudgetExhausted, clock_->now());
            break;
          }
          if (!config_.allow_online_search) {
            unresolved = true;
            advance(ctx, StateEvent::SearchDisabled, clock_->now());
            break;
          }
          advance(ctx, StateEvent::NeedsSearch, clock_->now());
          refine_round(ctx);
          advance(ctx, StateEvent::SearchCompleted, clock_->now());
        }
        final_confidence = std::min_element(ctx.subtopics.begin(), ctx.subtopics.end(),
                                            [](const Subtopic& a, const Subtopic& b) { return *a.score < *b.score; })
                               ->score.value();
      }

      AnswerRecord rec = compose(ctx, final_confidence, unresolved);
      bool citation_failure = rec.abstained && final_confidence.value() >= config_.answer_gate;
      if (citation_failure && !ctx.back_edge_taken) {
        ctx.back_edge_taken = true;
        spdlog::info("session {}: citation check failed ({}), retrying once from relevance", ctx.session_id,
                     rec.abstain_reason);
        advance(ctx, StateEvent::CitationCheckFailed, clock_->now());
        continue;
      }
      if (citation_failure) {
        // Keep abstained == (final_confidence < gate).
        rec.final_confidence = ConfidenceScore::from(0.0);
        rec.answer_text = std::string(kAbstainMessage);
        rec.disclaimer = make_disclaimer({}, rec.final_confidence, config_.answer_gate, true);
      }
      if (rec.abstained) rec.citations.clear();
      advance(ctx, StateEvent::Answered, clock_->now());
      RunResult result{Outcome::Answered, rec, rec.answer_text};
      finish(ctx, result.message, ctx.usage);
      return result;
    }
  } catch (const gw::SchemaExhausted& e) {
    ctx.usage += e.usage();
    ctx.warnings.push_back(e.what());
    if (deps_.sessions) {
      try {
        ctx.messages.push_back(store::MessageEntry{store::MessageRole::System,
                                                   std::string("run aborted: ") + e.what(), clock_->now(), ctx.usage});
        deps_.sessions->update(ctx.session_id, [&](store::SessionRecord& rec) {
          for (const auto& m : ctx.messages) rec.messages.push_back(m);
        });
      } catch (const Error& persist_error) {
        spdlog::error("session {}: could not persist aborted run: {}", ctx.session_id, persist_error.what());
      }
    }
    throw RunAborted(std::string("run aborted in ") + std::string(state_name(ctx.state)) + ": " + e.what(),
                     ctx.session_id, ctx.trace, ctx.usage, e.last_raw());
  }
}

}  // namespace groundwork::fsm
