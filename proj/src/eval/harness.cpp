#include "groundwork/eval/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <json.hpp>
#include <map>
#include <spdlog/spdlog.h>
#include <thread>

#include "groundwork/core/csv.hpp"
#include "groundwork/core/text.hpp"
#include "groundwork/gateway/parsers.hpp"
#include "groundwork/gateway/prompts.hpp"

namespace groundwork::eval {

namespace {

constexpr std::string_view kFailedPrefix = "[failed] ";

std::string bool_text(bool b) { return b ? "true" : "false"; }

bool parse_bool(std::string_view s, const std::string& where) {
  auto v = text::to_lower(text::trim(s));
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ValidationError(where + ": expected a boolean, got '" + std::string(s) + "'");
}

double parse_double(std::string_view s, const std::string& where) {
  try {
    std::size_t used = 0;
    std::string str(text::trim(s));
    double v = std::stod(str, &used);
    if (used != str.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(where + ": expected a number, got '" + std::string(s) + "'");
  }
}

long long parse_integer(std::string_view s, const std::string& where) {
  try {
    std::size_t used = 0;
    std::string str(text::trim(s));
    long long v = std::stoll(str, &used);
    if (used != str.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(where + ": expected an integer, got '" + std::string(s) + "'");
  }
}

}  // namespace

fsm::EngineConfig engine_config_for(const RunConfig& run, fsm::EngineConfig base) {
  if (run.retrieval_k < 1) throw ConfigError("retrieval_k must be at least 1");
  const auto k = static_cast<std::size_t>(run.retrieval_k);
  base.retrieval.top_l = k;
  base.retrieval.start_k = std::min<std::size_t>(3, k);
  base.retrieval.max_k = std::max(k, base.retrieval.start_k);
  base.allow_online_search = run.allow_online_search;
  return base;
}

gateway::ModelBindings bindings_for(const RunConfig& run, gateway::ModelBindings base) {
  if (!run.relevance_model.empty()) base.relevance.model_id = run.relevance_model;
  if (!run.confidence_model.empty()) base.confidence.model_id = run.confidence_model;
  if (!run.knowledge_model.empty()) base.knowledge.model_id = run.knowledge_model;
  base.knowledge.reasoning_effort = run.reasoning_level;
  base.knowledge.temperature = run.temperature;
  return base;
}

RunRecord execute_run(const RunConfig& config, const Question& question, const EngineFactory& factory,
                      const Clock* latency_clock) {
  RunRecord rec;
  rec.config = config;
  const auto steady_start = std::chrono::steady_clock::now();
  const auto clock_start = latency_clock ? latency_clock->now() : Timestamp{};
  auto elapsed = [&] {
    if (latency_clock) {
      return std::chrono::duration<double>(latency_clock->now() - clock_start).count();
    }
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - steady_start).count();
  };
  auto fail = [&](const std::string& what) {
    rec.failed = true;
    rec.error = what;
    rec.answers = std::string(kFailedPrefix) + what;
    spdlog::warn("run {} / {} failed: {}", config.question_id, config.seed, what);
  };

  std::optional<fsm::SessionContext> ctx;
  try {
    auto engine = factory(config);
    if (!engine) throw ConfigError("engine factory returned null");
    ctx = engine->start_session(question.text, false);
    auto result = engine->run_question(*ctx);
    rec.trace = ctx->trace;
    rec.token_in = ctx->usage.token_in;
    rec.token_out = ctx->usage.token_out;
    rec.cost_usd = ctx->usage.cost_usd;
    if (result.outcome == fsm::Outcome::Irrelevant || !result.answer) {
      rec.irrelevant = true;
      rec.answers = result.message;
    } else {
      const auto& a = *result.answer;
      rec.answers = a.answer_text;
      rec.confidence_score = a.final_confidence.value();
      rec.confidence_flag = a.abstained || a.disclaimer.has_value();
      for (const auto& c : a.citations) {
        rec.citations_raw.push_back(c.key().to_string());
        rec.cited_titles.push_back(c.chunk.metadata.title);
      }
    }
  } catch (const fsm::RunAborted& e) {
    rec.trace = e.trace();
    rec.token_in = e.usage().token_in;
    rec.token_out = e.usage().token_out;
    rec.cost_usd = e.usage().cost_usd;
    fail(e.what());
  } catch (const std::exception& e) {
    if (ctx) {
      rec.trace = ctx->trace;
      rec.token_in = ctx->usage.token_in;
      rec.token_out = ctx->usage.token_out;
      rec.cost_usd = ctx->usage.cost_usd;
    }
    fail(e.what());
  }
  rec.latency_s = elapsed();
  return rec;
}

std::vector<RunRecord> execute_manifest(const RunManifest& manifest, const std::vector<Question>& questions,
                                        const EngineFactory& factory, const SweepOptions& options) {
  std::map<std::string, const Question*, std::less<>> by_id;
  for (const auto& q : questions) by_id[q.question_id] = &q;
  for (const auto& run : manifest.runs) {
    if (!by_id.count(run.question_id)) throw NotFound("manifest names unknown question '" + run.question_id + "'");
  }

  std::vector<RunRecord> out(manifest.runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < manifest.runs.size(); i = next++) {
      const auto& run = manifest.runs[i];
      std::shared_ptr<const Clock> clock = options.latency_clock ? options.latency_clock() : nullptr;
      out[i] = execute_run(run, *by_id.at(run.question_id), factory, clock.get());
    }
  };
  const std::size_t n = std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(1, manifest.runs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

const std::vector<std::string>& results_header() {
  static const std::vector<std::string> kHeader{
      "system_id",       "question_id",      "category",        "relevance_model", "confidence_model",
      "knowledge_model", "retrieval_k",      "reasoning_level", "temperature",     "allow_online_search",
      "seed",            "confidence_score", "confidence_flag", "answers",         "citations_raw",
      "latency_s",       "token_in",         "token_out",       "cost_usd",        "failed",
  };
  return kHeader;
}

std::string results_csv(const std::vector<RunRecord>& records) {
  std::string out = csv::format_row(results_header()) + "\n";
  for (const auto& r : records) {
    const auto& c = r.config;
    out += csv::format_row({
        c.system_id,
        c.question_id,
        c.category,
        c.relevance_model,
        c.confidence_model,
        c.knowledge_model,
        std::to_string(c.retrieval_k),
        std::string(gateway::effort_name(c.reasoning_level)),
        c.temperature ? text::format_shortest(*c.temperature) : std::string(),
        bool_text(c.allow_online_search),
        std::to_string(c.seed),
        text::format_shortest(r.confidence_score),
        bool_text(r.confidence_flag),
        r.answers,
        nlohmann::json(r.citations_raw).dump(),
        text::format_shortest(r.latency_s),
        std::to_string(r.token_in),
        std::to_string(r.token_out),
        text::format_shortest(r.cost_usd),
        bool_text(r.failed),
    });
    out += '\n';
  }
  return out;
}

std::vector<RunRecord> parse_results_csv(std::string_view text) {
  auto table = csv::parse_table(text);
  std::vector<int> col;
  for (const auto& name : results_header()) {
    int i = table.column(name);
    if (i < 0) throw ValidationError("results file lacks column '" + name + "'");
    col.push_back(i);
  }
  std::vector<RunRecord> out;
  std::size_t line = 1;
  for (const auto& row : table.rows) {
    ++line;
    const auto where = "results row " + std::to_string(line);
    if (row.size() < table.header.size()) throw ValidationError(where + ": too few fields");
    auto f = [&](std::size_t i) -> const std::string& { return row[static_cast<std::size_t>(col[i])]; };
    RunRecord r;
    auto& c = r.config;
    c.system_id = f(0);
    c.question_id = f(1);
    c.category = f(2);
    c.relevance_model = f(3);
    c.confidence_model = f(4);
    c.knowledge_model = f(5);
    c.retrieval_k = static_cast<int>(parse_integer(f(6), where));
    try {
      c.reasoning_level = gateway::parse_effort(f(7));
    } catch (const InvalidInput& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (!text::trim(f(8)).empty()) c.temperature = parse_double(f(8), where);
    c.allow_online_search = parse_bool(f(9), where);
    try {
      c.seed = std::stoull(f(10));
    } catch (const std::exception&) {
      throw ValidationError(where + ": bad seed '" + f(10) + "'");
    }
    r.confidence_score = parse_double(f(11), where);
    r.confidence_flag = parse_bool(f(12), where);
    r.answers = f(13);
    try {
      r.citations_raw = nlohmann::json::parse(f(14)).get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + ": citations_raw: " + e.what());
    }
    r.latency_s = parse_double(f(15), where);
    r.token_in = parse_integer(f(16), where);
    r.token_out = parse_integer(f(17), where);
    r.cost_usd = parse_double(f(18), where);
    r.failed = parse_bool(f(19), where);
    if (r.failed && r.answers.rfind(kFailedPrefix, 0) == 0) r.error = r.answers.substr(kFailedPrefix.size());
    r.irrelevant = !r.failed && r.answers == fsm::kRefusalMessage;
    out.push_back(std::move(r));
  }
  return out;
}

bool GatewayJudge::correct(const Question& question, const std::string& answer) {
  auto prompt = gateway::render(gateway::builtin_template(gateway::tags::kJudge),
                                {{"question", question.text},
                                 {"gold_answer", question.gold_answer.value_or("")},
                                 {"answer", answer}});
  return gw_->call(gateway::Role::Judge, gateway::tags::kJudge, prompt,
                   [](std::string_view reply) { return gateway::parse_judge(reply); })
      .value;
}

std::vector<ScoredItem> score_records(const std::vector<RunRecord>& records, const std::vector<Question>& questions,
                                      Judge& judge) {
  std::map<std::string, const Question*, std::less<>> by_id;
  for (const auto& q : questions) by_id[q.question_id] = &q;
  std::vector<ScoredItem> out;
  for (const auto& r : records) {
    if (r.failed || r.irrelevant) continue;
    auto it = by_id.find(r.config.question_id);
    if (it == by_id.end()) throw NotFound("no question '" + r.config.question_id + "'");
    out.push_back({r.confidence_score, judge.correct(*it->second, r.answers)});
  }
  return out;
}

EfficiencyReport aggregate_efficiency(const std::vector<RunRecord>& records) {
  std::vector<double> latency, cost, tin, tout;
  EfficiencyReport rep;
  rep.runs = records.size();
  for (const auto& r : records) {
    if (r.failed) {
      ++rep.failed;
      continue;
    }
    latency.push_back(r.latency_s);
    cost.push_back(r.cost_usd);
    tin.push_back(static_cast<double>(r.token_in));
    tout.push_back(static_cast<double>(r.token_out));
  }
  if (latency.empty()) throw UndefinedMetric("no successful runs to aggregate");
  rep.latency_s = summarize(latency);
  rep.cost_usd = summarize(cost);
  rep.token_in = summarize(tin);
  rep.token_out = summarize(tout);
  return rep;
}

}  // namespace groundwork::eval
