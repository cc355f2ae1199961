// Command-line surface: ask, ingest, make-corpus, sweep, calibrate, report,
// serve. Exit codes: 0 success, 1 runtime failure, 2 usage.

#include <CLI11.hpp>
#include <httplib.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <map>

#include "groundwork/core/csv.hpp"
#include "groundwork/core/fs.hpp"
#include "groundwork/core/text.hpp"
#include "groundwork/eval/harness.hpp"
#include "groundwork/ingest/corpus.hpp"
#include "groundwork/service/api.hpp"

using namespace groundwork;
using service::Json;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Common {
  std::string config;
  std::string data_dir;
  std::string out;
  std::uint64_t seed = 0;
};

// Run-level flags shared by ask and sweep. Sweep accepts several values per
// factor; ask uses the first.
struct RunFlags {
  std::string system_id = "groundwork";
  std::vector<std::string> relevance_models;
  std::vector<std::string> confidence_models;
  std::vector<std::string> knowledge_models;
  std::vector<std::string> reasoning_levels;
  std::vector<double> temperatures;
  std::vector<int> retrieval_ks;
  std::vector<std::string> allow_online_search;
  std::size_t workers = 1;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool multi) {
  auto opt = [&](const char* name, auto& target, const char* help) {
    auto* o = cmd->add_option(name, target, help);
    if (multi) o->delimiter(',');
    return o;
  };
  cmd->add_option("--system-id", f.system_id, "System label written to every row");
  opt("--relevance-model", f.relevance_models, "Relevance model id");
  opt("--confidence-model", f.confidence_models, "Confidence model id");
  opt("--knowledge-model", f.knowledge_models, "Knowledge model id");
  opt("--reasoning-level", f.reasoning_levels, "Reasoning level: low, medium or high")
      ->check(CLI::IsMember({"low", "medium", "high"}, CLI::ignore_case));
  opt("--temperature", f.temperatures, "Sampling temperature")->check(CLI::Range(0.0, 2.0));
  opt("--retrieval-k", f.retrieval_ks, "Retrieval depth (any positive integer)")->check(CLI::PositiveNumber);
  opt("--allow-online-search", f.allow_online_search, "true or false")
      ->check(CLI::IsMember({"true", "false"}, CLI::ignore_case));
  if (multi) cmd->add_option("--workers", f.workers, "Parallel runs")->check(CLI::PositiveNumber);
}

bool parse_flag_bool(const std::string& s) { return text::to_lower(s) == "true"; }

service::ServiceConfig load_config(const Common& c) {
  auto cfg = c.config.empty() ? service::ServiceConfig{} : service::ServiceConfig::load(c.config);
  if (!c.data_dir.empty()) cfg.data_dir = c.data_dir;
  return cfg;
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  fs::write_file_atomic(c.out, text);
  spdlog::info("wrote {}", c.out);
}

Json summary_json(const eval::Summary& s) {
  return {{"mean", s.mean}, {"p50", s.p50}, {"p90", s.p90}, {"count", s.count}};
}

Json efficiency_json(const eval::EfficiencyReport& r) {
  return {{"runs", r.runs},
          {"failed", r.failed},
          {"latency_s", summary_json(r.latency_s)},
          {"cost_usd", summary_json(r.cost_usd)},
          {"token_in", summary_json(r.token_in)},
          {"token_out", summary_json(r.token_out)}};
}

// --- ask ---------------------------------------------------------------

int cmd_ask(const Common& common, const RunFlags& f, const std::string& question, bool ingest,
            const std::string& session_id) {
  auto cfg = load_config(common);
  if (!f.relevance_models.empty()) cfg.bindings.relevance.model_id = f.relevance_models.front();
  if (!f.confidence_models.empty()) cfg.bindings.confidence.model_id = f.confidence_models.front();
  if (!f.knowledge_models.empty()) cfg.bindings.knowledge.model_id = f.knowledge_models.front();
  if (!f.reasoning_levels.empty()) cfg.bindings.knowledge.reasoning_effort = gateway::parse_effort(f.reasoning_levels.front());
  if (!f.temperatures.empty()) cfg.bindings.knowledge.temperature = f.temperatures.front();
  if (!f.allow_online_search.empty()) cfg.engine.allow_online_search = parse_flag_bool(f.allow_online_search.front());
  if (!f.retrieval_ks.empty()) {
    eval::RunConfig run;
    run.retrieval_k = f.retrieval_ks.front();
    run.allow_online_search = cfg.engine.allow_online_search;
    cfg.engine = eval::engine_config_for(run, cfg.engine);
  }
  auto rt = service::Runtime::open(cfg);
  Json body{{"question", question}, {"ingest", ingest}};
  if (!session_id.empty()) body["session_id"] = session_id;
  auto res = service::handle_ask(*rt, body.dump());
  emit(common, res.body.dump(2));
  return res.status == 200 ? 0 : 1;
}

// --- ingest ------------------------------------------------------------

int cmd_ingest(const Common& common, const std::string& corpus) {
  auto cfg = load_config(common);
  if (!corpus.empty()) cfg.corpus_dir = corpus;
  if (!cfg.corpus_dir) throw UsageError("ingest needs --corpus or corpus_dir in the config");
  auto rt = service::Runtime::open(cfg);
  auto rep = rt->pipeline().run();
  rt->flush();
  Json out{{"tuples", rep.tuples},
           {"candidates", rep.candidates},
           {"duplicates", rep.duplicates},
           {"ingested", rep.ingested},
           {"abstract_only", rep.abstract_only},
           {"needs_manual_fix", rep.needs_manual_fix},
           {"write_failures", rep.write_failures},
           {"snowball_discovered", rep.snowball_discovered},
           {"snowball_waves", rep.snowball_waves},
           {"missing_list", rt->stores().missing->size()},
           {"chunks", rt->knowledge()->total_size()},
           {"warnings", rep.warnings}};
  emit(common, out.dump(2));
  return 0;
}

// --- sweep -------------------------------------------------------------

eval::Factors factors_from(const RunFlags& f) {
  eval::Factors fa;
  fa.system_id = f.system_id;
  if (!f.relevance_models.empty()) fa.relevance_models = f.relevance_models;
  if (!f.confidence_models.empty()) fa.confidence_models = f.confidence_models;
  if (!f.knowledge_models.empty()) fa.knowledge_models = f.knowledge_models;
  if (!f.retrieval_ks.empty()) fa.retrieval_ks = f.retrieval_ks;
  if (!f.reasoning_levels.empty()) {
    fa.reasoning_levels.clear();
    for (const auto& l : f.reasoning_levels) fa.reasoning_levels.push_back(gateway::parse_effort(l));
  }
  if (!f.temperatures.empty()) {
    fa.temperatures.clear();
    for (double t : f.temperatures) fa.temperatures.emplace_back(t);
  }
  if (!f.allow_online_search.empty()) {
    fa.allow_online_search.clear();
    for (const auto& s : f.allow_online_search) fa.allow_online_search.push_back(parse_flag_bool(s));
  }
  return fa;
}

int cmd_sweep(const Common& common, const RunFlags& f, const std::string& questions_path, bool deterministic,
              const std::string& manifest_out) {
  auto cfg = load_config(common);
  cfg.engine.generate_titles = false;
  auto questions = eval::load_questions(questions_path);
  auto factors = factors_from(f);
  auto manifest = eval::build_manifest(factors, questions, common.seed);
  spdlog::info("sweep: {} settings x {} questions = {} runs", factors.settings(), questions.size(),
               manifest.runs.size());

  service::RuntimeOptions opts;
  if (deterministic) opts.clock = std::make_shared<ManualClock>(Timestamp{}, std::chrono::milliseconds{1});
  auto rt = service::Runtime::open(cfg, opts);
  eval::EngineFactory factory = [&](const eval::RunConfig& run) {
    return rt->engine_for(eval::engine_config_for(run, cfg.engine), eval::bindings_for(run, cfg.bindings), false);
  };
  eval::SweepOptions so;
  so.workers = f.workers;
  if (deterministic) {
    so.latency_clock = [] { return std::make_shared<ManualClock>(Timestamp{}, std::chrono::milliseconds{250}); };
  }
  auto records = eval::execute_manifest(manifest, questions, factory, so);
  if (!manifest_out.empty()) {
    Json m = Json::array();
    for (const auto& r : manifest.runs) {
      m.push_back({{"question_id", r.question_id},
                   {"knowledge_model", r.knowledge_model},
                   {"retrieval_k", r.retrieval_k},
                   {"reasoning_level", gateway::effort_name(r.reasoning_level)},
                   {"seed", r.seed}});
    }
    fs::write_file_atomic(manifest_out, m.dump(2));
  }
  emit(common, eval::results_csv(records));
  std::size_t failed = 0;
  for (const auto& r : records) failed += r.failed ? 1 : 0;
  if (failed) spdlog::warn("sweep: {} of {} runs failed", failed, records.size());
  return 0;
}

// --- calibrate ---------------------------------------------------------

std::vector<eval::ScoredItem> read_scored(const std::string& path, const std::string& questions_path,
                                          const Common& common) {
  auto text = fs::read_file(path);
  auto table = csv::parse_table(text);
  int conf = table.column("confidence"), correct = table.column("correct");
  if (conf >= 0 && correct >= 0) {
    std::vector<eval::ScoredItem> items;
    for (const auto& row : table.rows) {
      auto c = std::stod(row.at(static_cast<std::size_t>(conf)));
      auto v = text::to_lower(text::trim(row.at(static_cast<std::size_t>(correct))));
      if (v != "1" && v != "0" && v != "true" && v != "false") throw ValidationError("correct must be 0/1 or true/false");
      items.push_back({c, v == "1" || v == "true"});
    }
    return items;
  }
  if (questions_path.empty()) {
    throw UsageError("a results file needs --questions so answers can be judged");
  }
  auto records = eval::parse_results_csv(text);
  auto questions = eval::load_questions(questions_path);
  auto rt = service::Runtime::open(load_config(common));
  eval::GatewayJudge judge(rt->gateway());
  return eval::score_records(records, questions, judge);
}

int cmd_calibrate(const Common& common, const std::string& in, const std::string& questions, int bins) {
  auto items = read_scored(in, questions, common);
  auto r = eval::calibrate(items, bins);
  auto map = eval::IsotonicMap::fit(items);
  Json blocks = Json::array();
  for (const auto& b : map.blocks()) {
    blocks.push_back({{"x_lo", b.x_lo}, {"x_hi", b.x_hi}, {"value", b.value}, {"weight", b.weight}});
  }
  Json out{{"items", r.items},       {"bins", bins},
           {"ece_before", r.ece_before}, {"ece_after", r.ece_after},
           {"aurc_before", r.aurc_before}, {"aurc_after", r.aurc_after},
           {"isotonic", blocks}};
  emit(common, out.dump(2));
  return 0;
}

// --- report ------------------------------------------------------------

store::Sense parse_sense(const std::string& s) {
  auto v = text::to_lower(s);
  if (v == "min") return store::Sense::Min;
  if (v == "max") return store::Sense::Max;
  throw UsageError("sense must be min or max, got '" + s + "'");
}

// "metric:sense"
std::pair<std::string, store::Sense> parse_axis(const std::string& spec) {
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw UsageError("expected metric:sense, got '" + spec + "'");
  return {spec.substr(0, colon), parse_sense(spec.substr(colon + 1))};
}

Json row_json(const store::MetricsRow& row) {
  Json j{{"doi", row.doi.to_string()}, {"pub_date", row.pub_date.to_string()}};
  for (const auto& name : store::numeric_fields()) {
    const auto& f = row.metrics.*store::numeric_field(name);
    j[name] = f ? Json(f->value) : Json(nullptr);
  }
  return j;
}

int cmd_report(const Common& common, const std::string& in, const std::vector<std::string>& pareto,
               const std::string& trend) {
  Json out;
  if (!in.empty()) {
    auto records = eval::parse_results_csv(fs::read_file(in));
    out["efficiency"] = efficiency_json(eval::aggregate_efficiency(records));
    // Per setting, in first-seen order.
    std::vector<std::string> order;
    std::map<std::string, std::vector<eval::RunRecord>> groups;
    for (const auto& r : records) {
      auto key = r.config.knowledge_model + " | k=" + std::to_string(r.config.retrieval_k) + " | " +
                 std::string(gateway::effort_name(r.config.reasoning_level));
      if (!groups.count(key)) order.push_back(key);
      groups[key].push_back(r);
    }
    Json settings = Json::array();
    std::vector<std::pair<double, double>> points;  // (mean latency, mean cost)
    for (const auto& key : order) {
      const auto& g = groups[key];
      Json s{{"setting", key}};
      try {
        auto e = eval::aggregate_efficiency(g);
        s["efficiency"] = efficiency_json(e);
        points.emplace_back(e.latency_s.mean, e.cost_usd.mean);
      } catch (const UndefinedMetric&) {
        s["efficiency"] = nullptr;
        points.emplace_back(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
      }
      settings.push_back(s);
    }
    // Settings not dominated in (mean latency, mean cost).
    Json front = Json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
        dominated = j != i && points[j].first <= points[i].first && points[j].second <= points[i].second &&
                    (points[j].first < points[i].first || points[j].second < points[i].second);
      }
      if (!dominated && std::isfinite(points[i].first)) front.push_back(order[i]);
    }
    out["settings"] = settings;
    out["efficiency_front"] = front;
  }
  if (!pareto.empty() || !trend.empty()) {
    auto cfg = load_config(common);
    store::MetricsStore metrics(cfg.data_dir / "metrics.csv");
    if (!pareto.empty()) {
      if (pareto.size() != 2) throw UsageError("--pareto takes two metric:sense axes");
      auto [x, sx] = parse_axis(pareto[0]);
      auto [y, sy] = parse_axis(pareto[1]);
      Json rows = Json::array();
      for (const auto& r : metrics.pareto_front(x, sx, y, sy)) rows.push_back(row_json(r));
      out["pareto"] = rows;
    }
    if (!trend.empty()) {
      Json rows = Json::array();
      for (const auto& p : metrics.trend(trend)) rows.push_back({{"year", p.year}, {"mean", p.mean}, {"count", p.count}});
      out["trend"] = rows;
    }
  }
  if (out.is_null()) throw UsageError("report needs --in and/or --pareto/--trend");
  emit(common, out.dump(2));
  return 0;
}

// --- serve -------------------------------------------------------------

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const Common& common, std::string host, int port) {
  auto cfg = load_config(common);
  if (host.empty()) host = cfg.host;
  if (port < 0) port = cfg.port;
  auto rt = service::Runtime::open(cfg);
  httplib::Server server;
  service::mount(server, rt);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  spdlog::info("listening on {}:{} (data: {})", host, port, cfg.data_dir.string());
  if (!server.listen(host, port)) {
    spdlog::error("cannot listen on {}:{}", host, port);
    return 1;
  }
  rt->flush();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("groundwork"));
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");

  CLI::App app{"Grounded research assistant: question answering, ingestion and evaluation"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config, "Service configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option("--data-dir", common.data_dir, "Store directory (overrides the config)");
  app.add_option("--out", common.out, "Write output here instead of stdout");
  app.add_option("--seed", common.seed, "Manifest seed");
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  RunFlags ask_flags;
  std::string question, session_id;
  bool ingest_flag = false;
  auto* ask = app.add_subcommand("ask", "Answer one question");
  ask->add_option("question", question, "Question text")->required();
  ask->add_option("--session-id", session_id, "Continue an existing session");
  ask->add_flag("--ingest", ingest_flag, "Write the exchange to the session index");
  add_run_flags(ask, ask_flags, false);

  std::string corpus;
  auto* ingest = app.add_subcommand("ingest", "Run the ingestion pipeline once over a corpus");
  ingest->add_option("--corpus", corpus, "Corpus directory")->check(CLI::ExistingDirectory);

  ingest::SyntheticCorpusSpec spec;
  std::string corpus_out;
  auto* make_corpus = app.add_subcommand("make-corpus", "Write a synthetic corpus");
  make_corpus->add_option("dir", corpus_out, "Target directory")->required();
  make_corpus->add_option("--documents", spec.documents, "Document count")->check(CLI::PositiveNumber);
  make_corpus->add_option("--corpus-seed", spec.seed, "Generator seed");

  RunFlags sweep_flags;
  std::string questions_path, manifest_out;
  bool deterministic = false;
  auto* sweep = app.add_subcommand("sweep", "Run the factorial manifest and write the results CSV");
  sweep->add_option("--questions", questions_path, "Question set (JSON lines)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--manifest-out", manifest_out, "Also write the run manifest (JSON)");
  sweep->add_flag("--deterministic", deterministic, "Measure latency on a fixed-step clock");
  add_run_flags(sweep, sweep_flags, true);

  std::string cal_in, cal_questions;
  int bins = eval::kDefaultBins;
  auto* calibrate = app.add_subcommand("calibrate", "ECE and AURC before and after isotonic calibration");
  calibrate->add_option("--in", cal_in, "CSV with confidence,correct columns, or a results CSV")
      ->required()
      ->check(CLI::ExistingFile);
  calibrate->add_option("--questions", cal_questions, "Question set, for judging a results CSV")
      ->check(CLI::ExistingFile);
  calibrate->add_option("--bins", bins, "Calibration bins")->check(CLI::PositiveNumber);

  std::string report_in, trend;
  std::vector<std::string> pareto;
  auto* report = app.add_subcommand("report", "Efficiency aggregates, Pareto fronts and trends");
  report->add_option("--in", report_in, "Results CSV")->check(CLI::ExistingFile);
  report->add_option("--pareto", pareto, "Two axes over the metrics store, e.g. bandwidth_3db_ghz:max")
      ->expected(2);
  report->add_option("--trend", trend, "Yearly means of one metric");

  std::string host;
  int port = -1;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port")->check(CLI::Range(0, 65535));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*ask) return cmd_ask(common, ask_flags, question, ingest_flag, session_id);
    if (*ingest) return cmd_ingest(common, corpus);
    if (*make_corpus) {
      ingest::write_synthetic_corpus(corpus_out, spec);
      spdlog::info("wrote {} documents to {}", spec.documents, corpus_out);
      return 0;
    }
    if (*sweep) return cmd_sweep(common, sweep_flags, questions_path, deterministic, manifest_out);
    if (*calibrate) return cmd_calibrate(common, cal_in, cal_questions, bins);
    if (*report) return cmd_report(common, report_in, pareto, trend);
    if (*serve) return cmd_serve(common, host, port);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
