#include "groundwork/service/api.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <set>

#include "groundwork/core/hash.hpp"
#include "groundwork/core/text.hpp"
#include "groundwork/gateway/parsers.hpp"
#include "groundwork/ingest/sources.hpp"

namespace groundwork::service {

namespace {

ApiResponse error(int status, const std::string& message) { return {status, Json{{"error", message}}}; }

Json trace_json(const fsm::Trace& trace) {
  Json out = Json::array();
  for (const auto& t : trace) {
    out.push_back({{"from", fsm::state_name(t.from)},
                   {"to", fsm::state_name(t.to)},
                   {"event", fsm::event_name(t.event)},
                   {"timestamp", format_iso8601(t.timestamp)},
                   {"iteration_i", t.iteration_i}});
  }
  return out;
}

// Parses a JSON object body; nullopt (with the message) when malformed.
std::optional<Json> parse_object(std::string_view body, std::string& why) {
  try {
    auto j = Json::parse(body);
    if (j.is_object()) return j;
    why = "request body must be a JSON object";
  } catch (const Json::exception& e) {
    why = std::string("request body is not valid JSON: ") + e.what();
  }
  return std::nullopt;
}

std::optional<std::string> string_field(const Json& j, const char* key, bool required, std::string& why) {
  if (!j.contains(key) || j[key].is_null()) {
    if (required) why = std::string("missing field '") + key + "'";
    return std::nullopt;
  }
  if (!j[key].is_string()) {
    why = std::string("field '") + key + "' must be a string";
    return std::nullopt;
  }
  return j[key].get<std::string>();
}

Json missing_entry_json(const ingest::MissingEntry& e) {
  return {{"canonical", e.canonical.to_string()},
          {"title", e.title},
          {"tier", e.tier},
          {"first_seen", format_iso8601(e.first_seen)}};
}

}  // namespace

ApiResponse handle_ask(Runtime& rt, std::string_view body) {
  std::string why;
  auto req = parse_object(body, why);
  if (!req) return error(400, why);
  auto question = string_field(*req, "question", true, why);
  if (!why.empty()) return error(400, why);
  auto session_id = string_field(*req, "session_id", false, why);
  if (!why.empty()) return error(400, why);
  bool ingest = false;
  if (req->contains("ingest") && !(*req)["ingest"].is_null()) {
    if (!(*req)["ingest"].is_boolean()) return error(400, "field 'ingest' must be a boolean");
    ingest = (*req)["ingest"].get<bool>();
  }
  if (text::trim(*question).empty()) return error(400, "question is empty");

  const auto& engine = *rt.engine();
  fsm::SessionContext ctx;
  try {
    ctx = engine.start_session(*question, ingest, session_id);
  } catch (const NotFound& e) {
    return error(404, e.what());
  } catch (const InvalidInput& e) {
    return error(400, e.what());
  } catch (const std::exception& e) {
    return error(500, e.what());
  }

  fsm::RunResult result;
  try {
    result = engine.run_question(ctx);
  } catch (const fsm::RunAborted& e) {
    spdlog::error("session {} aborted: {}", e.session_id(), e.what());
    return {500, Json{{"error", e.what()}, {"trace_id", e.session_id()}, {"trace", trace_json(e.trace())}}};
  } catch (const std::exception& e) {
    spdlog::error("session {} failed: {}", ctx.session_id, e.what());
    return {500, Json{{"error", e.what()}, {"trace_id", ctx.session_id}, {"trace", trace_json(ctx.trace)}}};
  }

  Json out;
  out["session_id"] = ctx.session_id;
  out["outcome"] = result.outcome == fsm::Outcome::Irrelevant ? "irrelevant" : "answered";
  out["answer"] = result.message;
  Json citations = Json::array();
  Json claims = Json::array();
  if (result.answer) {
    const auto& a = *result.answer;
    // The engine only cites session evidence; re-check before anything leaves.
    std::set<retrieval::EvidenceKey> pool;
    for (const auto& ev : ctx.evidence) pool.insert(ev.key());
    for (const auto& c : a.citations) {
      if (!pool.count(c.key())) {
        spdlog::error("session {}: citation {} is not session evidence", ctx.session_id, c.key().to_string());
        return {500, Json{{"error", "citation outside session evidence"}, {"trace_id", ctx.session_id}}};
      }
      citations.push_back({{"id", c.key().to_string()},
                           {"doc_id", c.chunk.doc_id.to_string()},
                           {"span_id", c.chunk.span_id},
                           {"title", c.chunk.metadata.title},
                           {"text", c.chunk.text}});
    }
    for (const auto& claim : a.claims) {
      Json supports = Json::array();
      for (const auto& row : a.claim_table) {
        if (row.claim_id != claim.claim_id) continue;
        for (const auto& s : row.supports) {
          supports.push_back({{"doc_id", s.doc_id.to_string()},
                              {"span_id", s.span_id},
                              {"start", s.offsets.start},
                              {"end", s.offsets.end}});
        }
      }
      claims.push_back({{"claim_id", claim.claim_id}, {"text", claim.text}, {"supports", supports}});
    }
    out["confidence"] = a.final_confidence.value();
    out["confidence_label"] = gateway::label_name(gateway::label_for(a.final_confidence));
    out["abstained"] = a.abstained;
    if (a.disclaimer) out["disclaimer"] = *a.disclaimer;
  } else {
    out["confidence"] = nullptr;
    out["confidence_label"] = nullptr;
    out["abstained"] = false;
  }
  out["citations"] = citations;
  out["claims"] = claims;
  out["trace"] = trace_json(ctx.trace);
  if (ingest) {
    try {
      rt.flush();
    } catch (const std::exception& e) {
      spdlog::error("could not save the vector index: {}", e.what());
    }
  }
  return {200, out};
}

ApiResponse handle_upload(Runtime& rt, std::string_view body) {
  std::string why;
  auto req = parse_object(body, why);
  if (!req) return error(400, why);
  auto canonical_text = string_field(*req, "canonical", true, why);
  if (!why.empty()) return error(400, why);
  auto filename = string_field(*req, "filename", false, why);
  if (!why.empty()) return error(400, why);
  auto encoded = string_field(*req, "bytes", true, why);
  if (!why.empty()) return error(400, why);

  CanonicalId canonical;
  std::string bytes;
  try {
    canonical = ingest::parse_source_id(*canonical_text);
  } catch (const InvalidInput& e) {
    return error(400, e.what());
  }
  try {
    bytes = base64_decode(*encoded);
  } catch (const Error& e) {
    return error(400, std::string("bytes: ") + e.what());
  }
  if (bytes.empty()) return error(400, "uploaded file is empty");

  try {
    auto rec = rt.pipeline().requeue_upload(bytes, canonical);
    rt.flush();
    spdlog::info("upload {} ({}) -> {}", canonical.to_string(), filename.value_or("-"), ingest::status_name(rec.status));
    const bool ok = rec.status == ingest::DocStatus::Ingested;
    return {200, Json{{"canonical", canonical.to_string()},
                      {"status", ok ? "requeued" : "needs-manual-fix"},
                      {"document_status", ingest::status_name(rec.status)}}};
  } catch (const NotFound& e) {
    return error(404, e.what());
  } catch (const ingest::PipelineBusy& e) {
    return error(409, e.what());
  } catch (const InvalidInput& e) {
    return error(400, e.what());
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

ApiResponse handle_sessions(Runtime& rt) {
  try {
    Json out = Json::array();
    for (const auto& s : rt.sessions()->list()) {
      out.push_back({{"session_id", s.session_id},
                     {"title", s.title},
                     {"created_at", format_iso8601(s.created_at)},
                     {"messages", s.messages.size()}});
    }
    return {200, out};
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

ApiResponse handle_session(Runtime& rt, const std::string& id) {
  try {
    if (!rt.sessions()->exists(id)) return error(404, "no session '" + id + "'");
    return {200, Json::parse(store::to_json(rt.sessions()->load(id)))};
  } catch (const NotFound& e) {
    return error(404, e.what());
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

ApiResponse handle_missing_list(Runtime& rt) {
  Json out = Json::array();
  for (const auto& e : rt.stores().missing->entries()) out.push_back(missing_entry_json(e));
  return {200, out};
}

ApiResponse handle_documents(Runtime& rt) {
  Json out = Json::array();
  for (const auto& r : rt.stores().records->records()) {
    out.push_back({{"canonical", r.canonical.to_string()},
                   {"title", r.title},
                   {"tier", r.tier},
                   {"status", ingest::status_name(r.status)}});
  }
  return {200, out};
}

ApiResponse handle_health(Runtime& rt) {
  try {
    const auto& s = rt.stores();
    Json out{{"status", "ok"},
             {"backend", rt.offline() ? "offline" : "configured"},
             {"sessions", rt.sessions()->list().size()},
             {"chunks", s.knowledge->total_size()},
             {"metrics_rows", s.metrics->size()},
             {"documents", s.records->size()},
             {"missing", s.missing->size()}};
    return {200, out};
  } catch (const std::exception& e) {
    return {503, Json{{"status", "unavailable"}, {"error", e.what()}}};
  }
}

void mount(httplib::Server& server, std::shared_ptr<Runtime> rt) {
  auto reply = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Post("/ask", [rt, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle_ask(*rt, req.body));
  });
  server.Post("/upload", [rt, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle_upload(*rt, req.body));
  });
  server.Get("/sessions", [rt, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, handle_sessions(*rt));
  });
  server.Get(R"(/sessions/([^/]+))", [rt, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle_session(*rt, req.matches[1]));
  });
  server.Get("/missing-list", [rt, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, handle_missing_list(*rt));
  });
  server.Get("/documents", [rt, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, handle_documents(*rt));
  });
  server.Get("/health", [rt, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, handle_health(*rt));
  });
}

}  // namespace groundwork::service
