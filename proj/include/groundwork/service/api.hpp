#pragma once

#include <json.hpp>
#include <memory>
#include <string>
#include <string_view>

#include "groundwork/service/runtime.hpp"

namespace httplib {
class Server;
}

namespace groundwork::service {

using Json = nlohmann::ordered_json;

struct ApiResponse {
  int status = 200;
  Json body;
};

// Request handlers. Each takes the raw request body (JSON) and never throws;
// errors come back as {"error": ...} with a 4xx/5xx status. The CLI calls
// the same handlers, so both surfaces drive the engine identically.

// POST /ask {question, ingest?, session_id?}
// -> {session_id, outcome, answer, citations: [{id, doc_id, span_id, title, text}],
//     confidence, confidence_label, abstained, disclaimer?, trace: [...]}
// 400 malformed body, 404 unknown session, 500 engine abort (with trace id).
ApiResponse handle_ask(Runtime& rt, std::string_view body);

// POST /upload {canonical, filename, bytes (base64)}
// -> {canonical, status: "requeued" | "needs-manual-fix"}
// 400 malformed body, 404 unknown or not awaiting upload, 409 pipeline busy.
ApiResponse handle_upload(Runtime& rt, std::string_view body);

ApiResponse handle_sessions(Runtime& rt);                           // GET /sessions
ApiResponse handle_session(Runtime& rt, const std::string& id);     // GET /sessions/{id}
ApiResponse handle_missing_list(Runtime& rt);                       // GET /missing-list
ApiResponse handle_documents(Runtime& rt);                          // GET /documents
ApiResponse handle_health(Runtime& rt);                             // GET /health

// Registers every route on the server.
void mount(httplib::Server& server, std::shared_ptr<Runtime> rt);

}  // namespace groundwork::service
