#pragma once

#include <memory>

#include "groundwork/gateway/provider.hpp"

namespace groundwork::fsm {

// Heuristic stand-in for real models, used when no credentials are
// configured. Every state tag gets a handler that reads the rendered prompt:
// relevance and confidence follow the similarity score embedded in it,
// self-evaluation counts evidence overlapping the subtopic, and the answer
// handler writes one extractive, cited sentence per top evidence entry.
// Deterministic; replies always satisfy the strict parsers.
struct OfflineBackendConfig {
  double relevance_threshold = 0.05;
  std::size_t answer_sentences = 3;
};

std::shared_ptr<gateway::ScriptedProvider> make_offline_provider(OfflineBackendConfig config = {});

}  // namespace groundwork::fsm
