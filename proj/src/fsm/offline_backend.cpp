#include "groundwork/fsm/offline_backend.hpp"

#include <regex>
#include <set>

#include "groundwork/core/text.hpp"
#include "groundwork/fsm/context_format.hpp"
#include "groundwork/gateway/parsers.hpp"
#include "groundwork/gateway/prompts.hpp"

namespace groundwork::fsm {

namespace {

namespace gw = groundwork::gateway;

double number_after(const std::string& prompt, const std::string& label) {
  std::regex re(label + R"(\s*(-?[0-9]+(?:\.[0-9]+)?))");
  std::smatch m;
  if (std::regex_search(prompt, m, re)) return std::stod(m[1].str());
  return 0.0;
}

std::string line_after(const std::string& prompt, const std::string& label) {
  auto pos = prompt.rfind(label);
  if (pos == std::string::npos) return {};
  pos += label.size();
  auto end = prompt.find('\n', pos);
  return std::string(text::trim(prompt.substr(pos, end == std::string::npos ? std::string::npos : end - pos)));
}

std::set<std::string> content_tokens(std::string_view s) {
  static const std::set<std::string> kStop = {"the", "a",  "an",  "of",   "and", "or",   "to",   "in",   "on",
                                              "for", "is", "are", "what", "how", "why",  "does", "do",   "with",
                                              "by",  "it", "its", "be",   "as",  "that", "this", "which", "from"};
  std::set<std::string> out;
  for (auto& t : text::tokenize(s)) {
    if (t.size() > 1 && kStop.count(t) == 0) out.insert(std::move(t));
  }
  return out;
}

std::size_t overlap(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t n = 0;
  for (const auto& t : a) n += b.count(t);
  return n;
}

std::string first_sentence(std::string_view s) {
  s = text::trim(s);
  constexpr std::size_t kMax = 220;
  std::size_t end = std::string_view::npos;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if ((s[i] == '.' || s[i] == '!') && s[i + 1] == ' ' && i > 20) {
      end = i;
      break;
    }
  }
  std::string out(s.substr(0, end == std::string_view::npos ? s.size() : end));
  if (out.size() > kMax) {
    auto cut = out.rfind(' ', kMax);
    out.resize(cut == std::string::npos ? kMax : cut);
  }
  while (!out.empty() && (out.back() == '.' || out.back() == '!' || out.back() == '?' || out.back() == ' ')) {
    out.pop_back();
  }
  // Keep the sentence free of anything the claim splitter would cut on.
  for (char& c : out) {
    if (c == '?' || c == '!' || c == '[' || c == ']') c = ' ';
  }
  return text::join(text::split_words(out), " ");
}

double score_for_similarity(double sim) {
  if (sim >= 0.6) return 1.0;
  if (sim >= 0.45) return 0.75;
  if (sim >= 0.3) return 0.5;
  if (sim >= 0.15) return 0.25;
  return 0.0;
}

}  // namespace

std::shared_ptr<gw::ScriptedProvider> make_offline_provider(OfflineBackendConfig config) {
  auto p = std::make_shared<gw::ScriptedProvider>();

  p->set_handler(std::string(gw::tags::kRelevance), [config](const gw::CompletionRequest& r) {
    bool empty = r.prompt.find("(knowledge base is empty)") != std::string::npos;
    double sim = number_after(r.prompt, "mean similarity score of");
    return gw::serialize_relevance(!empty && sim >= config.relevance_threshold);
  });

  p->set_handler(std::string(gw::tags::kConfidence), [](const gw::CompletionRequest& r) {
    auto score = gw::ConfidenceScore::from(score_for_similarity(number_after(r.prompt, "Mean retrieval similarity:")));
    gw::ConfidenceVerdict v{score, score.value() >= 0.75,
                            "Offline estimate from mean retrieval similarity " +
                                text::format_fixed(number_after(r.prompt, "Mean retrieval similarity:"), 2) + "."};
    return gw::serialize_confidence(v);
  });

  p->set_handler(std::string(gw::tags::kFastDraft), [](const gw::CompletionRequest& r) {
    auto entries = parse_evidence_block(r.prompt);
    return entries.empty() ? std::string("No draft available.") : first_sentence(entries.front().text) + ".";
  });

  p->set_handler(std::string(gw::tags::kDecomposition), [](const gw::CompletionRequest& r) {
    std::string q = line_after(r.prompt, "Question:");
    while (!q.empty() && (q.back() == '?' || q.back() == '.')) q.pop_back();
    return gw::serialize_decomposition({q + " (mechanism)", q + " (reported figures)"});
  });

  p->set_handler(std::string(gw::tags::kSelfEval), [](const gw::CompletionRequest& r) {
    auto topic = content_tokens(line_after(r.prompt, "Subtopic:"));
    std::size_t support = 0;
    for (const auto& e : parse_evidence_block(r.prompt)) {
      if (overlap(topic, content_tokens(e.text)) >= 2) ++support;
    }
    double score = support >= 3 ? 0.75 : support >= 1 ? 0.5 : 0.25;
    return gw::serialize_self_eval(gw::ConfidenceScore::from(score));
  });

  p->set_handler(std::string(gw::tags::kAnswer), [config](const gw::CompletionRequest& r) {
    auto entries = parse_evidence_block(r.prompt);
    std::string out;
    std::size_t written = 0;
    for (const auto& e : entries) {
      if (written == config.answer_sentences) break;
      std::string s = first_sentence(e.text);
      if (s.empty()) continue;
      if (!out.empty()) out += ' ';
      out += s + " " + e.marker + ".";
      ++written;
    }
    return out.empty() ? std::string("The evidence does not address this question.") : out;
  });

  p->set_handler(std::string(gw::tags::kTitle), [](const gw::CompletionRequest& r) {
    auto words = text::split_words(line_after(r.prompt, "User:"));
    for (auto& w : words) {
      while (!w.empty() && !std::isalnum(static_cast<unsigned char>(w.back()))) w.pop_back();
    }
    std::erase_if(words, [](const std::string& w) { return w.empty(); });
    if (words.size() > gw::kMaxTitleWords) words.resize(gw::kMaxTitleWords);
    for (const char* pad : {"Research", "Question", "Session"}) {
      if (words.size() >= gw::kMinTitleWords) break;
      words.emplace_back(pad);
    }
    return text::join(words, " ");
  });

  p->set_handler(std::string(gw::tags::kJudge), [](const gw::CompletionRequest& r) {
    auto reference = content_tokens(line_after(r.prompt, "Reference answer:"));
    auto candidate = content_tokens(line_after(r.prompt, "Candidate answer:"));
    if (reference.empty()) return std::string("NO");
    return 2 * overlap(reference, candidate) >= reference.size() ? std::string("YES") : std::string("NO");
  });

  p->set_handler(std::string(gw::tags::kExtraction), [](const gw::CompletionRequest&) {
    return std::string(R"({"bandwidth_3db_ghz": null, "vpi_l_v_cm": null, "insertion_loss_db": null, )"
                       R"("energy_per_bit_fj": null, "packaging": null})");
  });
  return p;
}

}  // namespace groundwork::fsm
