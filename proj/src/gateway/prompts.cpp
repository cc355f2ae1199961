#include "groundwork/gateway/prompts.hpp"

#include <array>
#include <cctype>
#include <charconv>

#include "groundwork/core/text.hpp"

namespace groundwork::gateway {

namespace {

bool valid_name(std::string_view name) {
  if (name.empty()) return false;
  for (char c : name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

std::string format_value(std::string_view name, std::string_view spec, const BindingValue& value) {
  if (spec.empty()) {
    if (const auto* s = std::get_if<std::string>(&value)) return *s;
    return text::format_shortest(std::get<double>(value));
  }
  // Only ".Nf" is supported.
  int decimals = -1;
  if (spec.size() >= 3 && spec.front() == '.' && spec.back() == 'f') {
    auto digits = spec.substr(1, spec.size() - 2);
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), decimals);
    if (ec != std::errc{} || p != digits.data() + digits.size()) decimals = -1;
  }
  if (decimals < 0 || decimals > 17) {
    throw RenderError("unsupported format spec ':" + std::string(spec) + "' for placeholder '" + std::string(name) + "'");
  }
  const auto* d = std::get_if<double>(&value);
  if (d == nullptr) {
    throw RenderError("placeholder '" + std::string(name) + "' has a numeric format but a text binding");
  }
  return text::format_fixed(*d, decimals);
}

}  // namespace

std::string render(const PromptTemplate& tmpl, const Bindings& bindings) {
  const std::string& body = tmpl.body;
  std::string out;
  out.reserve(body.size() + 256);
  std::size_t i = 0;
  while (i < body.size()) {
    char c = body[i];
    if (c == '{' && i + 1 < body.size() && body[i + 1] == '{') {
      out += '{';
      i += 2;
      continue;
    }
    if (c == '}' && i + 1 < body.size() && body[i + 1] == '}') {
      out += '}';
      i += 2;
      continue;
    }
    if (c == '}') throw RenderError("unmatched '}' at offset " + std::to_string(i) + " in template " + tmpl.state_tag);
    if (c != '{') {
      out += c;
      ++i;
      continue;
    }
    std::size_t close = body.find('}', i + 1);
    if (close == std::string::npos) {
      throw RenderError("unterminated placeholder at offset " + std::to_string(i) + " in template " + tmpl.state_tag);
    }
    std::string_view field(body.data() + i + 1, close - i - 1);
    std::string_view name = field;
    std::string_view spec;
    if (auto colon = field.find(':'); colon != std::string_view::npos) {
      name = field.substr(0, colon);
      spec = field.substr(colon + 1);
    }
    if (!valid_name(name)) throw RenderError("malformed placeholder '{" + std::string(field) + "}'");
    auto it = bindings.find(name);
    if (it == bindings.end()) throw RenderError("unbound placeholder '" + std::string(name) + "'");
    out += format_value(name, spec, it->second);
    i = close + 1;
  }
  return out;
}

namespace {

const std::array<PromptTemplate, 9>& builtins() {
  static const std::array<PromptTemplate, 9> kTemplates = {{
      {Role::Relevance, std::string(tags::kRelevance),
       "You screen questions for a research assistant whose knowledge base covers the documents "
       "summarized below.\n"
       "Knowledge base summaries:\n{summaries_text}\n\n"
       "The best matching passages have a mean similarity score of {sim_score:.2f} to the question; take "
       "that score into account.\n"
       "Question: {question}\n\n"
       "Decide whether the question falls within the scope of this knowledge base.\n"
       "Reply with exactly one line, either\nRelevant: Yes\nor\nRelevant: No"},
      {Role::Confidence, std::string(tags::kConfidence),
       "Judge whether the context below is enough to answer the question well.\n"
       "Mean retrieval similarity: {mean_sim:.2f}\n"
       "Context:\n{base_context}\n\n"
       "Question: {question}\n\n"
       "Output one JSON object with exactly the keys confidence_score, confident, reasoning.\n"
       "confidence_score is one of 0.0, 0.25, 0.5, 0.75, 1.0 where 0.0 means the context is unrelated, "
       "0.5 means partial coverage and 1.0 means the context fully answers the question.\n"
       "confident is true if and only if confidence_score >= 0.75.\n"
       "reasoning is a single line of at most 25 words.\n"
       "Example: {{\"confidence_score\": 0.5, \"confident\": false, \"reasoning\": \"Mechanism covered, "
       "numbers missing.\"}}"},
      {Role::Confidence, std::string(tags::kFastDraft),
       "Write a two-sentence draft answer to the question from the context only.\n"
       "Context:\n{base_context}\n\nQuestion: {question}"},
      {Role::Knowledge, std::string(tags::kDecomposition),
       "Break the question into 2 or 3 narrow, technically specific subtopics that together cover what "
       "an answer needs.\n"
       "Context:\n{base_context}\n\n"
       "Question: {question}\n\n"
       "Reply with a Python list of strings and nothing else, for example:\n"
       "[\"first subtopic\", \"second subtopic\"]"},
      {Role::Confidence, std::string(tags::kSelfEval),
       "Rate how well you could answer the subtopic below from the context.\n"
       "Context:\n{base_context}\n\n"
       "Subtopic: {topic}\n\n"
       "Reply with a single number from 0.0, 0.25, 0.5, 0.75, 1.0 where 0.5 means moderate understanding "
       "and 0.75 means confident with small gaps. No other text."},
      {Role::Knowledge, std::string(tags::kAnswer),
       "Answer the question using only the evidence below. Every factual sentence must end with one or "
       "more citation markers copied verbatim from the evidence list, written as "
       "[[cite: <kind>:<value> # <span>]]. Never cite anything that is not listed.\n"
       "Current confidence: {confidence:.2f}. Mean evidence similarity: {mean_sim:.2f}.\n"
       "Evidence:\n{base_context}\n\n"
       "Question: {question}"},
      {Role::FastTitle, std::string(tags::kTitle),
       "Give a title of 3 to 6 words for this conversation. Reply with the title only.\n\n{exchange}"},
      {Role::Knowledge, std::string(tags::kExtraction),
       "Extract device metrics from the excerpt. Fill a field only when the excerpt states it; use null "
       "otherwise. Reply with one JSON object matching this template:\n{schema}\n\n"
       "Excerpt:\n{excerpt}"},
      {Role::Judge, std::string(tags::kJudge),
       "Question: {question}\nReference answer: {gold_answer}\nCandidate answer: {answer}\n\n"
       "Is the candidate answer correct and consistent with the reference? Reply YES or NO."},
  }};
  return kTemplates;
}

}  // namespace

const PromptTemplate& builtin_template(std::string_view state_tag) {
  for (const auto& t : builtins()) {
    if (t.state_tag == state_tag) return t;
  }
  throw NotFound("no prompt template for state tag '" + std::string(state_tag) + "'");
}

}  // namespace groundwork::gateway
