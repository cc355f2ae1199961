#pragma once

#include <map>
#include <string>
#include <string_view>
#include <variant>

#include "groundwork/gateway/types.hpp"

namespace groundwork::gateway {

class RenderError : public Error {
 public:
  using Error::Error;
};

// Placeholder syntax: {name} or {name:.Nf} (fixed, N decimals, numbers only).
// "{{" and "}}" are literal braces.
struct PromptTemplate {
  Role role = Role::Knowledge;
  std::string state_tag;
  std::string body;
};

using BindingValue = std::variant<std::string, double>;
using Bindings = std::map<std::string, BindingValue, std::less<>>;

// Throws RenderError naming the first unbound placeholder, or describing a
// malformed placeholder.
std::string render(const PromptTemplate& tmpl, const Bindings& bindings);

// State tags of the built-in templates.
namespace tags {
inline constexpr std::string_view kRelevance = "relevance";
inline constexpr std::string_view kConfidence = "confidence";
inline constexpr std::string_view kFastDraft = "fast_draft";
inline constexpr std::string_view kDecomposition = "decomposition";
inline constexpr std::string_view kSelfEval = "self_eval";
inline constexpr std::string_view kAnswer = "answer";
inline constexpr std::string_view kTitle = "title";
inline constexpr std::string_view kExtraction = "extraction";
inline constexpr std::string_view kJudge = "judge";
}  // namespace tags

// Built-in template for a state tag. Throws NotFound for unknown tags.
const PromptTemplate& builtin_template(std::string_view state_tag);

}  // namespace groundwork::gateway
