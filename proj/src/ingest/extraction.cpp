#include "groundwork/ingest/extraction.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <charconv>
#include <cmath>
#include <regex>

#include "groundwork/core/text.hpp"

namespace groundwork::ingest {

using store::Field;
using store::Provenance;

namespace {

// Lower-case unit with joiners (middle dot, '*', '-', spaces) removed.
std::string squash_unit(std::string_view unit) {
  std::string s(text::trim(unit));
  for (std::string_view joiner : {"\xC2\xB7", "\xE2\x8B\x85", "*", "-", " ", "\xC3\x97"}) {
    for (auto p = s.find(joiner); p != std::string::npos; p = s.find(joiner)) s.erase(p, joiner.size());
  }
  return text::to_lower(s);
}

std::optional<double> parse_double(std::string_view s) {
  s = text::trim(s);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::optional<double> to_canonical_unit(std::string_view field, double value, std::string_view unit) {
  auto u = squash_unit(unit);
  if (field == "bandwidth_3db_ghz") {
    if (u == "ghz") return value;
    if (u == "thz") return value * 1000.0;
    if (u == "mhz") return value / 1000.0;
    return std::nullopt;
  }
  if (field == "vpi_l_v_cm") {
    if (u == "vcm") return value;
    if (u == "vmm") return value / 10.0;
    return std::nullopt;
  }
  if (field == "insertion_loss_db") {
    if (u == "db") return value;
    return std::nullopt;
  }
  if (field == "energy_per_bit_fj") {
    if (u.ends_with("/bit")) u.resize(u.size() - 4);
    if (u == "fj") return value;
    if (u == "pj") return value * 1000.0;
    if (u == "aj") return value / 1000.0;
    return std::nullopt;
  }
  throw InvalidInput("unknown metric field '" + std::string(field) + "'");
}

namespace {

struct Rule {
  const char* field;
  std::regex pattern;
  int number_group;
  int unit_group;
};

// Numbers are unsigned decimals; the unit group is mapped by
// to_canonical_unit.
const std::vector<Rule>& rules() {
  static const std::string num = R"(([0-9]+(?:\.[0-9]+)?))";
  static const std::string filler =
      R"((?:\s+(?:of|is|was|reaches|reached|exceeding|exceeds|above|over|beyond|about|approximately|around|only|as\s+low\s+as|below|under|up\s+to))*\s*(?:[=:~<>]\s*)?)";
  static const std::string db3 = R"(3[- ]?dB\s+(?:electro-optic(?:al)?\s+|EO\s+|modulation\s+)?bandwidth)";
  static const std::string vpil = "V(?:\xCF\x80|pi)\\s*(?:\xC2\xB7|\\*|x|\xC3\x97|-)?\\s*L(?:\\s+product)?";
  static const std::string vunit = "(V\\s*(?:\xC2\xB7|\\*|-)?\\s*(?:cm|mm))";
  static const std::string il = R"((?:on-chip\s+|optical\s+|fiber-to-fiber\s+|total\s+)?insertion\s+loss(?:\s+\(IL\))?)";
  constexpr auto flags = std::regex::ECMAScript | std::regex::icase;
  static const std::vector<Rule> kRules = {
      {"bandwidth_3db_ghz", std::regex(db3 + filler + num + R"(\s*(GHz|THz|MHz)\b)", flags), 1, 2},
      {"bandwidth_3db_ghz", std::regex(num + R"(\s*(GHz|THz|MHz)\s+)" + db3, flags), 1, 2},
      {"vpi_l_v_cm", std::regex(vpil + filler + num + "\\s*" + vunit, flags), 1, 2},
      {"vpi_l_v_cm", std::regex(num + "\\s*" + vunit + "\\s+" + vpil, flags), 1, 2},
      {"insertion_loss_db", std::regex(il + filler + num + R"(\s*(dB)\b)", flags), 1, 2},
      {"insertion_loss_db", std::regex(num + R"(\s*(dB)\s+)" + il, flags), 1, 2},
  };
  return kRules;
}

}  // namespace

ExtractedMetrics extract_deterministic(std::string_view text) {
  struct Hit {
    std::ptrdiff_t pos = -1;
    double value = 0.0;
  };
  std::map<std::string, Hit> best;
  const std::string s(text);
  for (const auto& rule : rules()) {
    for (auto it = std::sregex_iterator(s.begin(), s.end(), rule.pattern); it != std::sregex_iterator(); ++it) {
      const auto& m = *it;
      auto value = parse_double(m.str(rule.number_group));
      if (!value) continue;
      auto canonical = to_canonical_unit(rule.field, *value, m.str(rule.unit_group));
      if (!canonical) continue;
      auto& hit = best[rule.field];
      if (hit.pos < 0 || m.position(0) < hit.pos) hit = {m.position(0), *canonical};
      break;  // later matches of this rule are further along
    }
  }
  ExtractedMetrics out;
  for (const auto& [field, hit] : best) {
    out.*store::numeric_field(field) = Field<double>{hit.value, Provenance::Deterministic};
  }
  return out;
}

ExtractedMetrics extract_deterministic(const StructuredDocument& doc) { return extract_deterministic(doc.full_text()); }

namespace {

bool results_like(std::string_view heading) {
  auto h = text::to_lower(heading);
  for (std::string_view key : {"abstract", "result", "discussion", "conclusion", "performance", "measurement",
                               "experiment", "characterization"}) {
    if (h.find(key) != std::string::npos) return true;
  }
  return false;
}

std::string cut_utf8(std::string s, std::size_t max_bytes) {
  if (s.size() <= max_bytes) return s;
  std::size_t cut = max_bytes;
  while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
  s.resize(cut);
  return s;
}

}  // namespace

std::string select_excerpt(const StructuredDocument& doc, std::size_t tokens) {
  std::vector<const Section*> picked;
  for (const auto& s : doc.sections) {
    if (results_like(s.heading)) picked.push_back(&s);
  }
  if (picked.empty()) {
    for (const auto& s : doc.sections) picked.push_back(&s);
  }
  std::string out;
  for (const auto* s : picked) {
    if (!out.empty()) out += "\n\n";
    out += s->heading;
    for (const auto& p : s->paragraphs) out += "\n" + p;
  }
  return cut_utf8(std::move(out), tokens * 4);
}

std::string metrics_schema_template() {
  nlohmann::ordered_json j;
  j["bandwidth_3db_ghz"] = "number in GHz or null";
  j["vpi_l_v_cm"] = "number in V*cm or null";
  j["insertion_loss_db"] = "number in dB or null";
  j["energy_per_bit_fj"] = "number in fJ/bit or null";
  j["packaging"] = "short text or null";
  return j.dump(2);
}

namespace {

struct RawReply {
  std::map<std::string, nlohmann::json> fields;
};

const std::vector<std::string>& schema_keys() {
  static const std::vector<std::string> kKeys = [] {
    auto keys = store::numeric_fields();
    keys.push_back("packaging");
    return keys;
  }();
  return kKeys;
}

std::string_view strip_fences(std::string_view reply) {
  auto t = text::trim(reply);
  if (t.starts_with("```")) {
    auto nl = t.find('\n');
    auto close = t.rfind("```");
    if (nl != std::string_view::npos && close > nl) t = text::trim(t.substr(nl + 1, close - nl - 1));
  }
  return t;
}

RawReply parse_reply(std::string_view reply) {
  auto j = nlohmann::json::parse(strip_fences(reply), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw gateway::SchemaViolation("extraction reply is not a JSON object");
  RawReply out;
  const auto& keys = schema_keys();
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) {
      throw gateway::SchemaViolation("extraction reply has unknown key '" + it.key() + "'");
    }
    out.fields[it.key()] = it.value();
  }
  return out;
}

std::optional<double> numeric_value(const std::string& field, const nlohmann::json& v) {
  std::optional<double> value;
  if (v.is_number()) {
    value = v.get<double>();
  } else if (v.is_string()) {
    auto s = text::trim(v.get<std::string>());
    auto split = s.find_first_not_of("0123456789.+-eE");
    if (split == 0 || split == std::string_view::npos) {
      value = split == 0 ? std::nullopt : parse_double(s);
    } else if (auto number = parse_double(s.substr(0, split))) {
      value = to_canonical_unit(field, *number, s.substr(split));
    }
  }
  if (!value || !std::isfinite(*value) || *value < 0.0) return std::nullopt;
  if (*value == 0.0 && field != "insertion_loss_db") return std::nullopt;
  return value;
}

}  // namespace

ReasoningOutcome extract_reasoning(std::string_view excerpt, const ExtractedMetrics& deterministic,
                                   const gateway::Gateway& gw) {
  ReasoningOutcome out;
  const auto& tmpl = gateway::builtin_template(gateway::tags::kExtraction);
  auto prompt = gateway::render(tmpl, {{"schema", metrics_schema_template()}, {"excerpt", std::string(excerpt)}});
  gateway::Completion<RawReply> reply;
  try {
    reply = gw.call(tmpl.role, gateway::tags::kExtraction, prompt, parse_reply);
  } catch (const gateway::SchemaExhausted& e) {
    out.usage = e.usage();
    out.warning = std::string("reasoning extraction skipped: ") + e.what();
    spdlog::warn("{}", *out.warning);
    return out;
  }
  out.usage = reply.usage;

  for (const auto& [key, value] : reply.value.fields) {
    if (value.is_null()) continue;
    if (key == "packaging") {
      if (deterministic.packaging) continue;
      if (!value.is_string() || text::trim(value.get<std::string>()).empty()) {
        out.rejected.push_back(key);
        continue;
      }
      out.metrics.packaging = Field<std::string>{std::string(text::trim(value.get<std::string>())),
                                                 Provenance::Reasoning};
      continue;
    }
    auto member = store::numeric_field(key);
    if (deterministic.*member) continue;  // the deterministic pass owns it
    auto v = numeric_value(key, value);
    if (!v) {
      out.rejected.push_back(key);
      continue;
    }
    out.metrics.*member = Field<double>{*v, Provenance::Reasoning};
  }
  return out;
}

ExtractedMetrics combine_passes(const ExtractedMetrics& deterministic, const ExtractedMetrics& reasoning) {
  ExtractedMetrics out = deterministic;
  for (const auto& name : store::numeric_fields()) {
    auto member = store::numeric_field(name);
    if (!(out.*member) && reasoning.*member) out.*member = reasoning.*member;
  }
  if (!out.packaging) out.packaging = reasoning.packaging;
  return out;
}

}  // namespace groundwork::ingest
