#include "groundwork/eval/manifest.hpp"

#include <json.hpp>
#include <limits>
#include <set>

#include "groundwork/core/fs.hpp"
#include "groundwork/core/text.hpp"

namespace groundwork::eval {

const std::vector<std::string>& question_categories() {
  static const std::vector<std::string> kCategories{
      "analytical-reasoning",  "numerical-analysis", "methodological-critique",
      "comparative-synthesis", "anecdotal-response", "application-use-case",
  };
  return kCategories;
}

bool is_question_category(std::string_view category) {
  for (const auto& c : question_categories()) {
    if (c == category) return true;
  }
  return false;
}

std::vector<Question> parse_questions(std::string_view text) {
  std::vector<Question> out;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  for (const auto& raw : text::split(text, '\n')) {
    ++line_no;
    auto line = text::trim(raw);
    if (line.empty()) continue;
    const auto where = "questions line " + std::to_string(line_no) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + e.what());
    }
    if (!j.is_object()) throw ValidationError(where + "expected an object");
    try {
      Question q;
      q.question_id = j.at("question_id").get<std::string>();
      q.category = j.at("category").get<std::string>();
      q.text = j.at("text").get<std::string>();
      if (j.contains("gold_answer") && !j["gold_answer"].is_null()) q.gold_answer = j["gold_answer"].get<std::string>();
      if (j.contains("gold_sources")) q.gold_sources = j["gold_sources"].get<std::vector<std::string>>();
      if (text::trim(q.question_id).empty()) throw ValidationError(where + "empty question_id");
      if (text::trim(q.text).empty()) throw ValidationError(where + "empty text");
      if (!is_question_category(q.category)) throw ValidationError(where + "unknown category '" + q.category + "'");
      if (!ids.insert(q.question_id).second) throw ValidationError(where + "duplicate id '" + q.question_id + "'");
      out.push_back(std::move(q));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + e.what());
    }
  }
  return out;
}

std::vector<Question> load_questions(const std::filesystem::path& path) { return parse_questions(fs::read_file(path)); }

std::size_t Factors::settings() const {
  return relevance_models.size() * confidence_models.size() * knowledge_models.size() * retrieval_ks.size() *
         reasoning_levels.size() * temperatures.size() * allow_online_search.size();
}

void Factors::validate() const {
  if (settings() == 0) throw ConfigError("every factor needs at least one level");
  for (int k : retrieval_ks) {
    if (k < 1) throw ConfigError("retrieval_k must be at least 1");
  }
  for (const auto& t : temperatures) {
    if (t && (*t < 0.0 || *t > 2.0)) throw ConfigError("temperature must be in [0, 2]");
  }
  auto check_models = [](const std::vector<std::string>& models, const char* what) {
    for (const auto& m : models) {
      if (text::trim(m).empty()) throw ConfigError(std::string("empty ") + what + " model id");
    }
  };
  check_models(relevance_models, "relevance");
  check_models(confidence_models, "confidence");
  check_models(knowledge_models, "knowledge");
}

std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw InvalidInput("bounded_draw needs a positive bound");
  // Reject the top partial block so every residue is equally likely.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

RunManifest build_manifest(const Factors& factors, const std::vector<Question>& questions, std::uint64_t seed) {
  factors.validate();
  std::vector<RunConfig> grid;
  grid.reserve(factors.settings());
  for (const auto& rel : factors.relevance_models)
    for (const auto& conf : factors.confidence_models)
      for (const auto& know : factors.knowledge_models)
        for (int k : factors.retrieval_ks)
          for (auto level : factors.reasoning_levels)
            for (const auto& temp : factors.temperatures)
              for (bool online : factors.allow_online_search) {
                RunConfig c;
                c.system_id = factors.system_id;
                c.relevance_model = rel;
                c.confidence_model = conf;
                c.knowledge_model = know;
                c.retrieval_k = k;
                c.reasoning_level = level;
                c.temperature = temp;
                c.allow_online_search = online;
                grid.push_back(std::move(c));
              }

  RunManifest manifest;
  manifest.seed = seed;
  manifest.runs.reserve(grid.size() * questions.size());
  std::mt19937_64 rng(seed);
  for (const auto& q : questions) {
    auto order = grid;
    for (std::size_t i = order.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(bounded_draw(rng, i));
      std::swap(order[i - 1], order[j]);
    }
    for (auto& c : order) {
      c.question_id = q.question_id;
      c.category = q.category;
      c.seed = splitmix64(seed ^ splitmix64(manifest.runs.size()));
      manifest.runs.push_back(std::move(c));
    }
  }
  return manifest;
}

}  // namespace groundwork::eval
