#include "groundwork/ingest/corpus.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "groundwork/core/fs.hpp"
#include "groundwork/core/text.hpp"
#include "groundwork/ingest/parser.hpp"

namespace groundwork::ingest {

namespace {

constexpr std::string_view kMetaHeader = "%META v1";
constexpr std::string_view kBodyMarker = "%BODY\n";

bool same_icase(std::string_view a, std::string_view b) { return text::to_lower(a) == text::to_lower(b); }

KeywordTuple parse_keywords(std::string_view s, const std::string& where) {
  auto parts = text::split(s, '|');
  if (parts.size() != 3) throw ValidationError(where + ": keywords need 'platform | device | speed'");
  KeywordTuple t{std::string(text::trim(parts[0])), std::string(text::trim(parts[1])),
                 std::string(text::trim(parts[2])), {}};
  if (t.platform.empty() || t.device_class.empty() || t.speed_marker.empty()) {
    throw ValidationError(where + ": empty keyword axis");
  }
  return t;
}

std::vector<std::string> semicolon_list(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& part : text::split(s, ';')) {
    auto t = text::trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

class CorpusAdapter final : public SourceAdapter {
 public:
  CorpusAdapter(int tier, std::shared_ptr<const std::vector<CorpusDocument>> docs)
      : tier_(tier), docs_(std::move(docs)) {}

  int tier() const override { return tier_; }
  std::string name() const override { return "corpus-tier-" + std::to_string(tier_); }

  std::vector<Candidate> search(const KeywordTuple& tuple) override {
    std::vector<Candidate> out;
    for (const auto& d : *docs_) {
      if (d.candidate.record.tier != tier_) continue;
      if (!same_icase(d.keywords.platform, tuple.platform) || !same_icase(d.keywords.device_class, tuple.device_class) ||
          !same_icase(d.keywords.speed_marker, tuple.speed_marker)) {
        continue;
      }
      if (!tuple.window.contains(d.candidate.record.pub_date.year)) continue;
      out.push_back(d.candidate);
    }
    return out;
  }

  std::optional<Candidate> fetch(const CanonicalId& id) override {
    for (const auto& d : *docs_) {
      if (d.candidate.record.tier == tier_ && d.candidate.record.canonical == id) return d.candidate;
    }
    return std::nullopt;
  }

 private:
  int tier_;
  std::shared_ptr<const std::vector<CorpusDocument>> docs_;
};

KeywordAxes parse_axes(std::string_view text) {
  KeywordAxes axes;
  for (const auto& raw : text::split(text, '\n')) {
    auto line = text::trim(raw);
    if (line.empty() || line.starts_with("#")) continue;
    auto colon = line.find(':');
    if (colon == std::string_view::npos) throw ValidationError("axes line without ':'");
    auto key = text::trim(line.substr(0, colon));
    auto value = line.substr(colon + 1);
    if (key == "platforms") {
      axes.platforms = semicolon_list(value);
    } else if (key == "devices") {
      axes.devices = semicolon_list(value);
    } else if (key == "speeds") {
      axes.speeds = semicolon_list(value);
    } else if (key == "window") {
      auto range = text::split(value, '-');
      if (range.empty() || range.size() > 2) throw ValidationError("window needs 'YYYY-' or 'YYYY-YYYY'");
      axes.window.first = Date::parse(text::trim(range[0])).year;
      if (range.size() == 2 && !text::trim(range[1]).empty()) axes.window.last = Date::parse(text::trim(range[1])).year;
    } else {
      throw ValidationError("unknown axes key '" + std::string(key) + "'");
    }
  }
  return axes;
}

}  // namespace

CorpusDocument SyntheticCorpus::parse_document(std::string_view text, const std::string& file_name) {
  auto body_at = text.find(kBodyMarker);
  if (!text.starts_with(kMetaHeader) || body_at == std::string_view::npos) {
    throw ValidationError(file_name + ": expected '%META v1' ... '%BODY'");
  }
  std::map<std::string, std::string> meta;
  for (const auto& raw : text::split(text.substr(kMetaHeader.size(), body_at - kMetaHeader.size()), '\n')) {
    auto line = text::trim(raw);
    if (line.empty()) continue;
    auto colon = line.find(':');
    if (colon == std::string_view::npos) throw ValidationError(file_name + ": metadata line without ':'");
    meta[std::string(text::trim(line.substr(0, colon)))] = std::string(text::trim(line.substr(colon + 1)));
  }
  auto need = [&](const char* key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end() || it->second.empty()) throw ValidationError(file_name + ": missing '" + key + "'");
    return it->second;
  };

  CorpusDocument doc;
  doc.file_name = file_name;
  auto& r = doc.candidate.record;
  try {
    r.canonical = CanonicalId::parse(need("canonical"));
  } catch (const InvalidInput& e) {
    throw ValidationError(file_name + ": " + e.what());
  }
  r.title = need("title");
  r.pub_date = Date::parse(need("date"));
  const auto& tier = need("tier");
  if (tier.size() != 1 || tier[0] < '1' || tier[0] > '5') throw ValidationError(file_name + ": tier must be 1-5");
  r.tier = tier[0] - '0';
  r.venue = meta.count("venue") ? meta["venue"] : "";
  r.authors = semicolon_list(meta.count("authors") ? meta["authors"] : "");
  doc.keywords = parse_keywords(need("keywords"), file_name);
  doc.candidate.abstract = meta.count("abstract") ? meta["abstract"] : "";
  const auto& access = need("access");
  if (access == "open") {
    doc.candidate.pdf_bytes = std::string(text.substr(body_at + kBodyMarker.size()));
  } else if (access != "paywalled") {
    throw ValidationError(file_name + ": access must be 'open' or 'paywalled'");
  }
  return doc;
}

SyntheticCorpus SyntheticCorpus::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ValidationError("corpus directory " + dir.string() + " not found");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".doc") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  SyntheticCorpus corpus;
  for (const auto& f : files) corpus.docs_.push_back(parse_document(fs::read_file(f), f.filename().string()));

  if (auto g = dir / "citations.graph"; std::filesystem::exists(g)) {
    *corpus.graph_ = MapCitationGraph::parse(fs::read_file(g));
  }
  if (auto a = dir / "axes.txt"; std::filesystem::exists(a)) {
    corpus.axes_ = parse_axes(fs::read_file(a));
  } else {
    std::set<std::string> p, d, s;
    for (const auto& doc : corpus.docs_) {
      p.insert(doc.keywords.platform);
      d.insert(doc.keywords.device_class);
      s.insert(doc.keywords.speed_marker);
    }
    corpus.axes_ = {{p.begin(), p.end()}, {d.begin(), d.end()}, {s.begin(), s.end()}, {}};
  }
  return corpus;
}

std::vector<std::shared_ptr<SourceAdapter>> SyntheticCorpus::adapters() const {
  auto docs = std::make_shared<const std::vector<CorpusDocument>>(docs_);
  std::vector<std::shared_ptr<SourceAdapter>> out;
  for (int tier = 1; tier <= 5; ++tier) out.push_back(std::make_shared<CorpusAdapter>(tier, docs));
  return out;
}

namespace {

const std::vector<std::string> kPlatforms = {"thin-film lithium niobate", "silicon photonics"};
const std::vector<std::string> kDevices = {"mach-zehnder modulator", "ring modulator"};
const std::vector<std::string> kSpeeds = {"100 Gbaud", "200 Gb/s"};
const std::string kOrphanPlatform = "plasmonic organic hybrid";
const std::vector<std::string> kVenues = {"Optics Express", "Journal of Lightwave Technology", "Optica",
                                          "Photonics Research", "arXiv"};
const std::vector<std::string> kSurnames = {"Okafor", "Lindqvist", "Tanaka", "Moreau", "Haddad",
                                            "Novak",  "Ramirez",   "Chen",   "Ivanova", "Mensah"};

std::string doi_for(std::size_t i) { return "10.5555/gw." + std::to_string(i + 1); }

struct GeneratedDoc {
  std::string doi;
  std::string title;
  int year = 2020;
  int tier = 1;
  KeywordTuple keywords;
  bool paywalled = false;
  bool malformed = false;
  std::vector<std::string> authors;
  std::string abstract;
  StructuredDocument body;
};

std::string render_doc(const GeneratedDoc& g, const std::string& body, const std::string& venue) {
  std::string out(kMetaHeader);
  out += "\ncanonical: doi:" + g.doi;
  out += "\ntitle: " + g.title;
  out += "\ndate: " + std::to_string(g.year) + "-06-15";
  out += "\ntier: " + std::to_string(g.tier);
  out += "\nvenue: " + venue;
  out += "\nauthors: " + text::join(g.authors, "; ");
  out += "\nkeywords: " + g.keywords.to_string();
  out += std::string("\naccess: ") + (g.paywalled ? "paywalled" : "open");
  out += "\nabstract: " + g.abstract;
  out += "\n%BODY\n" + body;
  return out;
}

}  // namespace

void write_synthetic_corpus(const std::filesystem::path& dir, const SyntheticCorpusSpec& spec) {
  if (spec.documents < 2 || spec.orphans >= spec.documents) {
    throw ConfigError("synthetic corpus needs at least 2 documents and fewer orphans than documents");
  }
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(spec.seed);
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto chance = [&](double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; };

  const std::size_t regular = spec.documents - spec.orphans;
  std::vector<GeneratedDoc> docs(spec.documents);
  std::string graph = "# citing -> cited\n";

  for (std::size_t i = 0; i < spec.documents; ++i) {
    auto& g = docs[i];
    bool orphan = i >= regular;
    g.doi = doi_for(i);
    g.keywords = {orphan ? kOrphanPlatform : kPlatforms[i % 2], kDevices[(i / 2) % 2], kSpeeds[(i / 4) % 2], {}};
    g.year = uniform(2018, 2025);
    g.tier = uniform(1, 5);
    // The published half of the preprint pair must come first in tier order.
    if (i == 0) g.tier = 1;
    g.paywalled = !orphan && i != 0 && chance(spec.paywalled_fraction);
    g.malformed = !orphan && i != 0 && !g.paywalled && chance(spec.malformed_fraction);
    g.title = "Study " + std::to_string(i + 1) + " of a " + g.keywords.speed_marker + " " + g.keywords.platform +
              " " + g.keywords.device_class;
    for (int a = uniform(1, 3); a > 0; --a) {
      g.authors.push_back(std::string(1, static_cast<char>('A' + uniform(0, 25))) + ". " +
                          kSurnames[uniform(0, static_cast<int>(kSurnames.size()) - 1)]);
    }

    double bw = uniform(30, 140) + 0.5 * uniform(0, 1);
    double vpil = uniform(15, 60) / 10.0;
    double il = uniform(5, 60) / 10.0;
    std::string bw_text = chance(0.2) ? "a 3-dB bandwidth of " + text::format_shortest(bw / 1000.0) + " THz"
                                      : "a 3-dB bandwidth of " + text::format_shortest(bw) + " GHz";
    std::string vpil_text = chance(0.2) ? "a V\xCF\x80\xC2\xB7L of " + text::format_shortest(vpil * 10.0) + " V\xC2\xB7mm"
                                        : "a V\xCF\x80\xC2\xB7L of " + text::format_shortest(vpil) + " V\xC2\xB7" "cm";
    g.abstract = "We report a " + g.keywords.device_class + " on " + g.keywords.platform + " operating at " +
                 g.keywords.speed_marker + (g.paywalled ? " with " + bw_text + "." : ".");

    std::vector<std::string> results;
    results.push_back("The fabricated device shows " + bw_text + " and " + vpil_text + ".");
    if (chance(0.7)) results.push_back("The measured insertion loss of " + text::format_shortest(il) + " dB is dominated by coupling.");
    results.push_back("Eye diagrams remain open at " + g.keywords.speed_marker + " over 2 km of fiber.");

    g.body.title = g.title;
    g.body.sections = {
        {"Abstract", {g.abstract}},
        {"Introduction",
         {"Electro-optic modulators on " + g.keywords.platform + " trade drive voltage against bandwidth.",
          "This work examines a " + g.keywords.device_class + " design with travelling-wave electrodes."}},
        {"Results", results},
        {"Conclusion", {"The design suits short-reach links at " + g.keywords.speed_marker + "."}},
    };
  }

  // Citations: every regular document cites up to three earlier ones; each
  // orphan is cited by one regular document and is otherwise invisible to
  // the keyword crawl.
  for (std::size_t i = 1; i < regular; ++i) {
    std::set<std::size_t> cited;
    for (int c = uniform(1, 3); c > 0; --c) cited.insert(static_cast<std::size_t>(uniform(0, static_cast<int>(i) - 1)));
    for (auto j : cited) {
      graph += "doi:" + docs[i].doi + " -> doi:" + docs[j].doi + "\n";
      docs[i].body.references.push_back(docs[j].title + ". doi:" + docs[j].doi);
    }
  }
  for (std::size_t k = regular; k < spec.documents; ++k) {
    std::size_t citing = (k * 7) % regular;
    graph += "doi:" + docs[citing].doi + " -> doi:" + docs[k].doi + "\n";
    docs[citing].body.references.push_back(docs[k].title + ". doi:" + docs[k].doi);
  }

  std::string axes = "platforms: " + text::join(kPlatforms, "; ") + "\n";
  axes += "devices: " + text::join(kDevices, "; ") + "\n";
  axes += "speeds: " + text::join(kSpeeds, "; ") + "\n";
  axes += "window: 2018-\n";
  fs::write_file_atomic(dir / "axes.txt", axes);
  fs::write_file_atomic(dir / "citations.graph", graph);

  char name[32];
  for (std::size_t i = 0; i < spec.documents; ++i) {
    const auto& g = docs[i];
    auto body = render_plain_text(g.body);
    if (g.malformed) body.resize(body.size() / 2);  // truncated download
    std::snprintf(name, sizeof name, "doc_%03zu.doc", i + 1);
    auto venue = kVenues[static_cast<std::size_t>(g.tier - 1)];
    fs::write_file_atomic(dir / name, render_doc(g, body, venue));
  }

  // Preprint of the first document: same DOI, different bytes, tier 5.
  GeneratedDoc preprint = docs[0];
  preprint.tier = 5;
  preprint.body.sections.back().paragraphs.push_back("Preprint version; results subject to revision.");
  fs::write_file_atomic(dir / "doc_001_preprint.doc", render_doc(preprint, render_plain_text(preprint.body), "arXiv"));
}

}  // namespace groundwork::ingest
