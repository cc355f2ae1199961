#include "groundwork/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "groundwork/core/text.hpp"

namespace groundwork::eval {

namespace {

void check_confidence(double c) {
  if (!(c >= 0.0 && c <= 1.0)) throw InvalidInput("confidence " + text::format_shortest(c) + " outside [0, 1]");
}

std::size_t bin_of(double c, int bins) {
  auto lo = [bins](std::size_t b) { return static_cast<double>(b) / bins; };
  auto b = static_cast<std::size_t>(std::floor(c * bins));
  const auto last = static_cast<std::size_t>(bins - 1);
  if (b > last) b = last;
  // Keep the index consistent with the edges as they are compared.
  if (b > 0 && c < lo(b)) --b;
  if (b < last && c >= lo(b + 1)) ++b;
  return b;
}

}  // namespace

std::vector<CalibrationBin> calibration_bins(const std::vector<ScoredItem>& items, int bins) {
  if (bins < 1) throw InvalidInput("need at least one calibration bin");
  std::vector<CalibrationBin> out(static_cast<std::size_t>(bins));
  std::vector<double> conf_sum(out.size(), 0.0), correct(out.size(), 0.0);
  for (std::size_t b = 0; b < out.size(); ++b) {
    out[b].lo = static_cast<double>(b) / bins;
    out[b].hi = static_cast<double>(b + 1) / bins;
  }
  for (const auto& item : items) {
    check_confidence(item.confidence);
    auto b = bin_of(item.confidence, bins);
    ++out[b].count;
    conf_sum[b] += item.confidence;
    correct[b] += item.correct ? 1.0 : 0.0;
  }
  for (std::size_t b = 0; b < out.size(); ++b) {
    if (out[b].count == 0) continue;
    out[b].mean_confidence = conf_sum[b] / static_cast<double>(out[b].count);
    out[b].accuracy = correct[b] / static_cast<double>(out[b].count);
  }
  return out;
}

double compute_ece(const std::vector<ScoredItem>& items, int bins) {
  if (items.empty()) throw UndefinedMetric("ECE of an empty set");
  double ece = 0.0;
  const double n = static_cast<double>(items.size());
  for (const auto& bin : calibration_bins(items, bins)) {
    if (bin.count == 0) continue;
    ece += static_cast<double>(bin.count) / n * std::abs(bin.mean_confidence - bin.accuracy);
  }
  return ece;
}

std::vector<RiskCoveragePoint> risk_coverage_curve(const std::vector<ScoredItem>& items) {
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  for (const auto& item : items) check_confidence(item.confidence);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return items[a].confidence > items[b].confidence; });
  std::vector<RiskCoveragePoint> curve;
  curve.reserve(items.size());
  std::size_t errors = 0;
  const double n = static_cast<double>(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (!items[order[i]].correct) ++errors;
    curve.push_back({static_cast<double>(i + 1) / n, static_cast<double>(errors) / static_cast<double>(i + 1)});
  }
  return curve;
}

double compute_aurc(const std::vector<ScoredItem>& items) {
  if (items.empty()) throw UndefinedMetric("AURC of an empty set");
  auto curve = risk_coverage_curve(items);
  double area = curve.front().coverage * curve.front().risk;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].coverage - curve[i - 1].coverage) * (curve[i].risk + curve[i - 1].risk) / 2.0;
  }
  return area;
}

IsotonicMap IsotonicMap::fit(const std::vector<ScoredItem>& items) {
  if (items.size() < 2) throw UndefinedMetric("isotonic calibration needs at least two items");
  std::vector<ScoredItem> sorted = items;
  for (const auto& item : sorted) check_confidence(item.confidence);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ScoredItem& a, const ScoredItem& b) { return a.confidence < b.confidence; });

  IsotonicMap map;
  auto& blocks = map.blocks_;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    double hits = 0.0;
    while (j < sorted.size() && sorted[j].confidence == sorted[i].confidence) {
      hits += sorted[j].correct ? 1.0 : 0.0;
      ++j;
    }
    const double w = static_cast<double>(j - i);
    blocks.push_back({sorted[i].confidence, sorted[i].confidence, hits / w, w});
    // Pool while the last two blocks violate monotonicity.
    while (blocks.size() > 1 && blocks[blocks.size() - 2].value > blocks.back().value) {
      auto top = blocks.back();
      blocks.pop_back();
      auto& prev = blocks.back();
      prev.value = (prev.value * prev.weight + top.value * top.weight) / (prev.weight + top.weight);
      prev.weight += top.weight;
      prev.x_hi = top.x_hi;
    }
    i = j;
  }
  return map;
}

double IsotonicMap::operator()(double confidence) const {
  if (blocks_.empty()) throw UndefinedMetric("isotonic map is not fitted");
  if (confidence <= blocks_.front().x_hi) return blocks_.front().value;
  for (std::size_t i = 1; i < blocks_.size(); ++i) {
    const auto& prev = blocks_[i - 1];
    const auto& cur = blocks_[i];
    if (confidence < cur.x_lo) {
      double t = (confidence - prev.x_hi) / (cur.x_lo - prev.x_hi);
      return prev.value + t * (cur.value - prev.value);
    }
    if (confidence <= cur.x_hi) return cur.value;
  }
  return blocks_.back().value;
}

std::vector<ScoredItem> IsotonicMap::apply(const std::vector<ScoredItem>& items) const {
  std::vector<ScoredItem> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back({(*this)(item.confidence), item.correct});
  return out;
}

CalibrationReport calibrate(const std::vector<ScoredItem>& items, int bins) {
  auto map = IsotonicMap::fit(items);
  auto mapped = map.apply(items);
  return {compute_ece(items, bins), compute_ece(mapped, bins), compute_aurc(items), compute_aurc(mapped),
          items.size()};
}

PrfResult citation_prf(const std::vector<std::string>& predicted, const std::vector<std::string>& gold,
                       const SourceMatcher& matcher) {
  const std::size_t np = predicted.size(), ng = gold.size();
  std::vector<std::vector<std::size_t>> adj(np);
  for (std::size_t i = 0; i < np; ++i) {
    for (std::size_t j = 0; j < ng; ++j) {
      if (matcher(predicted[i], gold[j])) adj[i].push_back(j);
    }
  }
  // Augmenting paths (Kuhn); the matching size does not depend on order.
  std::vector<std::ptrdiff_t> match_of_gold(ng, -1);
  std::vector<bool> visited;
  std::function<bool(std::size_t)> augment = [&](std::size_t i) {
    for (auto j : adj[i]) {
      if (visited[j]) continue;
      visited[j] = true;
      if (match_of_gold[j] < 0 || augment(static_cast<std::size_t>(match_of_gold[j]))) {
        match_of_gold[j] = static_cast<std::ptrdiff_t>(i);
        return true;
      }
    }
    return false;
  };
  std::size_t matched = 0;
  for (std::size_t i = 0; i < np; ++i) {
    visited.assign(ng, false);
    if (augment(i)) ++matched;
  }

  PrfResult r;
  r.matched = matched;
  r.predicted = np;
  r.gold = ng;
  r.precision = np == 0 ? 1.0 : static_cast<double>(matched) / static_cast<double>(np);
  r.recall = ng == 0 ? 1.0 : static_cast<double>(matched) / static_cast<double>(ng);
  r.matched_rate = r.recall;
  r.f1 = (r.precision + r.recall) == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

SourceMatcher semantic_matcher(std::shared_ptr<const retrieval::Embedder> embedder, double threshold) {
  if (!embedder) throw ConfigError("semantic matcher needs an embedder");
  return [embedder, threshold](const std::string& a, const std::string& b) {
    auto na = text::normalize_title(a), nb = text::normalize_title(b);
    if (!na.empty() && na == nb) return true;
    if (text::trim(a).empty() || text::trim(b).empty()) return false;
    return retrieval::cosine(embedder->embed(a), embedder->embed(b)) >= threshold;
  };
}

std::string normalize_gold_source(std::string_view path_or_name) {
  auto s = text::trim(path_or_name);
  if (s.empty()) throw InvalidInput("empty gold source");
  if (auto slash = s.find_last_of("/\\"); slash != std::string_view::npos) s = s.substr(slash + 1);
  if (text::ends_with_icase(s, ".pdf")) s.remove_suffix(4);
  return text::to_lower(s);
}

CoverageNovelty coverage_novelty(const std::set<std::string>& system, const std::set<std::string>& baseline) {
  if (baseline.empty()) throw UndefinedMetric("coverage gap needs a non-empty baseline");
  if (system.empty()) throw UndefinedMetric("novelty rate needs a non-empty system set");
  std::size_t common = 0;
  for (const auto& s : system) common += baseline.count(s);
  return {1.0 - static_cast<double>(common) / static_cast<double>(baseline.size()),
          1.0 - static_cast<double>(common) / static_cast<double>(system.size())};
}

double percentile_nearest_rank(std::vector<double> values, int p) {
  if (values.empty()) throw UndefinedMetric("percentile of an empty set");
  if (p < 1 || p > 100) throw InvalidInput("percentile must be in 1..100");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  std::size_t rank = (static_cast<std::size_t>(p) * n + 99) / 100;  // ceil(p * n / 100)
  return values[std::max<std::size_t>(rank, 1) - 1];
}

Summary summarize(const std::vector<double>& values) {
  if (values.empty()) throw UndefinedMetric("summary of an empty set");
  Summary s;
  s.count = values.size();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.p50 = percentile_nearest_rank(values, 50);
  s.p90 = percentile_nearest_rank(values, 90);
  return s;
}

}  // namespace groundwork::eval
