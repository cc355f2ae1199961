#pragma once

#include <functional>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "groundwork/core/error.hpp"
#include "groundwork/retrieval/embedder.hpp"

namespace groundwork::eval {

// One answered question: the confidence the system reported and whether a
// judge found the answer correct.
struct ScoredItem {
  double confidence = 0.0;
  bool correct = false;
};

struct CalibrationBin {
  double lo = 0.0;
  double hi = 0.0;
  double mean_confidence = 0.0;
  double accuracy = 0.0;
  std::size_t count = 0;
};

inline constexpr int kDefaultBins = 10;

// Equal-width bins over [0, 1]; bin b holds lo <= c < hi, the last bin also
// takes c == 1. Throws InvalidInput for confidences outside [0, 1] or
// bins < 1.
std::vector<CalibrationBin> calibration_bins(const std::vector<ScoredItem>& items, int bins = kDefaultBins);

// Sum over non-empty bins of (count/N) * |mean confidence - accuracy|.
// Throws UndefinedMetric on empty input.
double compute_ece(const std::vector<ScoredItem>& items, int bins = kDefaultBins);

struct RiskCoveragePoint {
  double coverage = 0.0;
  double risk = 0.0;
};

// Items sorted by confidence, descending, ties kept in input order; one
// point per prefix.
std::vector<RiskCoveragePoint> risk_coverage_curve(const std::vector<ScoredItem>& items);

// Trapezoid area under the risk-coverage curve, with the first prefix's risk
// held down to coverage 0. Lower is better. Throws UndefinedMetric on empty
// input.
double compute_aurc(const std::vector<ScoredItem>& items);

// Pool-adjacent-violators fit of correctness against confidence. Equal
// confidences share one block. The map is constant on each block's
// confidence range, linear between blocks and flat beyond the ends.
class IsotonicMap {
 public:
  struct Block {
    double x_lo = 0.0;
    double x_hi = 0.0;
    double value = 0.0;
    double weight = 0.0;
  };

  // Throws UndefinedMetric with fewer than two items.
  static IsotonicMap fit(const std::vector<ScoredItem>& items);

  double operator()(double confidence) const;
  std::vector<ScoredItem> apply(const std::vector<ScoredItem>& items) const;
  const std::vector<Block>& blocks() const { return blocks_; }

 private:
  std::vector<Block> blocks_;
};

struct CalibrationReport {
  double ece_before = 0.0;
  double ece_after = 0.0;
  double aurc_before = 0.0;
  double aurc_after = 0.0;
  std::size_t items = 0;
};

CalibrationReport calibrate(const std::vector<ScoredItem>& items, int bins = kDefaultBins);

using SourceMatcher = std::function<bool(const std::string& predicted, const std::string& gold)>;

struct PrfResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t matched = 0;       // matching size
  double matched_rate = 0.0;     // matched / |gold|, 1 when gold is empty
  std::size_t predicted = 0;
  std::size_t gold = 0;
};

// Maximum bipartite matching between predicted and gold sources under the
// matcher. Empty prediction gives precision 1, empty gold gives recall 1;
// F1 is 0 when both precision and recall are 0.
PrfResult citation_prf(const std::vector<std::string>& predicted, const std::vector<std::string>& gold,
                       const SourceMatcher& matcher);

inline constexpr double kSemanticMatchThreshold = 0.8;

// Normalized-title equality, or embedding cosine of the two titles at or
// above the threshold.
SourceMatcher semantic_matcher(std::shared_ptr<const retrieval::Embedder> embedder,
                               double threshold = kSemanticMatchThreshold);

// Basename, ".pdf" (any case) removed, case-folded. Throws InvalidInput for
// empty input.
std::string normalize_gold_source(std::string_view path_or_name);

struct CoverageNovelty {
  double coverage_gap = 0.0;
  double novelty_rate = 0.0;
};

// coverage_gap = 1 - |S & B| / |B|, novelty_rate = 1 - |S & B| / |S|.
// Throws UndefinedMetric when either set is empty.
CoverageNovelty coverage_novelty(const std::set<std::string>& system, const std::set<std::string>& baseline);

struct Summary {
  double mean = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
  std::size_t count = 0;
};

// Nearest-rank percentile: the value at 1-based rank ceil(p/100 * N) of the
// sorted values. p in 1..100. Throws UndefinedMetric on empty input.
double percentile_nearest_rank(std::vector<double> values, int p);
Summary summarize(const std::vector<double>& values);

}  // namespace groundwork::eval
