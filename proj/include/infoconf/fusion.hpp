#pragma once

// Multi-classifier fusion with the sum, max and product rules, and the
// n-best / AND / OR scoring used to compare single and combined classifiers.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "infoconf/calibration.hpp"
#include "infoconf/evaluation.hpp"
#include "json.hpp"

namespace infoconf {

enum class FusionRule { kSum, kMax, kProduct };

inline constexpr FusionRule kAllRules[] = {FusionRule::kSum, FusionRule::kMax, FusionRule::kProduct};

std::string_view to_string(FusionRule rule);
FusionRule parse_fusion_rule(std::string_view text);
/// Comma separated list, e.g. "sum,max,product".
std::vector<FusionRule> parse_fusion_rules(std::string_view text);

struct FusedEntry {
  std::string label;
  double score = 0.0;
  std::size_t best_rank = 0;  // lowest 0-based input rank of the label
};

struct FusedRanking {
  std::string sample_id;
  std::vector<FusedEntry> ranking;  // descending score
  bool nonpositive_product = false;  // PRODUCT saw a factor <= 0
};

/// Combines one sample's outputs. SUM adds a label's confidences (absent
/// labels contribute 0), MAX keeps the largest, PRODUCT multiplies and only
/// keeps labels ranked by every classifier. Ties are ordered by the label's
/// best input rank, then by label.
///
/// Throws InputError on an empty list or mismatched sample ids.
FusedRanking fuse(std::span<const RankedOutput* const> outputs, FusionRule rule);
FusedRanking fuse(std::span<const RankedOutput> outputs, FusionRule rule);

/// Tables keyed by classifier id.
using TableMap = std::map<std::string, CalibrationTable, std::less<>>;

struct CombinedRates {
  std::vector<double> raw;            // top-n, n = 1..n_max
  std::vector<double> informational;  // empty when no tables were given
  std::size_t raw_nonpositive = 0;    // PRODUCT samples flagged
  std::size_t informational_nonpositive = 0;
};

struct InfonetSummary {
  double top1 = 0.0;
  double calibrated_sum_top1 = 0.0;
  double delta = 0.0;  // top1 - calibrated_sum_top1
};

struct FusionReport {
  std::size_t n_samples = 0;
  std::size_t n_max = 0;
  std::vector<std::string> classifiers;
  std::map<std::string, std::vector<double>> individual;  // top-n per classifier
  std::vector<double> and_rate;
  std::vector<double> or_rate;
  std::vector<std::pair<FusionRule, CombinedRates>> combined;
  std::optional<InfonetSummary> infonet;

  const CombinedRates& rates(FusionRule rule) const;
  double best_individual_top1() const;

  /// {"samples", "individual": {id: {"top1", ...}}, "and", "or",
  ///  "combined": {rule: {"raw", "informational", ...}}, ["infonet"]}
  nlohmann::ordered_json to_json() const;
};

/// Scores every classifier, the AND/OR coverage and each rule on raw and,
/// when `tables` is given, calibrated confidences. Throws InputError naming
/// the classifier when a table is missing.
FusionReport evaluate(const EvaluationSet& eval, const TableMap* tables, std::span<const FusionRule> rules,
                      std::size_t n_max = 3);

}  // namespace infoconf
