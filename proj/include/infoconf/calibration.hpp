#pragma once

// Learning informational confidence values from an evaluation set.
//
//   1. estimate_performance: cumulative fraction of patterns whose top-1
//      answer is correct with confidence up to each key ("accumulated
//      partial frequencies");
//   2. normalization_terms: I(C) = -ln(1 - R) and E = R^(1/I(C)) from the
//      global recognition rate R;
//   3. build_table: K_new = -E ln(1 - p_hat^(1/I(C))) per key.
//
// The resulting CalibrationTable replaces raw confidences at test time.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "infoconf/evaluation.hpp"
#include "json.hpp"

namespace infoconf {

/// Clamp used before any logarithm of a rate or normalized performance.
inline constexpr double kCalibrationEpsilon = 1e-12;

struct BinningSpec {
  enum class Kind { kAuto, kDistinctValues, kEqualFrequency };

  Kind kind = Kind::kAuto;
  std::size_t bins = 1024;  // equal-frequency only

  static constexpr std::size_t kAutoDistinctLimit = 4096;
  static constexpr std::size_t kAutoBins = 1024;

  static BinningSpec automatic() { return {}; }
  static BinningSpec distinct_values() { return {Kind::kDistinctValues, 0}; }
  static BinningSpec equal_frequency(std::size_t q) { return {Kind::kEqualFrequency, q}; }

  /// "auto", "distinct-values" or "equal-frequency(q)".
  std::string describe() const;
  /// Inverse of describe(); throws InputError.
  static BinningSpec parse(std::string_view text);
};

/// One bin of raw confidences: [bin_lo, bin_hi) except the last, which is
/// closed. The representative is the largest observed value in the bin.
struct ConfidenceKey {
  std::size_t bin_index = 0;
  double bin_lo = 0.0;
  double bin_hi = 0.0;
  double representative = 0.0;
};

struct PerformanceEntry {
  ConfidenceKey key;
  std::size_t n_correct = 0;
  std::size_t cumulative_correct = 0;
  double p_hat = 0.0;
};

struct PerformanceEstimate {
  std::string classifier_id;
  std::string binning;  // describe() of the binning actually used
  std::size_t n_patterns = 0;
  std::vector<PerformanceEntry> entries;  // ascending keys
};

/// Throws InputError when the classifier has no outputs or some output has an
/// empty ranking (the message names the sample).
PerformanceEstimate estimate_performance(const EvaluationSet& eval, std::string_view classifier_id,
                                         const BinningSpec& binning = {});

/// Fraction of the classifier's outputs whose top-1 label is correct.
double recognition_rate(const EvaluationSet& eval, std::string_view classifier_id);

struct NormalizationTerms {
  double r = 0.0;    // after clamping to [eps, 1 - eps]
  double i_c = 0.0;  // -ln(1 - r), nats
  double e_hat = 0.0;  // r^(1 / i_c)
  bool clamped = false;
};

/// Throws DomainError for R outside [0, 1]; R at the boundary is clamped and
/// flagged.
NormalizationTerms normalization_terms(double r);

enum class OutOfRangePolicy {
  kClampToEndpoint,  // below range -> lowest key, above range -> highest key
  kReject,           // throw DomainError
};

std::string_view to_string(OutOfRangePolicy policy);
OutOfRangePolicy parse_out_of_range_policy(std::string_view text);

struct CalibrationEntry {
  double bin_lo = 0.0;
  double bin_hi = 0.0;
  double representative = 0.0;
  double p_hat = 0.0;
  double k_new = 0.0;

  bool operator==(const CalibrationEntry&) const = default;
};

struct BuildOptions {
  bool allow_degenerate = false;
  OutOfRangePolicy out_of_range = OutOfRangePolicy::kClampToEndpoint;
};

/// Lookup table raw confidence -> informational confidence. Treated as an
/// immutable value once built.
struct CalibrationTable {
  std::string classifier_id;
  double r = 0.0;
  double i_c = 0.0;
  double e_hat = 0.0;
  std::string binning;
  bool clamped = false;     // some clamp to [eps, 1 - eps] fired
  bool degenerate = false;  // R itself had to be clamped (override used)
  std::vector<CalibrationEntry> entries;
  OutOfRangePolicy out_of_range = OutOfRangePolicy::kClampToEndpoint;

  /// Entry whose bin contains `raw`, with the out-of-range policy applied.
  const CalibrationEntry& entry_for(double raw) const;
  double lookup(double raw) const { return entry_for(raw).k_new; }

  nlohmann::ordered_json to_json() const;
  static CalibrationTable from_json(const nlohmann::json& j);

  bool operator==(const CalibrationTable&) const = default;
};

/// Throws DomainError if `r` disagrees with the top p_hat, PolicyError if R is
/// degenerate and options.allow_degenerate is false.
CalibrationTable build_table(const PerformanceEstimate& perf, double r, const BuildOptions& options = {});

/// Replaces every confidence in the ranking by its table value. Order is
/// kept as given; the table is monotone so it stays non-increasing.
RankedOutput apply_table(const CalibrationTable& table, const RankedOutput& output);

/// estimate_performance -> recognition_rate -> normalization_terms ->
/// build_table.
CalibrationTable calibrate(const EvaluationSet& eval, std::string_view classifier_id,
                           const BinningSpec& binning = {}, const BuildOptions& options = {});

struct IdempotenceReport {
  double max_abs_diff = 0.0;
  bool passed = false;
  std::size_t first_pass_bins = 0;
  std::size_t second_pass_bins = 0;
  std::size_t merged_ties = 0;  // first-pass bins sharing a K_new value
};

/// Calibrates, rewrites the classifier's confidences with the table,
/// recalibrates on the distinct new values and compares the two passes bin
/// by bin. Passes when the largest difference is at most `tolerance`.
IdempotenceReport idempotence_check(const EvaluationSet& eval, std::string_view classifier_id,
                                    const BinningSpec& binning = {}, const BuildOptions& options = {},
                                    double tolerance = 1e-9);

}  // namespace infoconf
