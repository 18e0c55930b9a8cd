#pragma once

// Seeded synthetic multi-classifier experiments: a generator of correlated
// n-best outputs, the split/calibrate/fuse pipeline around it, and the
// statistical fixture for exponential performance curves.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "infoconf/calibration.hpp"
#include "infoconf/evaluation.hpp"
#include "infoconf/fusion.hpp"
#include "json.hpp"

namespace infoconf {

enum class ConfidenceModel { kExponential, kLogistic, kUniform };

std::string_view to_string(ConfidenceModel model);
ConfidenceModel parse_confidence_model(std::string_view text);

struct ClassifierSpec {
  std::string id;
  double accuracy_target = 0.9;
  ConfidenceModel model = ConfidenceModel::kExponential;
  double model_param = 1.0;  // mean (exponential) or scale (logistic)
  double correlation = 0.0;  // coupling to the first classifier's errors

  bool operator==(const ClassifierSpec&) const = default;
};

struct SyntheticSpec {
  std::uint64_t seed = 42;
  std::size_t n_samples = 20000;
  std::size_t n_classes = 50;
  std::vector<ClassifierSpec> classifiers;
  std::size_t n_best = 3;
  double informativeness = 0.7;  // share of outputs whose confidence tracks correctness
  double second_chance = 0.45;   // per-rank chance a wrong answer still lists the truth

  /// Throws InputError naming the field and its feasible range.
  void validate() const;

  nlohmann::ordered_json to_json() const;
  static SyntheticSpec from_json(const nlohmann::json& j);

  bool operator==(const SyntheticSpec&) const = default;
};

/// Two classifiers, 50 classes, 20000 samples: "offline" at 0.90 with
/// exponential confidences and "online" at 0.81, logistic, correlation 0.4.
SyntheticSpec default_spec(std::uint64_t seed = 42);

/// Deterministic in spec (each sample draws from its own seeded stream).
EvaluationSet generate(const SyntheticSpec& spec);

/// Reads an evaluation CSV. Throws InputError "input not found: <path>" when
/// the file is missing.
EvaluationSet ingest(const std::filesystem::path& path);

struct ExperimentConfig {
  std::variant<SyntheticSpec, std::filesystem::path> source = default_spec();
  std::uint64_t split_seed = 42;
  double calibration_fraction = 2.0 / 3.0;
  double test_fraction = 1.0 / 3.0;
  std::vector<FusionRule> rules{std::begin(kAllRules), std::end(kAllRules)};
  BinningSpec binning = BinningSpec::automatic();
  bool run_infonet = true;
  bool allow_degenerate = false;
  std::size_t n_max = 3;

  void validate() const;
  nlohmann::ordered_json to_json() const;
};

struct ExperimentReport {
  nlohmann::ordered_json config;
  std::uint64_t seed = 0;
  std::size_t calibration_samples = 0;
  std::size_t test_samples = 0;
  TableMap tables;
  FusionReport fusion;
  std::map<std::string, double> stage_timings;  // seconds

  /// Fusion report JSON plus "config", "seed", "split", "tables" and
  /// "stage_timings".
  nlohmann::ordered_json to_json(bool with_timings = true) const;

  /// Ignores stage_timings.
  bool operator==(const ExperimentReport& other) const;
};

/// Loads or generates the data, splits it, calibrates every classifier on the
/// calibration part and evaluates on the test part. Errors keep their type
/// and gain a "<stage>: " prefix.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Same pipeline on an already loaded evaluation set.
ExperimentReport run_experiment(const ExperimentConfig& config, const EvaluationSet& eval);

struct SplitIndices {
  std::vector<std::size_t> calibration;
  std::vector<std::size_t> test;
};

/// Seeded shuffle, then the first part for calibration and the next for test.
SplitIndices split_samples(std::size_t n, double calibration_fraction, double test_fraction, std::uint64_t seed);

struct PerformanceTheoremResult {
  std::size_t n = 0;
  double mean = 0.0;
  double max_deviation = 0.0;  // sup |p_hat(K) - (1 - exp(-K/mean))|
  double deviation_bound = 0.0;
  double reconstruction_deviation = 0.0;  // max ratio |K_rec - K| / tolerance(K)
  std::size_t reconstruction_points = 0;
  bool passed = false;
};

/// One nearly always correct classifier with exponential confidences,
/// calibrated on distinct values. Compares the empirical performance curve
/// with the exponential distribution at bound 1.36/sqrt(n)*(1 + margin) and
/// checks -mean*ln(1 - p_hat(K)) against K between the 5th and 95th
/// percentile of K.
PerformanceTheoremResult performance_theorem_fixture(std::uint64_t seed, std::size_t n, double mean,
                                                     double margin = 0.5);

}  // namespace infoconf
