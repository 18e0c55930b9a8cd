#include "infoconf/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "infoconf/error.hpp"
#include "infoconf/kernels.hpp"
#include "infoconf/numfmt.hpp"

namespace infoconf {
namespace {

struct Observation {
  double confidence;
  bool correct;
};

std::vector<Observation> top1_observations(const EvaluationSet& eval, std::string_view classifier_id) {
  std::vector<Observation> obs;
  for (const auto& output : eval.outputs()) {
    if (output.classifier_id != classifier_id) continue;
    if (output.ranking.empty()) {
      throw InputError("sample '" + output.sample_id + "' has an empty ranking from classifier '" +
                       output.classifier_id + "'");
    }
    const auto& truth = eval.sample(output.sample_id).true_label;
    obs.push_back({output.ranking.front().confidence, output.ranking.front().label == truth});
  }
  if (obs.empty()) {
    throw InputError("no evaluation outputs for classifier '" + std::string(classifier_id) + "'");
  }
  return obs;
}

struct ValueGroup {
  double value;
  std::size_t count;
  std::size_t correct;
};

}  // namespace

std::string BinningSpec::describe() const {
  switch (kind) {
    case Kind::kAuto:
      return "auto";
    case Kind::kDistinctValues:
      return "distinct-values";
    case Kind::kEqualFrequency:
      return "equal-frequency(" + std::to_string(bins) + ")";
  }
  return "auto";
}

BinningSpec BinningSpec::parse(std::string_view text) {
  if (text == "auto") return automatic();
  if (text == "distinct-values" || text == "distinct") return distinct_values();
  constexpr std::string_view prefix = "equal-frequency";
  if (text.starts_with(prefix)) {
    auto rest = text.substr(prefix.size());
    if (rest.empty()) return equal_frequency(kAutoBins);
    if (rest.front() == '(' && rest.back() == ')') {
      const double q = parse_double(rest.substr(1, rest.size() - 2));
      if (q >= 1.0 && q == std::floor(q)) return equal_frequency(static_cast<std::size_t>(q));
    }
  }
  throw InputError("unknown binning '" + std::string(text) +
                   "' (expected auto, distinct-values or equal-frequency(q))");
}

PerformanceEstimate estimate_performance(const EvaluationSet& eval, std::string_view classifier_id,
                                         const BinningSpec& binning) {
  auto obs = top1_observations(eval, classifier_id);
  std::sort(obs.begin(), obs.end(),
            [](const Observation& a, const Observation& b) { return a.confidence < b.confidence; });

  std::vector<ValueGroup> groups;
  for (const auto& o : obs) {
    if (groups.empty() || groups.back().value != o.confidence) groups.push_back({o.confidence, 0, 0});
    ++groups.back().count;
    if (o.correct) ++groups.back().correct;
  }

  BinningSpec used = binning;
  if (used.kind == BinningSpec::Kind::kAuto) {
    used = groups.size() <= BinningSpec::kAutoDistinctLimit ? BinningSpec::distinct_values()
                                                           : BinningSpec::equal_frequency(BinningSpec::kAutoBins);
  }
  if (used.kind == BinningSpec::Kind::kEqualFrequency && used.bins == 0) {
    throw InputError("equal-frequency binning needs at least one bin");
  }

  const std::size_t n = obs.size();
  PerformanceEstimate est;
  est.classifier_id = std::string(classifier_id);
  est.binning = used.describe();
  est.n_patterns = n;

  // Each bin is a run of consecutive value groups.
  struct Bin {
    double lo, rep;
    std::size_t correct;
  };
  std::vector<Bin> bins;
  if (used.kind == BinningSpec::Kind::kDistinctValues) {
    for (const auto& g : groups) bins.push_back({g.value, g.value, g.correct});
  } else {
    const std::size_t q = used.bins;
    std::size_t cumulative = 0;
    bool open = false;
    for (const auto& g : groups) {
      if (!open) {
        bins.push_back({g.value, g.value, 0});
        open = true;
      }
      bins.back().rep = g.value;
      bins.back().correct += g.correct;
      cumulative += g.count;
      // Close once this bin reaches its share of the quantile boundary.
      if (cumulative * q >= (bins.size()) * n) open = false;
    }
  }

  std::size_t cumulative_correct = 0;
  est.entries.reserve(bins.size());
  for (std::size_t i = 0; i < bins.size(); ++i) {
    cumulative_correct += bins[i].correct;
    PerformanceEntry entry;
    entry.key.bin_index = i;
    entry.key.bin_lo = bins[i].lo;
    entry.key.bin_hi = i + 1 < bins.size() ? bins[i + 1].lo : bins[i].rep;
    entry.key.representative = bins[i].rep;
    entry.n_correct = bins[i].correct;
    entry.cumulative_correct = cumulative_correct;
    entry.p_hat = static_cast<double>(cumulative_correct) / static_cast<double>(n);
    est.entries.push_back(entry);
  }
  return est;
}

double recognition_rate(const EvaluationSet& eval, std::string_view classifier_id) {
  const auto obs = top1_observations(eval, classifier_id);
  const auto correct = std::count_if(obs.begin(), obs.end(), [](const Observation& o) { return o.correct; });
  return static_cast<double>(correct) / static_cast<double>(obs.size());
}

NormalizationTerms normalization_terms(double r) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw DomainError("normalization_terms: recognition rate must lie in [0, 1] (got " + format_double(r) + ")");
  }
  NormalizationTerms t;
  t.r = std::clamp(r, kCalibrationEpsilon, 1.0 - kCalibrationEpsilon);
  t.clamped = t.r != r;
  t.i_c = -std::log1p(-t.r);
  t.e_hat = std::pow(t.r, 1.0 / t.i_c);
  return t;
}

std::string_view to_string(OutOfRangePolicy policy) {
  switch (policy) {
    case OutOfRangePolicy::kClampToEndpoint:
      return "clamp_to_endpoint";
    case OutOfRangePolicy::kReject:
      return "reject";
  }
  return "clamp_to_endpoint";
}

OutOfRangePolicy parse_out_of_range_policy(std::string_view text) {
  if (text == "clamp_to_endpoint") return OutOfRangePolicy::kClampToEndpoint;
  if (text == "reject") return OutOfRangePolicy::kReject;
  throw InputError("unknown out_of_range_policy '" + std::string(text) + "'");
}

const CalibrationEntry& CalibrationTable::entry_for(double raw) const {
  if (entries.empty()) throw DomainError("calibration table for '" + classifier_id + "' has no entries");
  if (std::isnan(raw)) throw DomainError("cannot look up a NaN confidence");
  const bool below = raw < entries.front().bin_lo;
  const bool above = raw > entries.back().bin_hi;
  if (below || above) {
    if (out_of_range == OutOfRangePolicy::kReject) {
      throw DomainError("confidence " + format_double(raw) + " outside the calibrated range [" +
                        format_double(entries.front().bin_lo) + ", " + format_double(entries.back().bin_hi) +
                        "] of classifier '" + classifier_id + "'");
    }
    return below ? entries.front() : entries.back();
  }
  const auto it = std::upper_bound(entries.begin(), entries.end(), raw,
                                   [](double v, const CalibrationEntry& e) { return v < e.bin_lo; });
  return *std::prev(it);
}

nlohmann::ordered_json CalibrationTable::to_json() const {
  nlohmann::ordered_json j;
  j["classifier_id"] = classifier_id;
  j["R"] = r;
  j["I_C"] = i_c;
  j["E_hat"] = e_hat;
  j["binning"] = binning;
  j["clamped"] = clamped;
  auto& arr = j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json row;
    row["bin_lo"] = e.bin_lo;
    row["bin_hi"] = e.bin_hi;
    row["representative"] = e.representative;
    row["p_hat"] = e.p_hat;
    row["k_new"] = e.k_new;
    arr.push_back(std::move(row));
  }
  j["out_of_range_policy"] = std::string(to_string(out_of_range));
  j["degenerate"] = degenerate;
  return j;
}

CalibrationTable CalibrationTable::from_json(const nlohmann::json& j) {
  CalibrationTable t;
  try {
    t.classifier_id = j.at("classifier_id").get<std::string>();
    t.r = j.at("R").get<double>();
    t.i_c = j.at("I_C").get<double>();
    t.e_hat = j.at("E_hat").get<double>();
    t.binning = j.at("binning").get<std::string>();
    t.clamped = j.at("clamped").get<bool>();
    t.degenerate = j.value("degenerate", false);
    t.out_of_range = parse_out_of_range_policy(j.at("out_of_range_policy").get<std::string>());
    for (const auto& row : j.at("entries")) {
      t.entries.push_back({row.at("bin_lo").get<double>(), row.at("bin_hi").get<double>(),
                           row.at("representative").get<double>(), row.at("p_hat").get<double>(),
                           row.at("k_new").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed calibration table: ") + e.what());
  }
  if (t.entries.empty()) throw InputError("calibration table '" + t.classifier_id + "' has no entries");
  for (std::size_t i = 0; i < t.entries.size(); ++i) {
    const auto& e = t.entries[i];
    if (!std::isfinite(e.k_new) || e.k_new < 0.0) throw InputError("calibration table: invalid k_new");
    if (i > 0 && (e.bin_lo <= t.entries[i - 1].bin_lo || e.k_new < t.entries[i - 1].k_new)) {
      throw InputError("calibration table: entries not sorted or not monotone at index " + std::to_string(i));
    }
  }
  return t;
}

CalibrationTable build_table(const PerformanceEstimate& perf, double r, const BuildOptions& options) {
  if (perf.entries.empty()) throw DomainError("build_table: performance estimate has no entries");
  if (std::abs(perf.entries.back().p_hat - r) > 1e-12) {
    throw DomainError("build_table: R = " + format_double(r) + " disagrees with the top performance estimate " +
                      format_double(perf.entries.back().p_hat));
  }
  const NormalizationTerms terms = normalization_terms(r);
  if (terms.clamped && !options.allow_degenerate) {
    throw PolicyError("degenerate recognition rate R = " + format_double(r) + " for classifier '" +
                      perf.classifier_id + "' (information term would be 0 or infinite); "
                      "pass allow_degenerate to build a clamped table");
  }

  CalibrationTable table;
  table.classifier_id = perf.classifier_id;
  table.r = terms.r;
  table.i_c = terms.i_c;
  table.e_hat = terms.e_hat;
  table.binning = perf.binning;
  table.degenerate = terms.clamped;
  table.clamped = terms.clamped;
  table.out_of_range = options.out_of_range;

  const double inv_ic = 1.0 / terms.i_c;
  const double cap = 1.0 - kCalibrationEpsilon;
  std::vector<double> p_hat(perf.entries.size());
  for (std::size_t i = 0; i < p_hat.size(); ++i) {
    p_hat[i] = perf.entries[i].p_hat;
    if (std::pow(p_hat[i], inv_ic) > cap) table.clamped = true;
  }
  std::vector<double> k_new(p_hat.size());
  kernels::informational_confidence(p_hat, inv_ic, terms.e_hat, cap, k_new);

  table.entries.reserve(p_hat.size());
  for (std::size_t i = 0; i < p_hat.size(); ++i) {
    const auto& key = perf.entries[i].key;
    table.entries.push_back({key.bin_lo, key.bin_hi, key.representative, p_hat[i], k_new[i]});
  }
  return table;
}

RankedOutput apply_table(const CalibrationTable& table, const RankedOutput& output) {
  if (output.classifier_id != table.classifier_id) {
    throw InputError("calibration table for '" + table.classifier_id + "' applied to output of classifier '" +
                     output.classifier_id + "'");
  }
  RankedOutput out = output;
  for (auto& entry : out.ranking) entry.confidence = table.lookup(entry.confidence);
  return out;
}

CalibrationTable calibrate(const EvaluationSet& eval, std::string_view classifier_id, const BinningSpec& binning,
                           const BuildOptions& options) {
  const PerformanceEstimate perf = estimate_performance(eval, classifier_id, binning);
  const double r = recognition_rate(eval, classifier_id);
  return build_table(perf, r, options);
}

IdempotenceReport idempotence_check(const EvaluationSet& eval, std::string_view classifier_id,
                                    const BinningSpec& binning, const BuildOptions& options, double tolerance) {
  const CalibrationTable first = calibrate(eval, classifier_id, binning, options);

  EvaluationSet rewritten = eval;
  for (std::size_t i = 0; i < rewritten.outputs().size(); ++i) {
    const auto& output = rewritten.outputs()[i];
    if (output.classifier_id == classifier_id) rewritten.replace_output(i, apply_table(first, output));
  }
  const CalibrationTable second = calibrate(rewritten, classifier_id, BinningSpec::distinct_values(), options);

  IdempotenceReport report;
  report.first_pass_bins = first.entries.size();
  report.second_pass_bins = second.entries.size();
  report.merged_ties = first.entries.size() - second.entries.size();
  for (const auto& e1 : first.entries) {
    const auto it = std::lower_bound(second.entries.begin(), second.entries.end(), e1.k_new,
                                     [](const CalibrationEntry& e, double v) { return e.representative < v; });
    if (it == second.entries.end() || it->representative != e1.k_new) {
      report.max_abs_diff = std::numeric_limits<double>::infinity();
      break;
    }
    report.max_abs_diff = std::max(report.max_abs_diff, std::abs(it->k_new - e1.k_new));
  }
  report.passed = report.max_abs_diff <= tolerance;
  return report;
}

}  // namespace infoconf
