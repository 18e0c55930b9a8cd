#pragma once

// Evaluation data shared by calibration, fusion and the experiment harness:
// labelled samples plus each classifier's ranked (label, confidence) list per
// sample.
//
// CSV layout (one row per ranking entry, header required):
//
//   sample_id,true_label,classifier_id,rank,label,confidence
//
// rank is 1-based; the rows of one (sample, classifier) ranking are
// contiguous and rank-ascending without gaps.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace infoconf {

struct RankEntry {
  std::string label;
  double confidence = 0.0;

  bool operator==(const RankEntry&) const = default;
};

/// One classifier's ranked answer for one sample, descending confidence.
struct RankedOutput {
  std::string sample_id;
  std::string classifier_id;
  std::vector<RankEntry> ranking;

  bool operator==(const RankedOutput&) const = default;
};

struct LabeledSample {
  std::string sample_id;
  std::string true_label;

  bool operator==(const LabeledSample&) const = default;
};

/// Throws InputError unless confidences are finite and non-increasing and the
/// labels are distinct. An empty ranking is accepted here; consumers that
/// need a top-1 answer reject it.
void validate_ranking(const RankedOutput& output);

class EvaluationSet {
 public:
  /// Throws InputError on a duplicate sample_id.
  void add_sample(LabeledSample sample);

  /// Throws InputError if the sample is unknown, the (sample, classifier)
  /// pair already has an output, or the ranking is invalid.
  void add_output(RankedOutput output);

  /// Swaps in a new ranking for output `index`; identity fields must match.
  void replace_output(std::size_t index, RankedOutput output);

  const std::vector<LabeledSample>& samples() const { return samples_; }
  const std::vector<RankedOutput>& outputs() const { return outputs_; }

  /// Classifier ids in order of first appearance.
  const std::vector<std::string>& classifier_ids() const { return classifier_ids_; }

  bool has_sample(std::string_view sample_id) const;
  const LabeledSample& sample(std::string_view sample_id) const;
  std::size_t sample_index(std::string_view sample_id) const;

  /// Indices into outputs() for one sample, in insertion order.
  const std::vector<std::size_t>& outputs_of_sample(std::size_t sample_index) const;

  /// The subset restricted to the given samples (in the given order) and
  /// their outputs.
  EvaluationSet subset(std::span<const std::size_t> sample_indices) const;

  bool empty() const { return samples_.empty(); }

  bool operator==(const EvaluationSet& other) const {
    return samples_ == other.samples_ && outputs_ == other.outputs_;
  }

 private:
  std::vector<LabeledSample> samples_;
  std::unordered_map<std::string, std::size_t> sample_lookup_;
  std::vector<RankedOutput> outputs_;
  std::vector<std::vector<std::size_t>> by_sample_;
  std::unordered_map<std::string, std::size_t> pair_lookup_;
  std::vector<std::string> classifier_ids_;
};

/// Parses the CSV layout above. Errors carry 1-based line numbers.
EvaluationSet read_evaluation_csv(std::istream& in);

/// Writes the CSV layout above, outputs in stored order. Confidences use the
/// shortest round-trip representation, so read(write(x)) == x.
void write_evaluation_csv(const EvaluationSet& eval, std::ostream& out);

}  // namespace infoconf
