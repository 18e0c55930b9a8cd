#include "infoconf/evaluation.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "infoconf/error.hpp"
#include "infoconf/numfmt.hpp"

namespace infoconf {
namespace {

constexpr std::string_view kHeader = "sample_id,true_label,classifier_id,rank,label,confidence";

std::string pair_key(std::string_view sample_id, std::string_view classifier_id) {
  std::string key;
  key.reserve(sample_id.size() + classifier_id.size() + 1);
  key.append(sample_id).push_back('\x1f');
  key.append(classifier_id);
  return key;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string at_line(std::size_t line_no, const std::string& msg) {
  return "line " + std::to_string(line_no) + ": " + msg;
}

}  // namespace

void validate_ranking(const RankedOutput& output) {
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < output.ranking.size(); ++i) {
    const auto& entry = output.ranking[i];
    if (!std::isfinite(entry.confidence)) {
      throw InputError("ranking of sample '" + output.sample_id + "' by '" + output.classifier_id +
                       "': non-finite confidence at rank " + std::to_string(i + 1));
    }
    if (i > 0 && entry.confidence > output.ranking[i - 1].confidence) {
      throw InputError("ranking of sample '" + output.sample_id + "' by '" + output.classifier_id +
                       "': confidence increases at rank " + std::to_string(i + 1));
    }
    if (!seen.insert(entry.label).second) {
      throw InputError("ranking of sample '" + output.sample_id + "' by '" + output.classifier_id +
                       "': duplicate label '" + entry.label + "'");
    }
  }
}

void EvaluationSet::add_sample(LabeledSample sample) {
  if (sample_lookup_.contains(sample.sample_id)) {
    throw InputError("duplicate sample_id '" + sample.sample_id + "'");
  }
  sample_lookup_.emplace(sample.sample_id, samples_.size());
  samples_.push_back(std::move(sample));
  by_sample_.emplace_back();
}

void EvaluationSet::add_output(RankedOutput output) {
  const auto it = sample_lookup_.find(output.sample_id);
  if (it == sample_lookup_.end()) {
    throw InputError("output references unknown sample '" + output.sample_id + "'");
  }
  validate_ranking(output);
  auto key = pair_key(output.sample_id, output.classifier_id);
  if (pair_lookup_.contains(key)) {
    throw InputError("duplicate output for sample '" + output.sample_id + "' and classifier '" +
                     output.classifier_id + "'");
  }
  bool known = false;
  for (const auto& id : classifier_ids_) known = known || id == output.classifier_id;
  if (!known) classifier_ids_.push_back(output.classifier_id);

  pair_lookup_.emplace(std::move(key), outputs_.size());
  by_sample_[it->second].push_back(outputs_.size());
  outputs_.push_back(std::move(output));
}

void EvaluationSet::replace_output(std::size_t index, RankedOutput output) {
  auto& slot = outputs_.at(index);
  if (slot.sample_id != output.sample_id || slot.classifier_id != output.classifier_id) {
    throw InputError("replace_output: sample or classifier id mismatch");
  }
  validate_ranking(output);
  slot = std::move(output);
}

bool EvaluationSet::has_sample(std::string_view sample_id) const {
  return sample_lookup_.contains(std::string(sample_id));
}

std::size_t EvaluationSet::sample_index(std::string_view sample_id) const {
  const auto it = sample_lookup_.find(std::string(sample_id));
  if (it == sample_lookup_.end()) throw InputError("unknown sample '" + std::string(sample_id) + "'");
  return it->second;
}

const LabeledSample& EvaluationSet::sample(std::string_view sample_id) const {
  return samples_[sample_index(sample_id)];
}

const std::vector<std::size_t>& EvaluationSet::outputs_of_sample(std::size_t sample_index) const {
  return by_sample_.at(sample_index);
}

EvaluationSet EvaluationSet::subset(std::span<const std::size_t> sample_indices) const {
  EvaluationSet out;
  for (std::size_t idx : sample_indices) out.add_sample(samples_.at(idx));
  for (std::size_t idx : sample_indices) {
    for (std::size_t o : by_sample_[idx]) out.add_output(outputs_[o]);
  }
  return out;
}

EvaluationSet read_evaluation_csv(std::istream& in) {
  EvaluationSet eval;
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw InputError("empty input: missing CSV header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) {
    throw InputError(at_line(1, "unknown header '" + line + "', expected '" + std::string(kHeader) + "'"));
  }

  RankedOutput current;
  std::size_t current_start = 0;
  bool open = false;
  std::unordered_set<std::string> finished;

  auto flush = [&] {
    if (!open) return;
    try {
      eval.add_output(std::move(current));
    } catch (const InputError& e) {
      throw InputError(at_line(current_start, e.what()));
    }
    open = false;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const auto fields = split_fields(line);
    if (fields.size() != 6) {
      throw InputError(at_line(line_no, "expected 6 fields, got " + std::to_string(fields.size())));
    }
    const std::string sample_id(fields[0]);
    const std::string true_label(fields[1]);
    const std::string classifier_id(fields[2]);
    if (sample_id.empty() || classifier_id.empty() || fields[4].empty()) {
      throw InputError(at_line(line_no, "empty identifier field"));
    }

    long rank = 0;
    const auto [rend, rec] = std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), rank);
    if (rec != std::errc{} || rend != fields[3].data() + fields[3].size() || rank < 1) {
      throw InputError(at_line(line_no, "rank must be a positive integer, got '" + std::string(fields[3]) + "'"));
    }
    double confidence = 0.0;
    try {
      confidence = parse_double(fields[5]);
    } catch (const InputError& e) {
      throw InputError(at_line(line_no, std::string("confidence: ") + e.what()));
    }

    if (eval.has_sample(sample_id)) {
      if (eval.sample(sample_id).true_label != true_label) {
        throw InputError(at_line(line_no, "true_label of sample '" + sample_id + "' changes"));
      }
    } else {
      eval.add_sample({sample_id, true_label});
    }

    const bool same_group = open && current.sample_id == sample_id && current.classifier_id == classifier_id;
    if (!same_group) {
      flush();
      const auto key = pair_key(sample_id, classifier_id);
      if (finished.contains(key)) {
        throw InputError(at_line(line_no, "rows for sample '" + sample_id + "' and classifier '" +
                                              classifier_id + "' are not contiguous (duplicate ranking)"));
      }
      finished.insert(key);
      current = RankedOutput{sample_id, classifier_id, {}};
      current_start = line_no;
      open = true;
    }

    const long expected = static_cast<long>(current.ranking.size()) + 1;
    if (rank < expected) {
      throw InputError(at_line(line_no, "duplicate rank " + std::to_string(rank) + " for sample '" + sample_id +
                                            "' and classifier '" + classifier_id + "'"));
    }
    if (rank > expected) {
      throw InputError(at_line(line_no, "rank gap: rank " + std::to_string(rank) + " follows rank " +
                                            std::to_string(expected - 1) + " for sample '" + sample_id + "'"));
    }
    current.ranking.push_back({std::string(fields[4]), confidence});
  }
  flush();
  return eval;
}

void write_evaluation_csv(const EvaluationSet& eval, std::ostream& out) {
  out << kHeader << '\n';
  for (const auto& output : eval.outputs()) {
    const auto& truth = eval.sample(output.sample_id).true_label;
    for (std::size_t r = 0; r < output.ranking.size(); ++r) {
      out << output.sample_id << ',' << truth << ',' << output.classifier_id << ',' << (r + 1) << ','
          << output.ranking[r].label << ',' << format_double(output.ranking[r].confidence) << '\n';
    }
  }
}

}  // namespace infoconf
