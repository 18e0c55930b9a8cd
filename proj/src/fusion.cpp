#include "infoconf/fusion.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "infoconf/error.hpp"

namespace infoconf {
namespace {

constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();

nlohmann::ordered_json topn_json(const std::vector<double>& rates) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t n = 0; n < rates.size(); ++n) j["top" + std::to_string(n + 1)] = rates[n];
  return j;
}

std::size_t position_of(const std::vector<RankEntry>& ranking, std::string_view label) {
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (ranking[i].label == label) return i;
  }
  return kAbsent;
}

std::size_t position_of(const std::vector<FusedEntry>& ranking, std::string_view label) {
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (ranking[i].label == label) return i;
  }
  return kAbsent;
}

}  // namespace

std::string_view to_string(FusionRule rule) {
  switch (rule) {
    case FusionRule::kSum:
      return "sum";
    case FusionRule::kMax:
      return "max";
    case FusionRule::kProduct:
      return "product";
  }
  return "sum";
}

FusionRule parse_fusion_rule(std::string_view text) {
  for (FusionRule rule : kAllRules) {
    if (to_string(rule) == text) return rule;
  }
  throw InputError("unknown fusion rule '" + std::string(text) + "' (expected sum, max or product)");
}

std::vector<FusionRule> parse_fusion_rules(std::string_view text) {
  std::vector<FusionRule> rules;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const auto rule = parse_fusion_rule(text.substr(start, comma - start));
    if (std::find(rules.begin(), rules.end(), rule) == rules.end()) rules.push_back(rule);
    start = comma + 1;
  }
  return rules;
}

FusedRanking fuse(std::span<const RankedOutput* const> outputs, FusionRule rule) {
  if (outputs.empty()) throw InputError("fuse: no classifier outputs");
  FusedRanking fused;
  fused.sample_id = outputs.front()->sample_id;

  struct Accumulator {
    std::string_view label;
    double score;
    std::size_t present;
    std::size_t best_rank;
    bool nonpositive;
  };
  std::vector<Accumulator> acc;
  std::unordered_map<std::string_view, std::size_t> index;

  for (const RankedOutput* output : outputs) {
    if (output->sample_id != fused.sample_id) {
      throw InputError("fuse: outputs for different samples ('" + fused.sample_id + "' and '" +
                       output->sample_id + "')");
    }
    for (std::size_t r = 0; r < output->ranking.size(); ++r) {
      const auto& entry = output->ranking[r];
      const auto [it, inserted] = index.try_emplace(entry.label, acc.size());
      if (inserted) {
        acc.push_back({entry.label, entry.confidence, 1, r, entry.confidence <= 0.0});
        continue;
      }
      auto& a = acc[it->second];
      switch (rule) {
        case FusionRule::kSum:
          a.score += entry.confidence;
          break;
        case FusionRule::kMax:
          a.score = std::max(a.score, entry.confidence);
          break;
        case FusionRule::kProduct:
          a.score *= entry.confidence;
          break;
      }
      ++a.present;
      a.best_rank = std::min(a.best_rank, r);
      a.nonpositive = a.nonpositive || entry.confidence <= 0.0;
    }
  }

  fused.ranking.reserve(acc.size());
  for (const auto& a : acc) {
    if (rule == FusionRule::kProduct) {
      if (a.present != outputs.size()) continue;
      fused.nonpositive_product = fused.nonpositive_product || a.nonpositive;
    }
    fused.ranking.push_back({std::string(a.label), a.score, a.best_rank});
  }
  std::sort(fused.ranking.begin(), fused.ranking.end(), [](const FusedEntry& a, const FusedEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.best_rank != b.best_rank) return a.best_rank < b.best_rank;
    return a.label < b.label;
  });
  return fused;
}

FusedRanking fuse(std::span<const RankedOutput> outputs, FusionRule rule) {
  std::vector<const RankedOutput*> ptrs;
  ptrs.reserve(outputs.size());
  for (const auto& o : outputs) ptrs.push_back(&o);
  return fuse(std::span<const RankedOutput* const>(ptrs), rule);
}

const CombinedRates& FusionReport::rates(FusionRule rule) const {
  for (const auto& [r, rates] : combined) {
    if (r == rule) return rates;
  }
  throw InputError("fusion report has no results for rule '" + std::string(to_string(rule)) + "'");
}

double FusionReport::best_individual_top1() const {
  double best = 0.0;
  for (const auto& [id, rates] : individual) best = std::max(best, rates.front());
  return best;
}

nlohmann::ordered_json FusionReport::to_json() const {
  nlohmann::ordered_json j;
  j["samples"] = n_samples;
  j["n_max"] = n_max;
  auto& ind = j["individual"] = nlohmann::ordered_json::object();
  for (const auto& id : classifiers) ind[id] = topn_json(individual.at(id));
  j["and"] = topn_json(and_rate);
  j["or"] = topn_json(or_rate);
  auto& comb = j["combined"] = nlohmann::ordered_json::object();
  for (const auto& [rule, rates] : combined) {
    nlohmann::ordered_json r;
    r["raw"] = rates.raw.front();
    r["informational"] = rates.informational.empty() ? nlohmann::ordered_json(nullptr)
                                                     : nlohmann::ordered_json(rates.informational.front());
    r["raw_topn"] = topn_json(rates.raw);
    if (!rates.informational.empty()) r["informational_topn"] = topn_json(rates.informational);
    if (rule == FusionRule::kProduct) {
      r["nonpositive_samples"] = {{"raw", rates.raw_nonpositive},
                                  {"informational", rates.informational_nonpositive}};
    }
    comb[std::string(to_string(rule))] = std::move(r);
  }
  if (infonet) {
    j["infonet"] = {{"top1", infonet->top1},
                    {"calibrated_sum_top1", infonet->calibrated_sum_top1},
                    {"delta", infonet->delta}};
  }
  return j;
}

FusionReport evaluate(const EvaluationSet& eval, const TableMap* tables, std::span<const FusionRule> rules,
                      std::size_t n_max) {
  if (n_max == 0) throw InputError("evaluate: n_max must be at least 1");
  if (eval.empty()) throw InputError("evaluate: empty evaluation set");

  FusionReport report;
  report.n_samples = eval.samples().size();
  report.n_max = n_max;
  report.classifiers = eval.classifier_ids();
  if (tables != nullptr) {
    for (const auto& id : report.classifiers) {
      if (!tables->contains(id)) throw InputError("missing calibration table for classifier '" + id + "'");
    }
  }

  const std::size_t n_clf = report.classifiers.size();
  std::vector<std::vector<std::size_t>> individual(n_clf, std::vector<std::size_t>(n_max, 0));
  std::vector<std::size_t> and_hits(n_max, 0);
  std::vector<std::size_t> or_hits(n_max, 0);
  struct RuleCounts {
    std::vector<std::size_t> raw, info;
    std::size_t raw_flag = 0, info_flag = 0;
  };
  std::vector<RuleCounts> rule_counts(rules.size(), RuleCounts{std::vector<std::size_t>(n_max, 0),
                                                               std::vector<std::size_t>(n_max, 0), 0, 0});

  std::vector<const RankedOutput*> by_clf(n_clf);
  std::vector<const RankedOutput*> present;
  std::vector<RankedOutput> calibrated;
  std::vector<const RankedOutput*> calibrated_ptrs;

  for (std::size_t s = 0; s < eval.samples().size(); ++s) {
    const auto& truth = eval.samples()[s].true_label;
    std::fill(by_clf.begin(), by_clf.end(), nullptr);
    for (std::size_t o : eval.outputs_of_sample(s)) {
      const auto& out = eval.outputs()[o];
      for (std::size_t c = 0; c < n_clf; ++c) {
        if (report.classifiers[c] == out.classifier_id) by_clf[c] = &out;
      }
    }

    std::size_t worst = 0;
    std::size_t best = kAbsent;
    for (std::size_t c = 0; c < n_clf; ++c) {
      const std::size_t pos = by_clf[c] ? position_of(by_clf[c]->ranking, truth) : kAbsent;
      for (std::size_t n = 0; n < n_max; ++n) individual[c][n] += pos <= n ? 1 : 0;
      worst = std::max(worst, pos);
      best = std::min(best, pos);
    }
    for (std::size_t n = 0; n < n_max; ++n) {
      and_hits[n] += worst <= n ? 1 : 0;
      or_hits[n] += best <= n ? 1 : 0;
    }

    present.clear();
    for (const auto* p : by_clf) {
      if (p) present.push_back(p);
    }
    if (present.empty()) continue;

    if (tables != nullptr) {
      calibrated.clear();
      calibrated_ptrs.clear();
      for (const auto* p : present) calibrated.push_back(apply_table(tables->find(p->classifier_id)->second, *p));
      for (const auto& c : calibrated) calibrated_ptrs.push_back(&c);
    }

    for (std::size_t r = 0; r < rules.size(); ++r) {
      const auto raw = fuse(std::span<const RankedOutput* const>(present), rules[r]);
      const std::size_t pos = position_of(raw.ranking, truth);
      for (std::size_t n = 0; n < n_max; ++n) rule_counts[r].raw[n] += pos <= n ? 1 : 0;
      rule_counts[r].raw_flag += raw.nonpositive_product ? 1 : 0;
      if (tables != nullptr) {
        const auto info = fuse(std::span<const RankedOutput* const>(calibrated_ptrs), rules[r]);
        const std::size_t ipos = position_of(info.ranking, truth);
        for (std::size_t n = 0; n < n_max; ++n) rule_counts[r].info[n] += ipos <= n ? 1 : 0;
        rule_counts[r].info_flag += info.nonpositive_product ? 1 : 0;
      }
    }
  }

  const double total = static_cast<double>(report.n_samples);
  auto rates = [total](const std::vector<std::size_t>& hits) {
    std::vector<double> out(hits.size());
    for (std::size_t i = 0; i < hits.size(); ++i) out[i] = static_cast<double>(hits[i]) / total;
    return out;
  };
  for (std::size_t c = 0; c < n_clf; ++c) report.individual[report.classifiers[c]] = rates(individual[c]);
  report.and_rate = rates(and_hits);
  report.or_rate = rates(or_hits);
  for (std::size_t r = 0; r < rules.size(); ++r) {
    CombinedRates cr;
    cr.raw = rates(rule_counts[r].raw);
    if (tables != nullptr) cr.informational = rates(rule_counts[r].info);
    cr.raw_nonpositive = rule_counts[r].raw_flag;
    cr.informational_nonpositive = rule_counts[r].info_flag;
    report.combined.emplace_back(rules[r], std::move(cr));
  }
  return report;
}

}  // namespace infoconf
