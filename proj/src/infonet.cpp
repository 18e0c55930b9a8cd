#include "infoconf/infonet.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "infoconf/calibration.hpp"
#include "infoconf/entropy.hpp"
#include "infoconf/error.hpp"

namespace infoconf {
namespace {

std::size_t top1_hits(const EvaluationSet& eval, const TableMap& tables) {
  std::size_t hits = 0;
  std::vector<const RankedOutput*> present;
  for (std::size_t s = 0; s < eval.samples().size(); ++s) {
    present.clear();
    for (std::size_t o : eval.outputs_of_sample(s)) present.push_back(&eval.outputs()[o]);
    if (present.empty()) continue;
    const auto ranked = infonet_rank(present, tables);
    if (!ranked.ranking.empty() && ranked.ranking.front().label == eval.samples()[s].true_label) ++hits;
  }
  return hits;
}

}  // namespace

double synapse_summand(double p) {
  if (!(p >= kCalibrationEpsilon && p <= 1.0 - kCalibrationEpsilon)) {
    throw DomainError("synapse_summand: performance must lie in [eps, 1 - eps]");
  }
  return -p * std::log(p);
}

double neuron_forward(const Neuron& neuron, double expectation) {
  if (neuron.synapses.empty()) throw InputError("neuron '" + neuron.id + "' has no synapses");
  double k = 0.0;
  for (const auto& s : neuron.synapses) k += synapse_summand(s.normalized_performance);
  return sigmoid(k, expectation);
}

double output_value(double p_hat, double i_c) {
  if (!(i_c > 0.0) || !std::isfinite(i_c)) throw DomainError("output_value: I_C must be positive");
  if (!(p_hat >= kCalibrationEpsilon && p_hat <= 1.0)) throw DomainError("output_value: p_hat must lie in [eps, 1]");
  return 1.0 / (1.0 + std::pow(p_hat, 1.0 / i_c));
}

double label_information(double p_hat, double i_c) {
  if (!(i_c > 0.0) || !std::isfinite(i_c)) throw DomainError("label_information: I_C must be positive");
  const double p = std::clamp(p_hat, kCalibrationEpsilon, 1.0);
  return std::log1p(std::pow(p, 1.0 / i_c));
}

FusedRanking infonet_rank(std::span<const RankedOutput* const> outputs, const TableMap& tables) {
  if (outputs.empty()) throw InputError("infonet: no classifier outputs");
  FusedRanking fused;
  fused.sample_id = outputs.front()->sample_id;
  std::unordered_map<std::string_view, std::size_t> index;

  for (const RankedOutput* output : outputs) {
    if (output->sample_id != fused.sample_id) throw InputError("infonet: outputs for different samples");
    const auto it = tables.find(output->classifier_id);
    if (it == tables.end()) {
      throw InputError("missing calibration table for classifier '" + output->classifier_id + "'");
    }
    const auto& table = it->second;
    for (std::size_t r = 0; r < output->ranking.size(); ++r) {
      const auto& entry = output->ranking[r];
      const double info = label_information(table.entry_for(entry.confidence).p_hat, table.i_c);
      const auto [slot, inserted] = index.try_emplace(entry.label, fused.ranking.size());
      if (inserted) {
        fused.ranking.push_back({entry.label, info, r});
      } else {
        auto& f = fused.ranking[slot->second];
        f.score += info;
        f.best_rank = std::min(f.best_rank, r);
      }
    }
  }
  std::sort(fused.ranking.begin(), fused.ranking.end(), [](const FusedEntry& a, const FusedEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.best_rank != b.best_rank) return a.best_rank < b.best_rank;
    return a.label < b.label;
  });
  return fused;
}

FusionReport single_layer_fuse(const EvaluationSet& eval, const TableMap& tables, std::span<const FusionRule> rules,
                               std::size_t n_max) {
  auto report = evaluate(eval, &tables, rules, n_max);
  double sum_top1 = 0.0;
  if (std::find(rules.begin(), rules.end(), FusionRule::kSum) != rules.end()) {
    sum_top1 = report.rates(FusionRule::kSum).informational.front();
  } else {
    const FusionRule sum_only[] = {FusionRule::kSum};
    sum_top1 = evaluate(eval, &tables, sum_only, 1).rates(FusionRule::kSum).informational.front();
  }
  InfonetSummary summary;
  summary.top1 = static_cast<double>(top1_hits(eval, tables)) / static_cast<double>(report.n_samples);
  summary.calibrated_sum_top1 = sum_top1;
  summary.delta = summary.top1 - sum_top1;
  report.infonet = summary;
  return report;
}

nlohmann::ordered_json NetworkConfig::to_json() const {
  nlohmann::ordered_json neurons_json = nlohmann::ordered_json::array();
  for (const auto& n : neurons) {
    nlohmann::ordered_json syn = nlohmann::ordered_json::array();
    for (const auto& s : n.synapses) syn.push_back({{"source", s.source}, {"i_c", s.i_c}});
    neurons_json.push_back({{"id", n.id}, {"expectation", n.expectation}, {"synapses", std::move(syn)}});
  }
  return {{"neurons", std::move(neurons_json)}};
}

NetworkConfig NetworkConfig::from_json(const nlohmann::json& j) {
  NetworkConfig config;
  try {
    for (const auto& nj : j.at("neurons")) {
      Neuron n;
      n.id = nj.at("id").get<std::string>();
      n.expectation = nj.value("expectation", 1.0);
      for (const auto& sj : nj.at("synapses")) {
        Synapse s;
        s.source = sj.at("source").get<std::string>();
        s.i_c = sj.at("i_c").get<double>();
        if (!(s.i_c > 0.0)) throw InputError("synapse '" + s.source + "' of neuron '" + n.id + "': i_c must be positive");
        n.synapses.push_back(std::move(s));
      }
      if (n.synapses.empty()) throw InputError("neuron '" + n.id + "' has no synapses");
      config.neurons.push_back(std::move(n));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("network config: ") + e.what());
  }
  return config;
}

NetworkConfig network_from_tables(const TableMap& tables) {
  Neuron out;
  out.id = "out";
  for (const auto& [id, table] : tables) out.synapses.push_back({id, table.i_c, 0.5});
  return {{std::move(out)}};
}

NetworkConfig refresh(const NetworkConfig& config, const TableMap& tables) {
  NetworkConfig next = config;
  for (auto& n : next.neurons) {
    for (auto& s : n.synapses) {
      const auto it = tables.find(s.source);
      if (it != tables.end()) s.i_c = it->second.i_c;
    }
  }
  return next;
}

std::map<std::string, double> forward(const NetworkConfig& config, const std::map<std::string, double>& performance) {
  std::map<std::string, double> outputs;
  for (const auto& neuron : config.neurons) {
    Neuron bound = neuron;
    for (auto& s : bound.synapses) {
      auto it = performance.find(s.source);
      if (it == performance.end()) {
        it = outputs.find(s.source);
        if (it == outputs.end()) throw InputError("neuron '" + neuron.id + "': unknown source '" + s.source + "'");
      }
      const double p = std::pow(std::max(it->second, 0.0), 1.0 / s.i_c);
      s.normalized_performance = std::clamp(p, kCalibrationEpsilon, 1.0 - kCalibrationEpsilon);
    }
    outputs[neuron.id] = neuron_forward(bound);
  }
  return outputs;
}

}  // namespace infoconf
