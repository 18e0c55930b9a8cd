#pragma once

// Single-layer information network. A synapse turns a normalized
// performance into one general-entropy summand -p ln p, a neuron sums its
// synapses and squashes the total with the sigmoid.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "infoconf/fusion.hpp"
#include "json.hpp"

namespace infoconf {

/// -p ln p for p in [eps, 1 - eps]; DomainError otherwise.
double synapse_summand(double p);

struct Synapse {
  std::string source;  // classifier id or upstream neuron id
  double i_c = 1.0;
  double normalized_performance = 0.5;
};

struct Neuron {
  std::string id;
  double expectation = 1.0;
  std::vector<Synapse> synapses;
};

/// sigmoid(sum of synapse summands, e). Throws InputError for a neuron
/// without synapses.
double neuron_forward(const Neuron& neuron, double expectation);
inline double neuron_forward(const Neuron& neuron) { return neuron_forward(neuron, neuron.expectation); }

/// 1 / (1 + p_hat^(1/I_C)), in [0.5, 1). Decreasing in p_hat.
double output_value(double p_hat, double i_c);

/// Information of one calibrated answer, -ln output_value(p_hat, I_C).
double label_information(double p_hat, double i_c);

/// Ranks one sample's labels by their information summed over classifiers.
/// Ties follow the fusion tie-break.
FusedRanking infonet_rank(std::span<const RankedOutput* const> outputs, const TableMap& tables);

/// evaluate() over `rules` plus the "infonet" summary comparing the network
/// with calibrated SUM.
FusionReport single_layer_fuse(const EvaluationSet& eval, const TableMap& tables,
                               std::span<const FusionRule> rules = kAllRules, std::size_t n_max = 3);

/// {"neurons": [{"id", "expectation", "synapses": [{"source", "i_c"}]}]}
struct NetworkConfig {
  std::vector<Neuron> neurons;

  nlohmann::ordered_json to_json() const;
  static NetworkConfig from_json(const nlohmann::json& j);
};

/// One output neuron fed by every table's classifier.
NetworkConfig network_from_tables(const TableMap& tables);

/// New network with each synapse's I_C taken from the matching table.
/// Synapses whose source has no table keep their value.
NetworkConfig refresh(const NetworkConfig& config, const TableMap& tables);

/// Sets every synapse's normalized performance to p^(1/I_C) of its source
/// and runs the neurons in order; later neurons may read earlier outputs.
/// Returns output per neuron id. Throws InputError on an unknown source.
std::map<std::string, double> forward(const NetworkConfig& config, const std::map<std::string, double>& performance);

}  // namespace infoconf
