#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "infoconf/evaluation.hpp"

namespace fixtures {

struct Top1 {
  double confidence;
  bool correct;
};

/// One classifier "clf"; every sample's ranking has the given top-1 entry
/// followed by one lower wrong alternative.
inline infoconf::EvaluationSet single_classifier(const std::vector<Top1>& rows, const std::string& clf = "clf") {
  infoconf::EvaluationSet eval;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string id = "s" + std::to_string(i);
    eval.add_sample({id, "A"});
    const double c = rows[i].confidence;
    infoconf::RankedOutput out{id, clf, {}};
    out.ranking.push_back({rows[i].correct ? "A" : "B", c});
    out.ranking.push_back({rows[i].correct ? "B" : "C", c - 1.0});
    eval.add_output(std::move(out));
  }
  return eval;
}

/// The four-sample worked example: 0.2 ok, 0.4 wrong, 0.6 ok, 0.8 ok.
inline infoconf::EvaluationSet four_samples() {
  return single_classifier({{0.2, true}, {0.4, false}, {0.6, true}, {0.8, true}});
}

/// Random single-classifier set with accuracy rising in confidence. With
/// `ties` the confidences are drawn from a small grid.
inline infoconf::EvaluationSet random_single(std::uint64_t seed, std::size_t n, bool ties = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Top1> rows;
  bool any_right = false, any_wrong = false;
  for (std::size_t i = 0; i < n; ++i) {
    double c = u(rng);
    if (ties) c = std::floor(c * 8.0) / 8.0;
    const bool ok = u(rng) < 0.2 + 0.7 * c;
    any_right = any_right || ok;
    any_wrong = any_wrong || !ok;
    rows.push_back({c, ok});
  }
  if (!any_right) rows.front().correct = true;
  if (!any_wrong) rows.back().correct = false;
  return single_classifier(rows);
}

}  // namespace fixtures
