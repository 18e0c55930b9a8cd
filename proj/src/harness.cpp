#include "infoconf/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "infoconf/error.hpp"
#include "infoconf/infonet.hpp"

namespace infoconf {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  // Uniform on the open interval (0, 1).
  double open01() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(open01() * static_cast<double>(n)); }

 private:
  std::mt19937_64 engine_;
};

double inverse_cdf(ConfidenceModel model, double param, double q) {
  switch (model) {
    case ConfidenceModel::kExponential:
      return -param * std::log1p(-q);
    case ConfidenceModel::kLogistic:
      return param * std::log(q / (1.0 - q));
    case ConfidenceModel::kUniform:
      return q;
  }
  return q;
}

std::string numbered(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, prefix == 's' ? "s%05zu" : "c%02zu", i);
  return buf;
}

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
  const std::string p = std::string(stage) + ": ";
  try {
    return f();
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(p + e.what(), e.last_residual());
  } catch (const DivergenceError& e) {
    throw DivergenceError(p + e.what());
  } catch (const DomainError& e) {
    throw DomainError(p + e.what());
  } catch (const PolicyError& e) {
    throw PolicyError(p + e.what());
  } catch (const InputError& e) {
    throw InputError(p + e.what());
  } catch (const Error& e) {
    throw Error(p + e.what());
  }
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw InputError(msg);
}

}  // namespace

std::string_view to_string(ConfidenceModel model) {
  switch (model) {
    case ConfidenceModel::kExponential:
      return "exponential";
    case ConfidenceModel::kLogistic:
      return "logistic";
    case ConfidenceModel::kUniform:
      return "uniform";
  }
  return "exponential";
}

ConfidenceModel parse_confidence_model(std::string_view text) {
  for (auto m : {ConfidenceModel::kExponential, ConfidenceModel::kLogistic, ConfidenceModel::kUniform}) {
    if (to_string(m) == text) return m;
  }
  throw InputError("unknown confidence model '" + std::string(text) + "' (expected exponential, logistic or uniform)");
}

void SyntheticSpec::validate() const {
  require(n_samples > 0, "n_samples must be positive");
  require(n_classes >= 2, "n_classes must be at least 2");
  require(n_best >= 1 && n_best <= n_classes,
          "n_best must lie in [1, " + std::to_string(n_classes) + "], got " + std::to_string(n_best));
  require(!classifiers.empty(), "at least one classifier is required");
  require(informativeness >= 0.0 && informativeness <= 1.0, "informativeness must lie in [0, 1]");
  require(second_chance >= 0.0 && second_chance <= 1.0, "second_chance must lie in [0, 1]");
  for (std::size_t i = 0; i < classifiers.size(); ++i) {
    const auto& c = classifiers[i];
    const std::string who = "classifier '" + c.id + "': ";
    require(!c.id.empty(), "classifier " + std::to_string(i + 1) + ": empty id");
    for (std::size_t j = 0; j < i; ++j) require(classifiers[j].id != c.id, who + "duplicate id");
    require(c.accuracy_target > 0.0 && c.accuracy_target < 1.0,
            who + "accuracy_target must lie in (0, 1), got " + std::to_string(c.accuracy_target));
    require(c.correlation >= 0.0 && c.correlation <= 1.0,
            who + "correlation " + std::to_string(c.correlation) + " is infeasible, feasible range is [0, 1]");
    if (c.model != ConfidenceModel::kUniform) {
      require(c.model_param > 0.0 && std::isfinite(c.model_param), who + "model parameter must be positive");
    }
  }
}

nlohmann::ordered_json SyntheticSpec::to_json() const {
  nlohmann::ordered_json cls = nlohmann::ordered_json::array();
  for (const auto& c : classifiers) {
    cls.push_back({{"id", c.id},
                   {"accuracy_target", c.accuracy_target},
                   {"confidence_model", to_string(c.model)},
                   {"model_param", c.model_param},
                   {"correlation", c.correlation}});
  }
  return {{"seed", seed},
          {"n_samples", n_samples},
          {"n_classes", n_classes},
          {"n_best", n_best},
          {"informativeness", informativeness},
          {"second_chance", second_chance},
          {"classifiers", std::move(cls)}};
}

SyntheticSpec SyntheticSpec::from_json(const nlohmann::json& j) {
  SyntheticSpec spec;
  try {
    spec.seed = j.value("seed", spec.seed);
    spec.n_samples = j.value("n_samples", spec.n_samples);
    spec.n_classes = j.value("n_classes", spec.n_classes);
    spec.n_best = j.value("n_best", spec.n_best);
    spec.informativeness = j.value("informativeness", spec.informativeness);
    spec.second_chance = j.value("second_chance", spec.second_chance);
    for (const auto& cj : j.at("classifiers")) {
      ClassifierSpec c;
      c.id = cj.at("id").get<std::string>();
      c.accuracy_target = cj.at("accuracy_target").get<double>();
      c.model = parse_confidence_model(cj.value("confidence_model", std::string("exponential")));
      c.model_param = cj.value("model_param", 1.0);
      c.correlation = cj.value("correlation", 0.0);
      spec.classifiers.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("synthetic spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

SyntheticSpec default_spec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.seed = seed;
  spec.classifiers = {
      {"offline", 0.90, ConfidenceModel::kExponential, 1.0, 0.0},
      {"online", 0.81, ConfidenceModel::kLogistic, 3.0, 0.4},
  };
  return spec;
}

EvaluationSet generate(const SyntheticSpec& spec) {
  spec.validate();
  EvaluationSet eval;
  std::vector<std::string> labels(spec.n_classes);
  for (std::size_t i = 0; i < spec.n_classes; ++i) labels[i] = numbered('c', i);

  std::vector<std::size_t> others;
  std::vector<double> quantiles(spec.n_best);
  for (std::size_t s = 0; s < spec.n_samples; ++s) {
    Stream rng(splitmix64(spec.seed ^ splitmix64(s)));
    const std::size_t truth = rng.below(spec.n_classes);
    const std::string sample_id = numbered('s', s);
    eval.add_sample({sample_id, labels[truth]});

    const double latent = rng.open01();
    for (std::size_t c = 0; c < spec.classifiers.size(); ++c) {
      const auto& cs = spec.classifiers[c];
      const double coupled = rng.open01();
      const double own = rng.open01();
      const double u = (c == 0 || coupled < cs.correlation) ? latent : own;
      const bool correct = u < cs.accuracy_target;

      quantiles[0] = rng.open01() < spec.informativeness ? 1.0 - u : rng.open01();
      quantiles[0] = std::clamp(quantiles[0], 0x1.0p-53, 1.0 - 0x1.0p-53);
      for (std::size_t r = 1; r < spec.n_best; ++r) quantiles[r] = quantiles[r - 1] * std::sqrt(rng.open01());

      // Rank at which the true label appears, n_best when absent.
      std::size_t truth_rank = 0;
      if (!correct) {
        truth_rank = 1;
        while (truth_rank < spec.n_best && !(rng.open01() < spec.second_chance)) ++truth_rank;
        if (truth_rank == spec.n_classes) truth_rank = spec.n_classes - 1;
      }

      others.clear();
      for (std::size_t i = 0; i < spec.n_classes; ++i) {
        if (i != truth) others.push_back(i);
      }
      RankedOutput out{sample_id, cs.id, {}};
      out.ranking.reserve(spec.n_best);
      std::size_t used = 0;
      for (std::size_t r = 0; r < spec.n_best; ++r) {
        std::size_t label = truth;
        if (r != truth_rank) {
          const std::size_t pick = used + rng.below(others.size() - used);
          std::swap(others[used], others[pick]);
          label = others[used++];
        }
        out.ranking.push_back({labels[label], inverse_cdf(cs.model, cs.model_param, quantiles[r])});
      }
      eval.add_output(std::move(out));
    }
  }
  return eval;
}

EvaluationSet ingest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("input not found: " + path.string());
  return read_evaluation_csv(in);
}

void ExperimentConfig::validate() const {
  require(calibration_fraction > 0.0 && test_fraction > 0.0, "split fractions must be positive");
  require(calibration_fraction + test_fraction <= 1.0 + 1e-12, "split fractions must sum to at most 1");
  require(!rules.empty(), "at least one fusion rule is required");
  require(n_max >= 1, "n_max must be at least 1");
  if (const auto* spec = std::get_if<SyntheticSpec>(&source)) spec->validate();
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  if (const auto* spec = std::get_if<SyntheticSpec>(&source)) {
    j["spec"] = spec->to_json();
  } else {
    j["input"] = std::get<std::filesystem::path>(source).string();
  }
  j["split_seed"] = split_seed;
  j["split"] = {{"calibration", calibration_fraction}, {"test", test_fraction}};
  nlohmann::ordered_json r = nlohmann::ordered_json::array();
  for (auto rule : rules) r.push_back(to_string(rule));
  j["rules"] = std::move(r);
  j["binning"] = binning.describe();
  j["run_infonet"] = run_infonet;
  j["allow_degenerate"] = allow_degenerate;
  j["n_max"] = n_max;
  return j;
}

nlohmann::ordered_json ExperimentReport::to_json(bool with_timings) const {
  auto j = fusion.to_json();
  j["config"] = config;
  j["seed"] = seed;
  j["split"] = {{"calibration", calibration_samples}, {"test", test_samples}};
  auto& t = j["tables"] = nlohmann::ordered_json::object();
  for (const auto& [id, table] : tables) t[id] = table.to_json();
  if (with_timings) {
    auto& st = j["stage_timings"] = nlohmann::ordered_json::object();
    for (const auto& [stage, seconds] : stage_timings) st[stage] = seconds;
  }
  return j;
}

bool ExperimentReport::operator==(const ExperimentReport& other) const {
  return to_json(false) == other.to_json(false);
}

SplitIndices split_samples(std::size_t n, double calibration_fraction, double test_fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Stream rng(splitmix64(seed ^ 0x5A17C0DEULL));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  const auto n_cal = std::min<std::size_t>(n, std::llround(static_cast<double>(n) * calibration_fraction));
  const auto n_test = std::min<std::size_t>(n - n_cal, std::llround(static_cast<double>(n) * test_fraction));
  SplitIndices split;
  split.calibration.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_cal));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_cal),
                    order.begin() + static_cast<std::ptrdiff_t>(n_cal + n_test));
  std::sort(split.calibration.begin(), split.calibration.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  staged("config", [&] { config.validate(); });
  const auto t0 = std::chrono::steady_clock::now();
  const EvaluationSet eval = staged("load", [&] {
    if (const auto* spec = std::get_if<SyntheticSpec>(&config.source)) return generate(*spec);
    return ingest(std::get<std::filesystem::path>(config.source));
  });
  auto report = run_experiment(config, eval);
  report.stage_timings["load"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const EvaluationSet& eval) {
  using clock = std::chrono::steady_clock;
  staged("config", [&] { config.validate(); });
  ExperimentReport report;
  report.config = config.to_json();
  report.seed = std::holds_alternative<SyntheticSpec>(config.source) ? std::get<SyntheticSpec>(config.source).seed
                                                                      : config.split_seed;

  auto t = clock::now();
  auto lap = [&](const char* stage) {
    const auto now = clock::now();
    report.stage_timings[stage] = std::chrono::duration<double>(now - t).count();
    t = now;
  };

  const auto [cal, test] = staged("split", [&] {
    const auto s = split_samples(eval.samples().size(), config.calibration_fraction, config.test_fraction,
                                 config.split_seed);
    if (s.calibration.empty() || s.test.empty()) throw InputError("too few samples to split");
    return std::pair{eval.subset(s.calibration), eval.subset(s.test)};
  });
  report.calibration_samples = cal.samples().size();
  report.test_samples = test.samples().size();
  lap("split");

  staged("calibrate", [&] {
    BuildOptions options;
    options.allow_degenerate = config.allow_degenerate;
    for (const auto& id : eval.classifier_ids()) {
      try {
        report.tables.emplace(id, calibrate(cal, id, config.binning, options));
      } catch (const PolicyError& e) {
        throw PolicyError("classifier '" + id + "': " + e.what());
      } catch (const DomainError& e) {
        throw DomainError("classifier '" + id + "': " + e.what());
      } catch (const InputError& e) {
        throw InputError("classifier '" + id + "': " + e.what());
      }
    }
  });
  lap("calibrate");

  report.fusion = staged("evaluate", [&] {
    if (config.run_infonet) return single_layer_fuse(test, report.tables, config.rules, config.n_max);
    return evaluate(test, &report.tables, config.rules, config.n_max);
  });
  lap("evaluate");
  return report;
}

PerformanceTheoremResult performance_theorem_fixture(std::uint64_t seed, std::size_t n, double mean, double margin) {
  SyntheticSpec spec;
  spec.seed = seed;
  spec.n_samples = n;
  spec.n_classes = 2;
  spec.n_best = 1;
  spec.classifiers = {{"exp", 1.0 - 1e-9, ConfidenceModel::kExponential, mean, 0.0}};
  const auto eval = generate(spec);
  const auto perf = estimate_performance(eval, "exp", BinningSpec::distinct_values());

  PerformanceTheoremResult result;
  result.n = n;
  result.mean = mean;
  const double eps_p = (1.0 + margin) * 1.36 / std::sqrt(static_cast<double>(n));
  result.deviation_bound = eps_p;

  auto cdf = [mean](double k) { return -std::expm1(-k / mean); };
  double previous = 0.0;
  for (const auto& e : perf.entries) {
    const double f = cdf(e.key.representative);
    result.max_deviation = std::max({result.max_deviation, std::abs(e.p_hat - f), std::abs(previous - f)});
    previous = e.p_hat;
  }

  std::vector<double> keys;
  keys.reserve(perf.entries.size());
  for (const auto& e : perf.entries) keys.push_back(e.key.representative);
  const double lo = keys[static_cast<std::size_t>(0.05 * static_cast<double>(keys.size() - 1))];
  const double hi = keys[static_cast<std::size_t>(0.95 * static_cast<double>(keys.size() - 1))];
  for (const auto& e : perf.entries) {
    const double k = e.key.representative;
    if (k < lo || k > hi) continue;
    const double rebuilt = -mean * std::log1p(-e.p_hat);
    const double tolerance = mean * eps_p / (1.0 - std::max(e.p_hat, cdf(k)));
    result.reconstruction_deviation = std::max(result.reconstruction_deviation, std::abs(rebuilt - k) / tolerance);
    ++result.reconstruction_points;
  }
  result.passed = result.max_deviation <= result.deviation_bound && result.reconstruction_deviation <= 1.0 &&
                  result.reconstruction_points > 0;
  return result;
}

}  // namespace infoconf
