#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "infoconf/calibration.hpp"
#include "infoconf/error.hpp"
#include "infoconf/harness.hpp"

using namespace infoconf;
namespace fs = std::filesystem;

namespace {

std::string csv_of(const EvaluationSet& eval) {
  std::ostringstream out;
  write_evaluation_csv(eval, out);
  return out.str();
}

fs::path temp_file(const std::string& name, const std::string& content) {
  const auto dir = fs::temp_directory_path() / "infoconf_test_harness";
  fs::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << content;
  return path;
}

std::set<std::string> correct_samples(const EvaluationSet& eval, const std::string& clf) {
  std::set<std::string> ids;
  for (const auto& o : eval.outputs()) {
    if (o.classifier_id == clf && o.ranking.front().label == eval.sample(o.sample_id).true_label) {
      ids.insert(o.sample_id);
    }
  }
  return ids;
}

}  // namespace

TEST_CASE("generation is deterministic") {
  SyntheticSpec spec = default_spec(42);
  spec.n_samples = 2000;
  const auto a = generate(spec);
  const auto b = generate(spec);
  CHECK(a == b);
  CHECK(csv_of(a) == csv_of(b));
  spec.seed = 43;
  CHECK_FALSE(generate(spec) == a);
}

TEST_CASE("generated rankings are well formed") {
  SyntheticSpec spec = default_spec(5);
  spec.n_samples = 500;
  spec.n_classes = 3;
  spec.n_best = 3;
  const auto eval = generate(spec);
  CHECK(eval.outputs().size() == 1000);
  for (const auto& o : eval.outputs()) {
    CHECK(o.ranking.size() == 3);
    validate_ranking(o);
  }
}

TEST_CASE("recognition rates converge to their targets") {
  SyntheticSpec spec = default_spec(7);
  spec.n_samples = 10000;
  const auto eval = generate(spec);
  for (const auto& c : spec.classifiers) {
    const double sigma = std::sqrt(c.accuracy_target * (1.0 - c.accuracy_target) / 1e4);
    CHECK(std::abs(recognition_rate(eval, c.id) - c.accuracy_target) <= 3.0 * sigma);
  }

  SyntheticSpec sure = spec;
  for (auto& c : sure.classifiers) c.accuracy_target = 1.0 - 1e-12;
  const auto all = generate(sure);
  for (const auto& c : sure.classifiers) {
    const double sigma = std::sqrt(c.accuracy_target * (1.0 - c.accuracy_target) / 1e4);
    CHECK(std::abs(recognition_rate(all, c.id) - c.accuracy_target) <= 2.0 * sigma + 1e-4);
  }
}

TEST_CASE("correlation knob") {
  SyntheticSpec spec = default_spec(9);
  spec.n_samples = 4000;
  spec.classifiers[1].accuracy_target = spec.classifiers[0].accuracy_target;
  spec.classifiers[1].correlation = 1.0;
  const auto coupled = generate(spec);
  CHECK(correct_samples(coupled, "offline") == correct_samples(coupled, "online"));

  auto overlap = [&](double rho) {
    SyntheticSpec s = default_spec(9);
    s.n_samples = 4000;
    s.classifiers[1].correlation = rho;
    const auto eval = generate(s);
    const auto a = correct_samples(eval, "offline");
    const auto b = correct_samples(eval, "online");
    std::size_t both = 0;
    for (const auto& id : a) both += b.count(id);
    return both;
  };
  CHECK(overlap(0.9) > overlap(0.0));
}

TEST_CASE("spec validation") {
  SyntheticSpec spec = default_spec();
  spec.classifiers[1].correlation = 1.5;
  try {
    spec.validate();
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("[0, 1]") != std::string::npos);
  }
  spec = default_spec();
  spec.n_best = 60;
  CHECK_THROWS_AS(spec.validate(), InputError);
  spec = default_spec();
  spec.classifiers[0].accuracy_target = 1.0;
  CHECK_THROWS_AS(spec.validate(), InputError);
  spec = default_spec();
  spec.classifiers[1].id = "offline";
  CHECK_THROWS_AS(spec.validate(), InputError);
  spec = default_spec();
  spec.n_classes = 1;
  CHECK_THROWS_AS(generate(spec), InputError);

  const auto j = default_spec(3).to_json();
  CHECK(SyntheticSpec::from_json(nlohmann::json::parse(j.dump())) == default_spec(3));
}

TEST_CASE("ingest") {
  const std::string header = "sample_id,true_label,classifier_id,rank,label,confidence\n";
  const auto ok = temp_file("ok.csv", header + "s1,A,c,1,A,0.9\ns1,A,c,2,B,0.5\ns1,A,c,3,C,0.1\n");
  const auto eval = ingest(ok);
  CHECK(eval.outputs().size() == 1);

  const auto gap = temp_file("gap.csv", header + "s1,A,c,1,A,0.9\ns1,A,c,3,B,0.5\n");
  try {
    ingest(gap);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  try {
    ingest("/nonexistent/eval.csv");
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("input not found") != std::string::npos);
  }

  SyntheticSpec spec = default_spec(11);
  spec.n_samples = 300;
  const auto generated = generate(spec);
  const auto path = temp_file("roundtrip.csv", csv_of(generated));
  CHECK(ingest(path) == generated);
}

TEST_CASE("split") {
  const auto s = split_samples(20000, 2.0 / 3.0, 1.0 / 3.0, 42);
  CHECK(s.calibration.size() == 13333);
  CHECK(s.test.size() == 6667);
  std::set<std::size_t> cal(s.calibration.begin(), s.calibration.end());
  for (std::size_t i : s.test) CHECK(cal.count(i) == 0);
  const auto again = split_samples(20000, 2.0 / 3.0, 1.0 / 3.0, 42);
  CHECK(again.calibration == s.calibration);

  const auto half = split_samples(100, 0.3, 0.2, 1);
  CHECK(half.calibration.size() == 30);
  CHECK(half.test.size() == 20);
}

TEST_CASE("experiment pipeline") {
  ExperimentConfig config;
  SyntheticSpec spec = default_spec(42);
  spec.n_samples = 3000;
  config.source = spec;

  const auto a = run_experiment(config);
  const auto b = run_experiment(config);
  CHECK(a == b);
  CHECK(a.calibration_samples == 2000);
  CHECK(a.test_samples == 1000);
  CHECK(a.tables.size() == 2);
  CHECK(a.fusion.infonet.has_value());
  CHECK(a.stage_timings.count("calibrate") == 1);

  const auto j = a.to_json();
  for (const char* key : {"individual", "and", "or", "combined", "infonet", "config", "seed", "stage_timings"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["seed"] == 42);

  ExperimentConfig bad = config;
  bad.calibration_fraction = 0.8;
  bad.test_fraction = 0.5;
  CHECK_THROWS_AS(run_experiment(bad), InputError);
}

TEST_CASE("single-classifier experiment: fusion equals individual") {
  ExperimentConfig config;
  SyntheticSpec spec = default_spec(4);
  spec.n_samples = 3000;
  spec.classifiers.resize(1);
  config.source = spec;
  const auto r = run_experiment(config);
  const double individual = r.fusion.individual.at("offline").front();
  for (const auto& [rule, rates] : r.fusion.combined) {
    CHECK(rates.raw.front() == individual);
    CHECK(rates.informational.front() == individual);
  }
  CHECK(r.fusion.infonet->top1 == individual);
}

TEST_CASE("errors carry stage labels and keep their type") {
  ExperimentConfig config;
  SyntheticSpec spec = default_spec(4);
  spec.n_samples = 200;
  spec.classifiers.resize(1);
  spec.classifiers[0].accuracy_target = 1.0 - 1e-12;
  config.source = spec;
  try {
    run_experiment(config);
    FAIL("expected PolicyError");
  } catch (const PolicyError& e) {
    CHECK(std::string(e.what()).rfind("calibrate: ", 0) == 0);
  }

  config.source = fs::path("/nonexistent/eval.csv");
  try {
    run_experiment(config);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).rfind("load: input not found", 0) == 0);
  }
}

TEST_CASE("exponential performance fixture at moderate size") {
  const auto r = performance_theorem_fixture(42, 20000, 0.5);
  CHECK(r.passed);
  CHECK(r.max_deviation <= r.deviation_bound);
  CHECK(r.reconstruction_points > 1000);
}
