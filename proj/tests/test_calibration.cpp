#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "infoconf/calibration.hpp"
#include "infoconf/error.hpp"
#include "oracle_values.hpp"

using namespace infoconf;
using doctest::Approx;

TEST_CASE("four-sample performance estimate") {
  const auto eval = fixtures::four_samples();
  const auto perf = estimate_performance(eval, "clf", BinningSpec::distinct_values());
  REQUIRE(perf.entries.size() == 4);
  const double expected[] = {0.25, 0.25, 0.5, 0.75};
  for (int i = 0; i < 4; ++i) CHECK(perf.entries[i].p_hat == expected[i]);
  CHECK(perf.n_patterns == 4);
  CHECK(recognition_rate(eval, "clf") == 0.75);
  CHECK(perf.entries.back().p_hat == recognition_rate(eval, "clf"));
}

TEST_CASE("four-sample table matches the transliteration oracle") {
  const auto table = calibrate(fixtures::four_samples(), "clf", BinningSpec::distinct_values());
  CHECK(table.r == 0.75);
  CHECK(table.i_c == Approx(oracle::kFixtureIc).epsilon(1e-15));
  CHECK(table.e_hat == Approx(oracle::kFixtureEhat).epsilon(1e-15));
  REQUIRE(table.entries.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(table.entries[i].k_new == Approx(oracle::kFixtureKNew[i]).epsilon(1e-14));
  CHECK_FALSE(table.clamped);

  // composition equals the individual steps
  const auto perf = estimate_performance(fixtures::four_samples(), "clf", BinningSpec::distinct_values());
  const auto terms = normalization_terms(0.75);
  const auto by_hand = build_table(perf, 0.75);
  CHECK(by_hand == table);
  CHECK(terms.i_c == table.i_c);
}

TEST_CASE("degenerate evaluation sets") {
  SUBCASE("all correct, identical confidence") {
    const auto eval = fixtures::single_classifier({{0.4, true}, {0.4, true}, {0.4, true}});
    const auto perf = estimate_performance(eval, "clf");
    REQUIRE(perf.entries.size() == 1);
    CHECK(perf.entries[0].p_hat == 1.0);
    CHECK(recognition_rate(eval, "clf") == 1.0);
    CHECK_THROWS_AS(calibrate(eval, "clf"), PolicyError);
    BuildOptions allow;
    allow.allow_degenerate = true;
    const auto t = calibrate(eval, "clf", {}, allow);
    CHECK(t.degenerate);
    CHECK(t.clamped);
    CHECK(std::isfinite(t.entries[0].k_new));
  }
  SUBCASE("all wrong") {
    const auto eval = fixtures::single_classifier({{0.1, false}, {0.5, false}});
    const auto perf = estimate_performance(eval, "clf");
    for (const auto& e : perf.entries) CHECK(e.p_hat == 0.0);
    CHECK(recognition_rate(eval, "clf") == 0.0);
    BuildOptions allow;
    allow.allow_degenerate = true;
    const auto t = calibrate(eval, "clf", {}, allow);
    for (const auto& e : t.entries) CHECK(e.k_new == 0.0);
  }
  SUBCASE("single sample") {
    const auto eval = fixtures::single_classifier({{0.7, true}});
    CHECK_THROWS_AS(calibrate(eval, "clf"), PolicyError);
    BuildOptions allow;
    allow.allow_degenerate = true;
    CHECK(calibrate(eval, "clf", {}, allow).entries.size() == 1);
  }
  SUBCASE("no outputs or empty ranking") {
    EvaluationSet eval;
    eval.add_sample({"x", "A"});
    CHECK_THROWS_AS(estimate_performance(eval, "clf"), InputError);
    eval.add_output({"x", "clf", {}});
    try {
      estimate_performance(eval, "clf");
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("'x'") != std::string::npos);
    }
  }
}

TEST_CASE("normalization terms") {
  const double r1 = 1.0 - std::exp(-1.0);
  const auto t1 = normalization_terms(r1);
  CHECK(t1.i_c == Approx(1.0).epsilon(1e-15));
  CHECK(t1.e_hat == Approx(r1).epsilon(1e-15));

  const auto t2 = normalization_terms(0.8994);
  CHECK(t2.i_c == Approx(oracle::kIcOffline).epsilon(1e-14));
  CHECK(t2.e_hat == Approx(oracle::kEhatOffline).epsilon(1e-14));

  const auto t3 = normalization_terms(0.5);
  CHECK(t3.i_c == Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(t3.e_hat == Approx(std::exp(-1.0)).epsilon(1e-15));

  CHECK(normalization_terms(0.0).clamped);
  CHECK(normalization_terms(1.0).clamped);
  CHECK_FALSE(t2.clamped);
  CHECK_THROWS_AS(normalization_terms(1.2), DomainError);
  CHECK_THROWS_AS(normalization_terms(-0.1), DomainError);
}

TEST_CASE("build table") {
  const auto eval = fixtures::single_classifier({{0.1, false}, {0.2, true}, {0.3, false}, {0.9, true}});
  const auto perf = estimate_performance(eval, "clf", BinningSpec::distinct_values());
  const auto t = build_table(perf, 0.5);
  CHECK(t.entries[0].p_hat == 0.0);
  CHECK(t.entries[0].k_new == 0.0);
  CHECK(t.entries.back().k_new == Approx(-t.e_hat * std::log(1.0 - t.e_hat)).epsilon(1e-14));
  CHECK(std::abs(t.i_c + std::log(1.0 - t.r)) <= 1e-12);
  CHECK(std::abs(t.e_hat - std::pow(t.r, 1.0 / t.i_c)) <= 1e-12);
  CHECK_THROWS_AS(build_table(perf, 0.6), DomainError);
}

TEST_CASE("apply table") {
  const auto eval = fixtures::four_samples();
  const auto table = calibrate(eval, "clf", BinningSpec::distinct_values());

  CHECK(table.lookup(0.6) == table.entries[2].k_new);
  CHECK(table.lookup(0.61) == table.entries[2].k_new);
  CHECK(table.lookup(0.65) == table.lookup(0.61));
  CHECK(table.lookup(-5.0) == table.entries.front().k_new);
  CHECK(table.lookup(5.0) == table.entries.back().k_new);

  RankedOutput out{"s0", "clf", {{"A", 0.8}, {"B", 0.3}, {"C", 0.01}}};
  const auto applied = apply_table(table, out);
  REQUIRE(applied.ranking.size() == 3);
  CHECK(applied.ranking[0].label == "A");
  CHECK(applied.ranking[0].confidence == table.entries[3].k_new);
  CHECK(applied.ranking[1].confidence == table.entries[0].k_new);
  CHECK(applied.ranking[2].confidence == table.entries[0].k_new);

  RankedOutput other{"s0", "other", {{"A", 0.5}}};
  CHECK_THROWS_AS(apply_table(table, other), InputError);

  BuildOptions strict;
  strict.out_of_range = OutOfRangePolicy::kReject;
  const auto rejecting = calibrate(eval, "clf", BinningSpec::distinct_values(), strict);
  CHECK_THROWS_AS(rejecting.lookup(0.1), DomainError);
  CHECK_THROWS_AS(rejecting.lookup(0.9), DomainError);
  CHECK(rejecting.lookup(0.8) == rejecting.entries.back().k_new);
}

TEST_CASE("table JSON") {
  const auto table = calibrate(fixtures::four_samples(), "clf", BinningSpec::distinct_values());
  const auto j = table.to_json();
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  const std::vector<std::string> expected{"classifier_id", "R",       "I_C", "E_hat", "binning", "clamped", "entries",
                                          "out_of_range_policy", "degenerate"};
  CHECK(keys == expected);
  std::vector<std::string> entry_keys;
  for (const auto& [k, v] : j["entries"][0].items()) entry_keys.push_back(k);
  CHECK(entry_keys == std::vector<std::string>{"bin_lo", "bin_hi", "representative", "p_hat", "k_new"});

  const auto back = CalibrationTable::from_json(nlohmann::json::parse(j.dump()));
  CHECK(back == table);

  auto broken = nlohmann::json::parse(j.dump());
  broken["entries"][0]["k_new"] = 99.0;
  CHECK_THROWS_AS(CalibrationTable::from_json(broken), InputError);
  CHECK_THROWS_AS(CalibrationTable::from_json(nlohmann::json::object()), InputError);
}

TEST_CASE("binning") {
  CHECK(BinningSpec::parse("auto").kind == BinningSpec::Kind::kAuto);
  CHECK(BinningSpec::parse("distinct-values").kind == BinningSpec::Kind::kDistinctValues);
  const auto q = BinningSpec::parse("equal-frequency(16)");
  CHECK(q.kind == BinningSpec::Kind::kEqualFrequency);
  CHECK(q.bins == 16);
  CHECK(q.describe() == "equal-frequency(16)");
  CHECK_THROWS_AS(BinningSpec::parse("equal-frequency(0)"), InputError);
  CHECK_THROWS_AS(BinningSpec::parse("bogus"), InputError);

  const auto eval = fixtures::random_single(3, 5000);
  const auto eq = estimate_performance(eval, "clf", BinningSpec::equal_frequency(16));
  CHECK(eq.entries.size() <= 16);
  CHECK(eq.entries.size() >= 15);
  CHECK(eq.binning == "equal-frequency(16)");
  // bins are half-open and contiguous, representatives inside
  for (std::size_t i = 0; i < eq.entries.size(); ++i) {
    const auto& k = eq.entries[i].key;
    CHECK(k.bin_lo <= k.representative);
    CHECK(k.representative <= k.bin_hi);
    if (i > 0) CHECK(k.bin_lo == eq.entries[i - 1].key.bin_hi);
  }
  CHECK(eq.entries.back().p_hat == recognition_rate(eval, "clf"));

  CHECK(estimate_performance(fixtures::random_single(5, 3000), "clf").binning == "distinct-values");
  const auto big = fixtures::random_single(4, 5000 + BinningSpec::kAutoDistinctLimit);
  CHECK(estimate_performance(big, "clf").binning == "equal-frequency(1024)");
}

TEST_CASE("randomized calibration properties") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    CAPTURE(seed);
    const bool ties = seed % 4 == 0;
    const auto eval = fixtures::random_single(seed, 20 + seed * 3, ties);
    const auto perf = estimate_performance(eval, "clf");
    const auto table = calibrate(eval, "clf");

    CHECK(perf.entries.back().p_hat == recognition_rate(eval, "clf"));
    for (std::size_t i = 1; i < table.entries.size(); ++i) {
      CHECK(table.entries[i].representative > table.entries[i - 1].representative);
      CHECK(table.entries[i].k_new >= table.entries[i - 1].k_new);
      CHECK(perf.entries[i].p_hat >= perf.entries[i - 1].p_hat);
    }
    for (const auto& e : table.entries) {
      CHECK(std::isfinite(e.k_new));
      CHECK(e.k_new >= 0.0);
    }

    for (const auto& out : eval.outputs()) {
      const auto applied = apply_table(table, out);
      CHECK(applied.ranking.front().label == out.ranking.front().label);
      validate_ranking(applied);
    }

    const auto idem = idempotence_check(eval, "clf");
    CHECK(idem.passed);
    CHECK(idem.max_abs_diff <= 1e-9);
  }
}

TEST_CASE("idempotence on the fixed sets") {
  const auto four = idempotence_check(fixtures::four_samples(), "clf", BinningSpec::distinct_values());
  CHECK(four.passed);
  CHECK(four.merged_ties == 1);

  const auto same = fixtures::single_classifier({{0.3, true}, {0.3, false}, {0.3, true}});
  const auto one = idempotence_check(same, "clf");
  CHECK(one.passed);
  CHECK(one.first_pass_bins == 1);

  CHECK(idempotence_check(fixtures::random_single(42, 200), "clf").passed);
}

TEST_CASE("evaluation CSV") {
  const std::string good =
      "sample_id,true_label,classifier_id,rank,label,confidence\n"
      "s1,A,c,1,A,0.9\n"
      "s1,A,c,2,B,0.5\n"
      "s1,A,c,3,C,0.1\n";
  std::istringstream in(good);
  const auto eval = read_evaluation_csv(in);
  CHECK(eval.samples().size() == 1);
  REQUIRE(eval.outputs().size() == 1);
  CHECK(eval.outputs()[0].ranking.size() == 3);

  std::ostringstream out;
  write_evaluation_csv(eval, out);
  std::istringstream again(out.str());
  CHECK(read_evaluation_csv(again) == eval);

  auto error_of = [](const std::string& text) {
    std::istringstream s(text);
    try {
      read_evaluation_csv(s);
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  const std::string header = "sample_id,true_label,classifier_id,rank,label,confidence\n";
  CHECK(error_of(header + "s1,A,c,1,A,0.9\ns1,A,c,3,B,0.5\n").find("line 3") != std::string::npos);
  CHECK(error_of(header + "s1,A,c,1,A,0.9\ns1,A,c,3,B,0.5\n").find("gap") != std::string::npos);
  CHECK(error_of(header + "s1,A,c,1,A,0.9\ns1,A,c,1,B,0.5\n").find("duplicate rank") != std::string::npos);
  CHECK(error_of("a,b,c\n").find("header") != std::string::npos);
  CHECK(error_of("").find("header") != std::string::npos);
  CHECK(error_of(header + "s1,A,c,1,A\n").find("6 fields") != std::string::npos);
  CHECK(error_of(header + "s1,A,c,1,A,abc\n").find("line 2") != std::string::npos);
  CHECK(error_of(header + "s1,A,c,1,A,0.9\ns1,A,d,1,A,0.9\ns1,A,c,2,B,0.5\n").find("contiguous") !=
        std::string::npos);
  CHECK(error_of(header + "s1,A,c,1,A,0.9\ns1,B,d,1,A,0.9\n").find("true_label") != std::string::npos);
  CHECK(error_of(header + "s1,A,c,1,A,0.5\ns1,A,c,2,B,0.9\n").find("increases") != std::string::npos);
  CHECK(error_of(header + "s1,A,c,1,A,0.9\ns1,A,c,2,A,0.5\n").find("duplicate label") != std::string::npos);
  CHECK(error_of(header + "s1,A,c,0,A,0.9\n").find("positive") != std::string::npos);
}
