#include "infoconf/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include "CLI11.hpp"
#include "infoconf/calibration.hpp"
#include "infoconf/entropy.hpp"
#include "infoconf/error.hpp"
#include "infoconf/fusion.hpp"
#include "infoconf/harness.hpp"
#include "infoconf/infonet.hpp"
#include "infoconf/numfmt.hpp"
#include "infoconf/plots.hpp"
#include "json.hpp"

namespace infoconf::cli {
namespace {

namespace fs = std::filesystem;

struct Globals {
  std::uint64_t seed = 42;
  bool quiet = false;
  bool json_errors = false;
};

/// Prefixes messages with the pipeline stage, keeping the error type.
template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  const std::string p = std::string(name) + ": ";
  try {
    return f();
  } catch (const PolicyError& e) {
    throw PolicyError(p + e.what());
  } catch (const DomainError& e) {
    throw DomainError(p + e.what());
  } catch (const InputError& e) {
    throw InputError(p + e.what());
  } catch (const Error& e) {
    throw Error(p + e.what());
  }
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("input not found: " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string pct(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%8.2f", 100.0 * rate);
  return buf;
}

void print_rates_table(const FusionReport& r, std::ostream& out) {
  char head[64];
  std::snprintf(head, sizeof head, "%-24s", "recognition rate (%)");
  out << head;
  for (std::size_t n = 1; n <= r.n_max; ++n) out << "    top" << n;
  out << '\n';
  auto row = [&](const std::string& name, const std::vector<double>& rates) {
    char lbl[64];
    std::snprintf(lbl, sizeof lbl, "%-24s", name.c_str());
    out << lbl;
    for (double v : rates) out << pct(v);
    out << '\n';
  };
  for (const auto& id : r.classifiers) row(id, r.individual.at(id));
  row("AND", r.and_rate);
  row("OR", r.or_rate);
  for (const auto& [rule, rates] : r.combined) {
    row(std::string(to_string(rule)) + " (raw)", rates.raw);
    if (!rates.informational.empty()) row(std::string(to_string(rule)) + " (informational)", rates.informational);
  }
  if (r.infonet) {
    out << "infonet top1 " << pct(r.infonet->top1) << "  calibrated sum top1 " << pct(r.infonet->calibrated_sum_top1)
        << "  delta " << pct(r.infonet->delta) << '\n';
  }
}

// --- calibrate ---------------------------------------------------------------

struct CalibrateArgs {
  std::string input;
  std::string classifier;
  std::string binning = "auto";
  std::string out_of_range = "clamp_to_endpoint";
  bool allow_degenerate = false;
  std::string output;
};

int cmd_calibrate(const CalibrateArgs& a, const Globals& g, std::ostream& out) {
  const auto eval = stage("ingest", [&] { return ingest(a.input); });
  const auto table = stage("calibrate", [&] {
    std::string id = a.classifier;
    if (id.empty()) {
      if (eval.classifier_ids().size() != 1) {
        throw InputError("input has " + std::to_string(eval.classifier_ids().size()) +
                         " classifiers, choose one with --classifier");
      }
      id = eval.classifier_ids().front();
    }
    BuildOptions options;
    options.allow_degenerate = a.allow_degenerate;
    options.out_of_range = parse_out_of_range_policy(a.out_of_range);
    return calibrate(eval, id, BinningSpec::parse(a.binning), options);
  });
  if (!a.output.empty()) stage("write", [&] { write_json(a.output, table.to_json()); });
  if (!g.quiet) {
    out << "classifier " << table.classifier_id << '\n'
        << "R " << format_double(table.r) << '\n'
        << "I_C " << format_double(table.i_c) << '\n'
        << "E_hat " << format_double(table.e_hat) << '\n'
        << "entries " << table.entries.size() << '\n';
    if (table.clamped) out << "clamped yes\n";
  }
  return kExitOk;
}

// --- fuse --------------------------------------------------------------------

struct FuseArgs {
  std::string input;
  std::vector<std::string> tables;
  std::string rules = "sum,max,product";
  std::size_t n_max = 3;
  bool calibrated = false;
  bool infonet = false;
  std::string report;
};

int cmd_fuse(const FuseArgs& a, const Globals& g, std::ostream& out) {
  const auto eval = stage("ingest", [&] { return ingest(a.input); });
  const auto rules = stage("rules", [&] { return parse_fusion_rules(a.rules); });
  TableMap tables;
  stage("tables", [&] {
    for (const auto& path : a.tables) {
      auto t = CalibrationTable::from_json(read_json(path));
      const std::string id = t.classifier_id;
      if (!tables.emplace(id, std::move(t)).second) throw InputError("two tables for classifier '" + id + "'");
    }
  });
  const bool use_tables = a.calibrated || a.infonet || !a.tables.empty();
  const auto report = stage("evaluate", [&] {
    if (a.infonet) return single_layer_fuse(eval, tables, rules, a.n_max);
    return evaluate(eval, use_tables ? &tables : nullptr, rules, a.n_max);
  });
  if (!a.report.empty()) stage("write", [&] { write_json(a.report, report.to_json()); });
  if (!g.quiet) print_rates_table(report, out);
  return kExitOk;
}

// --- simulate ----------------------------------------------------------------

struct SimulateArgs {
  std::string spec_path;
  std::string output_dir;
  std::optional<std::size_t> classifiers;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> classes;
  std::optional<std::size_t> n_best;
  std::optional<double> correlation;
  std::string binning = "auto";
  bool no_infonet = false;
  bool allow_degenerate = false;
};

SyntheticSpec build_spec(const SimulateArgs& a, const Globals& g) {
  SyntheticSpec spec = a.spec_path.empty() ? default_spec(g.seed) : SyntheticSpec::from_json(read_json(a.spec_path));
  if (a.classifiers) {
    const std::size_t k = *a.classifiers;
    if (k < 1 || k > 8) throw InputError("--classifiers must lie in [1, 8]");
    while (spec.classifiers.size() < k) {
      const auto n = spec.classifiers.size() + 1;
      spec.classifiers.push_back({"extra" + std::to_string(n), 0.85, ConfidenceModel::kUniform, 1.0, 0.4});
    }
    spec.classifiers.resize(k);
  }
  if (a.samples) spec.n_samples = *a.samples;
  if (a.classes) spec.n_classes = *a.classes;
  if (a.n_best) spec.n_best = *a.n_best;
  if (a.correlation) {
    for (std::size_t i = 1; i < spec.classifiers.size(); ++i) spec.classifiers[i].correlation = *a.correlation;
    if (spec.classifiers.size() == 1) spec.classifiers[0].correlation = *a.correlation;
  }
  spec.validate();
  return spec;
}

int cmd_simulate(const SimulateArgs& a, const Globals& g, std::ostream& out) {
  ExperimentConfig config;
  const auto spec = stage("spec", [&] { return build_spec(a, g); });
  config.source = spec;
  config.split_seed = g.seed;
  config.binning = stage("spec", [&] { return BinningSpec::parse(a.binning); });
  config.run_infonet = !a.no_infonet;
  config.allow_degenerate = a.allow_degenerate;

  const auto eval = stage("generate", [&] { return generate(spec); });
  const auto report = run_experiment(config, eval);

  stage("write", [&] {
    const fs::path dir(a.output_dir);
    fs::create_directories(dir / "tables");
    {
      auto csv = open_output(dir / "evaluation.csv");
      write_evaluation_csv(eval, csv);
    }
    for (const auto& [id, table] : report.tables) write_json(dir / "tables" / (id + ".json"), table.to_json());
    write_json(dir / "report.json", report.to_json());
  });
  if (!g.quiet) {
    out << "seed " << spec.seed << ", " << report.calibration_samples << " calibration / " << report.test_samples
        << " test samples\n";
    print_rates_table(report.fusion, out);
  }
  return kExitOk;
}

// --- plot --------------------------------------------------------------------

struct PlotArgs {
  std::string figure;
  std::string output;
  PlotOptions options;
  std::vector<double> lambdas;
  std::vector<double> expectations;
};

int cmd_plot(const PlotArgs& a, const Globals& g, std::ostream& out) {
  PlotOptions options = a.options;
  if (!a.lambdas.empty()) options.lambdas = a.lambdas;
  if (!a.expectations.empty()) options.expectations = a.expectations;
  const auto series = stage("plot", [&] { return make_plot(a.figure, options); });
  if (a.output.empty() || a.output == "-") {
    series.write_csv(out);
    return kExitOk;
  }
  stage("write", [&] {
    auto file = open_output(a.output);
    series.write_csv(file);
  });
  if (!g.quiet) out << series.name << ": " << series.rows.size() << " rows -> " << a.output << '\n';
  return kExitOk;
}

// --- goldencheck -------------------------------------------------------------

int cmd_goldencheck(double tolerance, const Globals& g, std::ostream& out, std::ostream& err) {
  const auto [pos, neg] = golden_ratio_roots();
  const auto [pos_n, neg_n] = golden_ratio_roots_numeric();
  const double phi = golden_ratio();
  const auto spiral = spiral_params(phi);
  const double perception = perception_correction(observed_performance(0.5));

  struct Check {
    const char* name;
    double lhs;
    double rhs;
  };
  const Check checks[] = {
      {"positive root, fixed point vs closed form", pos_n, pos},
      {"negative root, Newton vs closed form", neg_n, neg},
      {"positive root solves p^2 + p - 1 = 0", pos * pos + pos, 1.0},
      {"net_force_self(g) = force_b(g, g)", net_force_self(pos), force_b(pos, pos)},
      {"spiral a = b at phi", spiral.a, spiral.b},
      {"perception 1/(1 + sqrt(0.5))", perception, 1.0 / (1.0 + 1.0 / std::sqrt(2.0))},
  };

  char buf[64];
  if (!g.quiet) {
    std::snprintf(buf, sizeof buf, "%.10f %.10f", pos, neg);
    out << "golden roots " << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.10f", perception);
    out << "perception " << buf << '\n';
  }
  int failures = 0;
  for (const auto& c : checks) {
    const double diff = std::abs(c.lhs - c.rhs);
    const bool ok = diff <= tolerance;
    if (!ok) ++failures;
    if (ok && g.quiet) continue;
    auto& stream = ok ? out : err;
    std::snprintf(buf, sizeof buf, "%.3e", diff);
    stream << (ok ? "ok   " : "FAIL ") << c.name << " lhs=" << format_double(c.lhs) << " rhs=" << format_double(c.rhs)
           << " |diff|=" << buf << '\n';
  }
  return failures == 0 ? kExitOk : kExitCheckFailed;
}

void report_error(const Globals& g, std::ostream& err, const char* type, const std::string& msg, int code) {
  if (g.json_errors) {
    nlohmann::ordered_json j;
    j["error"] = {{"type", type}, {"message", msg}, {"exit_code", code}};
    err << j.dump() << '\n';
  } else {
    err << "error: " << msg << '\n';
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Informational confidence calibration and classifier fusion", "infoconf"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Seed for synthetic data and splits");
  app.add_flag("--quiet", g.quiet, "Only write files and errors");
  app.add_flag("--json-errors", g.json_errors, "Report errors as one JSON line");

  CalibrateArgs ca;
  auto* cal = app.add_subcommand("calibrate", "Learn a calibration table from an evaluation CSV");
  cal->add_option("input", ca.input, "Evaluation CSV")->required();
  cal->add_option("-c,--classifier", ca.classifier, "Classifier id (optional for single-classifier input)");
  cal->add_option("-b,--binning", ca.binning, "auto | distinct-values | equal-frequency(q)");
  cal->add_option("--out-of-range", ca.out_of_range, "clamp_to_endpoint | reject");
  cal->add_flag("--allow-degenerate", ca.allow_degenerate, "Accept a recognition rate of 0 or 1");
  cal->add_option("-o,--output", ca.output, "Table JSON path");

  FuseArgs fa;
  auto* fu = app.add_subcommand("fuse", "Score classifiers and their combinations");
  fu->add_option("input", fa.input, "Evaluation CSV")->required();
  fu->add_option("-t,--table", fa.tables, "Calibration table JSON (repeatable)");
  fu->add_option("-r,--rules", fa.rules, "Comma separated: sum,max,product");
  fu->add_option("-n,--n-max", fa.n_max, "Largest n of the n-best rates")->check(CLI::PositiveNumber);
  fu->add_flag("--calibrated", fa.calibrated, "Also score calibrated confidences (tables required)");
  fu->add_flag("--infonet", fa.infonet, "Add the information network result");
  fu->add_option("-o,--report", fa.report, "Report JSON path");

  SimulateArgs sa;
  auto* si = app.add_subcommand("simulate", "Run the synthetic experiment");
  si->add_option("-o,--output-dir", sa.output_dir, "Directory for CSV, tables and report")->required();
  si->add_option("--spec", sa.spec_path, "Synthetic spec JSON");
  si->add_option("--classifiers", sa.classifiers, "Number of classifiers");
  si->add_option("--samples", sa.samples, "Number of samples");
  si->add_option("--classes", sa.classes, "Number of classes");
  si->add_option("--n-best", sa.n_best, "Ranking length");
  si->add_option("--correlation", sa.correlation, "Error correlation with the first classifier");
  si->add_option("-b,--binning", sa.binning, "auto | distinct-values | equal-frequency(q)");
  si->add_flag("--no-infonet", sa.no_infonet, "Skip the information network");
  si->add_flag("--allow-degenerate", sa.allow_degenerate, "Accept a recognition rate of 0 or 1");

  PlotArgs pa;
  auto* pl = app.add_subcommand("plot", "Write figure data as CSV");
  pl->add_option("figure", pa.figure, "exp-density | exp-distribution | sigmoid | net-force | spirals | universe")
      ->required();
  pl->add_option("-o,--output", pa.output, "CSV path, '-' for stdout");
  pl->add_option("--grid", pa.options.grid, "Points per curve");
  pl->add_option("--lambda", pa.lambdas, "Rates of the exponential curves (repeatable)");
  pl->add_option("--expectation", pa.expectations, "Expectations of the sigmoid curves (repeatable)");
  pl->add_option("--k-limit", pa.options.k_limit, "Sigmoid K range");
  pl->add_option("--x-max", pa.options.x_max, "Exponential x range");
  pl->add_option("--inset", pa.options.inset, "Distance of performance grids from 0 and 1");

  double tolerance = 1e-10;
  auto* gc = app.add_subcommand("goldencheck", "Check the golden-ratio and perception identities");
  gc->add_option("--tolerance", tolerance, "Absolute tolerance");

  std::vector<std::string> argv_store{"infoconf"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(g, err, "usage", e.what(), kExitInput);
    return kExitInput;
  }

  try {
    if (cal->parsed()) return cmd_calibrate(ca, g, out);
    if (fu->parsed()) return cmd_fuse(fa, g, out);
    if (si->parsed()) return cmd_simulate(sa, g, out);
    if (pl->parsed()) return cmd_plot(pa, g, out);
    if (gc->parsed()) return cmd_goldencheck(tolerance, g, out, err);
  } catch (const PolicyError& e) {
    report_error(g, err, "policy", e.what(), kExitPolicy);
    return kExitPolicy;
  } catch (const InputError& e) {
    report_error(g, err, "input", e.what(), kExitInput);
    return kExitInput;
  } catch (const DomainError& e) {
    report_error(g, err, "domain", e.what(), kExitInput);
    return kExitInput;
  } catch (const Error& e) {
    report_error(g, err, "error", e.what(), kExitInput);
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    report_error(g, err, "input", e.what(), kExitInput);
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace infoconf::cli
