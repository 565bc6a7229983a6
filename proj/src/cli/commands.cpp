#include "hmpf/cli.hpp"

#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "hmpf/config.hpp"
#include "hmpf/dataset.hpp"
#include "hmpf/evaluation.hpp"
#include "hmpf/feature_file.hpp"
#include "hmpf/gist.hpp"
#include "hmpf/hog.hpp"
#include "hmpf/synthetic.hpp"

namespace hmpf {
namespace {

namespace fs = std::filesystem;

struct ExtractArgs {
  std::string manifest;
  std::string method;
  int cell_px = 30;
  std::string list = "reference";
  std::string out;
};

struct RunArgs {
  std::string manifest;
  std::string config;
  std::string out;
  std::size_t workers = 1;
};

struct EvalArgs {
  std::string manifest;
  std::string config;
  std::string out;
  std::string curves;
  std::string n_values = "1,5,10,20";
  std::string label = "experiment";
  std::size_t workers = 1;
};

struct SweepArgs {
  std::string manifest;
  std::string config;
  std::string out;
  std::vector<std::string> schedules;
  std::string label = "sweep";
  std::size_t workers = 1;
};

struct SynthArgs {
  std::string out;
  SyntheticSpec spec;
};

std::vector<std::size_t> parse_n_values(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    CandidateCount count;
    try {
      count = parse_count(item);
    } catch (const Error&) {
    }
    if (!count) {
      fail(ErrorCategory::kUsage, "--n-values takes positive integers, got '" + item + "'");
    }
    out.push_back(*count);
  }
  if (out.empty()) fail(ErrorCategory::kUsage, "--n-values is empty");
  return out;
}

void cmd_extract(const ExtractArgs& a, std::ostream& out) {
  if (a.method != "hog" && a.method != "gist") {
    fail(ErrorCategory::kUsage,
         "extract supports --method hog or gist, not '" + a.method + "'");
  }
  if (a.list != "reference" && a.list != "query") {
    fail(ErrorCategory::kUsage, "--list must be 'reference' or 'query'");
  }
  if (a.cell_px <= 0) fail(ErrorCategory::kUsage, "--cell-px must be positive");
  const auto images = load_image_list(a.manifest, a.list);
  if (images.empty()) {
    fail(ErrorCategory::kUsage, "manifest " + a.manifest + " lists no " + a.list + " images");
  }
  HogParams hog;
  hog.cell_px = a.cell_px;
  std::vector<FeatureVector> features;
  features.reserve(images.size());
  for (const auto& path : images) {
    const GrayImage image = load_gray_image(path);
    features.push_back(a.method == "hog" ? compute_hog(image, hog) : compute_gist(image));
  }
  save_feature_file(a.out, features);
  out << "wrote " << features.size() << " x " << features.front().dim() << " " << a.method
      << " features to " << a.out << "\n";
}

void print_report(std::ostream& out, const ExperimentReport& r) {
  out << r.label << " [" << r.schedule << "]";
  for (const auto& m : r.method_recalls) {
    out << " t" << m.tier << ":" << m.method << "=" << m.recall_at_1;
  }
  out << " final=" << r.final_recall_at_1;
  if (r.combined_recall_at_1) out << " combined=" << *r.combined_recall_at_1;
  out << " s/query=" << r.mean_seconds_per_query << "\n";
}

void cmd_run(const RunArgs& a, std::ostream& out) {
  const Dataset dataset = load_dataset(a.manifest);
  const PipelineConfig config = load_config(a.config);
  const Pipeline pipeline = Pipeline::bind(config, dataset);
  const GroundTruthOracle oracle(dataset);
  const auto results = run_all_queries(pipeline, a.workers);
  write_results_csv(a.out, pipeline.config(), results, oracle);
  print_report(out, summarize(pipeline, results, oracle, "run"));
}

void cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto n_values = parse_n_values(a.n_values);
  const Dataset dataset = load_dataset(a.manifest);
  const PipelineConfig config = load_config(a.config);
  const Pipeline pipeline = Pipeline::bind(config, dataset);
  const GroundTruthOracle oracle(dataset);
  const auto results = run_all_queries(pipeline, a.workers);
  const ExperimentReport report = summarize(pipeline, results, oracle, a.label);
  write_report_csv(a.out, std::span(&report, 1));
  if (!a.curves.empty()) {
    write_curves_csv(a.curves, recall_curves(pipeline, results, oracle, n_values));
  }
  print_report(out, report);
}

void cmd_sweep(const SweepArgs& a, std::ostream& out) {
  const PipelineConfig config = load_config(a.config);
  std::vector<std::vector<CandidateCount>> schedules;
  for (const auto& text : a.schedules) {
    try {
      schedules.push_back(parse_schedule(text));
      with_schedule(config, schedules.back());
    } catch (const Error& e) {
      fail(ErrorCategory::kUsage, "--k-schedule " + text + ": " + e.what());
    }
  }
  const Dataset dataset = load_dataset(a.manifest);
  ExperimentOptions options;
  options.workers = a.workers;
  options.label = a.label;
  const auto reports = run_sweep(dataset, config, schedules, options);
  write_report_csv(a.out, reports);
  for (const auto& r : reports) print_report(out, r);
}

void cmd_synth(const SynthArgs& a, std::ostream& out) {
  const SyntheticBenchmark bench = generate_synthetic_benchmark(a.spec);
  write_synthetic_benchmark(bench, a.out);
  std::size_t hard = 0;
  std::size_t aliased = 0;
  for (const QueryCase c : bench.cases) {
    hard += c == QueryCase::kHard;
    aliased += c == QueryCase::kAliased;
  }
  out << "wrote synthetic benchmark to " << a.out << " (" << a.spec.reference_count
      << " references, " << a.spec.query_count << " queries, " << a.spec.method_count
      << " methods, " << aliased << " aliased, " << hard << " hard)\n";
}

void add_workers(CLI::App* cmd, std::size_t& workers) {
  cmd->add_option("--workers", workers, "Queries evaluated concurrently")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical multi-process fusion for visual place recognition", "hmpf"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hmpf 1.0.0");

  ExtractArgs extract;
  auto* ex = app.add_subcommand("extract", "Compute HOG or Gist features for a manifest list");
  ex->add_option("--manifest", extract.manifest, "Dataset manifest")->required();
  ex->add_option("--method", extract.method, "hog | gist")->required();
  ex->add_option("--cell-px", extract.cell_px, "HOG cell size in pixels");
  ex->add_option("--list", extract.list, "reference | query");
  ex->add_option("--out", extract.out, "Output HMPF1 file")->required();

  RunArgs run;
  auto* rn = app.add_subcommand("run", "Match every query and write per-query results");
  rn->add_option("--manifest", run.manifest, "Dataset manifest")->required();
  rn->add_option("--config", run.config, "Pipeline config")->required();
  rn->add_option("--out", run.out, "Results CSV")->required();
  add_workers(rn, run.workers);

  EvalArgs eval;
  auto* ev = app.add_subcommand("eval", "Recall@1 report and Recall@N curves");
  ev->add_option("--manifest", eval.manifest, "Dataset manifest")->required();
  ev->add_option("--config", eval.config, "Pipeline config")->required();
  ev->add_option("--out", eval.out, "Report CSV")->required();
  ev->add_option("--curves", eval.curves, "Recall@N curve CSV");
  ev->add_option("--n-values", eval.n_values, "Comma-separated ascending N");
  ev->add_option("--label", eval.label, "Experiment label");
  add_workers(ev, eval.workers);

  SweepArgs sweep;
  auto* sw = app.add_subcommand("sweep", "One report row set per candidate-count schedule");
  sw->add_option("--manifest", sweep.manifest, "Dataset manifest")->required();
  sw->add_option("--config", sweep.config, "Pipeline config")->required();
  sw->add_option("--k-schedule", sweep.schedules, "Per-tier k list, e.g. 50,10,all")
      ->required();
  sw->add_option("--out", sweep.out, "Sweep CSV")->required();
  sw->add_option("--label", sweep.label, "Experiment label");
  add_workers(sw, sweep.workers);

  SynthArgs synth;
  auto* sy = app.add_subcommand("synth", "Generate the seeded synthetic benchmark");
  sy->add_option("--out", synth.out, "Output directory")->required();
  sy->add_option("--seed", synth.spec.seed, "Generator seed");
  sy->add_option("--refs", synth.spec.reference_count, "Reference images");
  sy->add_option("--queries", synth.spec.query_count, "Query images");
  sy->add_option("--methods", synth.spec.method_count, "Methods (one per tier)");
  sy->add_option("--distractors", synth.spec.distractors, "Aliased distractors per method");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << category_name(ErrorCategory::kUsage) << ": " << e.what() << "\n";
    return exit_code(ErrorCategory::kUsage);
  }

  try {
    if (*ex) cmd_extract(extract, out);
    if (*rn) cmd_run(run, out);
    if (*ev) cmd_eval(eval, out);
    if (*sw) cmd_sweep(sweep, out);
    if (*sy) cmd_synth(synth, out);
  } catch (const Error& e) {
    err << "error: " << category_name(e.category()) << ": " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    err << "error: " << category_name(ErrorCategory::kInternal) << ": " << e.what() << "\n";
    return exit_code(ErrorCategory::kInternal);
  }
  return 0;
}

}  // namespace hmpf
