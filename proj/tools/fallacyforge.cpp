// fallacyforge — one binary binding the variant generator, the evaluation
// harness, the report renderer, and the dual-objective trainer.
//
// Exit codes: 0 success, 1 property violation (experiment separation failed,
// training diverged), 2 input error (bad files, flags, or config), 3 fatal
// I/O (run log or artifact unwritable).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ff/corpus.hpp"
#include "ff/errors.hpp"
#include "ff/eval.hpp"
#include "ff/logic.hpp"
#include "ff/manifest.hpp"
#include "ff/metrics.hpp"
#include "ff/trainer.hpp"
#include "ff/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPropertyViolation = 1;
constexpr int kExitInputError = 2;
constexpr int kExitIoFatal = 3;

struct GlobalFlags {
  std::optional<std::uint64_t> seed;  // overrides config seeds when given
  bool quiet = false;
};

std::ostream& info(const GlobalFlags& flags) {
  static std::ofstream devnull;  // never opened: a stream that swallows writes
  return flags.quiet ? static_cast<std::ostream&>(devnull) : std::cout;
}

ff::NegationStyle parse_negation_style(const std::string& name) {
  if (name == "no") return ff::NegationStyle::kPrefixNo;
  if (name == "not") return ff::NegationStyle::kPrefixNot;
  throw ff::Error("unknown negation style '" + name + "' (expected no|not)");
}

ff::PromptTemplate parse_template(const std::string& name) {
  if (name == "standard") return ff::PromptTemplate::standard();
  if (name == "bare") return ff::PromptTemplate::bare();
  throw ff::Error("unknown prompt template '" + name + "' (expected standard|bare)");
}

std::vector<ff::LogicalRule> parse_rule_list(const std::string& csv) {
  std::vector<ff::LogicalRule> rules;
  std::string token;
  std::istringstream stream(csv);
  while (std::getline(stream, token, ',')) {
    if (token.empty()) continue;
    const auto rule = ff::rule_from_code(token);
    if (!rule) throw ff::Error("unknown rule code '" + token + "'");
    rules.push_back(*rule);
  }
  if (rules.empty()) throw ff::Error("no rule codes given");
  return rules;
}

void ensure_parent_dir(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ff::IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw ff::IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// variants: expand a corpus into the eight-rule prompt set
// ---------------------------------------------------------------------------
struct VariantsArgs {
  std::string corpus_path;
  std::string out_path;
  std::string rules_csv = "PQ,PnQ,nPQ,nPnQ,QP,QnP,nQP,nQnP";
  std::string negation_style = "no";
  std::string prompt_template = "standard";
};

int cmd_variants(const VariantsArgs& args, const GlobalFlags& flags) {
  const auto statements = ff::load_corpus(args.corpus_path);
  const auto rules = parse_rule_list(args.rules_csv);
  const auto records = ff::expand_corpus(statements, rules, parse_negation_style(args.negation_style),
                                         parse_template(args.prompt_template));
  ensure_parent_dir(args.out_path);
  ff::save_prompts(records, args.out_path);

  nlohmann::ordered_json config;
  config["corpus"] = args.corpus_path;
  config["out"] = args.out_path;
  config["rules"] = args.rules_csv;
  config["negation_style"] = args.negation_style;
  config["template"] = args.prompt_template;
  ff::write_manifest(ff::make_manifest("variants", config, ff::file_checksum(args.corpus_path)),
                     args.out_path);

  info(flags) << "wrote " << records.size() << " prompts (" << statements.size()
              << " statements x " << rules.size() << " rules) to " << args.out_path << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// import-corpus: plain-text "A implies B" lines -> corpus JSONL
// ---------------------------------------------------------------------------
struct ImportArgs {
  std::string in_path;
  std::string out_path;
  std::string domain = "other";
  std::string id_prefix = "s";
};

int cmd_import_corpus(const ImportArgs& args, const GlobalFlags& flags) {
  const auto statements =
      ff::import_plain_text(args.in_path, ff::Domain::from_string(args.domain), args.id_prefix);
  ensure_parent_dir(args.out_path);
  ff::save_corpus(statements, args.out_path);

  nlohmann::ordered_json config;
  config["in"] = args.in_path;
  config["out"] = args.out_path;
  config["domain"] = args.domain;
  config["id_prefix"] = args.id_prefix;
  ff::write_manifest(ff::make_manifest("import-corpus", config, ff::file_checksum(args.in_path)),
                     args.out_path);

  info(flags) << "imported " << statements.size() << " statements to " << args.out_path << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval: resumable judgment collection against configured endpoints
// ---------------------------------------------------------------------------
struct EvalArgs {
  std::string corpus_path;
  std::string endpoints_path;
  std::string log_path;
  int concurrency = 4;
  std::string rules_csv = "PQ,PnQ,nPQ,nPnQ,QP,QnP,nQP,nQnP";
  std::string negation_style = "no";
  std::string prompt_template = "standard";
};

int cmd_eval(const EvalArgs& args, const GlobalFlags& flags) {
  const auto statements = ff::load_corpus(args.corpus_path);
  const auto endpoints = ff::load_endpoints(args.endpoints_path);
  const auto rules = parse_rule_list(args.rules_csv);

  ff::RunOptions options;
  options.concurrency_limit = args.concurrency;
  options.negation_style = parse_negation_style(args.negation_style);
  options.prompt_template = parse_template(args.prompt_template);

  ensure_parent_dir(args.log_path);
  const ff::RunSummary summary =
      ff::run_evaluation(statements, rules, endpoints, args.log_path, options);

  nlohmann::ordered_json config;
  config["corpus"] = args.corpus_path;
  config["endpoints"] = args.endpoints_path;
  config["log"] = args.log_path;
  config["concurrency"] = args.concurrency;
  config["rules"] = args.rules_csv;
  config["negation_style"] = args.negation_style;
  config["template"] = args.prompt_template;
  ff::write_manifest(ff::make_manifest("eval", config, ff::file_checksum(args.corpus_path)),
                     args.log_path);

  ff::VerdictCounts totals;
  for (const auto& [key, counts] : summary.counts) {
    totals.true_count += counts.true_count;
    totals.false_count += counts.false_count;
    totals.unparseable_count += counts.unparseable_count;
  }
  info(flags) << summary.planned << " judgments planned; " << summary.new_queries
              << " new queries\n"
              << "TRUE " << totals.true_count << ", FALSE " << totals.false_count
              << ", UNPARSEABLE " << totals.unparseable_count << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// report: aggregate a judgment log into a fraction/error table
// ---------------------------------------------------------------------------
struct ReportArgs {
  std::string log_path;
  std::string format = "markdown";
  std::string golden;  // empty, "medical", or "environmental"
  std::string out_path;  // empty -> standard output
};

int cmd_report(const ReportArgs& args, const GlobalFlags& flags) {
  const auto log = ff::load_judgment_log(args.log_path);
  ff::ResultTable table = ff::compute_fractions(log);
  try {
    table.error = ff::compute_error_column(table);
  } catch (const ff::UndefinedCellError& ex) {
    std::cerr << "warning: error column omitted: " << ex.what() << "\n";
  }

  ff::TableFormat format;
  if (args.format == "markdown") {
    format = ff::TableFormat::kMarkdown;
  } else if (args.format == "csv") {
    format = ff::TableFormat::kCsv;
  } else {
    throw ff::Error("unknown format '" + args.format + "' (expected markdown|csv)");
  }

  std::string text = ff::render_table(table, format);
  if (!args.golden.empty()) {
    text += "\n";
    text += ff::golden_report(ff::golden_table(args.golden));
  }

  if (args.out_path.empty()) {
    std::cout << text;
  } else {
    write_text_file(args.out_path, text);
    nlohmann::ordered_json config;
    config["log"] = args.log_path;
    config["format"] = args.format;
    config["golden"] = args.golden;
    config["out"] = args.out_path;
    ff::write_manifest(ff::make_manifest("report", config, ff::file_checksum(args.log_path)),
                       args.out_path);
    info(flags) << "wrote report to " << args.out_path << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train / experiment: the dual-objective trainer
// ---------------------------------------------------------------------------
struct TrainArgs {
  std::string config_path;  // empty -> defaults
  std::string corpus_path;  // empty -> synthesized pairs
  int pairs = 20;
  std::string out_path;  // optional trace CSV
};

ff::TrainConfig effective_train_config(const std::string& config_path, const GlobalFlags& flags) {
  ff::TrainConfig config;
  if (!config_path.empty()) config = ff::load_train_config(config_path);
  if (flags.seed) config.seed = *flags.seed;
  config.validate();
  return config;
}

ff::ToyDataset dataset_for(const TrainArgs& args, const ff::TrainConfig& config) {
  if (!args.corpus_path.empty()) {
    return ff::dataset_from_corpus(ff::load_corpus(args.corpus_path));
  }
  return ff::synthesize_dataset(args.pairs, config.seed);
}

nlohmann::ordered_json trainer_config_json(const TrainArgs& args, const ff::TrainConfig& config) {
  nlohmann::ordered_json obj = nlohmann::ordered_json::parse(ff::train_config_to_json(config));
  obj["pairs"] = args.pairs;
  if (!args.corpus_path.empty()) obj["corpus"] = args.corpus_path;
  return obj;
}

int cmd_train(const TrainArgs& args, const GlobalFlags& flags) {
  const ff::TrainConfig config = effective_train_config(args.config_path, flags);
  const ff::ToyDataset dataset = dataset_for(args, config);
  dataset.validate();

  const ff::TrainResult result = ff::train(dataset, config);
  const ff::MarginReport margins =
      ff::distinguishability_report(result.params, dataset, config.prob_clip_epsilon);
  const ff::EpochStats& last = result.trace.back();

  info(flags) << "trained " << dataset.pairs.size() << " pairs for " << config.epochs
              << " epochs (lambda " << config.lambda << ", seed " << config.seed << ")\n"
              << "final loss_pos " << last.loss_pos << ", loss_neg " << last.loss_neg
              << ", loss_dual " << last.loss_dual << "\n"
              << "margins: min " << margins.min_margin << ", mean " << margins.mean_margin << "\n";

  if (!args.out_path.empty()) {
    // Single-arm trace reuses the experiment CSV columns.
    ff::ExperimentResult single;
    single.dual_arm = {"dual", config.lambda, result, margins};
    std::string csv = ff::experiment_csv(single, config.seed);
    write_text_file(args.out_path, csv);

    std::string checksum;
    if (!args.corpus_path.empty()) checksum = ff::file_checksum(args.corpus_path);
    ff::write_manifest(ff::make_manifest("train", trainer_config_json(args, config), checksum),
                       args.out_path);
    info(flags) << "wrote loss trace to " << args.out_path << "\n";
  }
  return kExitOk;
}

int cmd_experiment(const TrainArgs& args, const GlobalFlags& flags) {
  const ff::TrainConfig config = effective_train_config(args.config_path, flags);
  const ff::ToyDataset dataset = dataset_for(args, config);
  dataset.validate();

  const ff::ExperimentResult result = ff::run_experiment(dataset, config);

  if (!args.out_path.empty()) {
    write_text_file(args.out_path, ff::experiment_csv(result, config.seed));
    std::string checksum;
    if (!args.corpus_path.empty()) checksum = ff::file_checksum(args.corpus_path);
    ff::write_manifest(ff::make_manifest("experiment", trainer_config_json(args, config), checksum),
                       args.out_path);
  }

  info(flags) << "dual arm (lambda " << result.dual_arm.lambda
              << "): min margin " << result.dual_arm.final_margins.min_margin << "\n"
              << "pos arm  (lambda 0): min margin " << result.pos_arm.final_margins.min_margin
              << "\n"
              << "gap " << result.gap << " (threshold " << ff::kSeparationGapThreshold << "): "
              << (result.separation_holds ? "separation holds" : "separation FAILED") << "\n";
  return result.separation_holds ? kExitOk : kExitPropertyViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fallacyforge — implication-variant judgment harness and dual-objective trainer"};
  app.set_version_flag("--version", std::string(ff::kToolName) + " " + ff::kToolVersion);
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--seed", flags.seed, "Override the configured random seed");
  app.add_flag("--quiet", flags.quiet, "Suppress informational output");

  VariantsArgs variants_args;
  auto* variants = app.add_subcommand("variants", "Expand a corpus into variant prompts");
  variants->add_option("--corpus", variants_args.corpus_path, "Corpus JSONL file")->required();
  variants->add_option("--out", variants_args.out_path, "Output prompt JSONL file")->required();
  variants->add_option("--rules", variants_args.rules_csv, "Comma-separated rule codes");
  variants->add_option("--negation-style", variants_args.negation_style, "no|not");
  variants->add_option("--template", variants_args.prompt_template, "standard|bare");

  ImportArgs import_args;
  auto* import = app.add_subcommand("import-corpus", "Convert plain-text implications to JSONL");
  import->add_option("--in", import_args.in_path, "Plain text input, one implication per line")
      ->required();
  import->add_option("--out", import_args.out_path, "Output corpus JSONL file")->required();
  import->add_option("--domain", import_args.domain, "medical|environmental|<label>");
  import->add_option("--id-prefix", import_args.id_prefix, "Statement id prefix");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Collect judgments from configured endpoints");
  eval->add_option("--corpus", eval_args.corpus_path, "Corpus JSONL file")->required();
  eval->add_option("--endpoints", eval_args.endpoints_path, "Endpoint config JSON")->required();
  eval->add_option("--log", eval_args.log_path, "Append-only judgment log (resumable)")
      ->required();
  eval->add_option("--concurrency", eval_args.concurrency, "Parallel request limit")
      ->check(CLI::PositiveNumber);
  eval->add_option("--rules", eval_args.rules_csv, "Comma-separated rule codes");
  eval->add_option("--negation-style", eval_args.negation_style, "no|not");
  eval->add_option("--template", eval_args.prompt_template, "standard|bare");

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Render fraction/error tables from a log");
  report->add_option("--log", report_args.log_path, "Judgment log JSONL")->required();
  report->add_option("--format", report_args.format, "markdown|csv");
  report->add_option("--golden", report_args.golden,
                     "Append the bundled reference comparison: medical|environmental");
  report->add_option("--out", report_args.out_path, "Write to file instead of standard output");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train the dual-objective judge");
  train->add_option("--config", train_args.config_path, "Training config JSON");
  train->add_option("--corpus", train_args.corpus_path, "Derive atom pairs from a corpus");
  train->add_option("--pairs", train_args.pairs, "Synthesized dataset size")
      ->check(CLI::PositiveNumber);
  train->add_option("--out", train_args.out_path, "Write the loss trace CSV here");

  TrainArgs experiment_args;
  auto* experiment =
      app.add_subcommand("experiment", "Two-arm distinguishability experiment (dual vs pos-only)");
  experiment->add_option("--config", experiment_args.config_path, "Training config JSON");
  experiment->add_option("--corpus", experiment_args.corpus_path,
                         "Derive atom pairs from a corpus");
  experiment->add_option("--pairs", experiment_args.pairs, "Synthesized dataset size")
      ->check(CLI::PositiveNumber);
  experiment->add_option("--out", experiment_args.out_path, "Write the two-arm trace CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    if (ex.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      return app.exit(ex);  // --help / --version
    }
    app.exit(ex);
    return kExitInputError;
  }

  try {
    if (variants->parsed()) return cmd_variants(variants_args, flags);
    if (import->parsed()) return cmd_import_corpus(import_args, flags);
    if (eval->parsed()) return cmd_eval(eval_args, flags);
    if (report->parsed()) return cmd_report(report_args, flags);
    if (train->parsed()) return cmd_train(train_args, flags);
    if (experiment->parsed()) return cmd_experiment(experiment_args, flags);
  } catch (const ff::IoError& ex) {
    std::cerr << "fatal I/O error: " << ex.what() << "\n";
    return kExitIoFatal;
  } catch (const ff::DivergenceError& ex) {
    std::cerr << "training diverged: " << ex.what() << "\n";
    return kExitPropertyViolation;
  } catch (const ff::Error& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;  // unreachable: require_subcommand(1)
}
