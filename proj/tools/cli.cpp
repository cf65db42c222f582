#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "prove/backend.hpp"
#include "prove/evaluation.hpp"
#include "prove/json_io.hpp"
#include "prove/pipeline.hpp"

namespace prove::cli {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnavailable:
    case ErrorCode::kTimeout:
    case ErrorCode::kOffline:
    case ErrorCode::kNotHtml:
      return kExitUnavailable;
    case ErrorCode::kBackendProtocol:
      return kExitProtocol;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kUnverbalisableObject:
    case ErrorCode::kMissingLabel:
    case ErrorCode::kOverrideNotAnAlias:
    case ErrorCode::kSchemaMismatch:
    case ErrorCode::kNotTrained:
    case ErrorCode::kSingleClassDataset:
    case ErrorCode::kSchemaError:
    case ErrorCode::kLengthMismatch:
    case ErrorCode::kSingleClassLabels:
    case ErrorCode::kZeroVariance:
    case ErrorCode::kIo:
      return kExitInvalid;
  }
  return kExitFailure;
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& text, const std::string& what) {
  std::istringstream in(text);
  T value{};
  if (!(in >> value) || !in.eof()) fail(ErrorCode::kSchemaError, what + ": expected a number");
  return value;
}

bool parse_bool(const std::string& text, const std::string& what) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  fail(ErrorCode::kSchemaError, what + ": expected true or false");
}

std::string read_file(const std::string& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + what + " " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
}

WindowConfig parse_windows(const std::string& text) {
  WindowConfig cfg;
  cfg.sizes.clear();
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    std::size_t n = 0;
    try {
      n = parse_number<std::size_t>(item, "windows");
    } catch (const Error&) {
      fail(ErrorCode::kInvalidArgument, "window sizes must be positive integers: '" + text + "'");
    }
    cfg.sizes.insert(n);
  }
  cfg.check();
  return cfg;
}

std::vector<Aggregator> parse_aggregators(const std::string& text) {
  if (text == "all") return {Aggregator::kWeightedSum, Aggregator::kMalon, Aggregator::kClassifier};
  return {parse_aggregator(text)};
}

}  // namespace

void apply_config_text(CliConfig& config, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::kSchemaError, where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string what = where + ": " + key;
    if (key == "backend") config.backend = value;
    else if (key == "timeout_ms") config.timeout_ms = parse_number<long>(value, what);
    else if (key == "max_in_flight") config.max_in_flight = parse_number<int>(value, what);
    else if (key == "windows") config.windows = value;
    else if (key == "evidence_k") config.evidence_k = parse_number<std::size_t>(value, what);
    else if (key == "aggregator") config.aggregator = value;
    else if (key == "model") config.model = value;
    else if (key == "labels") config.labels = value;
    else if (key == "seed") config.seed = parse_number<std::uint64_t>(value, what);
    else if (key == "folds") config.folds = parse_number<int>(value, what);
    else if (key == "jobs") config.jobs = parse_number<int>(value, what);
    else if (key == "offline") config.offline = parse_bool(value, what);
    else fail(ErrorCode::kSchemaError, where + ": unknown key '" + key + "'");
  }
}

namespace {

struct CommonFlags {
  std::optional<std::string> config_path;
  std::optional<std::string> backend;
  std::optional<long> timeout_ms;
  std::optional<int> max_in_flight;
  std::optional<std::string> windows;
  std::optional<std::size_t> evidence_k;
  std::optional<std::string> aggregator;
  std::optional<std::string> model;
  std::optional<std::string> labels;
  std::optional<std::uint64_t> seed;
  std::optional<int> folds;
  std::optional<int> jobs;
  bool offline = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "Key-value config file");
  cmd->add_option("--backend", f.backend, "Scoring service URL (default: built-in baseline)");
  cmd->add_option("--timeout-ms", f.timeout_ms, "Network timeout in milliseconds");
  cmd->add_option("--max-in-flight", f.max_in_flight, "Concurrent scoring requests");
  cmd->add_option("--windows", f.windows, "Sliding window sizes, e.g. 1,2");
  cmd->add_option("-k,--evidence", f.evidence_k, "Evidence set size");
  cmd->add_option("--labels", f.labels, "Label override file (id<TAB>alias)");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--jobs", f.jobs, "Parallel workers");
  cmd->add_flag("--offline", f.offline, "Fail on any network access");
}

template <typename T>
void overlay(T& target, const std::optional<T>& flag) {
  if (flag) target = *flag;
}

CliConfig resolve(const CommonFlags& f) {
  CliConfig cfg;
  if (f.config_path) apply_config_text(cfg, read_file(*f.config_path, "config file"), *f.config_path);
  overlay(cfg.backend, f.backend);
  overlay(cfg.timeout_ms, f.timeout_ms);
  overlay(cfg.max_in_flight, f.max_in_flight);
  overlay(cfg.windows, f.windows);
  overlay(cfg.evidence_k, f.evidence_k);
  overlay(cfg.aggregator, f.aggregator);
  overlay(cfg.model, f.model);
  overlay(cfg.labels, f.labels);
  overlay(cfg.seed, f.seed);
  overlay(cfg.folds, f.folds);
  overlay(cfg.jobs, f.jobs);
  if (f.offline) cfg.offline = true;
  if (const char* env = std::getenv("PROVE_BACKEND_URL"); env != nullptr && *env != '\0') {
    cfg.backend = env;
  }
  require(cfg.evidence_k > 0, "evidence size must be positive");
  require(cfg.jobs > 0, "--jobs must be positive");
  require(cfg.timeout_ms > 0, "timeout must be positive");
  return cfg;
}

std::unique_ptr<ScorerBackend> backend_for(const CliConfig& cfg) {
  BackendOptions options;
  options.endpoint = cfg.backend;
  options.timeout = std::chrono::milliseconds(cfg.timeout_ms);
  options.max_in_flight = cfg.max_in_flight;
  options.offline = cfg.offline;
  return make_backend(options);
}

PipelineConfig pipeline_for(const CliConfig& cfg) {
  PipelineConfig p;
  p.windows = parse_windows(cfg.windows);
  p.evidence_k = cfg.evidence_k;
  if (!cfg.labels.empty()) p.labels = LabelPolicy::load(cfg.labels);
  p.fetch.offline = cfg.offline;
  p.fetch.timeout = std::chrono::milliseconds(cfg.timeout_ms);
  return p;
}

struct SourceFlags {
  std::optional<std::string> url;
  std::optional<std::string> html;
  std::optional<std::string> document;
  std::string reference_id = "reference";
};

void add_source(CLI::App* cmd, SourceFlags& s) {
  auto* url = cmd->add_option("--url", s.url, "Reference URL (http, https or file)");
  auto* html = cmd->add_option("--html", s.html, "Local HTML file standing in for the reference");
  auto* doc = cmd->add_option("--document", s.document, "Plain-text document (segmentation only)");
  url->excludes(html)->excludes(doc);
  html->excludes(doc);
  cmd->add_option("--reference-id", s.reference_id, "Identifier recorded in the report");
}

Reference reference_from(const SourceFlags& s) {
  Reference r;
  r.id = s.reference_id;
  if (s.url) {
    r.source = UrlSource{*s.url};
  } else if (s.html) {
    r.source = UrlSource{"file://" + std::filesystem::absolute(*s.html).string()};
    r.html = read_file(*s.html, "html file");
  } else if (s.document) {
    r.source = DocumentSource{read_file(*s.document, "document")};
  } else {
    fail(ErrorCode::kInvalidArgument, "one of --url, --html or --document is required");
  }
  return r;
}

struct VerifyFlags {
  CommonFlags common;
  SourceFlags source;
  std::optional<std::string> triple_path;
  std::optional<std::string> subject, predicate, object;
  std::string datatype = "entity";
  std::optional<std::string> verbalisation;
  std::optional<std::string> out_path;
};

Triple triple_from(const VerifyFlags& f) {
  if (f.triple_path) return load_triple(*f.triple_path);
  if (!f.subject || !f.predicate || !f.object) {
    fail(ErrorCode::kInvalidArgument,
         "give --triple or all of --subject, --predicate and --object");
  }
  Triple t;
  t.id = "cli";
  t.object_datatype = parse_datatype(f.datatype);
  t.subject = {"subject", *f.subject, {}, std::nullopt};
  t.predicate = {"predicate", *f.predicate, {}, std::nullopt};
  t.object = {"object", display_value(*f.object, t.object_datatype), {}, std::nullopt};
  return t;
}

int cmd_verify(const VerifyFlags& f, std::ostream& out, std::ostream& err) {
  const CliConfig cfg = resolve(f.common);
  const Triple triple = triple_from(f);
  validate_triple(triple);
  PipelineConfig pipeline = pipeline_for(cfg);
  pipeline.aggregators = parse_aggregators(cfg.aggregator);
  std::optional<AggregationModel> model;
  if (!cfg.model.empty()) model = AggregationModel::load(cfg.model);
  pipeline.model = model ? &*model : nullptr;
  for (Aggregator a : pipeline.aggregators) {
    if (a == Aggregator::kClassifier && !model) {
      fail(ErrorCode::kNotTrained,
           "the classifier aggregator needs --model (or choose --aggregator weighted_sum|malon)");
    }
  }
  auto backend = backend_for(cfg);
  Reference reference = reference_from(f.source);
  const PipelineOutput result = verify(triple, reference, *backend, pipeline, f.verbalisation);
  const std::string json = verdict_json(triple, reference, result).dump(2) + "\n";
  if (f.out_path) write_file(*f.out_path, json);
  out << json;
  err << verdict_summary(result);
  return kExitOk;
}

struct ExtractFlags {
  CommonFlags common;
  SourceFlags source;
  std::string format = "json";
};

int cmd_extract(const ExtractFlags& f, std::ostream& out) {
  const CliConfig cfg = resolve(f.common);
  PipelineConfig pipeline = pipeline_for(cfg);
  Reference reference = reference_from(f.source);
  const Extraction e = extract(reference, pipeline);
  if (f.format == "text") {
    for (std::size_t i = 0; i < e.segments.size(); ++i) {
      out << "segment " << i << ": " << e.segments.segments[i] << "\n";
    }
    for (const auto& p : e.passages) {
      out << "passage n=" << p.window_size << " [" << p.start_index << ".." << p.end_index()
          << "]: " << p.text << "\n";
    }
  } else {
    out << extraction_json(reference, e).dump(2) << "\n";
  }
  return kExitOk;
}

struct EvaluateFlags {
  CommonFlags common;
  std::string dataset;
  std::string out_dir;
  std::string task = "both";
  bool csv = false;
};

int cmd_evaluate(const EvaluateFlags& f, std::ostream& out, std::ostream& err) {
  const CliConfig cfg = resolve(f.common);
  const WtrDataset data = load_wtr(f.dataset);
  if (data.duplicates_dropped > 0) {
    err << "dropped " << data.duplicates_dropped << " duplicate record(s)\n";
  }
  EvaluationConfig config;
  config.pipeline = pipeline_for(cfg);
  if (f.task == "ternary") config.tasks = {Task::kTernary};
  else if (f.task == "binary") config.tasks = {Task::kBinary};
  else if (f.task != "both") fail(ErrorCode::kInvalidArgument, "--task must be ternary, binary or both");
  std::optional<AggregationModel> model;
  if (!cfg.model.empty()) model = AggregationModel::load(cfg.model);
  config.model = model ? &*model : nullptr;
  config.folds = cfg.folds;
  config.seed = cfg.seed;
  config.jobs = cfg.jobs;
  auto backend = backend_for(cfg);
  const EvaluationBundle bundle = evaluate_pipeline(data.records, *backend, config);

  const std::filesystem::path dir(f.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create output directory " + f.out_dir);
  const std::string tables = evaluation_tables(bundle);
  write_file(dir / "evaluation.json", evaluation_json(bundle).dump(2) + "\n");
  write_file(dir / "tables.txt", tables);
  if (f.csv) write_file(dir / "records.csv", evaluation_csv(bundle));
  out << tables;
  return kExitOk;
}

struct TrainFlags {
  CommonFlags common;
  std::string dataset;
  std::string model_out;
  std::optional<std::string> report_out;
  bool features = false;
  std::string label_source = "t2";
  ForestParams forest;
};

std::vector<LabeledFeatures> load_feature_rows(const std::string& path) {
  std::istringstream in(read_file(path, "feature file"));
  std::vector<LabeledFeatures> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no) + ": ";
    LabeledFeatures row;
    try {
      const Json j = Json::parse(line);
      const Json& values = j.at("features");
      if (!values.is_array() || values.size() != kFeatureCount) {
        fail(ErrorCode::kSchemaError, where + "features: expected 25 numbers");
      }
      for (std::size_t i = 0; i < kFeatureCount; ++i) row.features.values[i] = values[i].get<double>();
      row.label = parse_stance(j.at("label").get<std::string>());
    } catch (const Json::exception& e) {
      fail(ErrorCode::kSchemaError, where + e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kSchemaError) throw;
      fail(ErrorCode::kSchemaError, where + e.what());
    }
    rows.push_back(row);
  }
  return rows;
}

int cmd_train(const TrainFlags& f, std::ostream& out, std::ostream& err) {
  const CliConfig cfg = resolve(f.common);
  std::vector<LabeledFeatures> samples;
  if (f.features) {
    samples = load_feature_rows(f.dataset);
  } else {
    const WtrDataset data = load_wtr(f.dataset);
    LabelSource source = LabelSource::kT2;
    if (f.label_source == "author") source = LabelSource::kAuthor;
    else if (f.label_source != "t2") fail(ErrorCode::kInvalidArgument, "--labels-from must be t2 or author");
    auto backend = backend_for(cfg);
    TrainingSet set = collect_training_set(data.records, *backend, pipeline_for(cfg), source, cfg.jobs);
    if (set.skipped > 0) err << "skipped " << set.skipped << " record(s) without features or label\n";
    samples = std::move(set.samples);
  }
  TrainOptions options;
  options.folds = cfg.folds;
  options.seed = cfg.seed;
  options.params = f.forest;
  options.jobs = cfg.jobs;
  const TrainResult result = train_aggregation_model(samples, options);
  result.model.save(f.model_out);
  const std::string report = crossval_json(result.report).dump(2) + "\n";
  write_file(f.report_out.value_or(f.model_out + ".cv.json"), report);
  char line[160];
  std::snprintf(line, sizeof line,
                "%d-fold cross-validation: ternary accuracy %.3f macro-F1 %.3f; binary accuracy "
                "%.3f macro-F1 %.3f\n",
                result.report.folds, result.report.mean_ternary_accuracy,
                result.report.mean_ternary_macro_f1, result.report.mean_binary_accuracy,
                result.report.mean_binary_macro_f1);
  out << line;
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Checks whether web references support knowledge-graph triples.", "prove"};
  app.require_subcommand(1);

  VerifyFlags verify_flags;
  auto* verify_cmd = app.add_subcommand("verify", "Verify one triple against one reference");
  add_common(verify_cmd, verify_flags.common);
  add_source(verify_cmd, verify_flags.source);
  verify_cmd->add_option("--triple", verify_flags.triple_path, "Triple JSON file");
  verify_cmd->add_option("--subject", verify_flags.subject, "Subject label");
  verify_cmd->add_option("--predicate", verify_flags.predicate, "Predicate label");
  verify_cmd->add_option("--object", verify_flags.object, "Object label or value");
  verify_cmd->add_option("--datatype", verify_flags.datatype, "Object datatype");
  verify_cmd->add_option("--verbalisation", verify_flags.verbalisation, "Use this claim sentence");
  verify_cmd->add_option("--aggregator", verify_flags.common.aggregator,
                         "weighted_sum, malon, classifier or all");
  verify_cmd->add_option("--model", verify_flags.common.model, "Aggregation model file");
  verify_cmd->add_option("--out", verify_flags.out_path, "Also write the report here");

  ExtractFlags extract_flags;
  auto* extract_cmd = app.add_subcommand("extract", "List segments and passages of a reference");
  add_common(extract_cmd, extract_flags.common);
  add_source(extract_cmd, extract_flags.source);
  extract_cmd->add_option("--format", extract_flags.format, "json or text")
      ->check(CLI::IsMember({"json", "text"}));

  EvaluateFlags evaluate_flags;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate the pipeline on a WTR dataset");
  add_common(evaluate_cmd, evaluate_flags.common);
  evaluate_cmd->add_option("dataset", evaluate_flags.dataset, "WTR line-JSON file")->required();
  evaluate_cmd->add_option("--out", evaluate_flags.out_dir, "Report directory")->required();
  evaluate_cmd->add_option("--task", evaluate_flags.task, "ternary, binary or both");
  evaluate_cmd->add_option("--folds", evaluate_flags.common.folds, "Cross-validation folds");
  evaluate_cmd->add_option("--model", evaluate_flags.common.model,
                           "Aggregation model (default: cross-validated)");
  evaluate_cmd->add_flag("--csv", evaluate_flags.csv, "Also write per-record verdicts as CSV");

  TrainFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train the aggregation classifier");
  add_common(train_cmd, train_flags.common);
  train_cmd->add_option("dataset", train_flags.dataset, "WTR file, or feature rows with --features")
      ->required();
  train_cmd->add_option("--out", train_flags.model_out, "Model file to write")->required();
  train_cmd->add_option("--report", train_flags.report_out, "Cross-validation report (JSON)");
  train_cmd->add_flag("--features", train_flags.features,
                      "Dataset holds {\"features\": [25 numbers], \"label\"} rows");
  train_cmd->add_option("--labels-from", train_flags.label_source, "t2 or author");
  train_cmd->add_option("--folds", train_flags.common.folds, "Cross-validation folds");
  train_cmd->add_option("--trees", train_flags.forest.num_trees, "Number of trees");
  train_cmd->add_option("--max-depth", train_flags.forest.max_depth, "Tree depth limit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (verify_cmd->parsed()) return cmd_verify(verify_flags, out, err);
    if (extract_cmd->parsed()) return cmd_extract(extract_flags, out);
    if (evaluate_cmd->parsed()) return cmd_evaluate(evaluate_flags, out, err);
    if (train_cmd->parsed()) return cmd_train(train_flags, out, err);
  } catch (const Error& e) {
    err << "error (" << error_code_name(e.code()) << "): " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace prove::cli
