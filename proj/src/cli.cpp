#include "lexzip/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lexzip/compressor.hpp"
#include "lexzip/corpus.hpp"
#include "lexzip/dictionary.hpp"
#include "lexzip/error.hpp"
#include "lexzip/eval.hpp"
#include "lexzip/fetch.hpp"
#include "lexzip/html_features.hpp"
#include "lexzip/ml.hpp"
#include "lexzip/pipeline.hpp"
#include "lexzip/synth.hpp"
#include "lexzip/text.hpp"

namespace lexzip::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Options {
  unsigned jobs = 1;
  std::uint64_t seed = 42;
  int level = 9;

  // fetch
  std::string urls_file;
  double timeout_secs = 30.0;
  std::string fetch_label = "unknown";
  std::optional<std::string> brand;

  // shared paths
  std::string corpus_dir;
  std::string holdout_dir;
  std::string in_dir;
  std::string test_dir;
  std::string out_path;
  std::string dict_phish;
  std::string dict_legit;
  std::string stopwords_file;

  // dictionaries
  std::string dict_class;
  double threshold = 5e-4;
  std::size_t top_k = kDefaultTopK;
  std::size_t max_bytes = kPresetDictionaryLimit;
  std::string grid = "log:1e-5:5e-3:20";

  // html features
  bool fit_thresholds = false;
  std::string thresholds_in;
  std::string thresholds_out;

  // ml
  std::string features_file;
  std::string algorithm;
  std::string mask = "all";
  std::size_t folds = 3;
  std::string report_path;
  std::string model_path;

  // evaluate
  std::string mode;
  bool imbalanced = false;
  std::size_t ratio = 100;
  std::size_t iterations = 100;
  std::string format = "json";

  // synth
  std::string spec_path;
};

void write_text(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::Io, "cannot write " + path);
  file << content;
  if (!file) throw Error(ErrorCode::Io, "failed writing " + path);
}

const StopwordList& stopwords_for(const Options& o, std::optional<StopwordList>& storage) {
  if (o.stopwords_file.empty()) return StopwordList::english();
  storage = StopwordList::from_file(o.stopwords_file);
  return *storage;
}

CompressionModel load_model_for(Label label, const std::string& path, int level) {
  return CompressionModel(label, load_dictionary(path), level);
}

std::vector<std::string> read_url_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::vector<std::string> urls;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    urls.push_back(line.substr(first, last - first + 1));
  }
  return urls;
}

HtmlFeatureOptions html_options(const Options& o) {
  HtmlFeatureOptions options;
  if (!o.thresholds_in.empty()) options.non_matching = load_threshold(o.thresholds_in);
  return options;
}

// ---- subcommands ------------------------------------------------------------

void cmd_fetch(const Options& o, std::ostream& err) {
  const auto label = parse_label(o.fetch_label);
  if (!label) throw Error(ErrorCode::InvalidArgument, "unknown label '" + o.fetch_label + "'");
  FetchOptions options;
  options.timeout = std::chrono::milliseconds(static_cast<long long>(o.timeout_secs * 1000.0));
  const auto outcomes = fetch_all(read_url_list(o.urls_file), options, o.jobs);
  Corpus corpus;
  std::size_t failures = 0;
  for (const auto& outcome : outcomes) {
    if (!outcome.document) {
      ++failures;
      err << "fetch failed: " << outcome.url << ": " << outcome.error << "\n";
      continue;
    }
    auto doc = *outcome.document;
    doc.label = *label;
    doc.target_brand = o.brand;
    corpus.add(std::move(doc));
  }
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "no page could be fetched");
  save_corpus(corpus, o.out_path);
  err << "fetched " << corpus.size() << " of " << outcomes.size() << " pages (" << failures << " failed)\n";
}

void cmd_build_dict(const Options& o, std::ostream& err) {
  const auto label = parse_label(o.dict_class);
  if (!label || !is_known(*label)) throw Error(ErrorCode::InvalidArgument, "--class must be phish or legit");
  std::optional<StopwordList> storage;
  const auto corpus = load_corpus(o.corpus_dir);
  const auto tables = analyze_corpus(corpus, stopwords_for(o, storage), o.jobs);
  const auto& table = *label == Label::Phishing ? tables.phishing : tables.non_phishing;
  const auto model = build_dictionary(table, o.threshold, {o.top_k, o.max_bytes}, tables.fingerprint);
  save_dictionary(model, o.out_path);
  err << "wrote " << model.words.size() << " words (" << model.dict_bytes.size() << " bytes) to " << o.out_path
      << ".dict\n";
}

void cmd_sweep(const Options& o, std::ostream& out) {
  std::optional<StopwordList> storage;
  const auto train = load_corpus(o.corpus_dir);
  const auto holdout = load_corpus(o.holdout_dir);
  const auto grid = parse_grid_spec(o.grid);
  SweepOptions options;
  options.dictionary = {o.top_k, o.max_bytes};
  options.level = o.level;
  options.jobs = o.jobs;
  const auto report = sweep_threshold(train, holdout, grid, options, stopwords_for(o, storage));
  write_text(o.out_path, sweep_report_json(report), out);
}

void cmd_classify(const Options& o, std::ostream& out) {
  const auto phish = load_model_for(Label::Phishing, o.dict_phish, o.level);
  const auto legit = load_model_for(Label::NonPhishing, o.dict_legit, o.level);
  const auto corpus = load_corpus(o.in_dir);
  write_text(o.out_path, classification_jsonl(classify_batch(corpus, phish, legit, o.jobs)), out);
}

void cmd_features(const Options& o, std::ostream& out, std::ostream& err) {
  const auto corpus = load_corpus(o.in_dir);
  auto options = html_options(o);
  if (o.fit_thresholds) {
    options.non_matching = fit_nonmatching_threshold(corpus, options.similarity);
    err << "fitted non-matching thresholds: similar " << options.non_matching.similar_threshold << ", ill-formed "
        << options.non_matching.illformed_threshold << "\n";
    if (!o.thresholds_out.empty()) save_threshold(options.non_matching, o.thresholds_out);
  }
  std::optional<CompressionModel> phish, legit;
  if (!o.dict_phish.empty() || !o.dict_legit.empty()) {
    phish = load_model_for(Label::Phishing, o.dict_phish, o.level);
    legit = load_model_for(Label::NonPhishing, o.dict_legit, o.level);
  }
  const auto rows =
      compute_feature_rows(corpus, phish ? &*phish : nullptr, legit ? &*legit : nullptr, options, o.jobs);
  if (o.out_path.empty() || o.out_path == "-") {
    out << ml::feature_rows_jsonl(rows);
  } else {
    ml::write_feature_rows(rows, o.out_path);
  }
}

void cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  const auto algorithm = ml::parse_algorithm(o.algorithm);
  if (!algorithm) throw Error(ErrorCode::InvalidArgument, "unknown algorithm '" + o.algorithm + "'");
  const auto rows = ml::read_feature_rows(o.features_file);
  const auto data = ml::make_dataset(rows, ml::FeatureMask::parse(o.mask));
  const auto grid = ml::default_grid(*algorithm);
  const auto [model, report] = ml::train(data, *algorithm, grid, o.seed, o.folds, o.jobs);
  if (o.out_path.empty() || o.out_path == "-") {
    out << ml::model_to_json(model);
  } else {
    ml::save_model(model, o.out_path);
  }
  if (!o.report_path.empty()) write_text(o.report_path, ml::grid_report_json(report), out);
  err << "best mean CV accuracy " << report.candidates[report.best_index].mean_accuracy << "\n";
}

void cmd_evaluate(const Options& o, std::ostream& out) {
  const auto mode = parse_detector_mode(o.mode);
  if (!mode) throw Error(ErrorCode::InvalidArgument, "unknown mode '" + o.mode + "'");
  DetectorConfig config;
  config.mode = *mode;
  config.jobs = o.jobs;
  config.html = html_options(o);
  if (!o.dict_phish.empty() || !o.dict_legit.empty()) {
    config.phish_model = load_model_for(Label::Phishing, o.dict_phish, o.level);
    config.legit_model = load_model_for(Label::NonPhishing, o.dict_legit, o.level);
  }
  if (*mode == DetectorMode::Ml) {
    if (o.model_path.empty()) throw Error(ErrorCode::InvalidArgument, "--mode ml requires --model");
    config.model = ml::load_model(o.model_path);
  }
  std::optional<ImbalancedOptions> imbalanced;
  if (o.imbalanced) imbalanced = ImbalancedOptions{o.ratio, o.iterations, o.seed, o.jobs};
  const auto report = evaluate_pipeline(config, load_corpus(o.test_dir), imbalanced);
  if (o.format == "table") {
    const std::string name(to_string(report.mode));
    std::vector<std::pair<std::string, MetricsReport>> balanced{{name, report.metrics}};
    std::string text = metrics_table(balanced);
    if (report.imbalanced) {
      std::vector<std::pair<std::string, ImbalancedEvalReport>> columns{{name, *report.imbalanced}};
      text += "\n" + imbalanced_table(columns);
    }
    write_text(o.out_path, text, out);
  } else {
    write_text(o.out_path, evaluation_json(report), out);
  }
}

void cmd_synth(const Options& o, std::ostream& err) {
  const auto spec = load_synthetic_spec(o.spec_path);
  const auto corpus = generate_synthetic_corpus(spec, o.seed);
  save_corpus(corpus, o.out_path);
  json meta;
  meta["seed"] = o.seed;
  meta["spec"] = o.spec_path;
  meta["documents"] = corpus.size();
  meta["fingerprint"] = corpus.fingerprint();
  write_text((fs::path(o.out_path) / "synth.json").string(), meta.dump(2) + "\n", err);
  err << "generated " << corpus.size() << " documents (seed " << o.seed << ")\n";
}

// ---- configuration logging --------------------------------------------------

std::string run_config_json(const CLI::App& sub) {
  json options = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const auto name = opt->get_single_name();
    if (name == "help" || name.empty()) continue;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      options[name] = results.size() == 1 ? json(results.front()) : json(results);
    } else if (!opt->get_default_str().empty()) {
      options[name] = opt->get_default_str();
    } else {
      options[name] = nullptr;
    }
  }
  json j;
  j["subcommand"] = sub.get_name();
  j["options"] = std::move(options);
  return j.dump();
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str()->check(CLI::Range(1u, 1024u));
}

void add_level(CLI::App* sub, Options& o) {
  sub->add_option("--level", o.level, "DEFLATE level")->capture_default_str()->check(CLI::Range(1, 9));
}

void add_dictionary_limits(CLI::App* sub, Options& o) {
  sub->add_option("--top-k", o.top_k, "Candidate words per class")->capture_default_str();
  sub->add_option("--max-bytes", o.max_bytes, "Dictionary size cap in bytes")->capture_default_str();
  sub->add_option("--stopwords", o.stopwords_file, "Stopword file (one word per line)")->check(CLI::ExistingFile);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Compression-based phishing page classifier", args.empty() ? "lexzip" : args.front()};
  app.set_config("--config", "", "TOML or INI file with option defaults");
  app.require_subcommand(1);
  app.fallthrough();

  auto* fetch = app.add_subcommand("fetch", "Download pages into a corpus directory");
  fetch->add_option("--urls", o.urls_file, "File with one URL per line")->required()->check(CLI::ExistingFile);
  fetch->add_option("--out", o.out_path, "Output corpus directory")->required();
  fetch->add_option("--timeout", o.timeout_secs, "Per-request timeout in seconds")->capture_default_str();
  fetch->add_option("--label", o.fetch_label, "Label for fetched pages (phish, legit, unknown)")
      ->capture_default_str();
  fetch->add_option("--brand", o.brand, "Target brand recorded for every page");
  add_common(fetch, o);

  auto* build = app.add_subcommand("build-dict", "Build one class dictionary from a training corpus");
  build->add_option("--corpus", o.corpus_dir, "Training corpus directory")->required()->check(CLI::ExistingDirectory);
  build->add_option("--class", o.dict_class, "phish or legit")->required();
  build->add_option("--threshold", o.threshold, "Likelihood threshold")->capture_default_str();
  build->add_option("--out", o.out_path, "Output prefix (writes PREFIX.dict and PREFIX.json)")->required();
  add_dictionary_limits(build, o);
  add_common(build, o);

  auto* sweep = app.add_subcommand("sweep", "Sweep the likelihood threshold on a holdout corpus");
  sweep->add_option("--corpus", o.corpus_dir, "Training corpus directory")->required()->check(CLI::ExistingDirectory);
  sweep->add_option("--holdout", o.holdout_dir, "Holdout corpus directory")->required()->check(CLI::ExistingDirectory);
  sweep->add_option("--grid", o.grid, "log:LO:HI:N, lin:LO:HI:N or a comma list")->capture_default_str();
  sweep->add_option("--out", o.out_path, "Report path (stdout if omitted)");
  add_level(sweep, o);
  add_dictionary_limits(sweep, o);
  add_common(sweep, o);

  auto* classify_cmd = app.add_subcommand("classify", "Classify pages by compression ratio");
  classify_cmd->add_option("--dict-phish", o.dict_phish, "Phishing dictionary (.dict)")->required()->check(CLI::ExistingFile);
  classify_cmd->add_option("--dict-legit", o.dict_legit, "Non-phishing dictionary (.dict)")->required()->check(CLI::ExistingFile);
  classify_cmd->add_option("--in", o.in_dir, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  classify_cmd->add_option("--out", o.out_path, "JSON Lines output (stdout if omitted)");
  add_level(classify_cmd, o);
  add_common(classify_cmd, o);

  auto* features = app.add_subcommand("features", "Extract feature rows (HTML heuristics, optional ratios)");
  features->add_option("--in", o.in_dir, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  features->add_option("--out", o.out_path, "Output file, CSV if it ends in .csv (stdout if omitted)");
  features->add_flag("--fit-thresholds", o.fit_thresholds, "Fit the non-matching URL thresholds on this corpus");
  features->add_option("--thresholds", o.thresholds_in, "Load non-matching URL thresholds")->check(CLI::ExistingFile);
  features->add_option("--thresholds-out", o.thresholds_out, "Save fitted thresholds");
  features->add_option("--dict-phish", o.dict_phish, "Phishing dictionary, adds ratio features")->check(CLI::ExistingFile);
  features->add_option("--dict-legit", o.dict_legit, "Non-phishing dictionary, adds ratio features")->check(CLI::ExistingFile);
  add_level(features, o);
  add_common(features, o);

  auto* train_cmd = app.add_subcommand("train", "Grid-search and fit a classifier on feature rows");
  train_cmd->add_option("--features", o.features_file, "Feature rows (JSON Lines or CSV)")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--algo", o.algorithm, "logistic, knn, naive_bayes, tree or forest")->required();
  train_cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--out", o.out_path, "Model JSON path (stdout if omitted)");
  train_cmd->add_option("--mask", o.mask, "all, ratios, html or a comma list of features")->capture_default_str();
  train_cmd->add_option("--folds", o.folds, "Cross-validation folds")->capture_default_str();
  train_cmd->add_option("--report", o.report_path, "Write the grid-search report here");
  add_common(train_cmd, o);

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a detector on a labeled test corpus");
  evaluate->add_option("--mode", o.mode, "compression, html or ml")->required();
  evaluate->add_option("--test", o.test_dir, "Test corpus directory")->required()->check(CLI::ExistingDirectory);
  evaluate->add_option("--model", o.model_path, "Trained model (ml mode)")->check(CLI::ExistingFile);
  evaluate->add_option("--dict-phish", o.dict_phish, "Phishing dictionary")->check(CLI::ExistingFile);
  evaluate->add_option("--dict-legit", o.dict_legit, "Non-phishing dictionary")->check(CLI::ExistingFile);
  evaluate->add_option("--thresholds", o.thresholds_in, "Non-matching URL thresholds")->check(CLI::ExistingFile);
  evaluate->add_flag("--imbalanced", o.imbalanced, "Also run the repeated down-sampling protocol");
  evaluate->add_option("--ratio", o.ratio, "Non-phishing to phishing ratio")->capture_default_str();
  evaluate->add_option("--iters", o.iterations, "Down-sampling iterations")->capture_default_str();
  evaluate->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  evaluate->add_option("--format", o.format, "json or table")->capture_default_str()->check(CLI::IsMember({"json", "table"}));
  evaluate->add_option("--out", o.out_path, "Report path (stdout if omitted)");
  add_level(evaluate, o);
  add_common(evaluate, o);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled corpus");
  synth->add_option("--spec", o.spec_path, "Generator spec (JSON)")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", o.out_path, "Output corpus directory")->required();
  synth->add_option("--seed", o.seed, "Random seed")->capture_default_str();

  std::vector<std::string> reversed(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    if (dynamic_cast<const CLI::ExtrasError*>(&e) || dynamic_cast<const CLI::RequiredError*>(&e)) {
      err << app.help();
    }
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  err << "run-config: " << run_config_json(*sub) << "\n";
  try {
    const auto& name = sub->get_name();
    if (name == "fetch") cmd_fetch(o, err);
    else if (name == "build-dict") cmd_build_dict(o, err);
    else if (name == "sweep") cmd_sweep(o, out);
    else if (name == "classify") cmd_classify(o, out);
    else if (name == "features") cmd_features(o, out, err);
    else if (name == "train") cmd_train(o, out, err);
    else if (name == "evaluate") cmd_evaluate(o, out);
    else if (name == "synth") cmd_synth(o, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::InvalidArgument ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace lexzip::cli
