#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <json.hpp>
#include <sstream>

#include "lexzip/cli.hpp"
#include "lexzip/compressor.hpp"
#include "lexzip/dictionary.hpp"
#include "lexzip/eval.hpp"
#include "lexzip/ml.hpp"
#include "lexzip/pipeline.hpp"
#include "lexzip/synth.hpp"
#include "support.hpp"

using namespace lexzip;

namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "lexzip");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string words_json(const std::vector<std::string>& words) {
  nlohmann::json j = words;
  return j.dump();
}

// Spec file for two disjoint Zipf vocabularies with some page structure.
std::string spec_json(std::size_t documents) {
  return R"({"documents": )" + std::to_string(documents) + R"(, "tokens_per_document": {"min": 40, "max": 80},
    "classes": {
      "phishing": {"words": )" + words_json(testing::word_list("ph", 50)) + R"(, "zipf": 1.0,
                   "traits": {"login_form_rate": 0.8, "offsite_action_rate": 0.5, "min_links": 2, "max_links": 6,
                              "empty_link_rate": 0.4}},
      "non_phishing": {"words": )" + words_json(testing::word_list("le", 50)) + R"(, "zipf": 1.0,
                       "traits": {"https_rate": 0.9, "login_form_rate": 0.2, "min_links": 2, "max_links": 6}}
    }})";
}

// A trained pipeline laid out on disk: train/test corpora and both dictionaries.
struct Workspace {
  testing::TempDir dir;
  std::filesystem::path spec, train, test;

  Workspace() {
    spec = dir / "spec.json";
    train = dir / "train";
    test = dir / "test";
    testing::write_file(spec, spec_json(120));
    REQUIRE(run_cli({"synth", "--spec", spec.string(), "--out", train.string(), "--seed", "1"}).code == 0);
    REQUIRE(run_cli({"synth", "--spec", spec.string(), "--out", test.string(), "--seed", "2"}).code == 0);
    for (const auto& [cls, name] : {std::pair{"phish", "p"}, std::pair{"legit", "l"}}) {
      REQUIRE(run_cli({"build-dict", "--corpus", train.string(), "--class", cls, "--threshold", "1e-3", "--out",
                       (dir / name).string()})
                  .code == 0);
    }
  }

  std::string p() const { return (dir / "p.dict").string(); }
  std::string l() const { return (dir / "l.dict").string(); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 1") {
  const auto none = run_cli({});
  CHECK(none.code == cli::kExitUsage);
  const auto unknown = run_cli({"frobnicate"});
  CHECK(unknown.code == cli::kExitUsage);
  CHECK(unknown.err.find("Usage") != std::string::npos);
  CHECK(run_cli({"build-dict", "--corpus"}).code == cli::kExitUsage);
  CHECK(run_cli({"sweep", "--corpus", "/nonexistent/dir", "--holdout", "/nonexistent/dir"}).code == cli::kExitUsage);
  testing::TempDir dir;
  CHECK(run_cli({"classify", "--dict-phish", "x", "--dict-legit", "y", "--in", dir.path().string(), "--level", "12"})
            .code == cli::kExitUsage);
  CHECK(run_cli({"--help"}).code == cli::kExitOk);
}

TEST_CASE("data errors exit 2") {
  testing::TempDir dir;
  testing::write_file(dir / "p.dict", "alpha");
  testing::write_file(dir / "l.dict", "beta");
  // An existing directory without a manifest.
  const auto r = run_cli({"classify", "--dict-phish", (dir / "p.dict").string(), "--dict-legit",
                          (dir / "l.dict").string(), "--in", dir.path().string()});
  CHECK(r.code == cli::kExitData);
  CHECK(r.err.find("error:") != std::string::npos);

  testing::write_file(dir / "bad_spec.json", R"({"classes": {"phishing": {"words": ["a", "b"], "probabilities": [0.5, 0.4]},
                                                 "non_phishing": {"words": ["c"], "probabilities": [1.0]}}})");
  CHECK(run_cli({"synth", "--spec", (dir / "bad_spec.json").string(), "--out", (dir / "o").string()}).code ==
        cli::kExitData);
  CHECK(run_cli({"train", "--features", (dir / "p.dict").string(), "--algo", "svm"}).code == cli::kExitUsage);
}

TEST_CASE("synth and build-dict match the library") {
  Workspace ws;
  const auto spec = load_synthetic_spec(ws.spec);
  const auto expected = generate_synthetic_corpus(spec, 1);
  const auto written = load_corpus(ws.train);
  CHECK(written.fingerprint() == expected.fingerprint());
  const auto meta = nlohmann::json::parse(testing::read_file(ws.train / "synth.json"));
  CHECK(meta["seed"] == 1);

  const auto tables = analyze_corpus(expected);
  CHECK(testing::read_file(ws.p()) == build_dictionary(tables.phishing, 1e-3, {}, tables.fingerprint).dict_bytes);
  CHECK(testing::read_file(ws.l()) == build_dictionary(tables.non_phishing, 1e-3, {}, tables.fingerprint).dict_bytes);
}

TEST_CASE("classify output equals classify_batch byte for byte") {
  Workspace ws;
  const CompressionModel phish(Label::Phishing, load_dictionary(ws.p()));
  const CompressionModel legit(Label::NonPhishing, load_dictionary(ws.l()));
  const auto expected = classification_jsonl(classify_batch(load_corpus(ws.test), phish, legit));

  const auto r = run_cli({"classify", "--dict-phish", ws.p(), "--dict-legit", ws.l(), "--in", ws.test.string()});
  CHECK(r.code == 0);
  CHECK(r.out == expected);
  CHECK(r.err.find("run-config: ") != std::string::npos);

  // Writing to a file twice overwrites; more workers change nothing.
  const auto out = (ws.dir / "results.jsonl").string();
  for (const char* jobs : {"1", "3"}) {
    CHECK(run_cli({"classify", "--dict-phish", ws.p(), "--dict-legit", ws.l(), "--in", ws.test.string(), "--out", out,
                   "--jobs", jobs})
              .code == 0);
    CHECK(testing::read_file(out) == expected);
  }

  const auto level1 = run_cli(
      {"classify", "--dict-phish", ws.p(), "--dict-legit", ws.l(), "--in", ws.test.string(), "--level", "1"});
  const CompressionModel phish1(Label::Phishing, load_dictionary(ws.p()), 1);
  const CompressionModel legit1(Label::NonPhishing, load_dictionary(ws.l()), 1);
  CHECK(level1.out == classification_jsonl(classify_batch(load_corpus(ws.test), phish1, legit1)));
}

TEST_CASE("sweep writes the library report") {
  Workspace ws;
  const auto r = run_cli({"sweep", "--corpus", ws.train.string(), "--holdout", ws.test.string(), "--grid",
                          "log:1e-4:1e-2:5"});
  CHECK(r.code == 0);
  const auto grid = parse_grid_spec("log:1e-4:1e-2:5");
  CHECK(r.out == sweep_report_json(sweep_threshold(load_corpus(ws.train), load_corpus(ws.test), grid)));
  const auto config_line = r.err.substr(r.err.find("run-config: ") + 12);
  const auto config = nlohmann::json::parse(config_line.substr(0, config_line.find('\n')));
  CHECK(config["subcommand"] == "sweep");
  CHECK(config["options"]["grid"] == "log:1e-4:1e-2:5");
  CHECK(config["options"]["level"] == "9");
}

TEST_CASE("features, train and evaluate agree with the library") {
  Workspace ws;
  const auto rows_path = (ws.dir / "rows.jsonl").string();
  const auto thr_path = (ws.dir / "thr.json").string();
  REQUIRE(run_cli({"features", "--in", ws.train.string(), "--out", rows_path, "--fit-thresholds", "--thresholds-out",
                   thr_path, "--dict-phish", ws.p(), "--dict-legit", ws.l()})
              .code == 0);
  const auto train_corpus = load_corpus(ws.train);
  HtmlFeatureOptions options;
  options.non_matching = fit_nonmatching_threshold(train_corpus);
  const CompressionModel phish(Label::Phishing, load_dictionary(ws.p()));
  const CompressionModel legit(Label::NonPhishing, load_dictionary(ws.l()));
  const auto rows = compute_feature_rows(train_corpus, &phish, &legit, options);
  CHECK(testing::read_file(rows_path) == ml::feature_rows_jsonl(rows));
  CHECK(load_threshold(thr_path).similar_threshold == options.non_matching.similar_threshold);

  const auto csv_path = (ws.dir / "rows.csv").string();
  REQUIRE(run_cli({"features", "--in", ws.train.string(), "--out", csv_path, "--thresholds", thr_path, "--dict-phish",
                   ws.p(), "--dict-legit", ws.l()})
              .code == 0);
  CHECK(testing::read_file(csv_path) == ml::feature_rows_csv(rows));

  const auto model_path = (ws.dir / "model.json").string();
  const auto report_path = (ws.dir / "grid.json").string();
  const auto t = run_cli({"train", "--features", rows_path, "--algo", "forest", "--out", model_path, "--report",
                          report_path, "--seed", "7"});
  REQUIRE(t.code == 0);
  const auto data = ml::make_dataset(rows, ml::FeatureMask::parse("all"));
  const auto grid = ml::default_grid(ml::Algorithm::RandomForest);
  const auto [model, report] = ml::train(data, ml::Algorithm::RandomForest, grid, 7);
  CHECK(testing::read_file(model_path) == ml::model_to_json(model));
  CHECK(testing::read_file(report_path) == ml::grid_report_json(report));

  const auto e = run_cli({"evaluate", "--mode", "ml", "--model", model_path, "--test", ws.test.string(),
                          "--dict-phish", ws.p(), "--dict-legit", ws.l(), "--thresholds", thr_path, "--imbalanced",
                          "--ratio", "10", "--iters", "20"});
  REQUIRE(e.code == 0);
  DetectorConfig config;
  config.mode = DetectorMode::Ml;
  config.model = model;
  config.phish_model = phish;
  config.legit_model = legit;
  config.html = options;
  const auto expected = evaluation_json(
      evaluate_pipeline(config, load_corpus(ws.test), ImbalancedOptions{10, 20, 42, 1}));
  CHECK(e.out == expected);

  const auto table = run_cli({"evaluate", "--mode", "compression", "--test", ws.test.string(), "--dict-phish", ws.p(),
                              "--dict-legit", ws.l(), "--format", "table"});
  CHECK(table.code == 0);
  CHECK(table.out.find("Accuracy") != std::string::npos);
  CHECK(run_cli({"evaluate", "--mode", "ml", "--test", ws.test.string()}).code == cli::kExitUsage);
  CHECK(run_cli({"evaluate", "--mode", "magic", "--test", ws.test.string()}).code == cli::kExitUsage);
}

TEST_CASE("config files supply defaults and flags win") {
  Workspace ws;
  const auto config = ws.dir / "run.toml";
  testing::write_file(config, "[build-dict]\nthreshold = 0.02\n");
  REQUIRE(run_cli({"--config", config.string(), "build-dict", "--corpus", ws.train.string(), "--class", "phish",
                   "--out", (ws.dir / "cfg").string()})
              .code == 0);
  const auto from_file = load_dictionary(ws.dir / "cfg.dict");
  CHECK(from_file.threshold == 0.02);
  REQUIRE(run_cli({"--config", config.string(), "build-dict", "--corpus", ws.train.string(), "--class", "phish",
                   "--threshold", "0.001", "--out", (ws.dir / "flag").string()})
              .code == 0);
  CHECK(load_dictionary(ws.dir / "flag.dict").threshold == 0.001);
}

TEST_CASE("the installed executable behaves like the in-process entry point") {
  Workspace ws;
  const auto out = ws.dir / "bin.jsonl";
  const std::string command = std::string(LEXZIP_CLI) + " classify --dict-phish " + ws.p() + " --dict-legit " +
                              ws.l() + " --in " + ws.test.string() + " --out " + out.string() + " 2>/dev/null";
  CHECK(std::system(command.c_str()) == 0);
  const auto in_process =
      run_cli({"classify", "--dict-phish", ws.p(), "--dict-legit", ws.l(), "--in", ws.test.string()});
  CHECK(testing::read_file(out) == in_process.out);
  const std::string bad = std::string(LEXZIP_CLI) + " nosuchcommand >/dev/null 2>&1";
  const int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == cli::kExitUsage);
}

}  // TEST_SUITE
