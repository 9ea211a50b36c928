#include "lexzip/pipeline.hpp"

#include <json.hpp>

#include "lexzip/error.hpp"
#include "lexzip/parallel.hpp"

namespace lexzip {
namespace {

using json = nlohmann::ordered_json;

void require_compression(const DetectorConfig& config) {
  if (!config.phish_model || !config.legit_model) {
    throw Error(ErrorCode::InvalidArgument, "detector needs both phishing and non-phishing dictionaries");
  }
}

ml::FeatureRow feature_row(const WebDocument& doc, const CompressionModel* phish, const CompressionModel* legit,
                           const HtmlFeatureOptions& options, bool want_ratios, bool want_html) {
  ml::FeatureRow row;
  row.doc_id = doc.id;
  if (is_known(doc.label)) row.label = doc.label == Label::Phishing ? 1 : 0;
  if (want_ratios) {
    const auto result = classify(doc, *phish, *legit);
    row.values[0] = result.phishing_outcome.ratio;
    row.values[1] = result.nonphishing_outcome.ratio;
  }
  if (want_html) {
    const auto html = compute_html_features(doc, options);
    row.values[2] = html.bad_form ? 1.0 : 0.0;
    row.values[3] = html.bad_action_field ? 1.0 : 0.0;
    row.values[4] = html.non_matching_urls ? 1.0 : 0.0;
  }
  return row;
}

}  // namespace

std::string_view to_string(DetectorMode mode) {
  switch (mode) {
    case DetectorMode::Compression: return "compression";
    case DetectorMode::Html: return "html";
    case DetectorMode::Ml: return "ml";
  }
  return "unknown";
}

std::optional<DetectorMode> parse_detector_mode(std::string_view name) {
  if (name == "compression") return DetectorMode::Compression;
  if (name == "html") return DetectorMode::Html;
  if (name == "ml") return DetectorMode::Ml;
  return std::nullopt;
}

std::vector<ml::FeatureRow> compute_feature_rows(const Corpus& corpus, const CompressionModel* phish_model,
                                                 const CompressionModel* legit_model,
                                                 const HtmlFeatureOptions& options, unsigned jobs) {
  if ((phish_model == nullptr) != (legit_model == nullptr)) {
    throw Error(ErrorCode::InvalidArgument, "ratio features need both dictionaries");
  }
  const bool ratios = phish_model != nullptr;
  std::vector<ml::FeatureRow> rows(corpus.size());
  parallel_for(corpus.size(), jobs, [&](std::size_t i) {
    rows[i] = feature_row(corpus.documents()[i], phish_model, legit_model, options, ratios, true);
  });
  return rows;
}

Label predict_document(const DetectorConfig& config, const WebDocument& doc) {
  switch (config.mode) {
    case DetectorMode::Compression:
      require_compression(config);
      return classify(doc, *config.phish_model, *config.legit_model).predicted;
    case DetectorMode::Html: {
      const auto f = compute_html_features(doc, config.html);
      return f.bad_form || f.bad_action_field || f.non_matching_urls ? Label::Phishing : Label::NonPhishing;
    }
    case DetectorMode::Ml: {
      if (!config.model) throw Error(ErrorCode::InvalidArgument, "ml detector needs a trained model");
      const auto& mask = config.model->mask;
      const bool ratios = mask.active(0) || mask.active(1);
      const bool html = mask.active(2) || mask.active(3) || mask.active(4);
      if (ratios) require_compression(config);
      const auto row = feature_row(doc, ratios ? &*config.phish_model : nullptr,
                                   ratios ? &*config.legit_model : nullptr, config.html, ratios, html);
      return ml::predict(*config.model, row).label == 1 ? Label::Phishing : Label::NonPhishing;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown detector mode");
}

std::vector<Label> predict_corpus(const DetectorConfig& config, const Corpus& corpus) {
  std::vector<Label> out(corpus.size());
  parallel_for(corpus.size(), config.jobs,
               [&](std::size_t i) { out[i] = predict_document(config, corpus.documents()[i]); });
  return out;
}

EvaluationReport evaluate_pipeline(const DetectorConfig& config, const Corpus& test,
                                   const std::optional<ImbalancedOptions>& imbalanced) {
  if (test.empty()) throw Error(ErrorCode::EmptyCorpus, "test corpus is empty");
  const auto predicted = predict_corpus(config, test);

  EvaluationReport report;
  report.mode = config.mode;
  if (config.mode == DetectorMode::Ml && config.model) report.feature_mask = config.model->mask.to_string();

  std::vector<std::pair<Label, Label>> pairs;
  std::vector<Label> phish_pool, legit;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto actual = test.documents()[i].label;
    if (!is_known(actual)) continue;
    pairs.emplace_back(actual, predicted[i]);
    (actual == Label::Phishing ? phish_pool : legit).push_back(predicted[i]);
  }
  report.test_size = pairs.size();
  report.metrics = compute_metrics(pairs);
  if (imbalanced) report.imbalanced = imbalanced_eval(phish_pool, legit, *imbalanced);
  return report;
}

std::string evaluation_json(const EvaluationReport& report) {
  json j;
  j["mode"] = std::string(to_string(report.mode));
  j["feature_mask"] = report.feature_mask ? json(*report.feature_mask) : json(nullptr);
  j["test_size"] = report.test_size;
  j["metrics"] = json::parse(metrics_json(report.metrics));
  j["imbalanced"] = report.imbalanced ? json::parse(imbalanced_json(*report.imbalanced)) : json(nullptr);
  return j.dump(2) + "\n";
}

}  // namespace lexzip
