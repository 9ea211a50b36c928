#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexzip/compressor.hpp"
#include "lexzip/corpus.hpp"
#include "lexzip/eval.hpp"
#include "lexzip/html_features.hpp"
#include "lexzip/ml.hpp"

namespace lexzip {

enum class DetectorMode { Compression, Html, Ml };

std::string_view to_string(DetectorMode mode);
std::optional<DetectorMode> parse_detector_mode(std::string_view name);

/// Everything a detector needs at prediction time. Compression mode needs
/// both compression models; ml mode needs a trained model, plus the
/// compression models when its mask uses ratio slots. Html mode flags a page
/// when any of the three heuristics fires.
struct DetectorConfig {
  DetectorMode mode = DetectorMode::Compression;
  std::optional<CompressionModel> phish_model;
  std::optional<CompressionModel> legit_model;
  HtmlFeatureOptions html;
  std::optional<ml::TrainedModel> model;
  unsigned jobs = 1;
};

/// One feature row per document, in corpus order. Ratio slots are filled only
/// when both compression models are given; labels come from the documents.
std::vector<ml::FeatureRow> compute_feature_rows(const Corpus& corpus, const CompressionModel* phish_model,
                                                 const CompressionModel* legit_model,
                                                 const HtmlFeatureOptions& options, unsigned jobs = 1);

/// Throws Error(InvalidArgument) when the config lacks a required component.
Label predict_document(const DetectorConfig& config, const WebDocument& doc);
std::vector<Label> predict_corpus(const DetectorConfig& config, const Corpus& corpus);

struct EvaluationReport {
  DetectorMode mode = DetectorMode::Compression;
  std::optional<std::string> feature_mask;  // ml mode only
  std::size_t test_size = 0;
  MetricsReport metrics;
  std::optional<ImbalancedEvalReport> imbalanced;
};

/// Runs the detector on every labeled document of `test`. With
/// `imbalanced` set, the phishing documents of `test` serve as the pool for
/// the repeated down-sampling protocol against its non-phishing documents.
EvaluationReport evaluate_pipeline(const DetectorConfig& config, const Corpus& test,
                                   const std::optional<ImbalancedOptions>& imbalanced = std::nullopt);

std::string evaluation_json(const EvaluationReport& report);

}  // namespace lexzip
