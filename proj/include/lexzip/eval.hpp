#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lexzip/corpus.hpp"
#include "lexzip/label.hpp"

namespace lexzip {

/// Positive class is Phishing.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Ratios with a zero denominator are absent rather than 0.
struct MetricsReport {
  ConfusionCounts counts;
  std::optional<double> tpr;
  std::optional<double> fpr;
  std::optional<double> tnr;
  std::optional<double> fnr;
  std::optional<double> accuracy;
  std::optional<double> precision;
  std::optional<double> f1;  // absent unless both precision and tpr are defined
};

MetricsReport metrics_from_counts(const ConfusionCounts& counts);

/// Pairs are (actual, predicted). Throws Error(EmptyPredictions) for an
/// empty list and Error(InvalidArgument) for an Unknown label on either side.
MetricsReport compute_metrics(std::span<const std::pair<Label, Label>> predictions);

struct ImbalancedOptions {
  std::size_t ratio = 100;  // non-phishing : phishing
  std::size_t iterations = 100;
  std::uint64_t seed = 42;
  unsigned jobs = 1;
};

/// Means over all iterations. A mean is absent when its metric was undefined
/// in at least one iteration.
struct ImbalancedEvalReport {
  std::size_t iterations = 0;
  std::size_t class_ratio = 0;
  std::size_t nonphishing_count = 0;
  std::size_t phishing_sample_size = 0;
  std::uint64_t seed = 0;
  std::optional<double> mean_tpr;
  std::optional<double> mean_fpr;
  std::optional<double> mean_accuracy;
  std::optional<double> mean_precision;
  std::optional<double> mean_f1;
};

/// ceil(nonphishing / ratio), at least 1.
std::size_t phishing_sample_size(std::size_t nonphishing, std::size_t ratio);

/// Indices of the phishing documents used in `iteration`: a uniform draw
/// without replacement from the stream derived from (seed, iteration).
std::vector<std::size_t> draw_phishing_subsample(std::size_t pool_size, std::size_t sample_size, std::uint64_t seed,
                                                 std::size_t iteration);

/// Works on predictions that were computed once per document. Throws
/// Error(PoolTooSmall) when the pool cannot supply a sample.
ImbalancedEvalReport imbalanced_eval(std::span<const Label> phishing_pool_predictions,
                                     std::span<const Label> nonphishing_predictions, const ImbalancedOptions& options);

using DocumentClassifier = std::function<Label(const WebDocument&)>;

/// The classifier must be deterministic; with jobs > 1 it is called
/// concurrently and must be thread-safe.
ImbalancedEvalReport imbalanced_eval(const DocumentClassifier& classifier, const Corpus& phishing_pool,
                                     const Corpus& nonphishing_test, const ImbalancedOptions& options);

std::string metrics_json(const MetricsReport& report);
std::string imbalanced_json(const ImbalancedEvalReport& report);

/// Aligned text table: metric rows by named columns, values in percent.
std::string metrics_table(std::span<const std::pair<std::string, MetricsReport>> columns);
std::string imbalanced_table(std::span<const std::pair<std::string, ImbalancedEvalReport>> columns);

}  // namespace lexzip
