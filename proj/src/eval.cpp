#include "lexzip/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "lexzip/error.hpp"
#include "lexzip/parallel.hpp"
#include "lexzip/rng.hpp"

namespace lexzip {
namespace {

using json = nlohmann::ordered_json;

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

// Neumaier summation: the result does not depend on how the iterations were
// scheduled, and stays accurate for long runs.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::optional<double> mean_of(const std::vector<MetricsReport>& runs, std::optional<double> MetricsReport::*field) {
  CompensatedSum sum;
  for (const auto& run : runs) {
    const auto& value = run.*field;
    if (!value) return std::nullopt;
    sum.add(*value);
  }
  return sum.value() / static_cast<double>(runs.size());
}

json optional_json(const std::optional<double>& value) { return value ? json(*value) : json(nullptr); }

std::string percent(const std::optional<double>& value) {
  if (!value) return "n/a";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f", *value * 100.0);
  return buffer;
}

std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) out += "  ";
      const auto pad = std::string(width[c] - cells[c].size(), ' ');
      out += c == 0 ? cells[c] + pad : pad + cells[c];
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string out = line(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
  for (const auto& row : rows) out += line(row);
  return out;
}

}  // namespace

MetricsReport metrics_from_counts(const ConfusionCounts& c) {
  MetricsReport r;
  r.counts = c;
  r.tpr = ratio(c.tp, c.tp + c.fn);
  r.fnr = ratio(c.fn, c.tp + c.fn);
  r.fpr = ratio(c.fp, c.fp + c.tn);
  r.tnr = ratio(c.tn, c.fp + c.tn);
  r.accuracy = ratio(c.tp + c.tn, c.total());
  r.precision = ratio(c.tp, c.tp + c.fp);
  if (r.precision && r.tpr) r.f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
  return r;
}

MetricsReport compute_metrics(std::span<const std::pair<Label, Label>> predictions) {
  if (predictions.empty()) throw Error(ErrorCode::EmptyPredictions, "no predictions to score");
  ConfusionCounts c;
  for (const auto& [actual, predicted] : predictions) {
    if (!is_known(actual) || !is_known(predicted)) {
      throw Error(ErrorCode::InvalidArgument, "metrics need known actual and predicted labels");
    }
    const bool positive = actual == Label::Phishing;
    const bool flagged = predicted == Label::Phishing;
    if (positive) {
      ++(flagged ? c.tp : c.fn);
    } else {
      ++(flagged ? c.fp : c.tn);
    }
  }
  return metrics_from_counts(c);
}

std::size_t phishing_sample_size(std::size_t nonphishing, std::size_t ratio) {
  if (ratio == 0) throw Error(ErrorCode::InvalidArgument, "class ratio must be positive");
  return std::max<std::size_t>(1, (nonphishing + ratio - 1) / ratio);
}

std::vector<std::size_t> draw_phishing_subsample(std::size_t pool_size, std::size_t sample_size, std::uint64_t seed,
                                                 std::size_t iteration) {
  if (sample_size > pool_size) {
    throw Error(ErrorCode::PoolTooSmall, "phishing pool of " + std::to_string(pool_size) +
                                             " cannot supply a sample of " + std::to_string(sample_size));
  }
  Rng rng(derive_seed(seed, iteration));
  std::vector<std::size_t> index(pool_size);
  std::iota(index.begin(), index.end(), std::size_t{0});
  for (std::size_t i = 0; i < sample_size; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(pool_size - i));
    std::swap(index[i], index[j]);
  }
  index.resize(sample_size);
  return index;
}

ImbalancedEvalReport imbalanced_eval(std::span<const Label> phishing_pool_predictions,
                                     std::span<const Label> nonphishing_predictions, const ImbalancedOptions& options) {
  if (options.iterations == 0) throw Error(ErrorCode::InvalidArgument, "iterations must be positive");
  if (nonphishing_predictions.empty()) throw Error(ErrorCode::EmptyPredictions, "non-phishing test set is empty");
  const auto sample = phishing_sample_size(nonphishing_predictions.size(), options.ratio);
  if (phishing_pool_predictions.size() < sample) {
    throw Error(ErrorCode::PoolTooSmall, "phishing pool of " + std::to_string(phishing_pool_predictions.size()) +
                                             " cannot supply " + std::to_string(sample) + " samples");
  }

  ConfusionCounts base;
  for (auto predicted : nonphishing_predictions) {
    if (!is_known(predicted)) throw Error(ErrorCode::InvalidArgument, "prediction is Unknown");
    ++(predicted == Label::Phishing ? base.fp : base.tn);
  }

  std::vector<MetricsReport> runs(options.iterations);
  parallel_for(options.iterations, options.jobs, [&](std::size_t it) {
    ConfusionCounts c = base;
    for (auto i : draw_phishing_subsample(phishing_pool_predictions.size(), sample, options.seed, it)) {
      const auto predicted = phishing_pool_predictions[i];
      if (!is_known(predicted)) throw Error(ErrorCode::InvalidArgument, "prediction is Unknown");
      ++(predicted == Label::Phishing ? c.tp : c.fn);
    }
    runs[it] = metrics_from_counts(c);
  });

  ImbalancedEvalReport report;
  report.iterations = options.iterations;
  report.class_ratio = options.ratio;
  report.nonphishing_count = nonphishing_predictions.size();
  report.phishing_sample_size = sample;
  report.seed = options.seed;
  report.mean_tpr = mean_of(runs, &MetricsReport::tpr);
  report.mean_fpr = mean_of(runs, &MetricsReport::fpr);
  report.mean_accuracy = mean_of(runs, &MetricsReport::accuracy);
  report.mean_precision = mean_of(runs, &MetricsReport::precision);
  report.mean_f1 = mean_of(runs, &MetricsReport::f1);
  return report;
}

ImbalancedEvalReport imbalanced_eval(const DocumentClassifier& classifier, const Corpus& phishing_pool,
                                     const Corpus& nonphishing_test, const ImbalancedOptions& options) {
  // Pool size is checked before any classification work is done.
  const auto sample = phishing_sample_size(nonphishing_test.size(), options.ratio);
  if (phishing_pool.size() < sample) {
    throw Error(ErrorCode::PoolTooSmall, "phishing pool of " + std::to_string(phishing_pool.size()) +
                                             " cannot supply " + std::to_string(sample) + " samples");
  }
  auto run = [&](const Corpus& corpus) {
    std::vector<Label> out(corpus.size());
    parallel_for(corpus.size(), options.jobs,
                 [&](std::size_t i) { out[i] = classifier(corpus.documents()[i]); });
    return out;
  };
  const auto phish = run(phishing_pool);
  const auto legit = run(nonphishing_test);
  return imbalanced_eval(phish, legit, options);
}

std::string metrics_json(const MetricsReport& r) {
  json j;
  j["counts"] = {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn}, {"fn", r.counts.fn}};
  j["tpr"] = optional_json(r.tpr);
  j["fpr"] = optional_json(r.fpr);
  j["tnr"] = optional_json(r.tnr);
  j["fnr"] = optional_json(r.fnr);
  j["accuracy"] = optional_json(r.accuracy);
  j["precision"] = optional_json(r.precision);
  j["f1"] = optional_json(r.f1);
  return j.dump(2) + "\n";
}

std::string imbalanced_json(const ImbalancedEvalReport& r) {
  json j;
  j["iterations"] = r.iterations;
  j["class_ratio"] = r.class_ratio;
  j["nonphishing_count"] = r.nonphishing_count;
  j["phishing_sample_size"] = r.phishing_sample_size;
  j["seed"] = r.seed;
  j["mean_tpr"] = optional_json(r.mean_tpr);
  j["mean_fpr"] = optional_json(r.mean_fpr);
  j["mean_accuracy"] = optional_json(r.mean_accuracy);
  j["mean_precision"] = optional_json(r.mean_precision);
  j["mean_f1"] = optional_json(r.mean_f1);
  return j.dump(2) + "\n";
}

std::string metrics_table(std::span<const std::pair<std::string, MetricsReport>> columns) {
  std::vector<std::string> header{"Metric (%)"};
  for (const auto& col : columns) header.push_back(col.first);
  const std::pair<const char*, std::optional<double> MetricsReport::*> rows[] = {
      {"TPR", &MetricsReport::tpr},           {"FPR", &MetricsReport::fpr}, {"Accuracy", &MetricsReport::accuracy},
      {"Precision", &MetricsReport::precision}, {"F1", &MetricsReport::f1},
  };
  std::vector<std::vector<std::string>> cells;
  for (const auto& [name, field] : rows) {
    std::vector<std::string> row{name};
    for (const auto& col : columns) row.push_back(percent(col.second.*field));
    cells.push_back(std::move(row));
  }
  return render_table(header, cells);
}

std::string imbalanced_table(std::span<const std::pair<std::string, ImbalancedEvalReport>> columns) {
  std::vector<std::string> header{"Metric (%)"};
  for (const auto& col : columns) header.push_back(col.first);
  const std::pair<const char*, std::optional<double> ImbalancedEvalReport::*> rows[] = {
      {"TPR", &ImbalancedEvalReport::mean_tpr},
      {"FPR", &ImbalancedEvalReport::mean_fpr},
      {"Accuracy", &ImbalancedEvalReport::mean_accuracy},
      {"Precision", &ImbalancedEvalReport::mean_precision},
      {"F1", &ImbalancedEvalReport::mean_f1},
  };
  std::vector<std::vector<std::string>> cells;
  for (const auto& [name, field] : rows) {
    std::vector<std::string> row{name};
    for (const auto& col : columns) row.push_back(percent(col.second.*field));
    cells.push_back(std::move(row));
  }
  return render_table(header, cells);
}

}  // namespace lexzip
