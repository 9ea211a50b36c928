#include "lexzip/ml.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "lexzip/error.hpp"
#include "lexzip/parallel.hpp"
#include "lexzip/rng.hpp"

namespace lexzip::ml {
namespace {

using json = nlohmann::ordered_json;

constexpr std::array<std::string_view, kCanonicalSlots> kSlotNames = {
    "phish_ratio", "legit_ratio", "bad_form", "bad_action_field", "non_matching_urls"};

bool is_binary_slot(std::size_t slot) { return slot >= 2; }

std::optional<std::size_t> slot_index(std::string_view name) {
  for (std::size_t i = 0; i < kSlotNames.size(); ++i) {
    if (kSlotNames[i] == name) return i;
  }
  return std::nullopt;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    parts.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto result = std::from_chars(text.data(), end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    throw Error(ErrorCode::Parse, "invalid number for " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

std::optional<int> parse_label_cell(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text == "1" || text == "phishing") return 1;
  if (text == "0" || text == "non_phishing") return 0;
  throw Error(ErrorCode::Parse, "invalid label '" + std::string(text) + "'");
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double hyper(const Hyperparams& hp, const std::string& key, double fallback) {
  auto it = hp.find(key);
  return it == hp.end() ? fallback : it->second;
}

std::size_t hyper_count(const Hyperparams& hp, const std::string& key, std::size_t fallback) {
  const double v = hyper(hp, key, static_cast<double>(fallback));
  if (!(v >= 0) || v != std::floor(v)) {
    throw Error(ErrorCode::InvalidArgument, "hyperparameter " + key + " must be a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

Eigen::VectorXi take_rows(const Eigen::VectorXi& y, const std::vector<std::size_t>& rows) {
  Eigen::VectorXi out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(rows[i]));
  return out;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

json tree_json(const TreeModel& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.value}));
  return nodes;
}

TreeModel tree_from_json(const json& j) {
  TreeModel tree;
  for (const auto& n : j) {
    tree.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                          n.at(4).get<double>()});
  }
  const auto size = static_cast<int>(tree.nodes.size());
  for (const auto& n : tree.nodes) {
    if (n.feature >= 0 && (n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size)) {
      throw Error(ErrorCode::Parse, "tree node references a missing child");
    }
  }
  return tree;
}

}  // namespace

const std::array<std::string_view, kCanonicalSlots>& canonical_feature_names() { return kSlotNames; }

// ---- FeatureMask -----------------------------------------------------------

FeatureMask FeatureMask::parse(std::string_view spec) {
  const std::string s = trim(spec);
  if (s == "all") return FeatureMask();
  if (s == "ratios") return FeatureMask({true, true, false, false, false});
  if (s == "html") return FeatureMask({false, false, true, true, true});
  std::array<bool, kCanonicalSlots> active{};
  for (const auto& part : split(s, ',')) {
    const auto name = trim(part);
    auto slot = slot_index(name);
    if (!slot) throw Error(ErrorCode::InvalidArgument, "unknown feature '" + name + "'");
    active[*slot] = true;
  }
  FeatureMask mask(active);
  if (mask.arity() == 0) throw Error(ErrorCode::InvalidArgument, "feature mask selects no features");
  return mask;
}

std::size_t FeatureMask::arity() const {
  return static_cast<std::size_t>(std::count(active_.begin(), active_.end(), true));
}

std::vector<std::size_t> FeatureMask::slots() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < kCanonicalSlots; ++i) {
    if (active_[i]) out.push_back(i);
  }
  return out;
}

std::string FeatureMask::to_string() const {
  if (*this == FeatureMask()) return "all";
  if (*this == FeatureMask({true, true, false, false, false})) return "ratios";
  if (*this == FeatureMask({false, false, true, true, true})) return "html";
  std::string out;
  for (auto slot : slots()) {
    if (!out.empty()) out += ',';
    out += kSlotNames[slot];
  }
  return out;
}

// ---- feature files ---------------------------------------------------------

std::string feature_rows_jsonl(const std::vector<FeatureRow>& rows) {
  std::string out;
  for (const auto& row : rows) {
    json j;
    j["doc_id"] = row.doc_id;
    j["label"] = row.label ? json(*row.label) : json(nullptr);
    for (std::size_t s = 0; s < kCanonicalSlots; ++s) {
      if (!row.values[s]) continue;
      if (is_binary_slot(s)) {
        j[std::string(kSlotNames[s])] = static_cast<int>(*row.values[s]);
      } else {
        j[std::string(kSlotNames[s])] = *row.values[s];
      }
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string feature_rows_csv(const std::vector<FeatureRow>& rows) {
  std::string out = "doc_id,label";
  for (auto name : kSlotNames) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (const auto& row : rows) {
    if (row.doc_id.find_first_of(",\"\n") != std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "doc id not representable in CSV: " + row.doc_id);
    }
    out += row.doc_id;
    out += ',';
    if (row.label) out += std::to_string(*row.label);
    for (std::size_t s = 0; s < kCanonicalSlots; ++s) {
      out += ',';
      if (!row.values[s]) continue;
      out += is_binary_slot(s) ? std::to_string(static_cast<int>(*row.values[s])) : format_double(*row.values[s]);
    }
    out += '\n';
  }
  return out;
}

void write_feature_rows(const std::vector<FeatureRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << (path.extension() == ".csv" ? feature_rows_csv(rows) : feature_rows_jsonl(rows));
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

std::vector<FeatureRow> read_feature_rows(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::vector<FeatureRow> rows;
  std::string line;
  std::size_t line_no = 0;

  if (path.extension() == ".csv") {
    if (!std::getline(in, line)) return rows;
    ++line_no;
    const auto header = split(trim(line), ',');
    std::vector<std::optional<std::size_t>> column_slot;
    std::optional<std::size_t> id_col, label_col;
    for (std::size_t c = 0; c < header.size(); ++c) {
      const auto name = trim(header[c]);
      if (name == "doc_id") id_col = c;
      if (name == "label") label_col = c;
      column_slot.push_back(slot_index(name));
    }
    if (!id_col) throw Error(ErrorCode::Parse, path.string() + ": CSV header lacks doc_id");
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      const auto cells = split(trim(line), ',');
      if (cells.size() != header.size()) {
        throw Error(ErrorCode::Parse, path.string() + ":" + std::to_string(line_no) + ": wrong number of columns");
      }
      FeatureRow row;
      row.doc_id = cells[*id_col];
      if (label_col) row.label = parse_label_cell(trim(cells[*label_col]));
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto cell = trim(cells[c]);
        if (column_slot[c] && !cell.empty()) row.values[*column_slot[c]] = parse_double(cell, header[c]);
      }
      rows.push_back(std::move(row));
    }
    return rows;
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Parse, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    FeatureRow row;
    row.doc_id = j.at("doc_id").get<std::string>();
    if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
      row.label = it->is_string() ? parse_label_cell(it->get<std::string>()) : std::optional<int>(it->get<int>());
      if (*row.label != 0 && *row.label != 1) throw Error(ErrorCode::Parse, "label must be 0 or 1");
    }
    for (std::size_t s = 0; s < kCanonicalSlots; ++s) {
      auto it = j.find(std::string(kSlotNames[s]));
      if (it == j.end() || it->is_null()) continue;
      row.values[s] = it->is_boolean() ? (it->get<bool>() ? 1.0 : 0.0) : it->get<double>();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::VectorXd select_features(const FeatureRow& row, const FeatureMask& mask) {
  const auto slots = mask.slots();
  Eigen::VectorXd x(static_cast<Eigen::Index>(slots.size()));
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto slot = slots[i];
    const auto& value = row.values[slot];
    if (!value) {
      throw Error(ErrorCode::InvalidArgument,
                  "row " + row.doc_id + " lacks feature " + std::string(kSlotNames[slot]));
    }
    if (!std::isfinite(*value)) {
      throw Error(ErrorCode::InvalidArgument, "row " + row.doc_id + " has a non-finite " + std::string(kSlotNames[slot]));
    }
    if (is_binary_slot(slot) && *value != 0.0 && *value != 1.0) {
      throw Error(ErrorCode::InvalidArgument,
                  "row " + row.doc_id + ": " + std::string(kSlotNames[slot]) + " must be 0 or 1");
    }
    x(static_cast<Eigen::Index>(i)) = *value;
  }
  return x;
}

Dataset make_dataset(std::span<const FeatureRow> rows, const FeatureMask& mask) {
  Dataset data;
  data.mask = mask;
  data.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(mask.arity()));
  data.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (!row.label) throw Error(ErrorCode::InvalidArgument, "row " + row.doc_id + " has no label");
    data.features.row(static_cast<Eigen::Index>(i)) = select_features(row, mask).transpose();
    data.labels(static_cast<Eigen::Index>(i)) = *row.label;
    data.ids.push_back(row.doc_id);
  }
  return data;
}

// ---- algorithms -------------------------------------------------------------

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::LogisticRegression: return "logistic_regression";
    case Algorithm::KNearestNeighbors: return "k_nearest_neighbors";
    case Algorithm::GaussianNaiveBayes: return "gaussian_naive_bayes";
    case Algorithm::DecisionTree: return "decision_tree";
    case Algorithm::RandomForest: return "random_forest";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  static const std::pair<std::string_view, Algorithm> kNames[] = {
      {"logistic_regression", Algorithm::LogisticRegression}, {"logistic", Algorithm::LogisticRegression},
      {"k_nearest_neighbors", Algorithm::KNearestNeighbors},  {"knn", Algorithm::KNearestNeighbors},
      {"gaussian_naive_bayes", Algorithm::GaussianNaiveBayes}, {"naive_bayes", Algorithm::GaussianNaiveBayes},
      {"decision_tree", Algorithm::DecisionTree},             {"tree", Algorithm::DecisionTree},
      {"random_forest", Algorithm::RandomForest},             {"forest", Algorithm::RandomForest},
  };
  for (const auto& [key, algorithm] : kNames) {
    if (key == name) return algorithm;
  }
  return std::nullopt;
}

std::vector<Hyperparams> default_grid(Algorithm algorithm) {
  std::vector<Hyperparams> grid;
  switch (algorithm) {
    case Algorithm::LogisticRegression:
      for (double l2 : {0.01, 0.1, 1.0, 10.0}) grid.push_back({{"l2", l2}});
      break;
    case Algorithm::KNearestNeighbors:
      for (double k : {1.0, 3.0, 5.0, 7.0}) grid.push_back({{"k", k}});
      break;
    case Algorithm::GaussianNaiveBayes:
      grid.push_back({{"var_smoothing", 1e-9}});
      break;
    case Algorithm::DecisionTree:
      for (double depth : {3.0, 5.0, 10.0, 0.0}) grid.push_back({{"max_depth", depth}});
      break;
    case Algorithm::RandomForest:
      for (double trees : {50.0, 100.0}) {
        for (double depth : {5.0, 10.0, 0.0}) grid.push_back({{"trees", trees}, {"max_depth", depth}});
      }
      break;
  }
  return grid;
}

double logistic_loss(const Eigen::VectorXd& weights, double bias, const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                     double l2) {
  const Eigen::VectorXd z = (x * weights).array() + bias;
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) total += softplus(z(i)) - y(i) * z(i);
  return total / static_cast<double>(x.rows()) + 0.5 * l2 * weights.squaredNorm();
}

void logistic_gradient(const Eigen::VectorXd& weights, double bias, const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                       double l2, Eigen::VectorXd& grad_weights, double& grad_bias) {
  const Eigen::VectorXd z = (x * weights).array() + bias;
  Eigen::VectorXd residual(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) residual(i) = sigmoid(z(i)) - y(i);
  const double n = static_cast<double>(x.rows());
  grad_weights = x.transpose() * residual / n + l2 * weights;
  grad_bias = residual.sum() / n;
}

double LogisticModel::score(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd scaled = (x - scale_min).cwiseQuotient(scale_range);
  return sigmoid(weights.dot(scaled) + bias);
}

LogisticModel fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const LogisticOptions& options) {
  if (x.rows() == 0) throw Error(ErrorCode::InsufficientData, "logistic regression needs at least one sample");
  if (!(options.l2 >= 0)) throw Error(ErrorCode::InvalidArgument, "l2 strength must be non-negative");
  LogisticModel model;
  model.scale_min = x.colwise().minCoeff().transpose();
  model.scale_range = x.colwise().maxCoeff().transpose() - model.scale_min;
  for (Eigen::Index j = 0; j < model.scale_range.size(); ++j) {
    if (model.scale_range(j) <= 0) model.scale_range(j) = 1.0;
  }
  const Eigen::MatrixXd scaled =
      (x.rowwise() - model.scale_min.transpose()).array().rowwise() / model.scale_range.transpose().array();

  // Scaled rows lie in [0,1]^d, so 0.25 * (d + 1) bounds the curvature of the
  // mean log-loss and this fixed step never overshoots.
  const double step = 1.0 / (0.25 * static_cast<double>(x.cols() + 1) + options.l2);
  model.weights = Eigen::VectorXd::Zero(x.cols());
  Eigen::VectorXd grad_w;
  double grad_b = 0.0;
  for (model.iterations = 0; model.iterations < options.max_iterations; ++model.iterations) {
    logistic_gradient(model.weights, model.bias, scaled, y, options.l2, grad_w, grad_b);
    if (std::sqrt(grad_w.squaredNorm() + grad_b * grad_b) < options.tolerance) break;
    model.weights -= step * grad_w;
    model.bias -= step * grad_b;
  }
  return model;
}

double KnnModel::score(const Eigen::VectorXd& x) const {
  const auto n = static_cast<std::size_t>(points.rows());
  std::vector<std::pair<double, std::size_t>> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    order[i] = {(points.row(static_cast<Eigen::Index>(i)).transpose() - x).squaredNorm(), i};
  }
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 1)), n);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kk), order.end());
  int positives = 0;
  for (std::size_t i = 0; i < kk; ++i) positives += labels(static_cast<Eigen::Index>(order[i].second));
  return static_cast<double>(positives) / static_cast<double>(kk);
}

double GaussianNbModel::score(const Eigen::VectorXd& x) const {
  double joint[2];
  for (int c = 0; c < 2; ++c) {
    double ll = log_priors(c);
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double var = variances(c, j);
      const double d = x(j) - means(c, j);
      ll -= 0.5 * (std::log(2.0 * M_PI * var) + d * d / var);
    }
    joint[c] = ll;
  }
  return sigmoid(joint[1] - joint[0]);
}

GaussianNbModel fit_gaussian_nb(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, double var_smoothing) {
  const Eigen::Index d = x.cols();
  GaussianNbModel model;
  model.means = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, d);
  model.variances = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, d);
  const Eigen::RowVectorXd overall_mean = x.colwise().mean();
  const double max_var = (x.rowwise() - overall_mean).array().square().colwise().mean().maxCoeff();
  const double epsilon = var_smoothing * (max_var > 0 ? max_var : 1.0);
  const double n = static_cast<double>(x.rows());
  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> rows;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (y(i) == c) rows.push_back(static_cast<std::size_t>(i));
    }
    if (rows.empty()) throw Error(ErrorCode::DegenerateData, "naive Bayes needs samples of both classes");
    const Eigen::MatrixXd sub = take_rows(x, rows);
    const Eigen::RowVectorXd mean = sub.colwise().mean();
    model.means.row(c) = mean;
    model.variances.row(c) = (sub.rowwise() - mean).array().square().colwise().mean() + epsilon;
    model.log_priors(c) = std::log(static_cast<double>(rows.size()) / n);
  }
  return model;
}

// ---- harness ----------------------------------------------------------------

Prediction predict(const TrainedModel& model, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != model.mask.arity()) {
    throw Error(ErrorCode::ArityMismatch, "model expects " + std::to_string(model.mask.arity()) +
                                              " features, got " + std::to_string(x.size()));
  }
  const double score = std::visit([&](const auto& m) { return m.score(x); }, model.parameters);
  return {score >= 0.5 ? 1 : 0, score};
}

Prediction predict(const TrainedModel& model, const FeatureRow& row) {
  return predict(model, select_features(row, model.mask));
}

TrainedModel fit_model(const Dataset& data, Algorithm algorithm, const Hyperparams& hp, std::uint64_t seed) {
  if (data.rows() == 0) throw Error(ErrorCode::InsufficientData, "empty training set");
  TrainedModel model;
  model.algorithm = algorithm;
  model.hyperparams = hp;
  model.mask = data.mask;
  model.seed = seed;
  switch (algorithm) {
    case Algorithm::LogisticRegression: {
      LogisticOptions options;
      options.l2 = hyper(hp, "l2", options.l2);
      model.parameters = fit_logistic(data.features, data.labels, options);
      break;
    }
    case Algorithm::KNearestNeighbors: {
      const auto k = hyper_count(hp, "k", 5);
      if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be positive");
      model.parameters = KnnModel{data.features, data.labels, static_cast<int>(k)};
      break;
    }
    case Algorithm::GaussianNaiveBayes:
      model.parameters = fit_gaussian_nb(data.features, data.labels, hyper(hp, "var_smoothing", 1e-9));
      break;
    case Algorithm::DecisionTree: {
      TreeParams params;
      params.max_depth = hyper_count(hp, "max_depth", 0);
      params.max_features = hyper_count(hp, "max_features", 0);
      std::vector<std::size_t> sample(static_cast<std::size_t>(data.rows()));
      std::iota(sample.begin(), sample.end(), std::size_t{0});
      model.parameters = fit_tree(data.features, data.labels, sample, params, seed);
      break;
    }
    case Algorithm::RandomForest: {
      ForestParams params;
      params.trees = hyper_count(hp, "trees", 100);
      params.tree.max_depth = hyper_count(hp, "max_depth", 0);
      const auto sqrt_d = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(data.cols()))));
      params.tree.max_features = hyper_count(hp, "max_features", std::max<std::size_t>(1, sqrt_d));
      params.bootstrap = hyper(hp, "bootstrap", 1.0) != 0.0;
      model.parameters = fit_forest(data.features, data.labels, params, seed);
      break;
    }
  }
  return model;
}

std::vector<std::size_t> kfold_split(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InsufficientData, "k-fold needs k >= 2");
  if (labels.size() < k) {
    throw Error(ErrorCode::InsufficientData,
                std::to_string(labels.size()) + " samples cannot fill " + std::to_string(k) + " folds");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::vector<std::size_t> fold(labels.size());
  std::size_t next = 0;
  for (auto& [label, members] : by_class) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(static_cast<std::int64_t>(label))));
    rng.shuffle(members);
    for (auto index : members) {
      fold[index] = next;
      next = (next + 1) % k;
    }
  }
  return fold;
}

std::pair<TrainedModel, GridSearchReport> train(const Dataset& data, Algorithm algorithm,
                                                std::span<const Hyperparams> grid, std::uint64_t seed,
                                                std::size_t folds, unsigned jobs) {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "hyperparameter grid is empty");
  std::size_t positives = 0;
  for (Eigen::Index i = 0; i < data.labels.size(); ++i) {
    const int label = data.labels(i);
    if (label != 0 && label != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
    positives += static_cast<std::size_t>(label);
  }
  const std::size_t negatives = static_cast<std::size_t>(data.rows()) - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorCode::DegenerateData, "training data contains a single class");
  }
  if (positives < folds || negatives < folds) {
    throw Error(ErrorCode::InsufficientData, "need at least " + std::to_string(folds) + " samples per class, have " +
                                                 std::to_string(positives) + " phishing and " +
                                                 std::to_string(negatives) + " non-phishing");
  }

  const std::vector<int> labels(data.labels.data(), data.labels.data() + data.labels.size());
  const auto assignment = kfold_split(labels, folds, seed);
  std::vector<std::vector<std::size_t>> train_rows(folds), test_rows(folds);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    for (std::size_t f = 0; f < folds; ++f) (assignment[i] == f ? test_rows : train_rows)[f].push_back(i);
  }

  GridSearchReport report;
  report.fold_seed = seed;
  report.candidates.resize(grid.size());
  std::vector<double> accuracy(grid.size() * folds);
  parallel_for(accuracy.size(), jobs, [&](std::size_t task) {
    const std::size_t c = task / folds;
    const std::size_t f = task % folds;
    Dataset fold_train{take_rows(data.features, train_rows[f]), take_rows(data.labels, train_rows[f]), {}, data.mask};
    const auto model = fit_model(fold_train, algorithm, grid[c], derive_seed(seed, f + 1));
    std::size_t correct = 0;
    for (auto row : test_rows[f]) {
      const auto r = static_cast<Eigen::Index>(row);
      correct += predict(model, Eigen::VectorXd(data.features.row(r).transpose())).label == data.labels(r);
    }
    accuracy[task] = static_cast<double>(correct) / static_cast<double>(test_rows[f].size());
  });

  for (std::size_t c = 0; c < grid.size(); ++c) {
    auto& candidate = report.candidates[c];
    candidate.hyperparams = grid[c];
    candidate.fold_accuracy.assign(accuracy.begin() + static_cast<std::ptrdiff_t>(c * folds),
                                   accuracy.begin() + static_cast<std::ptrdiff_t>((c + 1) * folds));
    candidate.mean_accuracy = std::accumulate(candidate.fold_accuracy.begin(), candidate.fold_accuracy.end(), 0.0) /
                              static_cast<double>(folds);
    if (candidate.mean_accuracy > report.candidates[report.best_index].mean_accuracy) report.best_index = c;
  }
  report.best = grid[report.best_index];
  return {fit_model(data, algorithm, report.best, seed), std::move(report)};
}

// ---- persistence ------------------------------------------------------------

std::string model_to_json(const TrainedModel& model) {
  json j;
  j["format"] = "lexzip-model";
  j["version"] = 1;
  j["algorithm"] = std::string(to_string(model.algorithm));
  j["hyperparams"] = json::object();
  for (const auto& [key, value] : model.hyperparams) j["hyperparams"][key] = value;
  j["feature_mask"] = json::array();
  for (auto slot : model.mask.slots()) j["feature_mask"].push_back(std::string(kSlotNames[slot]));
  j["seed"] = model.seed;

  json params;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LogisticModel>) {
          params["weights"] = vector_json(m.weights);
          params["bias"] = m.bias;
          params["scale_min"] = vector_json(m.scale_min);
          params["scale_range"] = vector_json(m.scale_range);
          params["iterations"] = m.iterations;
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          params["k"] = m.k;
          params["points"] = json::array();
          for (Eigen::Index i = 0; i < m.points.rows(); ++i) {
            params["points"].push_back(vector_json(m.points.row(i).transpose()));
          }
          params["labels"] = json::array();
          for (Eigen::Index i = 0; i < m.labels.size(); ++i) params["labels"].push_back(m.labels(i));
        } else if constexpr (std::is_same_v<T, GaussianNbModel>) {
          params["log_priors"] = {m.log_priors(0), m.log_priors(1)};
          params["means"] = {vector_json(m.means.row(0).transpose()), vector_json(m.means.row(1).transpose())};
          params["variances"] = {vector_json(m.variances.row(0).transpose()),
                                 vector_json(m.variances.row(1).transpose())};
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          params["nodes"] = tree_json(m);
        } else {
          params["trees"] = json::array();
          for (const auto& tree : m.trees) params["trees"].push_back(tree_json(tree));
        }
      },
      model.parameters);
  j["parameters"] = std::move(params);
  return j.dump(2) + "\n";
}

TrainedModel model_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "lexzip-model") throw Error(ErrorCode::Parse, "not a lexzip model document");
    TrainedModel model;
    const auto name = j.at("algorithm").get<std::string>();
    auto algorithm = parse_algorithm(name);
    if (!algorithm) throw Error(ErrorCode::Parse, "unknown algorithm '" + name + "'");
    model.algorithm = *algorithm;
    for (const auto& [key, value] : j.at("hyperparams").items()) model.hyperparams[key] = value.get<double>();
    std::array<bool, kCanonicalSlots> active{};
    for (const auto& slot : j.at("feature_mask")) {
      auto index = slot_index(slot.get<std::string>());
      if (!index) throw Error(ErrorCode::Parse, "unknown feature in mask");
      active[*index] = true;
    }
    model.mask = FeatureMask(active);
    if (model.mask.arity() == 0) throw Error(ErrorCode::Parse, "empty feature mask");
    model.seed = j.at("seed").get<std::uint64_t>();
    const auto d = static_cast<Eigen::Index>(model.mask.arity());

    const json& p = j.at("parameters");
    switch (model.algorithm) {
      case Algorithm::LogisticRegression: {
        LogisticModel m;
        m.weights = vector_from_json(p.at("weights"));
        m.bias = p.at("bias").get<double>();
        m.scale_min = vector_from_json(p.at("scale_min"));
        m.scale_range = vector_from_json(p.at("scale_range"));
        m.iterations = p.value("iterations", std::size_t{0});
        if (m.weights.size() != d || m.scale_min.size() != d || m.scale_range.size() != d) {
          throw Error(ErrorCode::Parse, "logistic parameters do not match the feature mask");
        }
        model.parameters = std::move(m);
        break;
      }
      case Algorithm::KNearestNeighbors: {
        KnnModel m;
        m.k = p.at("k").get<int>();
        const auto& points = p.at("points");
        const auto& labels = p.at("labels");
        if (points.size() != labels.size() || points.empty()) throw Error(ErrorCode::Parse, "malformed k-NN data");
        m.points.resize(static_cast<Eigen::Index>(points.size()), d);
        m.labels.resize(static_cast<Eigen::Index>(labels.size()));
        for (std::size_t i = 0; i < points.size(); ++i) {
          const auto row = vector_from_json(points[i]);
          if (row.size() != d) throw Error(ErrorCode::Parse, "k-NN point does not match the feature mask");
          m.points.row(static_cast<Eigen::Index>(i)) = row.transpose();
          m.labels(static_cast<Eigen::Index>(i)) = labels[i].get<int>();
        }
        model.parameters = std::move(m);
        break;
      }
      case Algorithm::GaussianNaiveBayes: {
        GaussianNbModel m;
        m.means.resize(2, d);
        m.variances.resize(2, d);
        for (int c = 0; c < 2; ++c) {
          const auto mean = vector_from_json(p.at("means").at(static_cast<std::size_t>(c)));
          const auto var = vector_from_json(p.at("variances").at(static_cast<std::size_t>(c)));
          if (mean.size() != d || var.size() != d) throw Error(ErrorCode::Parse, "naive Bayes shape mismatch");
          m.means.row(c) = mean.transpose();
          m.variances.row(c) = var.transpose();
          m.log_priors(c) = p.at("log_priors").at(static_cast<std::size_t>(c)).get<double>();
        }
        model.parameters = std::move(m);
        break;
      }
      case Algorithm::DecisionTree:
        model.parameters = tree_from_json(p.at("nodes"));
        break;
      case Algorithm::RandomForest: {
        ForestModel m;
        for (const auto& tree : p.at("trees")) m.trees.push_back(tree_from_json(tree));
        if (m.trees.empty()) throw Error(ErrorCode::Parse, "forest has no trees");
        model.parameters = std::move(m);
        break;
      }
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed model document: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << model_to_json(model);
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str());
}

std::string grid_report_json(const GridSearchReport& report) {
  json j;
  j["fold_seed"] = report.fold_seed;
  j["best_index"] = report.best_index;
  j["best"] = json::object();
  for (const auto& [key, value] : report.best) j["best"][key] = value;
  j["candidates"] = json::array();
  for (const auto& c : report.candidates) {
    json entry;
    entry["hyperparams"] = json::object();
    for (const auto& [key, value] : c.hyperparams) entry["hyperparams"][key] = value;
    entry["fold_accuracy"] = c.fold_accuracy;
    entry["mean_accuracy"] = c.mean_accuracy;
    j["candidates"].push_back(std::move(entry));
  }
  return j.dump(2) + "\n";
}

}  // namespace lexzip::ml
