#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace lexzip::ml {

inline constexpr std::size_t kCanonicalSlots = 5;

/// Canonical feature order: phish_ratio, legit_ratio, bad_form,
/// bad_action_field, non_matching_urls.
const std::array<std::string_view, kCanonicalSlots>& canonical_feature_names();

/// Which canonical slots a model consumes.
class FeatureMask {
 public:
  FeatureMask() { active_.fill(true); }
  explicit FeatureMask(std::array<bool, kCanonicalSlots> active) : active_(active) {}

  /// "all", "ratios", "html", or a comma-separated list of slot names.
  static FeatureMask parse(std::string_view spec);

  bool active(std::size_t slot) const { return active_[slot]; }
  std::size_t arity() const;
  std::vector<std::size_t> slots() const;
  std::string to_string() const;

  bool operator==(const FeatureMask&) const = default;

 private:
  std::array<bool, kCanonicalSlots> active_{};
};

/// One row of a feature file. Slots that were not computed are absent.
struct FeatureRow {
  std::string doc_id;
  std::array<std::optional<double>, kCanonicalSlots> values;
  std::optional<int> label;  // 1 = phishing, 0 = non-phishing
};

/// JSON Lines unless the path ends in ".csv".
void write_feature_rows(const std::vector<FeatureRow>& rows, const std::filesystem::path& path);
std::vector<FeatureRow> read_feature_rows(const std::filesystem::path& path);
std::string feature_rows_jsonl(const std::vector<FeatureRow>& rows);
std::string feature_rows_csv(const std::vector<FeatureRow>& rows);

/// Row-major design matrix plus binary labels.
struct Dataset {
  Eigen::MatrixXd features;
  Eigen::VectorXi labels;
  std::vector<std::string> ids;
  FeatureMask mask;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index cols() const { return features.cols(); }
};

/// Selects the masked slots of labeled rows. Throws Error(InvalidArgument) if
/// a selected slot is missing or non-finite, or a binary slot is not 0/1.
Dataset make_dataset(std::span<const FeatureRow> rows, const FeatureMask& mask);

/// Masked slots of one row as a vector.
Eigen::VectorXd select_features(const FeatureRow& row, const FeatureMask& mask);

enum class Algorithm { LogisticRegression, KNearestNeighbors, GaussianNaiveBayes, DecisionTree, RandomForest };

std::string_view to_string(Algorithm algorithm);
/// Accepts the long names above in snake_case and the short forms
/// logistic, knn, naive_bayes, tree, forest.
std::optional<Algorithm> parse_algorithm(std::string_view name);

/// Hyperparameter assignment. A max_depth of 0 means unbounded; a
/// max_features of 0 means all features.
using Hyperparams = std::map<std::string, double>;

std::vector<Hyperparams> default_grid(Algorithm algorithm);

// ---- logistic regression -------------------------------------------------

/// Mean log-loss plus (l2 / 2) * |w|^2; the bias is not penalized.
double logistic_loss(const Eigen::VectorXd& weights, double bias, const Eigen::MatrixXd& x,
                     const Eigen::VectorXi& y, double l2);

/// Analytic gradient of logistic_loss.
void logistic_gradient(const Eigen::VectorXd& weights, double bias, const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                       double l2, Eigen::VectorXd& grad_weights, double& grad_bias);

struct LogisticModel {
  Eigen::VectorXd weights;  // in min-max scaled space
  double bias = 0.0;
  Eigen::VectorXd scale_min;
  Eigen::VectorXd scale_range;
  std::size_t iterations = 0;

  double score(const Eigen::VectorXd& x) const;
};

struct LogisticOptions {
  double l2 = 1.0;
  std::size_t max_iterations = 10000;
  double tolerance = 1e-6;  // on the gradient norm
};

LogisticModel fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const LogisticOptions& options);

// ---- k-nearest neighbours -------------------------------------------------

struct KnnModel {
  Eigen::MatrixXd points;
  Eigen::VectorXi labels;
  int k = 5;

  /// Share of positives among the k nearest training points (Euclidean;
  /// equal distances ordered by training index).
  double score(const Eigen::VectorXd& x) const;
};

// ---- Gaussian naive Bayes -------------------------------------------------

struct GaussianNbModel {
  Eigen::Matrix<double, 2, Eigen::Dynamic> means;
  Eigen::Matrix<double, 2, Eigen::Dynamic> variances;
  Eigen::Vector2d log_priors;

  double score(const Eigen::VectorXd& x) const;
};

/// Each class variance is inflated by var_smoothing times the largest
/// feature variance, keeping constant features usable.
GaussianNbModel fit_gaussian_nb(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, double var_smoothing = 1e-9);

// ---- trees ----------------------------------------------------------------

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;   // x[feature] <= threshold
  int right = -1;
  double value = 0.0;  // share of positives reaching the node
};

struct TreeParams {
  std::size_t max_depth = 0;     // 0 = unbounded
  std::size_t max_features = 0;  // 0 = all
  std::size_t min_samples_split = 2;
};

/// CART tree with Gini impurity. Split candidates are midpoints between
/// consecutive distinct values; ties go to the lowest feature index, then the
/// lowest threshold.
struct TreeModel {
  std::vector<TreeNode> nodes;

  double score(const Eigen::VectorXd& x) const;
};

/// `sample` lists training row indices (repeats allowed for bootstrap). The
/// rng is only consulted when max_features < number of columns.
TreeModel fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, std::span<const std::size_t> sample,
                   const TreeParams& params, std::uint64_t seed);

struct ForestParams {
  std::size_t trees = 100;
  TreeParams tree;
  bool bootstrap = true;
};

struct ForestModel {
  std::vector<TreeModel> trees;

  /// Mean of the trees' leaf probabilities.
  double score(const Eigen::VectorXd& x) const;
};

/// Tree t draws from its own stream derived from (seed, t).
ForestModel fit_forest(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const ForestParams& params,
                       std::uint64_t seed);

// ---- training harness -----------------------------------------------------

using ModelParameters = std::variant<LogisticModel, KnnModel, GaussianNbModel, TreeModel, ForestModel>;

struct TrainedModel {
  Algorithm algorithm = Algorithm::LogisticRegression;
  Hyperparams hyperparams;
  FeatureMask mask;
  std::uint64_t seed = 42;
  ModelParameters parameters;
};

struct Prediction {
  int label = 0;  // 1 iff score >= 0.5
  double score = 0.0;
};

/// Throws Error(ArityMismatch) when x does not match the mask arity.
Prediction predict(const TrainedModel& model, const Eigen::VectorXd& x);
Prediction predict(const TrainedModel& model, const FeatureRow& row);

/// Fits one hyperparameter assignment on the whole dataset.
TrainedModel fit_model(const Dataset& data, Algorithm algorithm, const Hyperparams& hyperparams, std::uint64_t seed);

/// Stratified fold id (0..k-1) per sample: each class is shuffled with the
/// seed and dealt round-robin, continuing the rotation across classes, so
/// fold sizes differ by at most one overall and per class. Throws
/// Error(InsufficientData) when k < 2 or n < k.
std::vector<std::size_t> kfold_split(std::span<const int> labels, std::size_t k, std::uint64_t seed);

struct CandidateScore {
  Hyperparams hyperparams;
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
};

struct GridSearchReport {
  std::vector<CandidateScore> candidates;
  std::size_t best_index = 0;
  Hyperparams best;
  std::uint64_t fold_seed = 0;
};

/// Stratified k-fold CV for each grid candidate; the candidate with the
/// highest mean accuracy (first in grid order on ties) is refit on all data.
/// Throws Error(DegenerateData) for a single-class dataset and
/// Error(InsufficientData) with fewer than `folds` samples per class.
std::pair<TrainedModel, GridSearchReport> train(const Dataset& data, Algorithm algorithm,
                                                std::span<const Hyperparams> grid, std::uint64_t seed,
                                                std::size_t folds = 3, unsigned jobs = 1);

std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(std::string_view text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

std::string grid_report_json(const GridSearchReport& report);

}  // namespace lexzip::ml
