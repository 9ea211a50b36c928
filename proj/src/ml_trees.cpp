#include <algorithm>
#include <numeric>

#include "lexzip/error.hpp"
#include "lexzip/ml.hpp"
#include "lexzip/rng.hpp"

namespace lexzip::ml {
namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // size-weighted Gini of the two children
};

double gini_weighted(std::size_t positives, std::size_t count) {
  if (count == 0) return 0.0;
  const double n = static_cast<double>(count);
  const double p = static_cast<double>(positives) / n;
  return n * 2.0 * p * (1.0 - p);
}

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const TreeParams& params, std::uint64_t seed)
      : x_(x), y_(y), params_(params), rng_(seed) {}

  TreeModel build(std::vector<std::size_t> sample) {
    grow(std::move(sample), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t> sample, std::size_t depth) {
    std::size_t positives = 0;
    for (auto i : sample) positives += static_cast<std::size_t>(y_(static_cast<Eigen::Index>(i)) != 0);
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes[static_cast<std::size_t>(index)].value =
        sample.empty() ? 0.0 : static_cast<double>(positives) / static_cast<double>(sample.size());

    const bool pure = positives == 0 || positives == sample.size();
    const bool depth_reached = params_.max_depth > 0 && depth >= params_.max_depth;
    if (pure || depth_reached || sample.size() < std::max<std::size_t>(2, params_.min_samples_split)) return index;

    const auto split = best_split(sample);
    if (split.feature < 0) return index;

    std::vector<std::size_t> left, right;
    for (auto i : sample) {
      (x_(static_cast<Eigen::Index>(i), split.feature) <= split.threshold ? left : right).push_back(i);
    }
    sample.clear();
    sample.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return index;
  }

  std::vector<int> candidate_features() {
    const auto d = static_cast<std::size_t>(x_.cols());
    std::vector<int> features(d);
    std::iota(features.begin(), features.end(), 0);
    if (params_.max_features == 0 || params_.max_features >= d) return features;
    for (std::size_t i = 0; i < params_.max_features; ++i) {
      const auto j = i + static_cast<std::size_t>(rng_.below(d - i));
      std::swap(features[i], features[j]);
    }
    features.resize(params_.max_features);
    std::sort(features.begin(), features.end());
    return features;
  }

  Split best_split(const std::vector<std::size_t>& sample) {
    Split best;
    const std::size_t n = sample.size();
    std::size_t total_pos = 0;
    for (auto i : sample) total_pos += static_cast<std::size_t>(y_(static_cast<Eigen::Index>(i)) != 0);

    std::vector<std::pair<double, int>> column(n);
    for (int f : candidate_features()) {
      for (std::size_t k = 0; k < n; ++k) {
        const auto row = static_cast<Eigen::Index>(sample[k]);
        column[k] = {x_(row, f), y_(row) != 0 ? 1 : 0};
      }
      std::sort(column.begin(), column.end());
      std::size_t left_pos = 0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        left_pos += static_cast<std::size_t>(column[k].second);
        const double a = column[k].first;
        const double b = column[k + 1].first;
        if (!(a < b)) continue;
        const double impurity =
            gini_weighted(left_pos, k + 1) + gini_weighted(total_pos - left_pos, n - k - 1);
        if (best.feature < 0 || impurity < best.impurity) {
          double threshold = a + (b - a) / 2.0;
          if (!(threshold < b)) threshold = a;  // adjacent doubles
          best = {f, threshold, impurity};
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXi& y_;
  TreeParams params_;
  Rng rng_;
  TreeModel tree_;
};

}  // namespace

double TreeModel::score(const Eigen::VectorXd& x) const {
  if (nodes.empty()) throw Error(ErrorCode::InvalidArgument, "tree has no nodes");
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& node = nodes[i];
    if (node.feature >= x.size()) throw Error(ErrorCode::ArityMismatch, "tree splits on a missing feature");
    i = static_cast<std::size_t>(x(node.feature) <= node.threshold ? node.left : node.right);
  }
  return nodes[i].value;
}

TreeModel fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, std::span<const std::size_t> sample,
                   const TreeParams& params, std::uint64_t seed) {
  if (sample.empty()) throw Error(ErrorCode::InsufficientData, "decision tree needs at least one sample");
  for (auto i : sample) {
    if (i >= static_cast<std::size_t>(x.rows())) throw Error(ErrorCode::InvalidArgument, "sample index out of range");
  }
  return TreeBuilder(x, y, params, seed).build({sample.begin(), sample.end()});
}

double ForestModel::score(const Eigen::VectorXd& x) const {
  if (trees.empty()) throw Error(ErrorCode::InvalidArgument, "forest has no trees");
  double total = 0.0;
  for (const auto& tree : trees) total += tree.score(x);
  return total / static_cast<double>(trees.size());
}

ForestModel fit_forest(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const ForestParams& params,
                       std::uint64_t seed) {
  if (params.trees == 0) throw Error(ErrorCode::InvalidArgument, "forest needs at least one tree");
  const auto n = static_cast<std::size_t>(x.rows());
  if (n == 0) throw Error(ErrorCode::InsufficientData, "random forest needs at least one sample");
  ForestModel forest;
  forest.trees.reserve(params.trees);
  std::vector<std::size_t> sample(n);
  for (std::size_t t = 0; t < params.trees; ++t) {
    if (params.bootstrap) {
      Rng draw(derive_seed(seed, 2 * t));
      for (auto& s : sample) s = static_cast<std::size_t>(draw.below(n));
    } else {
      std::iota(sample.begin(), sample.end(), std::size_t{0});
    }
    forest.trees.push_back(fit_tree(x, y, sample, params.tree, derive_seed(seed, 2 * t + 1)));
  }
  return forest;
}

}  // namespace lexzip::ml
