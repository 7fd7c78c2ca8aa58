#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ndsts {

struct LearnError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Matrix = std::vector<std::vector<double>>;

// feature < 0 marks a leaf carrying the mean target in value.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;
  double predict(const std::vector<double>& x) const;
};

struct ForestParams {
  int n_trees = 100;
  int max_depth = 0;           // 0 = unlimited
  int min_samples_leaf = 1;
  int features_per_split = 0;  // 0 = all features
  bool bootstrap = true;

  bool operator==(const ForestParams&) const = default;
};

struct RandomForest {
  ForestParams params;
  std::uint64_t seed = 0;
  std::uint64_t schema_hash = 0;
  std::vector<RegressionTree> trees;

  double predict(const std::vector<double>& x) const;
  std::vector<double> predict_all(const Matrix& X) const;
};

RandomForest fit_forest(const Matrix& X, const std::vector<double>& y,
                        const ForestParams& params, std::uint64_t seed,
                        std::uint64_t schema_hash = 0);

std::vector<ForestParams> default_grid(std::size_t n_features);

// Exhaustive k-fold CV by MSE; ties keep the earliest grid point.
ForestParams grid_search(const Matrix& X, const std::vector<double>& y,
                         const std::vector<ForestParams>& grid, int k_folds,
                         std::uint64_t seed);

struct EvalReport {
  double pearson = 0.0;
  double spearman = 0.0;
  double mse = 0.0;
  bool degenerate = false;  // zero variance made a correlation undefined
  std::vector<double> predictions;
};

EvalReport metrics(const std::vector<double>& pred,
                   const std::vector<double>& gold);

double baseline_score(const std::string& label);

std::string forest_to_json(const RandomForest& f);
RandomForest forest_from_json(const std::string& text);

}  // namespace ndsts
