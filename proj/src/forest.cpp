#include "ndsts/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "ndsts/rng.hpp"

namespace ndsts {

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double sse = 0.0;
};

double mean_of(const std::vector<double>& y, const std::vector<int>& rows) {
  double s = 0;
  for (int r : rows) s += y[r];
  return s / static_cast<double>(rows.size());
}

double sse_of(const std::vector<double>& y, const std::vector<int>& rows) {
  double s = 0, s2 = 0;
  for (int r : rows) {
    s += y[r];
    s2 += y[r] * y[r];
  }
  return s2 - s * s / static_cast<double>(rows.size());
}

// Best threshold for one feature by a sorted sweep with running sums.
bool best_threshold(const Matrix& X, const std::vector<double>& y,
                    const std::vector<int>& rows, int feature,
                    int min_samples_leaf, Split& out) {
  std::vector<std::pair<double, double>> vals;
  vals.reserve(rows.size());
  for (int r : rows) vals.emplace_back(X[r][feature], y[r]);
  std::sort(vals.begin(), vals.end());

  double total = 0, total2 = 0;
  for (const auto& [x, t] : vals) {
    total += t;
    total2 += t * t;
  }
  double left = 0, left2 = 0;
  bool found = false;
  const int n = static_cast<int>(vals.size());
  for (int i = 0; i < n - 1; ++i) {
    left += vals[i].second;
    left2 += vals[i].second * vals[i].second;
    if (vals[i].first == vals[i + 1].first) continue;
    int nl = i + 1, nr = n - nl;
    if (nl < min_samples_leaf || nr < min_samples_leaf) continue;
    double right = total - left, right2 = total2 - left2;
    double sse = (left2 - left * left / nl) + (right2 - right * right / nr);
    if (!found || sse < out.sse) {
      out.feature = feature;
      out.threshold = (vals[i].first + vals[i + 1].first) / 2.0;
      out.sse = sse;
      found = true;
    }
  }
  return found;
}

struct TreeBuilder {
  const Matrix& X;
  const std::vector<double>& y;
  const ForestParams& params;
  Rng& rng;
  int n_features;
  RegressionTree tree;

  int build(std::vector<int>& rows, int depth) {
    int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[id].value = mean_of(y, rows);

    bool can_split =
        static_cast<int>(rows.size()) >= 2 * params.min_samples_leaf &&
        (params.max_depth == 0 || depth < params.max_depth);
    if (!can_split) return id;

    std::vector<int> candidates(n_features);
    std::iota(candidates.begin(), candidates.end(), 0);
    int k = params.features_per_split;
    if (k > 0 && k < n_features) {
      for (int i = 0; i < k; ++i) {
        int j = i + rng.below(n_features - i);
        std::swap(candidates[i], candidates[j]);
      }
      candidates.resize(k);
    }

    double node_sse = sse_of(y, rows);
    Split best;
    bool found = false;
    for (int f : candidates) {
      Split s;
      if (best_threshold(X, y, rows, f, params.min_samples_leaf, s) &&
          (!found || s.sse < best.sse)) {
        best = s;
        found = true;
      }
    }
    if (!found || best.sse >= node_sse) return id;

    std::vector<int> left_rows, right_rows;
    for (int r : rows)
      (X[r][best.feature] <= best.threshold ? left_rows : right_rows)
          .push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    tree.nodes[id].feature = best.feature;
    tree.nodes[id].threshold = best.threshold;
    int l = build(left_rows, depth + 1);
    int r = build(right_rows, depth + 1);
    tree.nodes[id].left = l;
    tree.nodes[id].right = r;
    return id;
  }
};

std::vector<double> ranks_with_ties(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return v[a] < v[b]; });
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  return rank;
}

// Pearson on raw values; 0 with degenerate flag on zero variance.
double pearson_of(const std::vector<double>& a, const std::vector<double>& b,
                  bool& degenerate) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) {
    degenerate = true;
    return 0.0;
  }
  return cov / std::sqrt(va * vb);
}

}  // namespace

double RegressionTree::predict(const std::vector<double>& x) const {
  int id = 0;
  while (nodes[id].feature >= 0)
    id = x[nodes[id].feature] <= nodes[id].threshold ? nodes[id].left
                                                     : nodes[id].right;
  return nodes[id].value;
}

double RandomForest::predict(const std::vector<double>& x) const {
  if (trees.empty()) throw LearnError("empty forest");
  double s = 0;
  for (const RegressionTree& t : trees) s += t.predict(x);
  return s / static_cast<double>(trees.size());
}

std::vector<double> RandomForest::predict_all(const Matrix& X) const {
  std::vector<double> out;
  out.reserve(X.size());
  for (const std::vector<double>& x : X) out.push_back(predict(x));
  return out;
}

RandomForest fit_forest(const Matrix& X, const std::vector<double>& y,
                        const ForestParams& params, std::uint64_t seed,
                        std::uint64_t schema_hash) {
  if (X.size() != y.size()) throw LearnError("feature/target size mismatch");
  if (X.size() < 2) throw LearnError("need at least two training rows");
  if (params.n_trees < 1) throw LearnError("n_trees must be positive");
  const int n = static_cast<int>(X.size());
  const int p = static_cast<int>(X[0].size());
  for (const std::vector<double>& row : X)
    if (static_cast<int>(row.size()) != p)
      throw LearnError("ragged feature matrix");

  RandomForest forest;
  forest.params = params;
  forest.seed = seed;
  forest.schema_hash = schema_hash;
  forest.trees.resize(params.n_trees);
  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng(seed, static_cast<std::uint64_t>(t));
    std::vector<int> rows(n);
    if (params.bootstrap)
      for (int i = 0; i < n; ++i) rows[i] = rng.below(n);
    else
      std::iota(rows.begin(), rows.end(), 0);
    TreeBuilder builder{X, y, params, rng, p, {}};
    builder.build(rows, 0);
    forest.trees[t] = std::move(builder.tree);
  }
  return forest;
}

std::vector<ForestParams> default_grid(std::size_t n_features) {
  const double p = static_cast<double>(n_features);
  int third = static_cast<int>(std::ceil(p / 3.0));
  int root = static_cast<int>(std::ceil(std::sqrt(p)));
  std::vector<int> subsets{third};
  if (root != third) subsets.push_back(root);
  std::vector<ForestParams> grid;
  for (int n_trees : {100, 300})
    for (int depth : {8, 16, 0})
      for (int leaf : {1, 5})
        for (int k : subsets)
          grid.push_back({n_trees, depth, leaf, k, true});
  return grid;
}

ForestParams grid_search(const Matrix& X, const std::vector<double>& y,
                         const std::vector<ForestParams>& grid, int k_folds,
                         std::uint64_t seed) {
  if (grid.empty()) throw LearnError("empty hyperparameter grid");
  if (k_folds < 2) throw LearnError("need at least two folds");
  if (X.size() != y.size()) throw LearnError("feature/target size mismatch");
  if (static_cast<int>(X.size()) < k_folds)
    throw LearnError("fewer rows than folds");

  const int n = static_cast<int>(X.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed, 0x5eedF01d);
  rng.shuffle(order);

  ForestParams best = grid[0];
  double best_mse = 0;
  bool first = true;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    double fold_mse_sum = 0;
    for (int fold = 0; fold < k_folds; ++fold) {
      Matrix train_x, val_x;
      std::vector<double> train_y, val_y;
      for (int i = 0; i < n; ++i) {
        if (i % k_folds == fold) {
          val_x.push_back(X[order[i]]);
          val_y.push_back(y[order[i]]);
        } else {
          train_x.push_back(X[order[i]]);
          train_y.push_back(y[order[i]]);
        }
      }
      std::uint64_t state = seed ^ (gi * 1000003ULL + fold + 1);
      std::uint64_t fit_seed = splitmix64(state);
      RandomForest f = fit_forest(train_x, train_y, grid[gi], fit_seed);
      double mse = 0;
      for (std::size_t i = 0; i < val_x.size(); ++i) {
        double d = f.predict(val_x[i]) - val_y[i];
        mse += d * d;
      }
      fold_mse_sum += mse / static_cast<double>(val_x.size());
    }
    double cv = fold_mse_sum / k_folds;
    if (first || cv < best_mse) {
      best = grid[gi];
      best_mse = cv;
      first = false;
    }
  }
  return best;
}

EvalReport metrics(const std::vector<double>& pred,
                   const std::vector<double>& gold) {
  if (pred.size() != gold.size() || pred.empty())
    throw LearnError("prediction/gold size mismatch");
  EvalReport r;
  r.predictions = pred;
  double mse = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    mse += (pred[i] - gold[i]) * (pred[i] - gold[i]);
  r.mse = mse / static_cast<double>(pred.size());
  r.pearson = pearson_of(pred, gold, r.degenerate);
  r.spearman =
      pearson_of(ranks_with_ties(pred), ranks_with_ties(gold), r.degenerate);
  return r;
}

double baseline_score(const std::string& label) {
  if (label == "yes") return 5.0;
  if (label == "no" || label == "unknown") return 3.0;
  throw LearnError("unknown entailment label: " + label);
}

std::string forest_to_json(const RandomForest& f) {
  nlohmann::json j;
  j["format"] = "ndsts-forest";
  j["version"] = 1;
  j["seed"] = f.seed;
  j["schema_hash"] = f.schema_hash;
  j["params"] = {{"n_trees", f.params.n_trees},
                 {"max_depth", f.params.max_depth},
                 {"min_samples_leaf", f.params.min_samples_leaf},
                 {"features_per_split", f.params.features_per_split},
                 {"bootstrap", f.params.bootstrap}};
  nlohmann::json trees = nlohmann::json::array();
  for (const RegressionTree& t : f.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : t.nodes)
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    trees.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees);
  return j.dump();
}

RandomForest forest_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw LearnError(std::string("bad model file: ") + e.what());
  }
  if (j.value("format", "") != "ndsts-forest" || j.value("version", 0) != 1)
    throw LearnError("unsupported model format");
  RandomForest f;
  try {
    f.seed = j.at("seed").get<std::uint64_t>();
    f.schema_hash = j.at("schema_hash").get<std::uint64_t>();
    const nlohmann::json& p = j.at("params");
    f.params.n_trees = p.at("n_trees").get<int>();
    f.params.max_depth = p.at("max_depth").get<int>();
    f.params.min_samples_leaf = p.at("min_samples_leaf").get<int>();
    f.params.features_per_split = p.at("features_per_split").get<int>();
    f.params.bootstrap = p.at("bootstrap").get<bool>();
    for (const nlohmann::json& tj : j.at("trees")) {
      RegressionTree t;
      for (const nlohmann::json& nj : tj) {
        TreeNode n;
        n.feature = nj.at(0).get<int>();
        n.threshold = nj.at(1).get<double>();
        n.left = nj.at(2).get<int>();
        n.right = nj.at(3).get<int>();
        n.value = nj.at(4).get<double>();
        t.nodes.push_back(n);
      }
      if (t.nodes.empty()) throw LearnError("empty tree in model file");
      f.trees.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw LearnError(std::string("bad model file: ") + e.what());
  }
  if (f.trees.empty()) throw LearnError("model file has no trees");
  return f;
}

}  // namespace ndsts
