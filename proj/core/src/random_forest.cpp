#include "bbea/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bbea {

namespace {
constexpr double kVarFloor = 1e-8;
}

double FittedRf::Tree::predict(const std::vector<double>& x) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

FittedRf::Tree FittedRf::build_tree(const std::vector<std::vector<double>>& X,
                                    const std::vector<double>& y, std::vector<int> indices,
                                    int min_split) {
  Tree tree;
  const std::size_t d = X[0].size();

  struct Frame {
    std::vector<int> idx;
    int node;
  };
  std::vector<Frame> stack;
  tree.nodes.emplace_back();
  stack.push_back({std::move(indices), 0});

  std::vector<int> sorted;
  while (!stack.empty()) {
    Frame frame = std::move(stack.back());
    stack.pop_back();
    auto& idx = frame.idx;
    const auto n = idx.size();

    double sum = 0.0, sumsq = 0.0;
    for (int i : idx) {
      sum += y[static_cast<std::size_t>(i)];
      sumsq += y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
    }
    const double node_mean = sum / static_cast<double>(n);
    const double node_sse = sumsq - sum * sum / static_cast<double>(n);

    auto make_leaf = [&] {
      auto& node = tree.nodes[static_cast<std::size_t>(frame.node)];
      node.feature = -1;
      node.value = node_mean;
    };

    if (n < static_cast<std::size_t>(min_split) || node_sse <= 1e-14) {
      make_leaf();
      continue;
    }

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_sse = node_sse;
    for (std::size_t f = 0; f < d; ++f) {
      sorted = idx;
      std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
        const double va = X[static_cast<std::size_t>(a)][f];
        const double vb = X[static_cast<std::size_t>(b)][f];
        return va != vb ? va < vb : a < b;
      });
      double left_sum = 0.0, left_sumsq = 0.0;
      for (std::size_t k = 1; k < n; ++k) {
        const double yv = y[static_cast<std::size_t>(sorted[k - 1])];
        left_sum += yv;
        left_sumsq += yv * yv;
        const double prev = X[static_cast<std::size_t>(sorted[k - 1])][f];
        const double cur = X[static_cast<std::size_t>(sorted[k])][f];
        if (prev == cur) continue;
        const double right_sum = sum - left_sum;
        const double right_sumsq = sumsq - left_sumsq;
        const double nl = static_cast<double>(k);
        const double nr = static_cast<double>(n - k);
        const double sse =
            (left_sumsq - left_sum * left_sum / nl) + (right_sumsq - right_sum * right_sum / nr);
        if (sse < best_sse - 1e-12) {
          best_sse = sse;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (prev + cur);
        }
      }
    }

    if (best_feature < 0) {
      make_leaf();
      continue;
    }

    std::vector<int> left_idx, right_idx;
    for (int i : idx) {
      if (X[static_cast<std::size_t>(i)][static_cast<std::size_t>(best_feature)] <=
          best_threshold)
        left_idx.push_back(i);
      else
        right_idx.push_back(i);
    }
    if (left_idx.empty() || right_idx.empty()) {
      make_leaf();
      continue;
    }

    const int left_node = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int right_node = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    {
      auto& node = tree.nodes[static_cast<std::size_t>(frame.node)];
      node.feature = best_feature;
      node.threshold = best_threshold;
      node.left = left_node;
      node.right = right_node;
    }
    stack.push_back({std::move(right_idx), right_node});
    stack.push_back({std::move(left_idx), left_node});
  }
  return tree;
}

FittedRf FittedRf::fit(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                       Rng& rng, const RfOptions& options) {
  if (X.size() != y.size() || X.size() < 2)
    throw std::invalid_argument("rf fit needs |X| = |y| >= 2");
  if (options.n_trees < 1) throw std::invalid_argument("rf needs at least one tree");

  FittedRf rf;
  rf.n_dims_ = X[0].size();
  const auto n = X.size();
  for (int t = 0; t < options.n_trees; ++t) {
    const std::uint64_t seed = rng();
    rf.bootstrap_seeds_.push_back(seed);
    Rng tree_rng(seed);
    std::vector<int> indices(n);
    for (auto& i : indices) i = static_cast<int>(rand_below(tree_rng, n));
    rf.trees_.push_back(build_tree(X, y, std::move(indices), options.min_split));
  }
  return rf;
}

std::vector<double> FittedRf::tree_predictions(const std::vector<double>& x) const {
  if (x.size() != n_dims_) throw std::invalid_argument("prediction input dimension mismatch");
  std::vector<double> preds;
  preds.reserve(trees_.size());
  for (const auto& tree : trees_) preds.push_back(tree.predict(x));
  return preds;
}

MeanVar FittedRf::predict(const std::vector<double>& x) const {
  const auto preds = tree_predictions(x);
  double m = 0.0;
  for (double p : preds) m += p;
  m /= static_cast<double>(preds.size());
  double var = 0.0;
  if (preds.size() > 1) {
    for (double p : preds) var += (p - m) * (p - m);
    var /= static_cast<double>(preds.size() - 1);
  }
  return {m, std::max(var, kVarFloor)};
}

std::vector<MeanVar> FittedRf::predict_batch(const std::vector<std::vector<double>>& xs) const {
  std::vector<MeanVar> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(predict(x));
  return out;
}

}  // namespace bbea
