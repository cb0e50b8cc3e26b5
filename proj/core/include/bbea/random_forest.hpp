#pragma once

#include <cstdint>
#include <vector>

#include "bbea/prediction.hpp"
#include "bbea/rng.hpp"

namespace bbea {

struct RfOptions {
  int n_trees = 50;
  int min_split = 2;  // nodes smaller than this become leaves
};

/// Bagged regression trees. Prediction mean is the across-tree average and
/// the variance is the across-tree sample variance floored at 1e-8.
class FittedRf {
 public:
  static FittedRf fit(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                      Rng& rng, const RfOptions& options = {});

  MeanVar predict(const std::vector<double>& x) const;
  std::vector<MeanVar> predict_batch(const std::vector<std::vector<double>>& xs) const;

  // Raw per-tree outputs; test support.
  std::vector<double> tree_predictions(const std::vector<double>& x) const;

  int n_trees() const { return static_cast<int>(trees_.size()); }
  const std::vector<std::uint64_t>& bootstrap_seeds() const { return bootstrap_seeds_; }

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  struct Tree {
    std::vector<Node> nodes;
    double predict(const std::vector<double>& x) const;
  };

  std::vector<Tree> trees_;
  std::vector<std::uint64_t> bootstrap_seeds_;
  std::size_t n_dims_ = 0;

  static Tree build_tree(const std::vector<std::vector<double>>& X,
                         const std::vector<double>& y, std::vector<int> indices, int min_split);
};

}  // namespace bbea
