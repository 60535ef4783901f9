#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "safespeed/pipeline.hpp"

namespace safespeed {

struct ForestParams {
  int n_estimators = 200;
  int min_samples_leaf = 10;
  int max_depth = 0;  // 0 = unrestricted
  int mtry = 0;       // 0 = ceil(p / 3)
  bool bootstrap = true;
};

// Pre-order node list. Internal nodes route x[feature] <= threshold to the
// left child. Leaves keep the indices of ALL training samples that land in
// them, not just the bootstrap draws; inbag_count records how many in-bag
// samples (with multiplicity) the leaf held when growth stopped.
struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint32_t inbag_count = 0;
  std::vector<std::uint32_t> members;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;

  const TreeNode& leaf_for(std::span<const double> x) const;
};

// Quantile regression forest: CART trees split on variance reduction, each
// query is answered by a weighted empirical distribution over the training
// targets, with per-sample weights from shared-leaf membership.
class Forest {
 public:
  static Forest fit(const std::vector<std::vector<double>>& rows, const std::vector<double>& targets,
                    const ForestParams& params, std::uint64_t master_seed, int threads = 1);

  // Test and persistence constructor from explicit parts.
  Forest(std::vector<Tree> trees, std::vector<double> targets, ForestParams params,
         std::uint64_t master_seed, std::size_t dimension);

  // w_i(x); sums to 1 over all training samples.
  std::vector<double> weights(std::span<const double> x) const;

  // Conditional CDF evaluated at y.
  double cdf(std::span<const double> x, double y) const;

  // Smallest training target whose cumulative weight reaches alpha.
  double predict_quantile(std::span<const double> x, double alpha) const;

  // q25/q50/q75 from a single weights computation.
  Quantiles predict_window(std::span<const double> x) const;

  void save(const std::string& path) const;
  static Forest load(const std::string& path);

  const std::vector<Tree>& trees() const { return trees_; }
  const std::vector<double>& targets() const { return targets_; }
  const ForestParams& params() const { return params_; }
  std::uint64_t master_seed() const { return master_seed_; }
  std::size_t dimension() const { return dimension_; }

 private:
  std::vector<Tree> trees_;
  std::vector<double> targets_;
  ForestParams params_;
  std::uint64_t master_seed_ = 0;
  std::size_t dimension_ = 0;
};

// Quantile of a discrete weighted distribution; shared by Forest and the
// rolling baselines' cumulative-scan needs in tests.
double quantile_from_weighted(std::vector<std::pair<double, double>> value_weight, double alpha);

}  // namespace safespeed
