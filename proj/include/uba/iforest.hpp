#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "uba/rng.hpp"

namespace uba {

// Row-major numeric matrix, the scoring input. Column subsets of the feature
// matrix are copied into one of these per scoring run.
struct DataMatrix {
  std::size_t cols = 0;
  std::vector<double> values;

  std::size_t rows() const { return cols == 0 ? 0 : values.size() / cols; }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols, cols};
  }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

struct ForestConfig {
  int tree_count = 100;
  int subsample_size = 256;  // clamped to the number of rows at fit time
  std::uint64_t seed = 0;
};

// Average unsuccessful-search path length of a binary search tree of n
// nodes: 0 for n <= 1, exactly 1 for n = 2 (the ln-based approximation is
// only valid from n = 3), otherwise 2(ln(n-1) + gamma) - 2(n-1)/n.
double c_factor(std::uint64_t n);

// 2^(-mean_path / c_psi); 0.5 when c_psi is 0 (a single-row fit carries no
// isolation information).
double anomaly_score_from_path(double mean_path, double c_psi);

struct TreeNode {
  std::int32_t attribute = -1;  // -1 marks an external node
  double split = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint32_t size = 0;  // subsample rows that reached this external node
  int depth = 0;

  bool is_external() const { return attribute < 0; }
};

class IsolationTree {
 public:
  // Grows a tree over the given subsample rows. Splits pick a uniformly
  // random attribute with a non-degenerate value range and a split point
  // strictly inside that range; recursion stops at the height limit, at a
  // single row, or when every attribute is degenerate.
  static IsolationTree grow(const DataMatrix& data,
                            std::span<const std::uint32_t> sample,
                            int height_limit, SplitMix64& rng);

  double path_length(std::span<const double> x) const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }

 private:
  std::vector<TreeNode> nodes_;
};

class IsolationForest {
 public:
  // Throws std::invalid_argument on an empty or non-finite input. Tree i is
  // seeded with SplitMix64::mix(cfg.seed, i), so construction order (or
  // parallel construction) cannot change the result.
  static IsolationForest fit(const DataMatrix& data, ForestConfig cfg);

  double expected_path_length(std::span<const double> x) const;
  double anomaly_score(std::span<const double> x) const;
  std::vector<double> score_all(const DataMatrix& data) const;

  int effective_subsample() const { return effective_subsample_; }
  int height_limit() const { return height_limit_; }
  std::size_t attribute_count() const { return attribute_count_; }
  const std::vector<IsolationTree>& trees() const { return trees_; }

  nlohmann::ordered_json to_json() const;

 private:
  std::vector<IsolationTree> trees_;
  ForestConfig config_;
  int effective_subsample_ = 0;
  int height_limit_ = 0;
  std::size_t attribute_count_ = 0;
};

}  // namespace uba
