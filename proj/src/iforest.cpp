#include "uba/iforest.hpp"

#include <algorithm>
#include <cmath>

namespace uba {

namespace {

constexpr double kEulerMascheroni = 0.5772156649;

struct GrowContext {
  const DataMatrix& data;
  std::vector<std::uint32_t>& sample;
  int height_limit;
  SplitMix64& rng;
  std::vector<TreeNode>& nodes;
  std::vector<std::uint32_t>& candidates;  // scratch: splittable attributes
};

// Recursively grows the subtree over sample[begin, end); returns node index.
std::int32_t grow_node(GrowContext& ctx, std::size_t begin, std::size_t end,
                       int depth) {
  const std::size_t count = end - begin;
  auto make_external = [&]() {
    std::int32_t id = static_cast<std::int32_t>(ctx.nodes.size());
    TreeNode node;
    node.size = static_cast<std::uint32_t>(count);
    node.depth = depth;
    ctx.nodes.push_back(node);
    return id;
  };
  if (depth >= ctx.height_limit || count <= 1) return make_external();

  // Attributes where at least one representable value lies strictly between
  // the subsample min and max; anything narrower cannot shrink both sides.
  ctx.candidates.clear();
  std::vector<double> lows(ctx.data.cols), highs(ctx.data.cols);
  for (std::size_t a = 0; a < ctx.data.cols; ++a) {
    double lo = ctx.data.at(ctx.sample[begin], a);
    double hi = lo;
    for (std::size_t i = begin + 1; i < end; ++i) {
      double v = ctx.data.at(ctx.sample[i], a);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    lows[a] = lo;
    highs[a] = hi;
    if (std::nextafter(lo, hi) < hi) {
      ctx.candidates.push_back(static_cast<std::uint32_t>(a));
    }
  }
  if (ctx.candidates.empty()) return make_external();

  std::uint32_t attr =
      ctx.candidates[ctx.rng.uniform_index(ctx.candidates.size())];
  double lo = lows[attr];
  double hi = highs[attr];
  double split = ctx.rng.uniform(lo, hi);
  if (split <= lo) split = std::nextafter(lo, hi);

  auto mid_it = std::partition(
      ctx.sample.begin() + begin, ctx.sample.begin() + end,
      [&](std::uint32_t row) { return ctx.data.at(row, attr) < split; });
  std::size_t mid = static_cast<std::size_t>(mid_it - ctx.sample.begin());
  // lo < split < hi guarantees both sides are non-empty.

  std::int32_t id = static_cast<std::int32_t>(ctx.nodes.size());
  TreeNode node;
  node.attribute = static_cast<std::int32_t>(attr);
  node.split = split;
  node.depth = depth;
  ctx.nodes.push_back(node);
  std::int32_t left = grow_node(ctx, begin, mid, depth + 1);
  std::int32_t right = grow_node(ctx, mid, end, depth + 1);
  ctx.nodes[id].left = left;
  ctx.nodes[id].right = right;
  return id;
}

}  // namespace

double c_factor(std::uint64_t n) {
  if (n <= 1) return 0.0;
  if (n == 2) return 1.0;
  double nd = static_cast<double>(n);
  return 2.0 * (std::log(nd - 1.0) + kEulerMascheroni) -
         2.0 * (nd - 1.0) / nd;
}

double anomaly_score_from_path(double mean_path, double c_psi) {
  if (c_psi <= 0.0) return 0.5;
  return std::exp2(-mean_path / c_psi);
}

IsolationTree IsolationTree::grow(const DataMatrix& data,
                                  std::span<const std::uint32_t> sample,
                                  int height_limit, SplitMix64& rng) {
  IsolationTree tree;
  std::vector<std::uint32_t> rows(sample.begin(), sample.end());
  std::vector<std::uint32_t> scratch;
  GrowContext ctx{data, rows, height_limit, rng, tree.nodes_, scratch};
  grow_node(ctx, 0, rows.size(), 0);
  return tree;
}

double IsolationTree::path_length(std::span<const double> x) const {
  std::int32_t id = 0;
  int edges = 0;
  for (;;) {
    const TreeNode& node = nodes_[id];
    if (node.is_external()) {
      return edges + c_factor(node.size);
    }
    id = x[node.attribute] < node.split ? node.left : node.right;
    ++edges;
  }
}

IsolationForest IsolationForest::fit(const DataMatrix& data, ForestConfig cfg) {
  const std::size_t n = data.rows();
  if (n == 0 || data.cols == 0) {
    throw std::invalid_argument("isolation forest needs a non-empty matrix");
  }
  if (cfg.tree_count < 1) {
    throw std::invalid_argument("tree_count must be >= 1");
  }
  if (cfg.subsample_size < 1) {
    throw std::invalid_argument("subsample_size must be >= 1");
  }
  for (double v : data.values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("isolation forest input must be finite");
    }
  }

  IsolationForest forest;
  forest.config_ = cfg;
  forest.attribute_count_ = data.cols;
  forest.effective_subsample_ =
      static_cast<int>(std::min<std::size_t>(cfg.subsample_size, n));
  forest.height_limit_ = static_cast<int>(
      std::ceil(std::log2(static_cast<double>(forest.effective_subsample_))));

  std::vector<std::uint32_t> indices(n);
  forest.trees_.reserve(cfg.tree_count);
  for (int t = 0; t < cfg.tree_count; ++t) {
    SplitMix64 rng(SplitMix64::mix(cfg.seed, static_cast<std::uint64_t>(t)));
    for (std::uint32_t i = 0; i < n; ++i) indices[i] = i;
    // Partial Fisher-Yates: the first psi entries become the subsample.
    for (int i = 0; i < forest.effective_subsample_; ++i) {
      std::size_t j = i + rng.uniform_index(n - i);
      std::swap(indices[i], indices[j]);
    }
    forest.trees_.push_back(IsolationTree::grow(
        data,
        std::span<const std::uint32_t>(indices.data(),
                                       forest.effective_subsample_),
        forest.height_limit_, rng));
  }
  return forest;
}

double IsolationForest::expected_path_length(std::span<const double> x) const {
  if (x.size() != attribute_count_) {
    throw std::invalid_argument("instance arity does not match the forest");
  }
  double sum = 0;
  for (const auto& tree : trees_) sum += tree.path_length(x);
  return sum / static_cast<double>(trees_.size());
}

double IsolationForest::anomaly_score(std::span<const double> x) const {
  return anomaly_score_from_path(expected_path_length(x),
                                 c_factor(effective_subsample_));
}

std::vector<double> IsolationForest::score_all(const DataMatrix& data) const {
  std::vector<double> scores;
  scores.reserve(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    scores.push_back(anomaly_score(data.row(i)));
  }
  return scores;
}

nlohmann::ordered_json IsolationForest::to_json() const {
  nlohmann::ordered_json j;
  j["tree_count"] = config_.tree_count;
  j["subsample_size"] = effective_subsample_;
  j["height_limit"] = height_limit_;
  j["seed"] = config_.seed;
  j["attributes"] = attribute_count_;
  nlohmann::ordered_json trees = nlohmann::ordered_json::array();
  for (const auto& tree : trees_) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto& node : tree.nodes()) {
      nlohmann::ordered_json n;
      if (node.is_external()) {
        n["size"] = node.size;
      } else {
        n["attr"] = node.attribute;
        n["split"] = node.split;
        n["left"] = node.left;
        n["right"] = node.right;
      }
      nodes.push_back(std::move(n));
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  j["trees"] = std::move(trees);
  return j;
}

}  // namespace uba
