#include "safespeed/qrf.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

#include "safespeed/csv.hpp"
#include "safespeed/rng.hpp"

namespace safespeed {

namespace {

struct SplitCandidate {
  int feature = -1;
  double threshold = 0;
  double gain = -1;
};

// Grows one tree on a bootstrap resample. Split search maximises
// sum_left^2/n_left + sum_right^2/n_right (equivalent to minimising the
// within-node squared error); ties keep the lowest feature, then the lowest
// threshold, so growth is independent of evaluation order.
class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::vector<double>>& cols, const std::vector<double>& y,
              const ForestParams& params, int mtry, std::uint64_t seed)
      : cols_(cols), y_(y), params_(params), mtry_(mtry), rng_(seed) {}

  Tree run() {
    const std::size_t n = y_.size();
    std::vector<std::uint32_t> inbag;
    inbag.reserve(n);
    if (params_.bootstrap) {
      for (std::size_t i = 0; i < n; ++i)
        inbag.push_back(static_cast<std::uint32_t>(rng_.below(n)));
      std::sort(inbag.begin(), inbag.end());
    } else {
      inbag.resize(n);
      std::iota(inbag.begin(), inbag.end(), 0u);
    }
    scratch_.reserve(n);
    grow(std::move(inbag), 0);
    route_all(n);
    Tree tree;
    tree.nodes = std::move(nodes_);
    return tree;
  }

 private:
  int grow(std::vector<std::uint32_t> idx, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    const std::size_t m = idx.size();
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    const bool depth_ok = params_.max_depth == 0 || depth < params_.max_depth;

    SplitCandidate best;
    if (depth_ok && m >= 2 * min_leaf) best = find_split(idx);
    if (best.feature < 0) {
      nodes_[id].feature = -1;
      nodes_[id].inbag_count = static_cast<std::uint32_t>(m);
      return id;
    }

    std::vector<std::uint32_t> left_idx;
    std::vector<std::uint32_t> right_idx;
    left_idx.reserve(m);
    right_idx.reserve(m);
    const std::vector<double>& col = cols_[static_cast<std::size_t>(best.feature)];
    for (std::uint32_t i : idx) (col[i] <= best.threshold ? left_idx : right_idx).push_back(i);
    idx = {};

    nodes_[id].feature = best.feature;
    nodes_[id].threshold = best.threshold;
    // nodes_ may reallocate inside the recursion, so write through the index.
    const int left = grow(std::move(left_idx), depth + 1);
    nodes_[id].left = left;
    const int right = grow(std::move(right_idx), depth + 1);
    nodes_[id].right = right;
    return id;
  }

  SplitCandidate find_split(const std::vector<std::uint32_t>& idx) {
    const std::size_t p = cols_.size();
    const int k = std::min(mtry_, static_cast<int>(p));
    std::vector<int> pool(p);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < k; ++i) {
      const std::size_t j =
          static_cast<std::size_t>(i) + rng_.below(p - static_cast<std::size_t>(i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    std::vector<int> chosen(pool.begin(), pool.begin() + k);
    std::sort(chosen.begin(), chosen.end());

    const std::size_t m = idx.size();
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    SplitCandidate best;
    for (int f : chosen) {
      const std::vector<double>& col = cols_[static_cast<std::size_t>(f)];
      scratch_.clear();
      for (std::uint32_t i : idx) scratch_.emplace_back(col[i], y_[i]);
      std::sort(scratch_.begin(), scratch_.end());
      if (scratch_.front().first == scratch_.back().first) continue;
      double total = 0;
      for (const auto& xy : scratch_) total += xy.second;
      double sum_left = 0;
      for (std::size_t j = 0; j + 1 < m; ++j) {
        sum_left += scratch_[j].second;
        if (scratch_[j].first == scratch_[j + 1].first) continue;
        const std::size_t n_left = j + 1;
        if (n_left < min_leaf || m - n_left < min_leaf) continue;
        const double sum_right = total - sum_left;
        const double gain = sum_left * sum_left / static_cast<double>(n_left) +
                            sum_right * sum_right / static_cast<double>(m - n_left);
        if (gain > best.gain) {
          // Midpoint, nudged down if rounding would reach the right value.
          double thr = scratch_[j].first + (scratch_[j + 1].first - scratch_[j].first) / 2;
          if (!(thr < scratch_[j + 1].first)) thr = scratch_[j].first;
          best = {f, thr, gain};
        }
      }
    }
    return best;
  }

  // Leaf membership is over all training samples, not just the resample.
  void route_all(std::size_t n) {
    for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(n); ++i) {
      int cur = 0;
      while (!nodes_[static_cast<std::size_t>(cur)].is_leaf()) {
        const TreeNode& nd = nodes_[static_cast<std::size_t>(cur)];
        cur = cols_[static_cast<std::size_t>(nd.feature)][i] <= nd.threshold ? nd.left : nd.right;
      }
      nodes_[static_cast<std::size_t>(cur)].members.push_back(i);
    }
  }

  const std::vector<std::vector<double>>& cols_;
  const std::vector<double>& y_;
  const ForestParams& params_;
  int mtry_;
  Rng rng_;
  std::vector<TreeNode> nodes_;
  std::vector<std::pair<double, double>> scratch_;
};

void validate_params(const ForestParams& params) {
  if (params.n_estimators < 1) throw std::invalid_argument("n_estimators must be at least 1");
  if (params.min_samples_leaf < 1)
    throw std::invalid_argument("min_samples_leaf must be at least 1");
  if (params.max_depth < 0) throw std::invalid_argument("max_depth must be non-negative");
  if (params.mtry < 0) throw std::invalid_argument("mtry must be non-negative");
}

void append_double17(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

double read_double(std::istream& in, const char* what) {
  std::string tok;
  if (!(in >> tok)) throw std::runtime_error(std::string("model error: truncated ") + what);
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw std::runtime_error(std::string("model error: bad ") + what + " '" + tok + "'");
  return v;
}

long long read_int(std::istream& in, const char* what) {
  long long v = 0;
  if (!(in >> v)) throw std::runtime_error(std::string("model error: truncated ") + what);
  return v;
}

std::string read_tag(std::istream& in, const char* what) {
  std::string tok;
  if (!(in >> tok)) throw std::runtime_error(std::string("model error: truncated ") + what);
  return tok;
}

int read_node(std::istream& in, Tree& tree, std::size_t dimension, std::size_t n_targets) {
  const std::string tag = read_tag(in, "node");
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (tag == "I") {
    const long long f = read_int(in, "feature");
    if (f < 0 || f >= static_cast<long long>(dimension))
      throw std::runtime_error("model error: feature index out of range");
    const double thr = read_double(in, "threshold");
    tree.nodes[static_cast<std::size_t>(id)].feature = static_cast<std::int32_t>(f);
    tree.nodes[static_cast<std::size_t>(id)].threshold = thr;
    const int left = read_node(in, tree, dimension, n_targets);
    tree.nodes[static_cast<std::size_t>(id)].left = left;
    const int right = read_node(in, tree, dimension, n_targets);
    tree.nodes[static_cast<std::size_t>(id)].right = right;
    return id;
  }
  if (tag != "L") throw std::runtime_error("model error: unknown node tag '" + tag + "'");
  TreeNode leaf;
  leaf.feature = -1;
  leaf.inbag_count = static_cast<std::uint32_t>(read_int(in, "inbag count"));
  const long long n_members = read_int(in, "member count");
  if (n_members < 1) throw std::runtime_error("model error: leaf without members");
  leaf.members.reserve(static_cast<std::size_t>(n_members));
  for (long long i = 0; i < n_members; ++i) {
    const long long member = read_int(in, "member index");
    if (member < 0 || member >= static_cast<long long>(n_targets))
      throw std::runtime_error("model error: member index out of range");
    leaf.members.push_back(static_cast<std::uint32_t>(member));
  }
  tree.nodes[static_cast<std::size_t>(id)] = std::move(leaf);
  return id;
}

}  // namespace

const TreeNode& Tree::leaf_for(std::span<const double> x) const {
  if (nodes.empty()) throw std::runtime_error("model error: empty tree");
  std::size_t cur = 0;
  while (!nodes[cur].is_leaf()) {
    const TreeNode& nd = nodes[cur];
    cur = static_cast<std::size_t>(x[static_cast<std::size_t>(nd.feature)] <= nd.threshold
                                       ? nd.left
                                       : nd.right);
  }
  return nodes[cur];
}

Forest::Forest(std::vector<Tree> trees, std::vector<double> targets, ForestParams params,
               std::uint64_t master_seed, std::size_t dimension)
    : trees_(std::move(trees)),
      targets_(std::move(targets)),
      params_(params),
      master_seed_(master_seed),
      dimension_(dimension) {
  if (trees_.empty()) throw std::invalid_argument("forest has no trees");
  if (targets_.empty()) throw std::invalid_argument("forest has no targets");
  if (dimension_ == 0) throw std::invalid_argument("forest dimension must be positive");
}

Forest Forest::fit(const std::vector<std::vector<double>>& rows, const std::vector<double>& targets,
                   const ForestParams& params, std::uint64_t master_seed, int threads) {
  validate_params(params);
  const std::size_t n = rows.size();
  if (n == 0) throw std::invalid_argument("training rows are empty");
  if (targets.size() != n)
    throw std::invalid_argument("target count does not match row count");
  if (n < static_cast<std::size_t>(params.min_samples_leaf))
    throw std::invalid_argument("fewer training rows than min_samples_leaf");
  const std::size_t p = rows.front().size();
  if (p == 0) throw std::invalid_argument("training rows have no features");

  std::vector<std::vector<double>> cols(p, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != p)
      throw std::invalid_argument("ragged training rows: row " + std::to_string(i) + " has " +
                                  std::to_string(rows[i].size()) + " features, expected " +
                                  std::to_string(p));
    for (std::size_t f = 0; f < p; ++f) {
      if (!std::isfinite(rows[i][f]))
        throw std::invalid_argument("non-finite feature value in row " + std::to_string(i));
      cols[f][i] = rows[i][f];
    }
    if (!std::isfinite(targets[i]))
      throw std::invalid_argument("non-finite target in row " + std::to_string(i));
  }

  const int mtry = params.mtry > 0 ? params.mtry : static_cast<int>((p + 2) / 3);
  const int n_trees = params.n_estimators;
  std::vector<Tree> trees(static_cast<std::size_t>(n_trees));

  // Trees are seeded from (master_seed, tree index), so the result does not
  // depend on how trees are assigned to threads.
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= n_trees) return;
      try {
        TreeBuilder builder(cols, targets, params, mtry, mix_seed(master_seed, static_cast<std::uint64_t>(t)));
        trees[static_cast<std::size_t>(t)] = builder.run();
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const int n_threads = std::clamp(threads, 1, n_trees);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads) - 1);
    for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (std::thread& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  return Forest(std::move(trees), std::vector<double>(targets), params, master_seed, p);
}

std::vector<double> Forest::weights(std::span<const double> x) const {
  if (x.size() != dimension_)
    throw std::invalid_argument("query has " + std::to_string(x.size()) +
                                " features, model expects " + std::to_string(dimension_));
  std::vector<double> w(targets_.size(), 0.0);
  const double per_tree = 1.0 / static_cast<double>(trees_.size());
  for (const Tree& tree : trees_) {
    const TreeNode& leaf = tree.leaf_for(x);
    if (leaf.members.empty()) throw std::runtime_error("model error: leaf without members");
    const double add = per_tree / static_cast<double>(leaf.members.size());
    for (std::uint32_t i : leaf.members) w[i] += add;
  }
  return w;
}

double Forest::cdf(std::span<const double> x, double y) const {
  const std::vector<double> w = weights(x);
  double acc = 0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (targets_[i] <= y) acc += w[i];
  return acc;
}

double quantile_from_weighted(std::vector<std::pair<double, double>> value_weight, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (value_weight.empty()) throw std::invalid_argument("quantile of an empty distribution");
  std::sort(value_weight.begin(), value_weight.end());
  double cum = 0;
  for (const auto& vw : value_weight) {
    cum += vw.second;
    if (cum >= alpha) return vw.first;
  }
  // Cumulative rounding can land a hair under 1; the top value is correct.
  return value_weight.back().first;
}

double Forest::predict_quantile(std::span<const double> x, double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  const std::vector<double> w = weights(x);
  std::vector<std::pair<double, double>> vw;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] > 0) vw.emplace_back(targets_[i], w[i]);
  return quantile_from_weighted(std::move(vw), alpha);
}

Quantiles Forest::predict_window(std::span<const double> x) const {
  const std::vector<double> w = weights(x);
  std::vector<std::pair<double, double>> vw;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] > 0) vw.emplace_back(targets_[i], w[i]);
  std::sort(vw.begin(), vw.end());
  const auto scan = [&vw](double alpha) {
    double cum = 0;
    for (const auto& pair : vw) {
      cum += pair.second;
      if (cum >= alpha) return pair.first;
    }
    return vw.back().first;
  };
  Quantiles q;
  q.q25 = scan(0.25);
  q.q50 = scan(0.50);
  q.q75 = scan(0.75);
  return q;
}

void Forest::save(const std::string& path) const {
  std::string out;
  out.reserve(1 << 20);
  out += "safespeed-qrf 1\n";
  out += "params " + std::to_string(params_.n_estimators) + ' ' +
         std::to_string(params_.min_samples_leaf) + ' ' + std::to_string(params_.max_depth) + ' ' +
         std::to_string(params_.mtry) + ' ' + std::to_string(params_.bootstrap ? 1 : 0) + '\n';
  out += "seed " + std::to_string(master_seed_) + '\n';
  out += "dimension " + std::to_string(dimension_) + '\n';
  out += "targets " + std::to_string(targets_.size()) + '\n';
  for (std::size_t i = 0; i < targets_.size(); ++i) {
    if (i > 0) out += (i % 8 == 0) ? '\n' : ' ';
    append_double17(out, targets_[i]);
  }
  out += '\n';
  out += "trees " + std::to_string(trees_.size()) + '\n';
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    out += "tree " + std::to_string(t) + ' ' + std::to_string(trees_[t].nodes.size()) + '\n';
    for (const TreeNode& nd : trees_[t].nodes) {
      if (nd.is_leaf()) {
        out += "L " + std::to_string(nd.inbag_count) + ' ' + std::to_string(nd.members.size());
        for (std::uint32_t m : nd.members) {
          out += ' ';
          out += std::to_string(m);
        }
        out += '\n';
      } else {
        out += "I " + std::to_string(nd.feature) + ' ';
        append_double17(out, nd.threshold);
        out += '\n';
      }
    }
  }
  out += "end\n";
  atomic_write_file(path, out);
}

Forest Forest::load(const std::string& path) {
  std::istringstream in(read_file(path));

  if (read_tag(in, "header") != "safespeed-qrf")
    throw std::runtime_error("model error: not a safespeed-qrf file");
  if (read_int(in, "version") != 1)
    throw std::runtime_error("model error: unsupported format version");

  if (read_tag(in, "params header") != "params")
    throw std::runtime_error("model error: expected params");
  ForestParams params;
  params.n_estimators = static_cast<int>(read_int(in, "n_estimators"));
  params.min_samples_leaf = static_cast<int>(read_int(in, "min_samples_leaf"));
  params.max_depth = static_cast<int>(read_int(in, "max_depth"));
  params.mtry = static_cast<int>(read_int(in, "mtry"));
  params.bootstrap = read_int(in, "bootstrap") != 0;
  validate_params(params);

  if (read_tag(in, "seed header") != "seed") throw std::runtime_error("model error: expected seed");
  const auto master_seed = static_cast<std::uint64_t>(read_int(in, "seed"));

  if (read_tag(in, "dimension header") != "dimension")
    throw std::runtime_error("model error: expected dimension");
  const long long dimension = read_int(in, "dimension");
  if (dimension < 1) throw std::runtime_error("model error: dimension must be positive");

  if (read_tag(in, "targets header") != "targets")
    throw std::runtime_error("model error: expected targets");
  const long long n_targets = read_int(in, "target count");
  if (n_targets < 1) throw std::runtime_error("model error: target count must be positive");
  std::vector<double> targets;
  targets.reserve(static_cast<std::size_t>(n_targets));
  for (long long i = 0; i < n_targets; ++i) targets.push_back(read_double(in, "target"));

  if (read_tag(in, "trees header") != "trees")
    throw std::runtime_error("model error: expected trees");
  const long long n_trees = read_int(in, "tree count");
  if (n_trees < 1) throw std::runtime_error("model error: tree count must be positive");
  if (n_trees != params.n_estimators)
    throw std::runtime_error("model error: tree count does not match n_estimators");

  std::vector<Tree> trees;
  trees.reserve(static_cast<std::size_t>(n_trees));
  for (long long t = 0; t < n_trees; ++t) {
    if (read_tag(in, "tree header") != "tree")
      throw std::runtime_error("model error: expected tree");
    if (read_int(in, "tree index") != t)
      throw std::runtime_error("model error: tree index out of order");
    const long long n_nodes = read_int(in, "node count");
    Tree tree;
    tree.nodes.reserve(static_cast<std::size_t>(n_nodes));
    read_node(in, tree, static_cast<std::size_t>(dimension),
              static_cast<std::size_t>(n_targets));
    if (static_cast<long long>(tree.nodes.size()) != n_nodes)
      throw std::runtime_error("model error: node count mismatch");
    trees.push_back(std::move(tree));
  }
  if (read_tag(in, "trailer") != "end") throw std::runtime_error("model error: expected end");

  return Forest(std::move(trees), std::move(targets), params, master_seed,
                static_cast<std::size_t>(dimension));
}

}  // namespace safespeed
