#include "topicmap/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include "topicmap/error.hpp"
#include "topicmap/rng.hpp"
#include "topicmap/util.hpp"

namespace topicmap::cluster {
namespace {

double squared_distance(const RowMatrix& data, Eigen::Index i, const RowMatrix& centroids, Eigen::Index c) {
  return (data.row(i) - centroids.row(c)).squaredNorm();
}

int nearest_centroid(const RowMatrix& data, Eigen::Index i, const RowMatrix& centroids) {
  int best = 0;
  double best_d = squared_distance(data, i, centroids, 0);
  for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
    const double d = squared_distance(data, i, centroids, c);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

std::vector<int> assign(const RowMatrix& data, const RowMatrix& centroids) {
  std::vector<int> labels(static_cast<std::size_t>(data.rows()));
  for (Eigen::Index i = 0; i < data.rows(); ++i) labels[static_cast<std::size_t>(i)] = nearest_centroid(data, i, centroids);

  // Duplicate points can leave a centroid with no nearest member. Hand each
  // such cluster the point farthest from its own centroid, taken from a
  // cluster that can spare one.
  std::vector<std::size_t> counts(static_cast<std::size_t>(centroids.rows()), 0);
  for (int label : labels) ++counts[static_cast<std::size_t>(label)];
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) continue;
    std::size_t far = labels.size();
    double far_d = -1.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (counts[static_cast<std::size_t>(labels[i])] < 2) continue;
      const double d = squared_distance(data, static_cast<Eigen::Index>(i), centroids, labels[i]);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far == labels.size()) break;
    --counts[static_cast<std::size_t>(labels[far])];
    labels[far] = static_cast<int>(c);
    ++counts[static_cast<std::size_t>(c)];
  }
  return labels;
}

RowMatrix seed_plus_plus(const RowMatrix& data, std::size_t k, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(data.rows());
  RngStream rng(CounterRng(seed).substream(11));
  RowMatrix centroids(static_cast<Eigen::Index>(k), data.cols());
  std::vector<bool> chosen(n, false);
  std::size_t first = rng.below(n);
  centroids.row(0) = data.row(static_cast<Eigen::Index>(first));
  chosen[first] = true;
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = squared_distance(data, static_cast<Eigen::Index>(i), centroids, 0);
  for (std::size_t c = 1; c < k; ++c) {
    const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double cumulative = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cumulative += nearest[i];
        if (nearest[i] > 0.0 && cumulative > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        for (std::size_t i = n; i-- > 0;) {
          if (nearest[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
    }
    chosen[pick] = true;
    centroids.row(static_cast<Eigen::Index>(c)) = data.row(static_cast<Eigen::Index>(pick));
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(data, static_cast<Eigen::Index>(i), centroids,
                                                         static_cast<Eigen::Index>(c)));
    }
  }
  return centroids;
}

// Means of the assigned points; empty clusters move to the points farthest
// from their current centroids (each point used at most once).
RowMatrix update_centroids(const RowMatrix& data, const std::vector<int>& labels, const RowMatrix& previous) {
  const auto k = previous.rows();
  RowMatrix sums = RowMatrix::Zero(k, data.cols());
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sums.row(labels[i]) += data.row(static_cast<Eigen::Index>(i));
    ++counts[static_cast<std::size_t>(labels[i])];
  }
  RowMatrix centroids = previous;
  std::vector<bool> used(labels.size(), false);
  for (Eigen::Index c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) {
      centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) continue;
    std::size_t far = labels.size();
    double far_d = -1.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (used[i]) continue;
      const double d = squared_distance(data, static_cast<Eigen::Index>(i), centroids, labels[i]);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far == labels.size()) continue;
    used[far] = true;
    centroids.row(c) = data.row(static_cast<Eigen::Index>(far));
  }
  return centroids;
}

struct Dendrogram {
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
  std::vector<double> distance;
  std::vector<std::size_t> size;  // indexed by node id; leaves are 0..n-1
};

Dendrogram single_linkage(std::size_t n, const std::vector<MstEdge>& mst) {
  Dendrogram tree;
  tree.size.assign(2 * n - 1, 1);
  tree.left.assign(2 * n - 1, 0);
  tree.right.assign(2 * n - 1, 0);
  tree.distance.assign(2 * n - 1, 0.0);
  std::vector<std::size_t> parent(2 * n - 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t next = n;
  for (const auto& e : mst) {
    const auto ra = find(e.a);
    const auto rb = find(e.b);
    tree.left[next] = ra;
    tree.right[next] = rb;
    tree.distance[next] = e.weight;
    tree.size[next] = tree.size[ra] + tree.size[rb];
    parent[ra] = parent[rb] = next;
    ++next;
  }
  return tree;
}

ClusterAssignment make_assignment(std::vector<std::string> ids, std::vector<int> labels, int k,
                                  const HdbscanParams& p) {
  ClusterAssignment out;
  out.item_ids = std::move(ids);
  out.labels = std::move(labels);
  out.k = k;
  out.method = Method::hdbscan;
  out.params = {{"min_cluster_size", p.min_cluster_size}, {"min_samples", p.min_samples}, {"metric", p.metric}};
  return out;
}

}  // namespace

std::string to_string(Method method) { return method == Method::kmeans ? "kmeans" : "hdbscan"; }

Method parse_method(const std::string& name) {
  if (name == "kmeans") return Method::kmeans;
  if (name == "hdbscan") return Method::hdbscan;
  throw Error(ErrorKind::invalid_argument, "unknown clusterer '" + name + "' (expected kmeans or hdbscan)");
}

void validate(const ClusterAssignment& assignment) {
  if (assignment.labels.size() != assignment.item_ids.size()) {
    throw Error(ErrorKind::format, "assignment has " + std::to_string(assignment.labels.size()) + " labels for " +
                                       std::to_string(assignment.item_ids.size()) + " items");
  }
  std::vector<bool> seen(static_cast<std::size_t>(std::max(assignment.k, 0)), false);
  for (int label : assignment.labels) {
    if (label == kNoise) continue;
    if (label < 0 || label >= assignment.k) {
      throw Error(ErrorKind::format, "label " + std::to_string(label) + " outside [0, " +
                                         std::to_string(assignment.k) + ")");
    }
    seen[static_cast<std::size_t>(label)] = true;
  }
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (!seen[c]) throw Error(ErrorKind::format, "cluster " + std::to_string(c) + " has no members");
  }
}

std::vector<int> canonical_labels(std::span<const int> labels) {
  std::unordered_map<int, int> rename;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int label : labels) {
    if (label == kNoise) {
      out.push_back(kNoise);
      continue;
    }
    auto [it, inserted] = rename.emplace(label, static_cast<int>(rename.size()));
    out.push_back(it->second);
  }
  return out;
}

KMeansResult kmeans(const RowMatrix& data, std::vector<std::string> item_ids, std::size_t k, std::size_t iters,
                    std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(data.rows());
  if (k == 0 || k > n) {
    throw Error(ErrorKind::invalid_argument, "kmeans k=" + std::to_string(k) + " must lie in [1, " +
                                                 std::to_string(n) + "]");
  }
  if (iters == 0) throw Error(ErrorKind::invalid_argument, "kmeans needs at least one iteration");
  KMeansResult result;
  RowMatrix centroids = seed_plus_plus(data, k, seed);
  std::vector<int> labels = assign(data, centroids);
  for (std::size_t it = 0; it < iters; ++it) {
    centroids = update_centroids(data, labels, centroids);
    result.sse_trace.push_back(sum_squared_error(data, labels, centroids));
    ++result.iterations;
    auto next = assign(data, centroids);
    if (next == labels) {
      result.converged = true;
      break;
    }
    labels = std::move(next);
  }

  // Compact away clusters that ended empty (only possible with duplicate
  // points), then report the means of the final assignment.
  std::vector<int> remap(k, -1);
  int used = 0;
  for (int label : labels) {
    if (remap[static_cast<std::size_t>(label)] < 0) remap[static_cast<std::size_t>(label)] = 0;
  }
  for (auto& r : remap) {
    if (r == 0) r = used++;
  }
  for (auto& label : labels) label = remap[static_cast<std::size_t>(label)];
  RowMatrix final_centroids = RowMatrix::Zero(used, data.cols());
  std::vector<std::size_t> counts(static_cast<std::size_t>(used), 0);
  for (std::size_t i = 0; i < n; ++i) {
    final_centroids.row(labels[i]) += data.row(static_cast<Eigen::Index>(i));
    ++counts[static_cast<std::size_t>(labels[i])];
  }
  for (Eigen::Index c = 0; c < used; ++c) final_centroids.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);

  result.centroids = std::move(final_centroids);
  result.assignment.item_ids = std::move(item_ids);
  result.assignment.labels = std::move(labels);
  result.assignment.k = used;
  result.assignment.method = Method::kmeans;
  result.assignment.params = {{"k", k}, {"iterations", iters}, {"seed", seed}};
  return result;
}

KMeansResult kmeans(const reduce::ReducedMatrix& m, std::size_t k, std::size_t iters, std::uint64_t seed) {
  return kmeans(m.rows, m.item_ids, k, iters, seed);
}

double sum_squared_error(const RowMatrix& data, std::span<const int> labels, const RowMatrix& centroids) {
  double sse = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sse += squared_distance(data, static_cast<Eigen::Index>(i), centroids, labels[i]);
  }
  return sse;
}

std::vector<double> core_distances(const RowMatrix& data, std::size_t k) {
  const auto n = static_cast<std::size_t>(data.rows());
  if (k == 0 || k >= n) {
    throw Error(ErrorKind::invalid_argument, "core distance k=" + std::to_string(k) + " must lie in [1, " +
                                                 std::to_string(n - 1) + "]");
  }
  std::vector<double> core(n);
  std::vector<double> row(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row[r++] = (data.row(static_cast<Eigen::Index>(i)) - data.row(static_cast<Eigen::Index>(j))).norm();
    }
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
    core[i] = row[k - 1];
  }
  return core;
}

double mutual_reachability(std::size_t a, std::size_t b, std::span<const double> core, const RowMatrix& data) {
  const double d = (data.row(static_cast<Eigen::Index>(a)) - data.row(static_cast<Eigen::Index>(b))).norm();
  return std::max({core[a], core[b], d});
}

bool edge_less(const MstEdge& x, const MstEdge& y) {
  return std::tie(x.weight, x.distance, x.a, x.b) < std::tie(y.weight, y.distance, y.a, y.b);
}

std::vector<MstEdge> mutual_reachability_mst(const RowMatrix& data, std::span<const double> core) {
  const auto n = static_cast<std::size_t>(data.rows());
  std::vector<MstEdge> mst;
  if (n < 2) return mst;
  mst.reserve(n - 1);
  std::vector<bool> in_tree(n, false);
  std::vector<MstEdge> best(n);
  const double inf = std::numeric_limits<double>::infinity();
  for (auto& e : best) e.weight = e.distance = inf;

  auto relax = [&](std::size_t from) {
    for (std::size_t v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      const double d = (data.row(static_cast<Eigen::Index>(from)) - data.row(static_cast<Eigen::Index>(v))).norm();
      MstEdge candidate{std::min(from, v), std::max(from, v), std::max({core[from], core[v], d}), d};
      if (edge_less(candidate, best[v])) best[v] = candidate;
    }
  };
  in_tree[0] = true;
  relax(0);
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t pick = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (!in_tree[v] && (pick == n || edge_less(best[v], best[pick]))) pick = v;
    }
    in_tree[pick] = true;
    mst.push_back(best[pick]);
    relax(pick);
  }
  std::sort(mst.begin(), mst.end(), edge_less);
  return mst;
}

void validate(const HdbscanParams& p) {
  if (p.min_cluster_size < 2) throw Error(ErrorKind::invalid_argument, "min_cluster_size must be >= 2");
  if (p.min_samples < 1) throw Error(ErrorKind::invalid_argument, "min_samples must be >= 1");
  if (p.metric != "euclidean") {
    throw Error(ErrorKind::invalid_argument, "hdbscan metric '" + p.metric + "' unsupported (euclidean only)");
  }
}

HdbscanResult hdbscan(const RowMatrix& data, std::vector<std::string> item_ids, const HdbscanParams& p) {
  validate(p);
  const auto n = static_cast<std::size_t>(data.rows());
  if (n <= p.min_cluster_size) {
    throw Error(ErrorKind::invalid_argument, "hdbscan needs more rows (" + std::to_string(n) +
                                                 ") than min_cluster_size (" + std::to_string(p.min_cluster_size) +
                                                 ")");
  }
  if (p.min_samples >= n) {
    throw Error(ErrorKind::invalid_argument, "min_samples must be smaller than the row count");
  }
  HdbscanResult result;
  const auto core = core_distances(data, p.min_samples);
  result.mst = mutual_reachability_mst(data, core);

  double min_positive = std::numeric_limits<double>::infinity();
  for (const auto& e : result.mst) {
    if (e.weight > 0.0) min_positive = std::min(min_positive, e.weight);
  }
  if (std::isinf(min_positive)) {
    // Every point coincides: one cluster, no noise.
    result.stability = {0.0};
    result.selected = {0};
    result.assignment = make_assignment(std::move(item_ids), std::vector<int>(n, 0), 1, p);
    return result;
  }
  // Zero-weight merges get the largest finite density level instead of 1/0.
  const double lambda_cap = 1.0 / min_positive;
  auto lambda_of = [&](double weight) { return weight > 0.0 ? 1.0 / weight : lambda_cap; };

  const auto tree = single_linkage(n, result.mst);
  const std::size_t root = 2 * n - 2;
  std::vector<std::size_t> relabel(2 * n - 1, 0);
  std::vector<bool> ignore(2 * n - 1, false);
  std::size_t next_cluster = 1;
  std::vector<std::size_t> cluster_parent{0};
  std::vector<double> birth{0.0};

  auto fall_out = [&](std::size_t subtree, std::size_t parent_cluster, double lambda) {
    std::vector<std::size_t> stack{subtree};
    while (!stack.empty()) {
      const auto node = stack.back();
      stack.pop_back();
      ignore[node] = true;
      if (node < n) {
        result.condensed.push_back({parent_cluster, node, lambda, 1, false});
      } else {
        stack.push_back(tree.right[node]);
        stack.push_back(tree.left[node]);
      }
    }
  };

  std::deque<std::size_t> queue{root};
  while (!queue.empty()) {
    const auto node = queue.front();
    queue.pop_front();
    if (node < n) continue;
    const auto left = tree.left[node];
    const auto right = tree.right[node];
    queue.push_back(left);
    queue.push_back(right);
    if (ignore[node]) continue;
    const double lambda = lambda_of(tree.distance[node]);
    const auto parent = relabel[node];
    const bool left_big = tree.size[left] >= p.min_cluster_size;
    const bool right_big = tree.size[right] >= p.min_cluster_size;
    if (left_big && right_big) {
      for (const auto child : {left, right}) {
        relabel[child] = next_cluster++;
        cluster_parent.push_back(parent);
        birth.push_back(lambda);
        result.condensed.push_back({parent, relabel[child], lambda, tree.size[child], true});
      }
    } else if (!left_big && !right_big) {
      fall_out(left, parent, lambda);
      fall_out(right, parent, lambda);
    } else if (!left_big) {
      relabel[right] = parent;
      fall_out(left, parent, lambda);
    } else {
      relabel[left] = parent;
      fall_out(right, parent, lambda);
    }
  }

  const std::size_t clusters = next_cluster;
  result.stability.assign(clusters, 0.0);
  for (const auto& entry : result.condensed) {
    result.stability[entry.parent] += (entry.lambda - birth[entry.parent]) * static_cast<double>(entry.size);
  }

  // Excess of mass, children before parents; the root is never selected.
  std::vector<std::vector<std::size_t>> children(clusters);
  for (std::size_t c = 1; c < clusters; ++c) children[cluster_parent[c]].push_back(c);
  std::vector<bool> is_selected(clusters, false);
  std::vector<double> subtree_score = result.stability;
  for (std::size_t c = clusters; c-- > 1;) {
    if (children[c].empty()) {
      is_selected[c] = true;
      continue;
    }
    double child_sum = 0.0;
    for (auto child : children[c]) child_sum += subtree_score[child];
    if (result.stability[c] > child_sum) {
      is_selected[c] = true;
      std::vector<std::size_t> stack(children[c].begin(), children[c].end());
      while (!stack.empty()) {
        const auto d = stack.back();
        stack.pop_back();
        is_selected[d] = false;
        stack.insert(stack.end(), children[d].begin(), children[d].end());
      }
    } else {
      subtree_score[c] = child_sum;
    }
  }

  std::vector<int> cluster_label(clusters, kNoise);
  for (std::size_t c = 1; c < clusters; ++c) {
    if (is_selected[c]) {
      cluster_label[c] = static_cast<int>(result.selected.size());
      result.selected.push_back(c);
    }
  }
  std::vector<int> labels(n, kNoise);
  for (const auto& entry : result.condensed) {
    if (entry.is_cluster) continue;
    auto c = entry.parent;
    while (c != 0 && !is_selected[c]) c = cluster_parent[c];
    labels[entry.child] = c == 0 ? kNoise : cluster_label[c];
  }
  std::vector<std::size_t> by_appearance;
  by_appearance.reserve(result.selected.size());
  std::vector<int> rename(result.selected.size(), kNoise);
  for (auto& label : labels) {
    if (label == kNoise) continue;
    auto& r = rename[static_cast<std::size_t>(label)];
    if (r == kNoise) {
      r = static_cast<int>(by_appearance.size());
      by_appearance.push_back(result.selected[static_cast<std::size_t>(label)]);
    }
    label = r;
  }
  result.selected = std::move(by_appearance);
  result.assignment = make_assignment(std::move(item_ids), std::move(labels),
                                      static_cast<int>(result.selected.size()), p);
  return result;
}

HdbscanResult hdbscan(const reduce::ReducedMatrix& m, const HdbscanParams& p) {
  return hdbscan(m.rows, m.item_ids, p);
}

std::string assignment_csv(const ClusterAssignment& assignment) {
  std::string out = "id,label\n";
  for (std::size_t i = 0; i < assignment.item_ids.size(); ++i) {
    out += csv_escape(assignment.item_ids[i]) + "," + std::to_string(assignment.labels[i]) + "\n";
  }
  return out;
}

ClusterAssignment parse_assignment_csv(std::string_view text, Method method) {
  ClusterAssignment out;
  out.method = method;
  std::size_t start = 0;
  bool header = true;
  int max_label = -1;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line != "id,label") throw Error(ErrorKind::format, "assignment CSV must start with id,label");
      continue;
    }
    const auto comma = line.rfind(',');
    if (comma == std::string_view::npos) throw Error(ErrorKind::format, "malformed assignment row");
    auto id = line.substr(0, comma);
    if (id.size() >= 2 && id.front() == '"' && id.back() == '"') {
      std::string unquoted;
      for (std::size_t i = 1; i + 1 < id.size(); ++i) {
        unquoted += id[i];
        if (id[i] == '"') ++i;
      }
      out.item_ids.push_back(std::move(unquoted));
    } else {
      out.item_ids.emplace_back(id);
    }
    try {
      out.labels.push_back(std::stoi(std::string(line.substr(comma + 1))));
    } catch (const std::exception&) {
      throw Error(ErrorKind::format, "malformed label in assignment row");
    }
    max_label = std::max(max_label, out.labels.back());
  }
  out.k = max_label + 1;
  validate(out);
  return out;
}

}  // namespace topicmap::cluster
