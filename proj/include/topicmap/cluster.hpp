#pragma once

#include <cstddef>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "topicmap/matrix.hpp"
#include "topicmap/reduce.hpp"

namespace topicmap::cluster {

enum class Method { kmeans, hdbscan };

std::string to_string(Method method);
Method parse_method(const std::string& name);

inline constexpr int kNoise = -1;

struct ClusterAssignment {
  std::vector<std::string> item_ids;
  std::vector<int> labels;  // -1 is noise
  int k = 0;
  Method method = Method::kmeans;
  nlohmann::json params = nlohmann::json::object();
};

/// Labels lie in {-1, 0..k-1} and every cluster label occurs.
void validate(const ClusterAssignment& assignment);

/// Renames labels in order of first appearance; noise stays -1.
std::vector<int> canonical_labels(std::span<const int> labels);

struct KMeansResult {
  ClusterAssignment assignment;
  RowMatrix centroids;
  std::vector<double> sse_trace;  // one entry per Lloyd iteration
  std::size_t iterations = 0;
  bool converged = false;
};

/// k-means++ seeding, then Lloyd iterations until no assignment changes or
/// iters is reached. An empty cluster is reseeded at the point farthest
/// from its assigned centroid.
KMeansResult kmeans(const RowMatrix& data, std::vector<std::string> item_ids, std::size_t k,
                    std::size_t iters = 300, std::uint64_t seed = 42);
KMeansResult kmeans(const reduce::ReducedMatrix& m, std::size_t k, std::size_t iters = 300,
                    std::uint64_t seed = 42);

double sum_squared_error(const RowMatrix& data, std::span<const int> labels, const RowMatrix& centroids);

/// Euclidean distance to the k-th nearest other point.
std::vector<double> core_distances(const RowMatrix& data, std::size_t k);

/// max{core(a), core(b), d(a, b)}
double mutual_reachability(std::size_t a, std::size_t b, std::span<const double> core, const RowMatrix& data);

struct MstEdge {
  std::size_t a = 0;  // a < b
  std::size_t b = 0;
  double weight = 0.0;
  double distance = 0.0;  // raw euclidean distance, secondary ordering key
};

/// Ordering used for both the MST and the dendrogram: weight, then raw
/// distance, then the (min, max) index pair.
bool edge_less(const MstEdge& x, const MstEdge& y);

/// Prim's algorithm over the complete mutual-reachability graph, O(n^2).
/// Edges are returned sorted by edge_less.
std::vector<MstEdge> mutual_reachability_mst(const RowMatrix& data, std::span<const double> core);

struct HdbscanParams {
  std::size_t min_cluster_size = 10;
  std::size_t min_samples = 5;
  std::string metric = "euclidean";
};

void validate(const HdbscanParams& p);

struct CondensedEntry {
  std::size_t parent = 0;  // condensed cluster id; 0 is the root
  std::size_t child = 0;   // point index, or cluster id when is_cluster
  double lambda = 0.0;
  std::size_t size = 0;
  bool is_cluster = false;
};

struct HdbscanResult {
  ClusterAssignment assignment;
  std::vector<MstEdge> mst;
  std::vector<CondensedEntry> condensed;
  std::vector<double> stability;          // by condensed cluster id
  std::vector<std::size_t> selected;      // condensed ids, index = label
};

HdbscanResult hdbscan(const RowMatrix& data, std::vector<std::string> item_ids, const HdbscanParams& p);
HdbscanResult hdbscan(const reduce::ReducedMatrix& m, const HdbscanParams& p);

std::string assignment_csv(const ClusterAssignment& assignment);
/// Reads id,label CSV back; k is recomputed from the labels.
ClusterAssignment parse_assignment_csv(std::string_view text, Method method);

}  // namespace topicmap::cluster
