#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "topicmap/embed.hpp"
#include "topicmap/matrix.hpp"

namespace topicmap::reduce {

enum class Method { pca, umap };
enum class Metric { cosine, euclidean };

std::string to_string(Method method);
Method parse_method(const std::string& name);
std::string to_string(Metric metric);
Metric parse_metric(const std::string& name);

struct ReducedMatrix {
  std::vector<std::string> item_ids;
  RowMatrix rows;
  Method method = Method::pca;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return item_ids.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(rows.cols()); }
};

struct PcaResult {
  ReducedMatrix projection;
  RowMatrix components;  // k x input dim, orthonormal rows
  Vector mean;
  std::vector<double> explained_variance_ratio;  // descending
};

/// Mean-centred projection onto the top-k right singular vectors. Each
/// component is signed so that its largest-magnitude loading is positive.
PcaResult pca(const embed::EmbeddingMatrix& m, std::size_t k);
PcaResult pca(const RowMatrix& data, std::vector<std::string> item_ids, std::size_t k);

struct UmapParams {
  std::size_t n_neighbors = 10;
  double min_dist = 0.1;
  std::size_t n_components = 5;
  Metric metric = Metric::cosine;
  std::uint64_t seed = 42;
  std::size_t n_epochs = 200;
  std::size_t negative_sample_rate = 5;
  double spread = 1.0;
};

void validate(const UmapParams& p);

// Layout curve 1 / (1 + a * d^(2b)).
struct CurveParams {
  double a = 1.0;
  double b = 1.0;
};

/// Least-squares fit of the layout curve to the min_dist/spread target.
CurveParams fit_curve(double min_dist, double spread = 1.0);

/// Exact neighbours of every row, self excluded, sorted by distance
/// (ties by index).
struct KnnGraph {
  std::vector<std::vector<std::size_t>> indices;
  std::vector<std::vector<double>> distances;
};

KnnGraph exact_knn(const RowMatrix& data, std::size_t k, Metric metric);

struct SmoothKnn {
  std::vector<double> rho;
  std::vector<double> sigma;
};

/// Per-point rho (nearest non-zero distance) and sigma (bisection) so that
/// the kernel mass over the neighbours equals log2(n_neighbors).
SmoothKnn smooth_knn(const KnnGraph& knn, std::size_t n_neighbors);

struct Edge {
  std::size_t head = 0;
  std::size_t tail = 0;
  double weight = 0.0;
};

/// Symmetric fuzzy graph (a + b - ab), both directions, sorted by
/// (head, tail).
std::vector<Edge> fuzzy_graph(const KnnGraph& knn, const SmoothKnn& smooth);

/// Deterministic for a fixed seed. The layout loop is single-threaded.
ReducedMatrix umap(const embed::EmbeddingMatrix& m, const UmapParams& p);
ReducedMatrix umap(const RowMatrix& data, std::vector<std::string> item_ids, const UmapParams& p);

ReducedMatrix project_2d(const embed::EmbeddingMatrix& m, Method method, std::uint64_t seed);

/// CSV id,x,y,label for a 2-D projection.
std::string projection_csv(const ReducedMatrix& proj, const std::vector<std::string>& labels);

}  // namespace topicmap::reduce
