#include "topicmap/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "topicmap/error.hpp"
#include "topicmap/rng.hpp"
#include "topicmap/util.hpp"

namespace topicmap::reduce {
namespace {

constexpr double kSmoothTolerance = 1e-5;
constexpr double kMinKDistScale = 1e-3;
constexpr std::size_t kSpectralLimit = 4000;

double distance(const RowMatrix& data, Eigen::Index i, Eigen::Index j, Metric metric,
                const std::vector<double>& norms) {
  if (metric == Metric::euclidean) return (data.row(i) - data.row(j)).norm();
  const double denom = norms[static_cast<std::size_t>(i)] * norms[static_cast<std::size_t>(j)];
  if (denom == 0.0) return 1.0;
  return std::max(0.0, 1.0 - data.row(i).dot(data.row(j)) / denom);
}

double clip(double value) { return std::clamp(value, -4.0, 4.0); }

std::size_t connected_components(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = n;
  for (const auto& e : edges) {
    const auto a = find(e.head);
    const auto b = find(e.tail);
    if (a != b) {
      parent[std::max(a, b)] = std::min(a, b);
      --components;
    }
  }
  return components;
}

// Eigenvectors 1..dim of the symmetric normalised Laplacian, or an empty
// matrix when the dense solve is not feasible.
RowMatrix spectral_layout(std::size_t n, const std::vector<Edge>& edges, std::size_t dim) {
  if (n > kSpectralLimit || dim + 1 >= n) return {};
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& e : edges) {
    weights(static_cast<Eigen::Index>(e.head), static_cast<Eigen::Index>(e.tail)) = e.weight;
  }
  Vector inv_sqrt_degree = weights.rowwise().sum();
  for (Eigen::Index i = 0; i < inv_sqrt_degree.size(); ++i) {
    inv_sqrt_degree(i) = inv_sqrt_degree(i) > 0.0 ? 1.0 / std::sqrt(inv_sqrt_degree(i)) : 0.0;
  }
  Eigen::MatrixXd laplacian = -(inv_sqrt_degree.asDiagonal() * weights * inv_sqrt_degree.asDiagonal());
  laplacian.diagonal().array() += 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
  if (solver.info() != Eigen::Success) return {};
  RowMatrix layout = solver.eigenvectors().middleCols(1, static_cast<Eigen::Index>(dim));
  for (Eigen::Index c = 0; c < layout.cols(); ++c) {
    Eigen::Index arg = 0;
    layout.col(c).cwiseAbs().maxCoeff(&arg);
    if (layout(arg, c) < 0.0) layout.col(c) *= -1.0;
  }
  if (!layout.allFinite()) return {};
  return layout;
}

void rescale_columns(RowMatrix& layout) {
  for (Eigen::Index c = 0; c < layout.cols(); ++c) {
    const double lo = layout.col(c).minCoeff();
    const double hi = layout.col(c).maxCoeff();
    const double span = hi - lo;
    if (span > 0.0) {
      layout.col(c) = (10.0 * (layout.col(c).array() - lo) / span).matrix();
    } else {
      layout.col(c).setZero();
    }
  }
}

RowMatrix initial_layout(std::size_t n, const std::vector<Edge>& edges, std::size_t dim, std::uint64_t seed) {
  const CounterRng rng = CounterRng(seed).substream(1);
  RowMatrix layout;
  if (connected_components(n, edges) <= dim + 1) layout = spectral_layout(n, edges, dim);
  if (layout.size() != 0) {
    const double expansion = 10.0 / layout.cwiseAbs().maxCoeff();
    layout *= expansion;
    std::uint64_t counter = 0;
    for (Eigen::Index i = 0; i < layout.rows(); ++i) {
      for (Eigen::Index c = 0; c < layout.cols(); ++c) layout(i, c) += 1e-4 * rng.normal(counter++);
    }
  } else {
    layout.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    std::uint64_t counter = 0;
    for (Eigen::Index i = 0; i < layout.rows(); ++i) {
      for (Eigen::Index c = 0; c < layout.cols(); ++c) layout(i, c) = -10.0 + 20.0 * rng.uniform(counter++);
    }
  }
  rescale_columns(layout);
  return layout;
}

void optimize_layout(RowMatrix& layout, const std::vector<Edge>& edges, const UmapParams& p, CurveParams curve) {
  if (edges.empty()) return;
  const auto n_vertices = static_cast<std::uint64_t>(layout.rows());
  const auto dim = layout.cols();
  const double n_epochs = static_cast<double>(p.n_epochs);
  double max_weight = 0.0;
  for (const auto& e : edges) max_weight = std::max(max_weight, e.weight);

  std::vector<double> epochs_per_sample(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const double samples = n_epochs * edges[i].weight / max_weight;
    epochs_per_sample[i] = samples > 0.0 ? n_epochs / samples : -1.0;
  }
  const double rate = static_cast<double>(p.negative_sample_rate);
  std::vector<double> epochs_per_negative(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) epochs_per_negative[i] = epochs_per_sample[i] / rate;
  std::vector<double> next_sample = epochs_per_sample;
  std::vector<double> next_negative = epochs_per_negative;

  const double a = curve.a;
  const double b = curve.b;
  const CounterRng negatives = CounterRng(p.seed).substream(2);

  for (std::size_t epoch = 0; epoch < p.n_epochs; ++epoch) {
    const double alpha = 1.0 - static_cast<double>(epoch) / n_epochs;
    const double now = static_cast<double>(epoch);
    const CounterRng epoch_rng = negatives.substream(epoch);
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (epochs_per_sample[i] <= 0.0 || next_sample[i] > now) continue;
      const auto head = static_cast<Eigen::Index>(edges[i].head);
      const auto tail = static_cast<Eigen::Index>(edges[i].tail);

      double dist_sq = (layout.row(head) - layout.row(tail)).squaredNorm();
      double coeff = 0.0;
      if (dist_sq > 0.0) {
        coeff = -2.0 * a * b * std::pow(dist_sq, b - 1.0) / (a * std::pow(dist_sq, b) + 1.0);
      }
      for (Eigen::Index d = 0; d < dim; ++d) {
        const double grad = clip(coeff * (layout(head, d) - layout(tail, d)));
        layout(head, d) += grad * alpha;
        layout(tail, d) -= grad * alpha;
      }
      next_sample[i] += epochs_per_sample[i];

      const auto n_neg = static_cast<std::uint64_t>(std::max(0.0, (now - next_negative[i]) / epochs_per_negative[i]));
      for (std::uint64_t s = 0; s < n_neg; ++s) {
        const auto other = static_cast<Eigen::Index>(epoch_rng.below((static_cast<std::uint64_t>(i) << 20) + s, n_vertices));
        dist_sq = (layout.row(head) - layout.row(other)).squaredNorm();
        if (dist_sq > 0.0) {
          coeff = 2.0 * b / ((0.001 + dist_sq) * (a * std::pow(dist_sq, b) + 1.0));
        } else if (head == other) {
          continue;
        } else {
          coeff = 0.0;
        }
        for (Eigen::Index d = 0; d < dim; ++d) {
          const double grad = coeff > 0.0 ? clip(coeff * (layout(head, d) - layout(other, d))) : 4.0;
          layout(head, d) += grad * alpha;
        }
      }
      next_negative[i] += static_cast<double>(n_neg) * epochs_per_negative[i];
    }
  }
}

}  // namespace

std::string to_string(Method method) { return method == Method::pca ? "pca" : "umap"; }

Method parse_method(const std::string& name) {
  if (name == "pca") return Method::pca;
  if (name == "umap") return Method::umap;
  throw Error(ErrorKind::invalid_argument, "unknown reducer '" + name + "' (expected pca or umap)");
}

std::string to_string(Metric metric) { return metric == Metric::cosine ? "cosine" : "euclidean"; }

Metric parse_metric(const std::string& name) {
  if (name == "cosine") return Metric::cosine;
  if (name == "euclidean") return Metric::euclidean;
  throw Error(ErrorKind::invalid_argument, "unknown metric '" + name + "' (expected cosine or euclidean)");
}

PcaResult pca(const embed::EmbeddingMatrix& m, std::size_t k) { return pca(m.rows(), m.item_ids(), k); }

PcaResult pca(const RowMatrix& data, std::vector<std::string> item_ids, std::size_t k) {
  const auto rows = static_cast<std::size_t>(data.rows());
  const auto cols = static_cast<std::size_t>(data.cols());
  if (rows < 2) throw Error(ErrorKind::invalid_argument, "pca needs at least 2 rows");
  if (k == 0 || k > std::min(rows, cols)) {
    throw Error(ErrorKind::invalid_argument, "pca k=" + std::to_string(k) + " outside [1, " +
                                                 std::to_string(std::min(rows, cols)) + "]");
  }
  PcaResult result;
  result.mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - result.mean.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Vector& singular = svd.singularValues();
  Eigen::MatrixXd basis = svd.matrixV().leftCols(static_cast<Eigen::Index>(k));
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    Eigen::Index arg = 0;
    basis.col(c).cwiseAbs().maxCoeff(&arg);
    if (basis(arg, c) < 0.0) basis.col(c) *= -1.0;
  }
  const double total = singular.squaredNorm();
  for (std::size_t c = 0; c < k; ++c) {
    const double s = singular(static_cast<Eigen::Index>(c));
    result.explained_variance_ratio.push_back(total > 0.0 ? s * s / total : 0.0);
  }
  result.components = basis.transpose();
  result.projection.item_ids = std::move(item_ids);
  result.projection.rows = centered * basis;
  result.projection.method = Method::pca;
  return result;
}

void validate(const UmapParams& p) {
  if (p.n_neighbors < 2) throw Error(ErrorKind::invalid_argument, "umap n_neighbors must be >= 2");
  if (!(p.min_dist > 0.0 && p.min_dist < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "umap min_dist must lie in (0, 1)");
  }
  if (p.n_components == 0) throw Error(ErrorKind::invalid_argument, "umap n_components must be positive");
  if (p.n_epochs == 0) throw Error(ErrorKind::invalid_argument, "umap n_epochs must be positive");
  if (p.spread <= 0.0) throw Error(ErrorKind::invalid_argument, "umap spread must be positive");
}

CurveParams fit_curve(double min_dist, double spread) {
  constexpr int kSamples = 300;
  std::vector<double> xs(kSamples);
  std::vector<double> ys(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    xs[i] = 3.0 * spread * i / (kSamples - 1);
    ys[i] = xs[i] < min_dist ? 1.0 : std::exp(-(xs[i] - min_dist) / spread);
  }
  auto residuals = [&](double a, double b, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    double sse = 0.0;
    for (int i = 0; i < kSamples; ++i) {
      const double x = xs[i];
      const double p = x > 0.0 ? std::pow(x, 2.0 * b) : 0.0;
      const double f = 1.0 / (1.0 + a * p);
      r(i) = f - ys[i];
      sse += r(i) * r(i);
      if (jac) {
        (*jac)(i, 0) = -p * f * f;
        (*jac)(i, 1) = x > 0.0 ? -a * p * 2.0 * std::log(x) * f * f : 0.0;
      }
    }
    return sse;
  };
  // Levenberg-Marquardt from (1, 1).
  double a = 1.0;
  double b = 1.0;
  double lambda = 1e-3;
  Eigen::VectorXd r(kSamples);
  Eigen::MatrixXd jac(kSamples, 2);
  double sse = residuals(a, b, r, &jac);
  for (int iter = 0; iter < 500; ++iter) {
    const Eigen::Matrix2d jtj = jac.transpose() * jac;
    const Eigen::Vector2d jtr = jac.transpose() * r;
    Eigen::Matrix2d damped = jtj;
    damped.diagonal() += lambda * jtj.diagonal();
    const Eigen::Vector2d step = damped.ldlt().solve(-jtr);
    const double na = a + step(0);
    const double nb = b + step(1);
    Eigen::VectorXd trial(kSamples);
    const double trial_sse = na > 0.0 && nb > 0.0 ? residuals(na, nb, trial, nullptr)
                                                  : std::numeric_limits<double>::infinity();
    if (trial_sse < sse) {
      const bool converged = std::abs(step(0)) < 1e-6 * (1.0 + std::abs(a)) &&
                             std::abs(step(1)) < 1e-6 * (1.0 + std::abs(b));
      a = na;
      b = nb;
      sse = residuals(a, b, r, &jac);
      lambda = std::max(lambda / 10.0, 1e-12);
      if (converged) break;
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }
  return {a, b};
}

KnnGraph exact_knn(const RowMatrix& data, std::size_t k, Metric metric) {
  const auto n = static_cast<std::size_t>(data.rows());
  if (k >= n) {
    throw Error(ErrorKind::invalid_argument, "knn needs more than " + std::to_string(k) + " rows, got " +
                                                 std::to_string(n));
  }
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) norms[i] = data.row(static_cast<Eigen::Index>(i)).norm();
  KnnGraph graph;
  graph.indices.resize(n);
  graph.distances.resize(n);
  std::vector<std::pair<double, std::size_t>> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      row.emplace_back(distance(data, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j), metric, norms), j);
    }
    std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), row.end());
    for (std::size_t r = 0; r < k; ++r) {
      graph.distances[i].push_back(row[r].first);
      graph.indices[i].push_back(row[r].second);
    }
  }
  return graph;
}

SmoothKnn smooth_knn(const KnnGraph& knn, std::size_t n_neighbors) {
  const std::size_t n = knn.distances.size();
  const double target = std::log2(static_cast<double>(n_neighbors));
  double mean_all = 0.0;
  std::size_t count_all = 0;
  for (const auto& row : knn.distances) {
    for (double d : row) {
      mean_all += d;
      ++count_all;
    }
  }
  mean_all = count_all ? mean_all / static_cast<double>(count_all) : 0.0;

  SmoothKnn out;
  out.rho.assign(n, 0.0);
  out.sigma.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& dists = knn.distances[i];
    for (double d : dists) {
      if (d > 0.0) {
        out.rho[i] = d;
        break;
      }
    }
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double mid = 1.0;
    for (int iter = 0; iter < 64; ++iter) {
      double psum = 0.0;
      for (double d : dists) {
        const double gap = d - out.rho[i];
        psum += gap > 0.0 ? std::exp(-gap / mid) : 1.0;
      }
      if (std::abs(psum - target) < kSmoothTolerance) break;
      if (psum > target) {
        hi = mid;
        mid = (lo + hi) / 2.0;
      } else {
        lo = mid;
        mid = std::isinf(hi) ? mid * 2.0 : (lo + hi) / 2.0;
      }
    }
    const double mean_i = dists.empty() ? 0.0
                                        : std::accumulate(dists.begin(), dists.end(), 0.0) /
                                              static_cast<double>(dists.size());
    const double floor = out.rho[i] > 0.0 ? kMinKDistScale * mean_i : kMinKDistScale * mean_all;
    out.sigma[i] = std::max(mid, floor);
  }
  return out;
}

std::vector<Edge> fuzzy_graph(const KnnGraph& knn, const SmoothKnn& smooth) {
  std::map<std::pair<std::size_t, std::size_t>, double> directed;
  for (std::size_t i = 0; i < knn.indices.size(); ++i) {
    for (std::size_t r = 0; r < knn.indices[i].size(); ++r) {
      const double gap = knn.distances[i][r] - smooth.rho[i];
      const double w = gap <= 0.0 ? 1.0 : std::exp(-gap / smooth.sigma[i]);
      directed[{i, knn.indices[i][r]}] = w;
    }
  }
  std::map<std::pair<std::size_t, std::size_t>, double> symmetric;
  for (const auto& [key, w] : directed) {
    const auto reverse = directed.find({key.second, key.first});
    const double other = reverse == directed.end() ? 0.0 : reverse->second;
    const double combined = w + other - w * other;
    symmetric[key] = combined;
    symmetric[{key.second, key.first}] = combined;
  }
  std::vector<Edge> edges;
  edges.reserve(symmetric.size());
  for (const auto& [key, w] : symmetric) {
    if (w > 0.0) edges.push_back({key.first, key.second, w});
  }
  return edges;
}

ReducedMatrix umap(const embed::EmbeddingMatrix& m, const UmapParams& p) {
  return umap(m.rows(), m.item_ids(), p);
}

ReducedMatrix umap(const RowMatrix& data, std::vector<std::string> item_ids, const UmapParams& p) {
  validate(p);
  const auto n = static_cast<std::size_t>(data.rows());
  if (n <= p.n_neighbors) {
    throw Error(ErrorKind::invalid_argument, "umap needs more rows (" + std::to_string(n) +
                                                 ") than n_neighbors (" + std::to_string(p.n_neighbors) + ")");
  }
  if (!data.allFinite()) throw Error(ErrorKind::invalid_argument, "umap input contains NaN or Inf");

  // The neighbour list counts the point itself, as in the reference UMAP.
  const auto knn = exact_knn(data, p.n_neighbors - 1, p.metric);
  const auto smooth = smooth_knn(knn, p.n_neighbors);
  auto edges = fuzzy_graph(knn, smooth);
  double max_weight = 0.0;
  for (const auto& e : edges) max_weight = std::max(max_weight, e.weight);
  const double cutoff = max_weight / static_cast<double>(p.n_epochs);
  std::erase_if(edges, [&](const Edge& e) { return e.weight < cutoff; });

  RowMatrix layout = initial_layout(n, edges, p.n_components, p.seed);
  optimize_layout(layout, edges, p, fit_curve(p.min_dist, p.spread));
  if (!layout.allFinite()) throw Error(ErrorKind::invalid_argument, "umap layout diverged");

  ReducedMatrix out;
  out.item_ids = std::move(item_ids);
  out.rows = std::move(layout);
  out.method = Method::umap;
  out.seed = p.seed;
  return out;
}

ReducedMatrix project_2d(const embed::EmbeddingMatrix& m, Method method, std::uint64_t seed) {
  if (m.size() < 3) throw Error(ErrorKind::invalid_argument, "2-D projection needs at least 3 rows");
  if (method == Method::pca) {
    auto result = pca(m, 2).projection;
    result.seed = seed;
    return result;
  }
  UmapParams p;
  p.n_components = 2;
  p.seed = seed;
  p.n_neighbors = std::min<std::size_t>(p.n_neighbors, m.size() - 1);
  return umap(m, p);
}

std::string projection_csv(const ReducedMatrix& proj, const std::vector<std::string>& labels) {
  if (proj.dim() != 2) throw Error(ErrorKind::invalid_argument, "projection CSV needs a 2-D matrix");
  if (labels.size() != proj.size()) {
    throw Error(ErrorKind::invalid_argument, "projection has " + std::to_string(proj.size()) +
                                                 " rows but " + std::to_string(labels.size()) + " labels");
  }
  std::string out = "id,x,y,label\n";
  for (std::size_t i = 0; i < proj.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out += csv_escape(proj.item_ids[i]) + "," + format_double(proj.rows(r, 0)) + "," +
           format_double(proj.rows(r, 1)) + "," + csv_escape(labels[i]) + "\n";
  }
  return out;
}

}  // namespace topicmap::reduce
