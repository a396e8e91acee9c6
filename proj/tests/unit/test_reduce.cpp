#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "convert.hpp"
#include "oracles.hpp"
#include "topicmap/error.hpp"
#include "topicmap/reduce.hpp"

using namespace topicmap;
using namespace topicmap::reduce;

namespace {

oracle::Mat random_points(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n01;
  oracle::Mat pts(n, std::vector<double>(d));
  for (auto& p : pts) {
    for (auto& x : p) x = n01(gen);
  }
  return pts;
}

}  // namespace

TEST_CASE("pca signs each component by its largest loading") {
  const auto data = testing::to_rows(random_points(30, 5, 1));
  const auto r = pca(data, testing::numbered_ids(30), 4);
  for (Eigen::Index c = 0; c < r.components.rows(); ++c) {
    Eigen::Index arg = 0;
    r.components.row(c).cwiseAbs().maxCoeff(&arg);
    CHECK(r.components(c, arg) > 0.0);
  }
  CHECK(r.projection.dim() == 4);
  CHECK(r.projection.method == Method::pca);
  CHECK(r.projection.rows.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
  const topicmap::RowMatrix negated = -data;
  const auto flipped = pca(negated, testing::numbered_ids(30), 4);
  CHECK((flipped.components - r.components).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pca explained variance sums to one at full rank") {
  const auto data = testing::to_rows(random_points(20, 4, 2));
  const auto r = pca(data, testing::numbered_ids(20), 4);
  double total = 0.0;
  for (double v : r.explained_variance_ratio) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pca rejects impossible ranks") {
  const auto data = testing::to_rows(random_points(5, 3, 3));
  CHECK_THROWS_AS(pca(data, testing::numbered_ids(5), 0), Error);
  CHECK_THROWS_AS(pca(data, testing::numbered_ids(5), 4), Error);
  CHECK_THROWS_AS(pca(data.topRows(1), testing::numbered_ids(1), 1), Error);
}

TEST_CASE("fit_curve reproduces the standard layout constants") {
  const auto c = fit_curve(0.1, 1.0);
  CHECK(c.a == doctest::Approx(1.577).epsilon(0.03));
  CHECK(c.b == doctest::Approx(0.895).epsilon(0.03));
  const auto tight = fit_curve(0.001, 1.0);
  CHECK(tight.a > c.a);
}

TEST_CASE("exact_knn agrees with brute force and excludes self") {
  const auto pts = random_points(40, 3, 4);
  const auto data = testing::to_rows(pts);
  const auto g = exact_knn(data, 5, Metric::euclidean);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j == i) continue;
      double d = 0.0;
      for (std::size_t c = 0; c < 3; ++c) d += (pts[i][c] - pts[j][c]) * (pts[i][c] - pts[j][c]);
      all.emplace_back(std::sqrt(d), j);
    }
    std::sort(all.begin(), all.end());
    for (std::size_t r = 0; r < 5; ++r) {
      CHECK(g.indices[i][r] == all[r].second);
      CHECK(g.distances[i][r] == doctest::Approx(all[r].first).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(exact_knn(data.topRows(5), 5, Metric::euclidean), Error);
}

TEST_CASE("cosine knn distance is one minus cosine similarity") {
  topicmap::RowMatrix data(3, 2);
  data << 1, 0, 0, 2, 1, 1;
  const auto g = exact_knn(data, 1, Metric::cosine);
  CHECK(g.indices[0][0] == 2);
  CHECK(g.distances[0][0] == doctest::Approx(1.0 - std::sqrt(0.5)));
}

TEST_CASE("smooth_knn calibrates kernel mass to log2(k)") {
  const auto data = testing::to_rows(random_points(60, 4, 5));
  const auto g = exact_knn(data, 8, Metric::euclidean);
  const auto s = smooth_knn(g, 8);
  for (std::size_t i = 0; i < g.distances.size(); ++i) {
    CHECK(s.rho[i] == g.distances[i][0]);
    double mass = 0.0;
    for (double d : g.distances[i]) mass += std::exp(-std::max(0.0, d - s.rho[i]) / s.sigma[i]);
    CHECK(mass == doctest::Approx(3.0).epsilon(1e-3));
  }
}

TEST_CASE("fuzzy graph is symmetric with weights in (0, 1]") {
  const auto data = testing::to_rows(random_points(50, 3, 6));
  const auto g = exact_knn(data, 6, Metric::euclidean);
  const auto edges = fuzzy_graph(g, smooth_knn(g, 6));
  std::map<std::pair<std::size_t, std::size_t>, double> w;
  for (const auto& e : edges) {
    CHECK(e.weight > 0.0);
    CHECK(e.weight <= 1.0);
    CHECK(e.head != e.tail);
    w[{e.head, e.tail}] = e.weight;
  }
  for (const auto& [key, value] : w) CHECK(w.at({key.second, key.first}) == value);
  CHECK(std::is_sorted(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.head, a.tail) < std::tie(b.head, b.tail);
  }));
}

TEST_CASE("umap depends on the seed and validates parameters") {
  const auto data = testing::to_rows(random_points(60, 8, 7));
  UmapParams p;
  p.n_components = 2;
  p.n_epochs = 50;
  const auto a = umap(data, testing::numbered_ids(60), p);
  p.seed = 43;
  const auto b = umap(data, testing::numbered_ids(60), p);
  CHECK(a.rows.allFinite());
  CHECK((a.rows - b.rows).cwiseAbs().maxCoeff() > 1e-6);
  CHECK(a.method == Method::umap);
  p.min_dist = 0.0;
  CHECK_THROWS_AS(validate(p), Error);
  p.min_dist = 0.1;
  p.n_neighbors = 1;
  CHECK_THROWS_AS(validate(p), Error);
}

TEST_CASE("project_2d and projection_csv") {
  const auto data = testing::to_rows(random_points(12, 4, 8));
  const embed::EmbeddingMatrix m(testing::numbered_ids(12, "d,"), data);
  const auto proj = project_2d(m, Method::pca, 9);
  CHECK(proj.dim() == 2);
  CHECK(proj.seed == 9);
  const auto csv = projection_csv(proj, std::vector<std::string>(12, "T00"));
  CHECK(csv.rfind("id,x,y,label\n\"d,0\",", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
  CHECK_THROWS_AS(projection_csv(proj, {"x"}), Error);
  CHECK(parse_method("umap") == Method::umap);
  CHECK_THROWS_AS(parse_method("tsne"), Error);
  CHECK(to_string(parse_metric("cosine")) == "cosine");
}
