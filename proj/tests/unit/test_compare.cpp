#include <doctest.h>

#include <nlohmann/json.hpp>

#include "convert.hpp"
#include "topicmap/compare.hpp"
#include "topicmap/error.hpp"

using namespace topicmap;
using namespace topicmap::compare;

namespace {

topics::TopicModel model_with(const oracle::Mat& vectors, const std::string& embedder) {
  topics::TopicModel m;
  m.topic_vectors = testing::to_rows(vectors);
  m.provenance = {{"embedder", embedder}};
  for (std::size_t t = 0; t < vectors.size(); ++t) {
    m.sizes.push_back(1);
    m.top_words.push_back({{"w" + std::to_string(t), 1.0}, {"x" + std::to_string(t), 0.5}});
    m.assignment.item_ids.push_back("d" + std::to_string(t));
    m.assignment.labels.push_back(static_cast<int>(t));
  }
  m.assignment.k = static_cast<int>(vectors.size());
  return m;
}

}  // namespace

TEST_CASE("cosine basics") {
  Vector u(3);
  Vector v(3);
  u << 1, 0, 0;
  v << 1, 1, 0;
  CHECK(cosine(u, v) == doctest::Approx(std::sqrt(0.5)));
  CHECK(cosine(u, -u) == -1.0);
  CHECK_THROWS_AS(cosine(u, Vector::Zero(3)), Error);
  CHECK_THROWS_AS(cosine(u, Vector::Ones(2)), Error);
}

TEST_CASE("similarity matrix best matches and average") {
  const auto a = testing::to_rows({{1, 0}, {0, 1}});
  const auto b = testing::to_rows({{1, 1}, {0, 3}, {2, 0}});
  const auto r = similarity_matrix(a, b);
  CHECK(r.matrix(0, 0) == doctest::Approx(std::sqrt(0.5)));
  CHECK(r.best_match[0].index == 2);
  CHECK(r.best_match[0].score == 1.0);
  CHECK(r.best_match[1].index == 1);
  CHECK(r.avg_sim == 1.0);
}

TEST_CASE("argmax ties go to the lower column") {
  const auto a = testing::to_rows({{1, 0}});
  const auto b = testing::to_rows({{0, 1}, {2, 0}, {1, 0}});
  CHECK(similarity_matrix(a, b).best_match[0].index == 1);
}

TEST_CASE("models in different spaces are refused") {
  const auto a = model_with({{1, 0}, {0, 1}}, "enc-a");
  CHECK_NOTHROW(similarity_matrix(a, model_with({{1, 1}}, "enc-a")));
  try {
    similarity_matrix(a, model_with({{1, 1}}, "enc-b"));
    FAIL("expected provenance error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::provenance);
  }
  try {
    similarity_matrix(a, model_with({{1, 1, 1}}, "enc-a"));
    FAIL("expected provenance error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::provenance);
  }
}

TEST_CASE("labelled report and serialisations") {
  const auto a = model_with({{1, 0}, {0, 1}}, "enc");
  const auto b = model_with({{1, 1}, {0, 3}, {2, 0}}, "enc");
  const auto r = similarity_matrix(a, b, 2);
  CHECK(r.labels_a[0] == "w0 x0");
  CHECK(r.labels_b.size() == 3);
  const auto csv = matrix_csv(r);
  CHECK(csv.rfind("topic,b0,b1,b2\na0,", 0) == 0);
  CHECK(parse_matrix_csv(csv) == r.matrix);
  const auto j = nlohmann::json::parse(report_json(r));
  CHECK(j.at("avg_sim").get<double>() == r.avg_sim);
  CHECK(j.at("best_match")[1].at("match") == 1);
  const auto label = j.at("best_match")[0].at("match_label").get<std::string>();
  CHECK((label == "x2 w2" || label == "w2 x2"));
  CHECK_THROWS_AS(parse_matrix_csv("topic,b0\na0,zz\n"), Error);
  CHECK_THROWS_AS(parse_matrix_csv("topic,b0,b1\na0,1,2\na1,1\n"), Error);
}
