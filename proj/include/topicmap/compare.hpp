#pragma once

#include <cstddef>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "topicmap/matrix.hpp"
#include "topicmap/topics.hpp"

namespace topicmap::compare {

/// dot(u, v) / sqrt(|u|^2 |v|^2). Throws on zero vectors or mismatched dims.
double cosine(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v);

struct BestMatch {
  std::size_t index = 0;
  double score = 0.0;
};

struct SimilarityReport {
  RowMatrix matrix;  // rows: topics of A, columns: topics of B
  std::vector<BestMatch> best_match;
  double avg_sim = 0.0;
  std::vector<std::string> labels_a;
  std::vector<std::string> labels_b;
  nlohmann::json provenance_a = nlohmann::json::object();
  nlohmann::json provenance_b = nlohmann::json::object();
};

/// Row-wise argmax (ties to the lower column) and the mean of row maxima.
SimilarityReport similarity_matrix(const RowMatrix& a, const RowMatrix& b);

/// Rejects models built in different spaces (dim or embedder id).
SimilarityReport similarity_matrix(const topics::TopicModel& a, const topics::TopicModel& b,
                                   std::size_t label_words = 5);

std::string matrix_csv(const SimilarityReport& report);
RowMatrix parse_matrix_csv(std::string_view text);
nlohmann::json to_json(const SimilarityReport& report);
std::string report_json(const SimilarityReport& report);

}  // namespace topicmap::compare
