#include "topicmap/compare.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "topicmap/error.hpp"
#include "topicmap/util.hpp"

namespace topicmap::compare {

double cosine(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v) {
  if (u.size() != v.size()) {
    throw Error(ErrorKind::invalid_argument, "cosine of vectors with dims " + std::to_string(u.size()) + " and " +
                                                 std::to_string(v.size()));
  }
  const double nu = u.squaredNorm();
  const double nv = v.squaredNorm();
  if (nu == 0.0 || nv == 0.0) throw Error(ErrorKind::invalid_argument, "cosine of a zero vector");
  return std::clamp(u.dot(v) / std::sqrt(nu * nv), -1.0, 1.0);
}

SimilarityReport similarity_matrix(const RowMatrix& a, const RowMatrix& b) {
  if (a.rows() == 0 || b.rows() == 0) throw Error(ErrorKind::invalid_argument, "cannot compare an empty topic set");
  if (a.cols() != b.cols()) {
    throw Error(ErrorKind::provenance, "topic vector dims differ: " + std::to_string(a.cols()) + " vs " +
                                           std::to_string(b.cols()));
  }
  SimilarityReport report;
  report.matrix.resize(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      report.matrix(i, j) = cosine(a.row(i).transpose(), b.row(j).transpose());
    }
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    BestMatch best{0, report.matrix(i, 0)};
    for (Eigen::Index j = 1; j < b.rows(); ++j) {
      if (report.matrix(i, j) > best.score) best = {static_cast<std::size_t>(j), report.matrix(i, j)};
    }
    report.best_match.push_back(best);
    total += best.score;
  }
  report.avg_sim = total / static_cast<double>(a.rows());
  return report;
}

SimilarityReport similarity_matrix(const topics::TopicModel& a, const topics::TopicModel& b,
                                   std::size_t label_words) {
  const std::string emb_a = a.provenance.value("embedder", std::string());
  const std::string emb_b = b.provenance.value("embedder", std::string());
  if (a.topic_vectors.cols() != b.topic_vectors.cols() || emb_a != emb_b) {
    throw Error(ErrorKind::provenance, "models live in different embedding spaces: A=" +
                                           a.provenance.dump() + " (dim " + std::to_string(a.topic_vectors.cols()) +
                                           ") B=" + b.provenance.dump() + " (dim " +
                                           std::to_string(b.topic_vectors.cols()) + ")");
  }
  auto report = similarity_matrix(a.topic_vectors, b.topic_vectors);
  for (std::size_t t = 0; t < a.k(); ++t) report.labels_a.push_back(a.label(t, label_words));
  for (std::size_t t = 0; t < b.k(); ++t) report.labels_b.push_back(b.label(t, label_words));
  report.provenance_a = a.provenance;
  report.provenance_b = b.provenance;
  return report;
}

std::string matrix_csv(const SimilarityReport& report) {
  std::string out = "topic";
  for (Eigen::Index j = 0; j < report.matrix.cols(); ++j) out += ",b" + std::to_string(j);
  out += '\n';
  for (Eigen::Index i = 0; i < report.matrix.rows(); ++i) {
    out += "a" + std::to_string(i);
    for (Eigen::Index j = 0; j < report.matrix.cols(); ++j) out += "," + format_double(report.matrix(i, j));
    out += '\n';
  }
  return out;
}

RowMatrix parse_matrix_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error(ErrorKind::format, "similarity CSV has a non-numeric cell '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw Error(ErrorKind::format, "ragged similarity CSV");
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty()) throw Error(ErrorKind::format, "similarity CSV has no cells");
  RowMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

nlohmann::json to_json(const SimilarityReport& report) {
  nlohmann::json matches = nlohmann::json::array();
  for (std::size_t i = 0; i < report.best_match.size(); ++i) {
    const auto& m = report.best_match[i];
    nlohmann::json entry{{"topic", i}, {"match", m.index}, {"score", m.score}};
    if (i < report.labels_a.size()) entry["label"] = report.labels_a[i];
    if (m.index < report.labels_b.size()) entry["match_label"] = report.labels_b[m.index];
    matches.push_back(std::move(entry));
  }
  nlohmann::json matrix = nlohmann::json::array();
  for (Eigen::Index i = 0; i < report.matrix.rows(); ++i) {
    const auto row = report.matrix.row(i);
    matrix.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"rows", report.matrix.rows()},
          {"cols", report.matrix.cols()},
          {"avg_sim", report.avg_sim},
          {"best_match", std::move(matches)},
          {"matrix", std::move(matrix)},
          {"labels_a", report.labels_a},
          {"labels_b", report.labels_b},
          {"provenance_a", report.provenance_a},
          {"provenance_b", report.provenance_b}};
}

std::string report_json(const SimilarityReport& report) { return to_json(report).dump(2) + "\n"; }

}  // namespace topicmap::compare
