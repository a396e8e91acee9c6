#include "topicmap/topics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "topicmap/error.hpp"

namespace topicmap::topics {
namespace {

RowMatrix row_normalized(const RowMatrix& m) {
  RowMatrix out = m;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double norm = out.row(r).norm();
    if (norm > 0.0) out.row(r) /= norm;
  }
  return out;
}

std::vector<std::size_t> member_rows(const embed::EmbeddingMatrix& docs, const cluster::ClusterAssignment& a) {
  std::vector<std::size_t> rows(a.item_ids.size());
  for (std::size_t i = 0; i < a.item_ids.size(); ++i) {
    const auto row = docs.index_of(a.item_ids[i]);
    if (!row) {
      throw Error(ErrorKind::invalid_argument, "document '" + a.item_ids[i] + "' has no embedding row");
    }
    rows[i] = *row;
  }
  return rows;
}

std::vector<std::size_t> count_sizes(const cluster::ClusterAssignment& a) {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(a.k), 0);
  for (int label : a.labels) {
    if (label >= 0) ++sizes[static_cast<std::size_t>(label)];
  }
  return sizes;
}

double cosine(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v) {
  const double denom = std::sqrt(u.squaredNorm() * v.squaredNorm());
  return denom > 0.0 ? u.dot(v) / denom : 0.0;
}

}  // namespace

std::size_t TopicModel::noise_count() const {
  return static_cast<std::size_t>(std::count(assignment.labels.begin(), assignment.labels.end(), cluster::kNoise));
}

std::vector<std::vector<std::string>> TopicModel::word_lists(std::size_t n) const {
  std::vector<std::vector<std::string>> out;
  out.reserve(top_words.size());
  for (const auto& ranked : top_words) {
    std::vector<std::string> words;
    for (std::size_t i = 0; i < std::min(n, ranked.size()); ++i) words.push_back(ranked[i].word);
    out.push_back(std::move(words));
  }
  return out;
}

std::string TopicModel::label(std::size_t topic, std::size_t words) const {
  std::string out;
  if (topic >= top_words.size()) return out;
  for (std::size_t i = 0; i < std::min(words, top_words[topic].size()); ++i) {
    if (!out.empty()) out += ' ';
    out += top_words[topic][i].word;
  }
  return out;
}

RowMatrix topic_vectors(const embed::EmbeddingMatrix& docs, const cluster::ClusterAssignment& assignment) {
  cluster::validate(assignment);
  const auto rows = member_rows(docs, assignment);
  RowMatrix sums = RowMatrix::Zero(assignment.k, static_cast<Eigen::Index>(docs.dim()));
  const auto sizes = count_sizes(assignment);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int label = assignment.labels[i];
    if (label < 0) continue;
    sums.row(label) += docs.rows().row(static_cast<Eigen::Index>(rows[i]));
  }
  for (Eigen::Index t = 0; t < sums.rows(); ++t) sums.row(t) /= static_cast<double>(sizes[static_cast<std::size_t>(t)]);
  return sums;
}

RankedWords top_words(const RowMatrix& tv, const embed::EmbeddingMatrix& words, std::size_t n) {
  if (n == 0 || n > words.size()) {
    throw Error(ErrorKind::invalid_argument, "top word count " + std::to_string(n) + " must lie in [1, " +
                                                 std::to_string(words.size()) + "]");
  }
  if (static_cast<std::size_t>(tv.cols()) != words.dim()) {
    throw Error(ErrorKind::invalid_argument, "topic vector dim " + std::to_string(tv.cols()) +
                                                 " differs from word dim " + std::to_string(words.dim()));
  }
  const RowMatrix unit_words = words.normalized() ? words.rows() : row_normalized(words.rows());
  RankedWords out;
  out.reserve(static_cast<std::size_t>(tv.rows()));
  std::vector<std::size_t> order(words.size());
  std::vector<double> scores(words.size());
  for (Eigen::Index t = 0; t < tv.rows(); ++t) {
    const double norm = tv.row(t).norm();
    if (!(norm > 0.0)) throw Error(ErrorKind::invalid_argument, "topic " + std::to_string(t) + " has a zero vector");
    for (std::size_t w = 0; w < words.size(); ++w) {
      scores[w] = unit_words.row(static_cast<Eigen::Index>(w)).dot(tv.row(t)) / norm;
    }
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                      [&](std::size_t a, std::size_t b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); });
    std::vector<WordScore> ranked;
    ranked.reserve(n);
    for (std::size_t i = 0; i < n; ++i) ranked.push_back({words.item_ids()[order[i]], scores[order[i]]});
    out.push_back(std::move(ranked));
  }
  return out;
}

TopicModel build_model(const embed::EmbeddingMatrix& docs, const embed::EmbeddingMatrix& words,
                       cluster::ClusterAssignment assignment, std::size_t n, nlohmann::json provenance) {
  if (assignment.k == 0) throw Error(ErrorKind::invalid_argument, "clustering produced no topics (all noise)");
  TopicModel model;
  model.topic_vectors = topic_vectors(docs, assignment);
  model.sizes = count_sizes(assignment);
  model.assignment = std::move(assignment);
  model.top_words = top_words(model.topic_vectors, words, n);
  model.provenance = std::move(provenance);
  return model;
}

TopicModel reduce_topics(const TopicModel& model, const embed::EmbeddingMatrix& docs,
                         const embed::EmbeddingMatrix& words, std::size_t target_k) {
  const std::size_t k = model.k();
  if (target_k == 0 || target_k >= k) {
    throw Error(ErrorKind::invalid_argument, "target topic count " + std::to_string(target_k) +
                                                 " must lie in [1, " + std::to_string(k) + ")");
  }
  TopicModel out = model;
  const std::size_t n = model.top_words.empty() ? 0 : model.top_words.front().size();
  while (out.k() > target_k) {
    const auto& sizes = out.sizes;
    const auto smallest = static_cast<int>(std::min_element(sizes.begin(), sizes.end()) - sizes.begin());
    int nearest = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < static_cast<int>(out.k()); ++t) {
      if (t == smallest) continue;
      const double sim = cosine(out.topic_vectors.row(smallest).transpose(), out.topic_vectors.row(t).transpose());
      if (sim > best) {
        best = sim;
        nearest = t;
      }
    }
    out.merges.push_back({smallest, nearest, sizes[static_cast<std::size_t>(smallest)], best});
    out.assignment.labels = apply_merges(std::move(out.assignment.labels), {out.merges.back()});
    out.assignment.k -= 1;
    out.topic_vectors = topic_vectors(docs, out.assignment);
    out.sizes = count_sizes(out.assignment);
  }
  if (n > 0) out.top_words = top_words(out.topic_vectors, words, n);
  return out;
}

std::vector<int> apply_merges(std::vector<int> labels, const std::vector<MergeStep>& merges) {
  for (const auto& step : merges) {
    for (auto& label : labels) {
      if (label == step.from) label = step.into;
      if (label > step.from) --label;
    }
  }
  return labels;
}

double centroid_error(const TopicModel& model, const embed::EmbeddingMatrix& docs) {
  const RowMatrix recomputed = topic_vectors(docs, model.assignment);
  if (recomputed.rows() != model.topic_vectors.rows() || recomputed.cols() != model.topic_vectors.cols()) {
    return std::numeric_limits<double>::infinity();
  }
  return (recomputed - model.topic_vectors).cwiseAbs().maxCoeff();
}

std::vector<cluster::HdbscanParams> default_grid() {
  std::vector<cluster::HdbscanParams> grid;
  for (std::size_t mcs : {5, 10, 15, 20, 25}) {
    for (std::size_t ms : {3, 5, 8}) grid.push_back({mcs, ms, "euclidean"});
  }
  return grid;
}

SweepResult sweep(const SweepInputs& inputs, const std::vector<cluster::HdbscanParams>& grid) {
  if (grid.empty()) throw Error(ErrorKind::invalid_argument, "sweep grid is empty");
  if (!inputs.docs || !inputs.words || !inputs.index || !inputs.reduced) {
    throw Error(ErrorKind::invalid_argument, "sweep inputs are incomplete");
  }
  SweepResult result;
  std::optional<std::size_t> best;
  for (const auto& params : grid) {
    SweepPoint point;
    point.params = params;
    auto clustered = cluster::hdbscan(*inputs.reduced, params);
    point.n_topics = static_cast<std::size_t>(clustered.assignment.k);
    if (point.n_topics > 0) {
      auto model = build_model(*inputs.docs, *inputs.words, std::move(clustered.assignment), inputs.topn);
      point.coherence = coherence::coherence(model.word_lists(inputs.topn), *inputs.index, inputs.topn).mean;
      const auto& incumbent = best ? result.grid[*best] : point;
      const bool better = !best || *point.coherence > *incumbent.coherence ||
                          (*point.coherence == *incumbent.coherence && point.n_topics < incumbent.n_topics);
      if (better) {
        best = result.grid.size();
        result.best_model = std::move(model);
      }
    }
    result.grid.push_back(point);
  }
  if (!best) throw Error(ErrorKind::invalid_argument, "no sweep grid point produced any topic");
  result.best = *best;
  return result;
}

nlohmann::json to_json(const TopicModel& model) {
  nlohmann::json topics = nlohmann::json::array();
  for (std::size_t t = 0; t < model.k(); ++t) {
    nlohmann::json words = nlohmann::json::array();
    for (const auto& ws : model.top_words[t]) words.push_back(nlohmann::json::array({ws.word, ws.score}));
    const auto row = model.topic_vectors.row(static_cast<Eigen::Index>(t));
    topics.push_back({{"id", t},
                      {"size", model.sizes[t]},
                      {"label", model.label(t)},
                      {"vector_dim", row.size()},
                      {"vector", std::vector<double>(row.begin(), row.end())},
                      {"top_words", std::move(words)}});
  }
  nlohmann::json merges = nlohmann::json::array();
  for (const auto& m : model.merges) {
    merges.push_back({{"from", m.from}, {"into", m.into}, {"from_size", m.from_size}, {"similarity", m.similarity}});
  }
  return {{"k", model.k()},
          {"noise", model.noise_count()},
          {"topics", std::move(topics)},
          {"documents", {{"ids", model.assignment.item_ids}, {"labels", model.assignment.labels}}},
          {"merges", std::move(merges)},
          {"provenance", model.provenance}};
}

std::string model_json(const TopicModel& model) { return to_json(model).dump(2) + "\n"; }

TopicModel parse_model(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, std::string("topic model is not valid JSON: ") + e.what());
  }
  try {
    TopicModel model;
    const auto& topics = j.at("topics");
    const auto k = topics.size();
    if (k == 0) throw Error(ErrorKind::format, "topic model has no topics");
    const auto dim = topics.at(0).at("vector_dim").get<std::size_t>();
    model.topic_vectors.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(dim));
    for (std::size_t t = 0; t < k; ++t) {
      const auto& topic = topics.at(t);
      if (topic.at("id").get<std::size_t>() != t) throw Error(ErrorKind::format, "topic ids must be 0..K-1 in order");
      const auto vec = topic.at("vector").get<std::vector<double>>();
      if (vec.size() != dim) throw Error(ErrorKind::format, "topic " + std::to_string(t) + " vector has wrong dim");
      for (std::size_t d = 0; d < dim; ++d) {
        model.topic_vectors(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(d)) = vec[d];
      }
      model.sizes.push_back(topic.at("size").get<std::size_t>());
      std::vector<WordScore> ranked;
      for (const auto& pair : topic.at("top_words")) {
        ranked.push_back({pair.at(0).get<std::string>(), pair.at(1).get<double>()});
      }
      model.top_words.push_back(std::move(ranked));
    }
    model.provenance = j.value("provenance", nlohmann::json::object());
    if (j.contains("documents")) {
      model.assignment.item_ids = j["documents"].at("ids").get<std::vector<std::string>>();
      model.assignment.labels = j["documents"].at("labels").get<std::vector<int>>();
    }
    model.assignment.k = static_cast<int>(k);
    model.assignment.method = cluster::parse_method(model.provenance.value("clusterer", std::string("hdbscan")));
    model.assignment.params = model.provenance.value("params", nlohmann::json::object());
    for (const auto& m : j.value("merges", nlohmann::json::array())) {
      model.merges.push_back({m.at("from").get<int>(), m.at("into").get<int>(), m.at("from_size").get<std::size_t>(),
                              m.at("similarity").get<double>()});
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, std::string("malformed topic model: ") + e.what());
  }
}

nlohmann::json to_json(const SweepResult& result) {
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& point : result.grid) {
    grid.push_back({{"min_cluster_size", point.params.min_cluster_size},
                    {"min_samples", point.params.min_samples},
                    {"n_topics", point.n_topics},
                    {"coherence", point.coherence ? nlohmann::json(*point.coherence) : nlohmann::json(nullptr)}});
  }
  return {{"grid", std::move(grid)}, {"best", result.best}, {"best_n_topics", result.grid.at(result.best).n_topics}};
}

}  // namespace topicmap::topics
