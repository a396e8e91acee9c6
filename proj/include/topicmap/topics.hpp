#pragma once

#include <cstddef>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "topicmap/cluster.hpp"
#include "topicmap/coherence.hpp"
#include "topicmap/corpus.hpp"
#include "topicmap/embed.hpp"
#include "topicmap/matrix.hpp"
#include "topicmap/reduce.hpp"

namespace topicmap::topics {

struct WordScore {
  std::string word;
  double score = 0.0;
};

using RankedWords = std::vector<std::vector<WordScore>>;

/// One hierarchical merge: topic `from` was folded into topic `into`.
/// Both indices refer to the numbering before the merge; afterwards the
/// topics above `from` shift down by one.
struct MergeStep {
  int from = 0;
  int into = 0;
  std::size_t from_size = 0;
  double similarity = 0.0;
};

struct TopicModel {
  RowMatrix topic_vectors;  // K x original embedding dim
  cluster::ClusterAssignment assignment;
  std::vector<std::size_t> sizes;
  RankedWords top_words;
  std::vector<MergeStep> merges;
  nlohmann::json provenance = nlohmann::json::object();

  std::size_t k() const noexcept { return static_cast<std::size_t>(topic_vectors.rows()); }
  std::size_t noise_count() const;
  std::vector<std::vector<std::string>> word_lists(std::size_t n) const;
  /// Top few words joined by spaces; used for plot legends and reports.
  std::string label(std::size_t topic, std::size_t words = 3) const;
};

/// Row t is the mean of the document vectors labelled t; noise is skipped.
RowMatrix topic_vectors(const embed::EmbeddingMatrix& docs, const cluster::ClusterAssignment& assignment);

/// The n words with highest cosine to each topic vector; ties keep the
/// word matrix order.
RankedWords top_words(const RowMatrix& tv, const embed::EmbeddingMatrix& words, std::size_t n);

TopicModel build_model(const embed::EmbeddingMatrix& docs, const embed::EmbeddingMatrix& words,
                       cluster::ClusterAssignment assignment, std::size_t n,
                       nlohmann::json provenance = nlohmann::json::object());

/// Repeatedly folds the smallest topic into its most similar topic until
/// target_k remain, recomputing centroids from the merged members.
TopicModel reduce_topics(const TopicModel& model, const embed::EmbeddingMatrix& docs,
                         const embed::EmbeddingMatrix& words, std::size_t target_k);

/// Replays a merge chain over original labels.
std::vector<int> apply_merges(std::vector<int> labels, const std::vector<MergeStep>& merges);

/// Largest |recomputed centroid - stored vector| entry.
double centroid_error(const TopicModel& model, const embed::EmbeddingMatrix& docs);

struct SweepPoint {
  cluster::HdbscanParams params;
  std::size_t n_topics = 0;
  std::optional<double> coherence;
};

struct SweepResult {
  std::vector<SweepPoint> grid;
  std::size_t best = 0;
  TopicModel best_model;
};

std::vector<cluster::HdbscanParams> default_grid();

struct SweepInputs {
  const embed::EmbeddingMatrix* docs = nullptr;
  const embed::EmbeddingMatrix* words = nullptr;
  const coherence::WindowIndex* index = nullptr;
  const reduce::ReducedMatrix* reduced = nullptr;
  std::size_t topn = 50;
};

/// Clusters the reduced documents at every grid point and keeps the one with
/// the highest mean coherence; ties go to fewer topics, then grid order.
SweepResult sweep(const SweepInputs& inputs, const std::vector<cluster::HdbscanParams>& grid);

nlohmann::json to_json(const TopicModel& model);
std::string model_json(const TopicModel& model);
TopicModel parse_model(std::string_view text);

nlohmann::json to_json(const SweepResult& result);

}  // namespace topicmap::topics
