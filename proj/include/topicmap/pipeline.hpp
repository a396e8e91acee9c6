#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "topicmap/coherence.hpp"
#include "topicmap/corpus.hpp"
#include "topicmap/embed.hpp"
#include "topicmap/reduce.hpp"
#include "topicmap/topics.hpp"

namespace topicmap::pipeline {

/// Flat `key = value` settings; `#` starts a comment line.
class Config {
 public:
  static Config parse(std::string_view text, std::string_view origin = "<config>");
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> find(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback = {}) const;
  /// Throws missing_input when absent.
  std::string require(const std::string& key) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::size_t> get_size_list(const std::string& key, std::vector<std::size_t> fallback) const;

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

corpus::Corpus load_corpus(const Config& cfg, const std::string& key = "corpus");

/// Document rows reordered to corpus order, optionally unit-normalised.
embed::EmbeddingMatrix load_document_embeddings(const Config& cfg, const corpus::Corpus& corpus,
                                                const std::string& key = "embeddings");

embed::JointEmbedding load_joint(const Config& cfg, const corpus::Corpus& corpus);

reduce::UmapParams umap_params(const Config& cfg);
cluster::HdbscanParams hdbscan_params(const Config& cfg);
reduce::ReducedMatrix reduce_documents(const Config& cfg, const embed::EmbeddingMatrix& docs);

/// Digests of the configured input files plus every parameter that shapes
/// the output. Paths are deliberately left out.
nlohmann::json provenance(const Config& cfg, const embed::JointEmbedding& joint);

struct TopicsRun {
  corpus::Corpus corpus;
  embed::JointEmbedding joint;
  reduce::ReducedMatrix reduced;
  topics::TopicModel model;
  std::optional<topics::TopicModel> unreduced;
  coherence::CoherenceReport coherence;
};

TopicsRun run_topics(const Config& cfg);
void write_topics(const TopicsRun& run, const std::filesystem::path& out);

struct SweepRun {
  TopicsRun best;
  topics::SweepResult sweep;
};

SweepRun run_sweep(const Config& cfg);
void write_sweep(const SweepRun& run, const std::filesystem::path& out);

void run_ingest(const Config& cfg, const std::filesystem::path& out);
void run_ngrams(const Config& cfg, const std::filesystem::path& out);
void run_coherence(const Config& cfg, const std::filesystem::path& out);
/// Returns the mean coherence of the LDA topics on the same windows.
double run_lda(const Config& cfg, const std::filesystem::path& out);
void run_compare(const Config& cfg, const std::filesystem::path& out);
void run_project(const Config& cfg, const std::filesystem::path& out);

}  // namespace topicmap::pipeline
