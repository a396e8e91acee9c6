#pragma once

#include <cstddef>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "topicmap/corpus.hpp"

namespace topicmap::coherence {

inline constexpr double kDefaultEpsilon = 1e-12;

// Boolean sliding-window co-occurrence counts. Each window is a contiguous
// span of at most `window_size` tokens taken from one document; a document
// shorter than the window contributes exactly one window.
class WindowIndex {
 public:
  WindowIndex(const corpus::Corpus& corpus, std::size_t window_size = 110, std::size_t stride = 1);
  WindowIndex(const std::vector<std::vector<std::string>>& documents, std::size_t window_size = 110,
              std::size_t stride = 1);

  std::size_t window_size() const noexcept { return window_size_; }
  std::size_t stride() const noexcept { return stride_; }
  std::size_t virtual_doc_count() const noexcept { return windows_; }

  bool contains(std::string_view word) const;
  std::size_t count(std::string_view word) const;
  std::size_t joint_count(std::string_view a, std::string_view b) const;
  double probability(std::string_view word) const;
  double joint_probability(std::string_view a, std::string_view b) const;

 private:
  void add_document(const std::vector<std::string_view>& tokens);
  const std::vector<std::uint32_t>* postings(std::string_view word) const;

  std::size_t window_size_;
  std::size_t stride_;
  std::size_t windows_ = 0;
  std::unordered_map<std::string, std::vector<std::uint32_t>> postings_;
};

struct NpmiValue {
  double value = 0.0;
  bool degenerate = false;  // a marginal probability was zero
};

NpmiValue npmi_detail(std::string_view wi, std::string_view wj, const WindowIndex& idx,
                      double eps = kDefaultEpsilon);
double npmi(std::string_view wi, std::string_view wj, const WindowIndex& idx, double eps = kDefaultEpsilon);

struct CoherenceReport {
  std::vector<std::optional<double>> per_topic;  // empty when < 2 words were present
  double mean = 0.0;
  std::size_t n = 0;
  double epsilon = kDefaultEpsilon;
  std::size_t skipped_words = 0;
  std::size_t degenerate_pairs = 0;
  std::size_t window_size = 0;
  std::size_t virtual_docs = 0;
};

/// Mean pairwise NPMI over the first n words of each topic that occur in the
/// index, then the mean over scored topics.
CoherenceReport coherence(const std::vector<std::vector<std::string>>& topic_words, const WindowIndex& idx,
                          std::size_t n, double eps = kDefaultEpsilon);

std::string report_json(const CoherenceReport& report, const nlohmann::json& provenance = nullptr);

}  // namespace topicmap::coherence
