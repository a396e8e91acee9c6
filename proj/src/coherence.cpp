#include "topicmap/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <unordered_set>

#include "topicmap/error.hpp"

namespace topicmap::coherence {
namespace {

void check_window(std::size_t window_size, std::size_t stride) {
  if (window_size < 2) throw Error(ErrorKind::invalid_argument, "window size must be >= 2");
  if (stride < 1) throw Error(ErrorKind::invalid_argument, "window stride must be >= 1");
}

std::vector<std::string_view> split(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && text[pos] == ' ') ++pos;
    const auto end = std::min(text.find(' ', pos), text.size());
    if (end > pos) out.push_back(text.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

}  // namespace

WindowIndex::WindowIndex(const corpus::Corpus& corpus, std::size_t window_size, std::size_t stride)
    : window_size_(window_size), stride_(stride) {
  check_window(window_size, stride);
  for (const auto& doc : corpus.documents) add_document(split(doc.text));
}

WindowIndex::WindowIndex(const std::vector<std::vector<std::string>>& documents, std::size_t window_size,
                         std::size_t stride)
    : window_size_(window_size), stride_(stride) {
  check_window(window_size, stride);
  for (const auto& doc : documents) {
    std::vector<std::string_view> tokens(doc.begin(), doc.end());
    add_document(tokens);
  }
}

void WindowIndex::add_document(const std::vector<std::string_view>& tokens) {
  if (tokens.empty()) return;
  std::vector<std::size_t> starts;
  if (tokens.size() <= window_size_) {
    starts.push_back(0);
  } else {
    const std::size_t last = tokens.size() - window_size_;
    for (std::size_t s = 0; s <= last; s += stride_) starts.push_back(s);
    if (starts.back() != last) starts.push_back(last);
  }
  std::unordered_set<std::string_view> seen;
  for (const auto start : starts) {
    const auto id = static_cast<std::uint32_t>(windows_++);
    const auto end = std::min(tokens.size(), start + window_size_);
    seen.clear();
    for (std::size_t t = start; t < end; ++t) {
      if (seen.insert(tokens[t]).second) postings_[std::string(tokens[t])].push_back(id);
    }
  }
}

const std::vector<std::uint32_t>* WindowIndex::postings(std::string_view word) const {
  const auto it = postings_.find(std::string(word));
  return it == postings_.end() ? nullptr : &it->second;
}

bool WindowIndex::contains(std::string_view word) const { return postings(word) != nullptr; }

std::size_t WindowIndex::count(std::string_view word) const {
  const auto* list = postings(word);
  return list ? list->size() : 0;
}

std::size_t WindowIndex::joint_count(std::string_view a, std::string_view b) const {
  const auto* la = postings(a);
  const auto* lb = postings(b);
  if (!la || !lb) return 0;
  if (a == b) return la->size();
  std::size_t shared = 0;
  auto ia = la->begin();
  auto ib = lb->begin();
  while (ia != la->end() && ib != lb->end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++shared;
      ++ia;
      ++ib;
    }
  }
  return shared;
}

double WindowIndex::probability(std::string_view word) const {
  if (windows_ == 0) return 0.0;
  return static_cast<double>(count(word)) / static_cast<double>(windows_);
}

double WindowIndex::joint_probability(std::string_view a, std::string_view b) const {
  if (windows_ == 0) return 0.0;
  return static_cast<double>(joint_count(a, b)) / static_cast<double>(windows_);
}

NpmiValue npmi_detail(std::string_view wi, std::string_view wj, const WindowIndex& idx, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::invalid_argument, "epsilon must be positive");
  const double pi = idx.probability(wi);
  const double pj = idx.probability(wj);
  const double joint = idx.joint_probability(wi, wj) + eps;
  NpmiValue out;
  double marginal = pi * pj;
  if (marginal == 0.0) {
    out.degenerate = true;
    marginal = eps;
  }
  const double denominator = -std::log(joint);
  if (denominator <= 0.0) {
    // Both words fill every window: the association is perfect but the
    // ratio is 0/0, so report the limit value.
    out.value = 1.0;
    return out;
  }
  out.value = std::log(joint / marginal) / denominator;
  return out;
}

double npmi(std::string_view wi, std::string_view wj, const WindowIndex& idx, double eps) {
  return npmi_detail(wi, wj, idx, eps).value;
}

CoherenceReport coherence(const std::vector<std::vector<std::string>>& topic_words, const WindowIndex& idx,
                          std::size_t n, double eps) {
  if (n < 2) throw Error(ErrorKind::invalid_argument, "coherence needs at least 2 words per topic");
  CoherenceReport report;
  report.n = n;
  report.epsilon = eps;
  report.window_size = idx.window_size();
  report.virtual_docs = idx.virtual_doc_count();
  double total = 0.0;
  std::size_t scored = 0;
  for (const auto& words : topic_words) {
    if (words.size() < n) {
      throw Error(ErrorKind::invalid_argument, "topic has " + std::to_string(words.size()) +
                                                   " words, fewer than n=" + std::to_string(n));
    }
    std::vector<std::string_view> present;
    for (std::size_t i = 0; i < n; ++i) {
      if (idx.contains(words[i])) {
        present.push_back(words[i]);
      } else {
        ++report.skipped_words;
      }
    }
    if (present.size() < 2) {
      report.per_topic.emplace_back();
      continue;
    }
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < present.size(); ++i) {
      for (std::size_t j = i + 1; j < present.size(); ++j) {
        const auto value = npmi_detail(present[i], present[j], idx, eps);
        report.degenerate_pairs += value.degenerate ? 1 : 0;
        sum += value.value;
        ++pairs;
      }
    }
    const double topic_score = sum / static_cast<double>(pairs);
    report.per_topic.emplace_back(topic_score);
    total += topic_score;
    ++scored;
  }
  report.mean = scored > 0 ? total / static_cast<double>(scored) : 0.0;
  return report;
}

std::string report_json(const CoherenceReport& report, const nlohmann::json& provenance) {
  nlohmann::json j;
  j["mean"] = report.mean;
  auto per_topic = nlohmann::json::array();
  for (const auto& score : report.per_topic) {
    per_topic.push_back(score ? nlohmann::json(*score) : nlohmann::json(nullptr));
  }
  j["per_topic"] = std::move(per_topic);
  j["n"] = report.n;
  j["epsilon"] = report.epsilon;
  j["skipped_words"] = report.skipped_words;
  j["degenerate_pairs"] = report.degenerate_pairs;
  j["window"] = report.window_size;
  j["virtual_documents"] = report.virtual_docs;
  if (!provenance.is_null()) j["provenance"] = provenance;
  return j.dump(2) + "\n";
}

}  // namespace topicmap::coherence
