#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace topicmap::corpus {

struct Document {
  std::string id;
  std::string text;  // cleaned: lowercase, single-spaced
  std::string source;
  std::optional<std::string> chapter;
  std::optional<std::string> verse;
  std::size_t token_count = 0;
};

struct CorpusStats {
  std::size_t documents = 0;
  std::size_t words = 0;
  double avg_words = 0.0;
  std::size_t verses = 0;
};

using StopwordSet = std::unordered_set<std::string>;

struct Corpus {
  std::string name;
  std::vector<Document> documents;
  /// Non-stopword tokens in first-occurrence order; position is the word id.
  std::vector<std::string> vocabulary;
  std::vector<std::size_t> vocabulary_counts;
  std::unordered_map<std::string, std::size_t> vocabulary_index;
  StopwordSet stopwords;
  CorpusStats stats;

  std::optional<std::size_t> word_id(std::string_view token) const;
  bool is_stopword(std::string_view token) const;
};

/// Whole-token replacement table (archaic -> modern). Keys and values are
/// lowercase; no value token may itself be a key.
using ReplacementTable = std::map<std::string, std::string, std::less<>>;

struct CleanOptions {
  ReplacementTable replacements;

  static const CleanOptions& defaults();
};

/// Characters removed by the punctuation step (ASCII part; the en and em
/// dashes are removed as well).
inline constexpr std::string_view kStripSet = ".,;:!?\"'()[]{}-";

std::string clean_text(std::string_view raw, const CleanOptions& options = CleanOptions::defaults());

std::vector<std::string> tokenize(std::string_view cleaned);

enum class SegmentMode { verse_numbered, paragraph };

/// Matches "2.47", "(2.47)" and "2.47." at the start of a line.
/// Capture group 1 is the chapter, group 2 the verse.
inline constexpr std::string_view kDefaultVersePattern = R"(^\s*\(?(\d+)\.(\d+)\)?[.:]?(\s+|$))";

struct SegmentOptions {
  SegmentMode mode = SegmentMode::verse_numbered;
  std::string verse_pattern = std::string(kDefaultVersePattern);
  std::size_t max_tokens = 120;
  std::string source = "corpus";
  CleanOptions clean = CleanOptions::defaults();
};

std::vector<Document> segment(std::string_view raw, const SegmentOptions& options);

Corpus build_corpus(std::vector<Document> docs, std::string name, StopwordSet stopwords);

struct NgramEntry {
  std::vector<std::string> tokens;
  std::size_t count = 0;
};

struct NgramTable {
  int n = 1;
  std::vector<NgramEntry> entries;
};

/// Counts n-grams within documents. With drop_stopwords, any n-gram that
/// contains a stopword is discarded. top_k == 0 keeps every entry.
NgramTable ngrams(const Corpus& corpus, int n, std::size_t top_k, bool drop_stopwords);

// Assets and I/O.

StopwordSet default_stopwords();
StopwordSet parse_stopwords(std::string_view text);
ReplacementTable parse_replacement_table(std::string_view text);

std::string to_jsonl(const std::vector<Document>& docs);
std::vector<Document> parse_jsonl(std::string_view text, std::string_view source,
                                  const CleanOptions& clean = CleanOptions::defaults());
std::string stats_json(const Corpus& corpus, const nlohmann::json& provenance = nullptr);
std::string ngrams_csv(const NgramTable& table);

}  // namespace topicmap::corpus
