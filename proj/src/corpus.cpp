#include "topicmap/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <nlohmann/json.hpp>
#include <regex>
#include <set>
#include <sstream>

#include "topicmap/error.hpp"
#include "topicmap/util.hpp"

namespace topicmap::assets {
extern const std::string_view kStopwords;
extern const std::string_view kArchaicWords;
}  // namespace topicmap::assets

namespace topicmap::corpus {
namespace {

using json = nlohmann::json;

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_hex(char c) { return std::isxdigit(static_cast<unsigned char>(c)) != 0; }

bool hex_run(std::string_view s, std::size_t pos, std::size_t count) {
  if (pos + count > s.size()) return false;
  for (std::size_t i = 0; i < count; ++i) {
    if (!is_hex(s[pos + i])) return false;
  }
  return true;
}

bool is_unicode_space(char32_t cp) {
  return cp == 0x00A0 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 ||
         cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

// Step 1: drop escape artifacts and anything outside printable ASCII.
// Literal "\n", "\t", "\r" and control characters become spaces; "\uXXXX",
// "\UXXXXXXXX", "\xXX", stray backslashes and non-ASCII code points vanish.
std::string drop_artifacts(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    const auto byte = static_cast<unsigned char>(raw[i]);
    if (byte == '\\') {
      const char next = i + 1 < raw.size() ? raw[i + 1] : '\0';
      if (next == 'u' && hex_run(raw, i + 2, 4)) {
        i += 6;
      } else if (next == 'U' && hex_run(raw, i + 2, 8)) {
        i += 10;
      } else if (next == 'x' && hex_run(raw, i + 2, 2)) {
        i += 4;
      } else if (next == 'n' || next == 't' || next == 'r') {
        out.push_back(' ');
        i += 2;
      } else {
        i += 1;
      }
      continue;
    }
    if (byte < 0x80) {
      out.push_back(byte < 0x20 || byte == 0x7F ? ' ' : static_cast<char>(byte));
      ++i;
      continue;
    }
    // Multi-byte UTF-8; invalid sequences are skipped one byte at a time.
    std::size_t length = 0;
    char32_t cp = 0;
    if ((byte & 0xE0) == 0xC0) {
      length = 2;
      cp = byte & 0x1F;
    } else if ((byte & 0xF0) == 0xE0) {
      length = 3;
      cp = byte & 0x0F;
    } else if ((byte & 0xF8) == 0xF0) {
      length = 4;
      cp = byte & 0x07;
    }
    bool valid = length != 0 && i + length <= raw.size();
    for (std::size_t k = 1; valid && k < length; ++k) {
      const auto cont = static_cast<unsigned char>(raw[i + k]);
      if ((cont & 0xC0) != 0x80) {
        valid = false;
      } else {
        cp = (cp << 6) | (cont & 0x3F);
      }
    }
    if (!valid) {
      ++i;
      continue;
    }
    if (is_unicode_space(cp)) out.push_back(' ');
    i += length;
  }
  return out;
}

bool in_strip_set(char c) { return kStripSet.find(c) != std::string_view::npos; }

std::string strip_and_lower(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  for (char c : token) {
    if (in_strip_set(c)) continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && is_ascii_space(s[begin])) ++begin;
  while (end > begin && is_ascii_space(s[end - 1])) --end;
  return std::string(s.substr(begin, end - begin));
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) { return is_ascii_space(c); });
}

// Raw sentences: a boundary follows '.', '!' or '?' when whitespace comes next.
std::vector<std::string> split_sentences(std::string_view block) {
  std::vector<std::string> sentences;
  std::size_t start = 0;
  for (std::size_t i = 0; i < block.size(); ++i) {
    const char c = block[i];
    if ((c == '.' || c == '!' || c == '?') && i + 1 < block.size() && is_ascii_space(block[i + 1])) {
      sentences.emplace_back(block.substr(start, i + 1 - start));
      start = i + 1;
    }
  }
  if (start < block.size()) sentences.emplace_back(block.substr(start));
  return sentences;
}

std::string join(const std::vector<std::string>& tokens, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

// Cleans a raw block and packs its sentences into chunks of at most
// max_tokens tokens. Sentences longer than the limit are cut hard.
std::vector<std::string> chunk_block(std::string_view block, const SegmentOptions& options) {
  const auto whole = tokenize(clean_text(block, options.clean));
  if (whole.empty()) return {};
  if (options.max_tokens == 0 || whole.size() <= options.max_tokens) {
    return {join(whole, 0, whole.size())};
  }
  std::vector<std::string> chunks;
  std::vector<std::string> current;
  auto flush = [&] {
    if (!current.empty()) {
      chunks.push_back(join(current, 0, current.size()));
      current.clear();
    }
  };
  for (const auto& sentence : split_sentences(block)) {
    auto tokens = tokenize(clean_text(sentence, options.clean));
    if (tokens.empty()) continue;
    if (current.size() + tokens.size() > options.max_tokens) flush();
    if (tokens.size() > options.max_tokens) {
      for (std::size_t pos = 0; pos < tokens.size(); pos += options.max_tokens) {
        const auto end = std::min(tokens.size(), pos + options.max_tokens);
        if (end - pos == options.max_tokens) {
          chunks.push_back(join(tokens, pos, end));
        } else {
          current.assign(tokens.begin() + static_cast<std::ptrdiff_t>(pos), tokens.end());
        }
      }
      continue;
    }
    current.insert(current.end(), tokens.begin(), tokens.end());
  }
  flush();
  return chunks;
}

void emit_block(std::string_view block, const std::string& base_id,
                const std::optional<std::string>& chapter, const std::optional<std::string>& verse,
                const SegmentOptions& options, std::vector<Document>& out) {
  const auto chunks = chunk_block(block, options);
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    Document doc;
    doc.id = chunks.size() == 1 ? base_id : base_id + "#" + std::to_string(c + 1);
    doc.text = chunks[c];
    doc.source = options.source;
    doc.chapter = chapter;
    doc.verse = verse;
    doc.token_count = tokenize(doc.text).size();
    out.push_back(std::move(doc));
  }
}

std::string json_scalar_to_string(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  return value.dump();
}

}  // namespace

std::optional<std::size_t> Corpus::word_id(std::string_view token) const {
  const auto it = vocabulary_index.find(std::string(token));
  if (it == vocabulary_index.end()) return std::nullopt;
  return it->second;
}

bool Corpus::is_stopword(std::string_view token) const {
  return stopwords.count(std::string(token)) != 0;
}

const CleanOptions& CleanOptions::defaults() {
  static const CleanOptions options{parse_replacement_table(assets::kArchaicWords)};
  return options;
}

std::string clean_text(std::string_view raw, const CleanOptions& options) {
  const std::string printable = drop_artifacts(raw);
  std::string out;
  out.reserve(printable.size());
  std::size_t i = 0;
  while (i < printable.size()) {
    while (i < printable.size() && is_ascii_space(printable[i])) ++i;
    const std::size_t start = i;
    while (i < printable.size() && !is_ascii_space(printable[i])) ++i;
    if (start == i) break;
    // Substitution keys compare against the token as it will look after
    // punctuation removal and lowercasing, which keeps the whole recipe
    // idempotent.
    std::string token = strip_and_lower(std::string_view(printable).substr(start, i - start));
    if (const auto it = options.replacements.find(token); it != options.replacements.end()) {
      token = it->second;
    }
    if (token.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += token;
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view cleaned) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < cleaned.size()) {
    while (i < cleaned.size() && is_ascii_space(cleaned[i])) ++i;
    const std::size_t start = i;
    while (i < cleaned.size() && !is_ascii_space(cleaned[i])) ++i;
    if (start != i) tokens.emplace_back(cleaned.substr(start, i - start));
  }
  return tokens;
}

std::vector<Document> segment(std::string_view raw, const SegmentOptions& options) {
  std::vector<Document> docs;
  const auto lines = split_lines(raw);

  if (options.mode == SegmentMode::paragraph) {
    std::string block;
    std::size_t paragraph = 0;
    auto flush = [&] {
      if (!is_blank(block)) {
        ++paragraph;
        emit_block(block, options.source + ":p" + std::to_string(paragraph), std::nullopt,
                   std::nullopt, options, docs);
      }
      block.clear();
    };
    for (auto line : lines) {
      if (is_blank(line)) {
        flush();
      } else {
        block.append(line);
        block.push_back('\n');
      }
    }
    flush();
    return docs;
  }

  std::regex marker;
  try {
    marker = std::regex(options.verse_pattern, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw Error(ErrorKind::invalid_argument,
                "invalid verse pattern '" + options.verse_pattern + "': " + e.what());
  }
  if (marker.mark_count() < 2) {
    throw Error(ErrorKind::invalid_argument,
                "verse pattern '" + options.verse_pattern + "' needs chapter and verse groups");
  }

  struct Pending {
    std::string chapter;
    std::string verse;
    std::string text;
  };
  std::optional<Pending> pending;
  std::size_t markers = 0;
  auto flush = [&] {
    if (pending) {
      emit_block(pending->text, options.source + ":" + pending->chapter + "." + pending->verse,
                 pending->chapter, pending->verse, options, docs);
    }
  };
  for (auto line : lines) {
    std::match_results<std::string_view::const_iterator> match;
    if (std::regex_search(line.begin(), line.end(), match, marker)) {
      ++markers;
      flush();
      pending = Pending{match[1].str(), match[2].str(),
                        std::string(line.substr(static_cast<std::size_t>(match.position(0) +
                                                                         match.length(0))))};
      pending->text.push_back('\n');
    } else if (pending) {
      pending->text.append(line);
      pending->text.push_back('\n');
    }
  }
  flush();
  if (markers == 0) {
    throw Error(ErrorKind::format,
                "no verse markers found using pattern '" + options.verse_pattern + "'");
  }
  return docs;
}

Corpus build_corpus(std::vector<Document> docs, std::string name, StopwordSet stopwords) {
  if (docs.empty()) {
    throw Error(ErrorKind::invalid_argument, "corpus '" + name + "' has no documents");
  }
  Corpus corpus;
  corpus.name = std::move(name);
  corpus.stopwords = std::move(stopwords);
  std::set<std::pair<std::string, std::string>> verses;
  std::size_t words = 0;
  for (auto& doc : docs) {
    const auto tokens = tokenize(doc.text);
    doc.token_count = tokens.size();
    words += tokens.size();
    for (const auto& token : tokens) {
      if (corpus.stopwords.count(token)) continue;
      auto [it, inserted] = corpus.vocabulary_index.emplace(token, corpus.vocabulary.size());
      if (inserted) {
        corpus.vocabulary.push_back(token);
        corpus.vocabulary_counts.push_back(0);
      }
      ++corpus.vocabulary_counts[it->second];
    }
    if (doc.verse) verses.emplace(doc.chapter.value_or(""), *doc.verse);
  }
  corpus.documents = std::move(docs);
  corpus.stats.documents = corpus.documents.size();
  corpus.stats.words = words;
  corpus.stats.avg_words = static_cast<double>(words) / static_cast<double>(corpus.documents.size());
  corpus.stats.verses = verses.size();
  return corpus;
}

NgramTable ngrams(const Corpus& corpus, int n, std::size_t top_k, bool drop_stopwords) {
  if (n < 1 || n > 3) {
    throw Error(ErrorKind::invalid_argument, "n-gram order must be 1, 2 or 3, got " + std::to_string(n));
  }
  const auto order = static_cast<std::size_t>(n);
  std::map<std::vector<std::string>, std::size_t> counts;
  for (const auto& doc : corpus.documents) {
    const auto tokens = tokenize(doc.text);
    for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
      std::vector<std::string> gram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                    tokens.begin() + static_cast<std::ptrdiff_t>(i + order));
      if (drop_stopwords &&
          std::any_of(gram.begin(), gram.end(), [&](const auto& t) { return corpus.is_stopword(t); })) {
        continue;
      }
      ++counts[std::move(gram)];
    }
  }
  NgramTable table;
  table.n = n;
  table.entries.reserve(counts.size());
  for (auto& [gram, count] : counts) table.entries.push_back({gram, count});
  // The map is already lexicographic, so a stable sort on count alone
  // yields the total order.
  std::stable_sort(table.entries.begin(), table.entries.end(),
                   [](const NgramEntry& a, const NgramEntry& b) { return a.count > b.count; });
  if (top_k != 0 && table.entries.size() > top_k) table.entries.resize(top_k);
  return table;
}

StopwordSet default_stopwords() { return parse_stopwords(assets::kStopwords); }

StopwordSet parse_stopwords(std::string_view text) {
  StopwordSet words;
  for (auto line : split_lines(text)) {
    const auto word = trim(line);
    if (word.empty() || word.front() == '#') continue;
    words.insert(strip_and_lower(word));
  }
  return words;
}

ReplacementTable parse_replacement_table(std::string_view text) {
  ReplacementTable table;
  std::size_t line_no = 0;
  for (auto line : split_lines(text)) {
    ++line_no;
    const auto content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    std::istringstream fields(content);
    std::string key;
    std::string value;
    fields >> key;
    std::getline(fields, value);
    key = strip_and_lower(key);
    value = clean_text(value, CleanOptions{});
    if (key.empty() || value.empty()) {
      throw Error(ErrorKind::format, "replacement table line " + std::to_string(line_no) +
                                         " needs a word and its replacement");
    }
    table[key] = value;
  }
  for (const auto& [key, value] : table) {
    for (const auto& token : tokenize(value)) {
      if (table.count(token)) {
        throw Error(ErrorKind::format,
                    "replacement for '" + key + "' contains another key '" + token + "'");
      }
    }
  }
  return table;
}

std::string to_jsonl(const std::vector<Document>& docs) {
  std::string out;
  for (const auto& doc : docs) {
    json line = json::object();
    line["id"] = doc.id;
    line["text"] = doc.text;
    line["source"] = doc.source;
    if (doc.chapter) line["chapter"] = *doc.chapter;
    if (doc.verse) line["verse"] = *doc.verse;
    line["token_count"] = doc.token_count;
    out += line.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<Document> parse_jsonl(std::string_view text, std::string_view source,
                                  const CleanOptions& clean) {
  std::vector<Document> docs;
  std::size_t line_no = 0;
  for (auto line : split_lines(text)) {
    ++line_no;
    if (is_blank(line)) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::format, "corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!record.is_object() || !record.contains("id") || !record.contains("text") ||
        !record["text"].is_string()) {
      throw Error(ErrorKind::format,
                  "corpus line " + std::to_string(line_no) + " needs string fields id and text");
    }
    Document doc;
    doc.id = json_scalar_to_string(record["id"]);
    doc.text = clean_text(record["text"].get<std::string>(), clean);
    doc.source = record.contains("source") ? json_scalar_to_string(record["source"]) : std::string(source);
    if (record.contains("chapter") && !record["chapter"].is_null()) {
      doc.chapter = json_scalar_to_string(record["chapter"]);
    }
    if (record.contains("verse") && !record["verse"].is_null()) {
      doc.verse = json_scalar_to_string(record["verse"]);
    }
    doc.token_count = tokenize(doc.text).size();
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::string stats_json(const Corpus& corpus, const json& provenance) {
  json stats = json::object();
  stats["name"] = corpus.name;
  stats["documents"] = corpus.stats.documents;
  stats["words"] = corpus.stats.words;
  stats["avg_words"] = corpus.stats.avg_words;
  stats["verses"] = corpus.stats.verses;
  stats["vocabulary"] = corpus.vocabulary.size();
  if (!provenance.is_null()) stats["provenance"] = provenance;
  return stats.dump(2) + "\n";
}

std::string ngrams_csv(const NgramTable& table) {
  std::string out = "ngram,count\n";
  for (const auto& entry : table.entries) {
    out += join(entry.tokens, 0, entry.tokens.size());
    out += ",";
    out += std::to_string(entry.count);
    out += "\n";
  }
  return out;
}

}  // namespace topicmap::corpus
