#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "topicmap/corpus.hpp"
#include "topicmap/matrix.hpp"

namespace topicmap::embed {

/// Dense vectors bound to item ids (documents or vocabulary words).
/// Stored as float64; the EMB1 interchange carries float32.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::vector<std::string> item_ids, RowMatrix rows, bool normalized = false,
                  std::string embedder = {});

  const std::vector<std::string>& item_ids() const noexcept { return item_ids_; }
  const RowMatrix& rows() const noexcept { return rows_; }
  bool normalized() const noexcept { return normalized_; }
  /// Identifier of the encoder that produced the vectors; empty if unknown.
  const std::string& embedder() const noexcept { return embedder_; }

  std::size_t size() const noexcept { return item_ids_.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(rows_.cols()); }
  std::optional<std::size_t> index_of(std::string_view id) const;
  bool has_unique_ids() const noexcept { return index_.size() == item_ids_.size(); }

  void set_embedder(std::string embedder) { embedder_ = std::move(embedder); }

 private:
  std::vector<std::string> item_ids_;
  RowMatrix rows_;
  bool normalized_ = false;
  std::string embedder_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Throws topicmap::Error naming the offending row: shape mismatch,
/// non-finite entries, all-zero rows, or non-unit rows when normalized.
void validate(const EmbeddingMatrix& m);

EmbeddingMatrix read_embeddings(const std::filesystem::path& path);
/// Parses EMB1 bytes, or JSONL {id, vector} records when the magic is absent
/// and the payload starts with '{'.
EmbeddingMatrix parse_embeddings(std::string_view bytes, std::string_view origin = "<memory>");
std::string serialize_emb1(const EmbeddingMatrix& m);
void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m);

EmbeddingMatrix normalize(const EmbeddingMatrix& m);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string id() const = 0;
  /// One row per input text, in input order.
  virtual RowMatrix embed(const std::vector<std::string>& texts) const = 0;
};

/// Looks texts up in a precomputed table keyed by item id (an EMB1 file
/// exported per vocabulary token).
class TableProvider final : public EmbeddingProvider {
 public:
  explicit TableProvider(EmbeddingMatrix table);
  std::string id() const override;
  RowMatrix embed(const std::vector<std::string>& texts) const override;

 private:
  EmbeddingMatrix table_;
};

/// POSTs {"texts": [...]} to an endpoint that answers {"vectors": [[...]]}.
class HttpProvider final : public EmbeddingProvider {
 public:
  HttpProvider(std::string url, std::string model_id, std::size_t batch_size = 256);
  std::string id() const override { return model_id_; }
  RowMatrix embed(const std::vector<std::string>& texts) const override;

 private:
  std::string base_;
  std::string path_;
  std::string model_id_;
  std::size_t batch_size_;
};

struct JointEmbedding {
  EmbeddingMatrix docs;
  EmbeddingMatrix words;
};

/// Embeds every non-stopword vocabulary token seen at least min_word_count
/// times, each as a standalone input to the provider.
JointEmbedding embed_vocabulary(const corpus::Corpus& corpus, const EmbeddingMatrix& docs,
                                const EmbeddingProvider& provider, std::size_t min_word_count = 3);

}  // namespace topicmap::embed
