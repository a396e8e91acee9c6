#include "topicmap/embed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <nlohmann/json.hpp>

#include "httplib.h"
#include "topicmap/error.hpp"
#include "topicmap/util.hpp"

namespace topicmap::embed {
namespace {

using json = nlohmann::json;

constexpr std::string_view kMagic = "EMB1";

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const { return pos_ + n <= bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::uint32_t u32() { return static_cast<std::uint32_t>(little(4)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(little(2)); }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string_view take(std::size_t n) {
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  std::uint64_t little(std::size_t n) {
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < n; ++i) {
      value |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += n;
    return value;
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

void put_little(std::string& out, std::uint64_t value, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

EmbeddingMatrix parse_emb1(std::string_view bytes, std::string_view origin) {
  const std::string where(origin);
  ByteReader reader(bytes);
  if (!reader.has(12) || reader.take(4) != kMagic) {
    throw Error(ErrorKind::format, where + ": magic mismatch (expected EMB1)");
  }
  const std::uint32_t count = reader.u32();
  const std::uint32_t dim = reader.u32();
  if (dim == 0) throw Error(ErrorKind::format, where + ": dim must be positive");
  std::vector<std::string> ids;
  ids.reserve(count);
  RowMatrix rows(count, dim);
  for (std::uint32_t r = 0; r < count; ++r) {
    if (!reader.has(2)) throw Error(ErrorKind::format, where + ": truncated payload at row " + std::to_string(r));
    const auto id_length = reader.u16();
    if (!reader.has(id_length + std::size_t{4} * dim)) {
      throw Error(ErrorKind::format, where + ": truncated payload at row " + std::to_string(r));
    }
    ids.emplace_back(reader.take(id_length));
    for (std::uint32_t c = 0; c < dim; ++c) rows(r, c) = static_cast<double>(reader.f32());
  }
  if (reader.remaining() != 0) {
    throw Error(ErrorKind::format, where + ": " + std::to_string(reader.remaining()) +
                                       " trailing bytes after " + std::to_string(count) + " rows");
  }
  return EmbeddingMatrix(std::move(ids), std::move(rows));
}

EmbeddingMatrix parse_jsonl_embeddings(std::string_view text, std::string_view origin) {
  const std::string where(origin);
  std::vector<std::string> ids;
  std::vector<std::vector<double>> vectors;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const auto row = vectors.size();
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::format, where + ": row " + std::to_string(row) + ": " + e.what());
    }
    if (!record.contains("id") || !record.contains("vector") || !record["vector"].is_array()) {
      throw Error(ErrorKind::format, where + ": row " + std::to_string(row) + " needs id and vector");
    }
    ids.push_back(record["id"].is_string() ? record["id"].get<std::string>() : record["id"].dump());
    std::vector<double> values;
    for (const auto& v : record["vector"]) {
      if (!v.is_number()) {
        throw Error(ErrorKind::format, where + ": row " + std::to_string(row) + " has a non-numeric entry");
      }
      values.push_back(v.get<double>());
    }
    if (!vectors.empty() && values.size() != vectors.front().size()) {
      throw Error(ErrorKind::format, where + ": dim mismatch at row " + std::to_string(row) + " (" +
                                         std::to_string(values.size()) + " vs " +
                                         std::to_string(vectors.front().size()) + ")");
    }
    vectors.push_back(std::move(values));
  }
  if (vectors.empty() || vectors.front().empty()) {
    throw Error(ErrorKind::format, where + ": no embedding rows");
  }
  RowMatrix rows(vectors.size(), vectors.front().size());
  for (std::size_t r = 0; r < vectors.size(); ++r) {
    for (std::size_t c = 0; c < vectors[r].size(); ++c) rows(r, c) = vectors[r][c];
  }
  return EmbeddingMatrix(std::move(ids), std::move(rows));
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::vector<std::string> item_ids, RowMatrix rows, bool normalized,
                                 std::string embedder)
    : item_ids_(std::move(item_ids)),
      rows_(std::move(rows)),
      normalized_(normalized),
      embedder_(std::move(embedder)) {
  index_.reserve(item_ids_.size());
  for (std::size_t i = 0; i < item_ids_.size(); ++i) index_.emplace(item_ids_[i], i);
}

std::optional<std::size_t> EmbeddingMatrix::index_of(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void validate(const EmbeddingMatrix& m) {
  const auto& rows = m.rows();
  if (static_cast<std::size_t>(rows.rows()) != m.item_ids().size()) {
    throw Error(ErrorKind::format, "embedding has " + std::to_string(rows.rows()) + " rows but " +
                                       std::to_string(m.item_ids().size()) + " ids");
  }
  if (m.dim() == 0) throw Error(ErrorKind::format, "embedding dim must be positive");
  if (!m.has_unique_ids()) throw Error(ErrorKind::format, "embedding item ids are not unique");
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const auto name = "row " + std::to_string(r) + " (" + m.item_ids()[static_cast<std::size_t>(r)] + ")";
    if (!rows.row(r).allFinite()) throw Error(ErrorKind::format, name + " contains NaN or Inf");
    const double norm = rows.row(r).norm();
    if (norm == 0.0) throw Error(ErrorKind::format, name + " is all-zero");
    if (m.normalized() && std::abs(norm - 1.0) > 1e-6) {
      throw Error(ErrorKind::format, name + " is not unit length");
    }
  }
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  auto m = parse_embeddings(read_file(path), path.string());
  auto manifest_path = path;
  manifest_path += ".manifest.json";
  if (std::filesystem::exists(manifest_path)) {
    try {
      const auto manifest = json::parse(read_file(manifest_path));
      if (manifest.contains("model") && manifest["model"].is_string()) {
        m.set_embedder(manifest["model"].get<std::string>());
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::format, manifest_path.string() + ": " + e.what());
    }
  }
  return m;
}

EmbeddingMatrix parse_embeddings(std::string_view bytes, std::string_view origin) {
  EmbeddingMatrix m;
  const auto first = bytes.find_first_not_of(" \t\r\n");
  if (bytes.substr(0, 4) != kMagic && first != std::string_view::npos && bytes[first] == '{') {
    m = parse_jsonl_embeddings(bytes, origin);
  } else {
    m = parse_emb1(bytes, origin);
  }
  try {
    validate(m);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(origin) + ": " + e.what());
  }
  return m;
}

std::string serialize_emb1(const EmbeddingMatrix& m) {
  std::string out(kMagic);
  put_little(out, m.size(), 4);
  put_little(out, m.dim(), 4);
  for (std::size_t r = 0; r < m.size(); ++r) {
    const auto& id = m.item_ids()[r];
    if (id.size() > 0xFFFF) throw Error(ErrorKind::format, "item id longer than 65535 bytes");
    put_little(out, id.size(), 2);
    out += id;
    for (std::size_t c = 0; c < m.dim(); ++c) {
      const auto value = static_cast<float>(m.rows()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
      put_little(out, std::bit_cast<std::uint32_t>(value), 4);
    }
  }
  return out;
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  write_file(path, serialize_emb1(m));
}

EmbeddingMatrix normalize(const EmbeddingMatrix& m) {
  RowMatrix rows = m.rows();
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const double norm = rows.row(r).norm();
    if (norm == 0.0) {
      throw Error(ErrorKind::invalid_argument,
                  "cannot normalize zero row " + m.item_ids()[static_cast<std::size_t>(r)]);
    }
    rows.row(r) /= norm;
  }
  return EmbeddingMatrix(m.item_ids(), std::move(rows), true, m.embedder());
}

TableProvider::TableProvider(EmbeddingMatrix table) : table_(std::move(table)) {}

std::string TableProvider::id() const { return table_.embedder(); }

RowMatrix TableProvider::embed(const std::vector<std::string>& texts) const {
  RowMatrix out(static_cast<Eigen::Index>(texts.size()), static_cast<Eigen::Index>(table_.dim()));
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto row = table_.index_of(texts[i]);
    if (!row) throw Error(ErrorKind::missing_input, "no embedding for '" + texts[i] + "'");
    out.row(static_cast<Eigen::Index>(i)) = table_.rows().row(static_cast<Eigen::Index>(*row));
  }
  return out;
}

HttpProvider::HttpProvider(std::string url, std::string model_id, std::size_t batch_size)
    : model_id_(std::move(model_id)), batch_size_(batch_size == 0 ? 1 : batch_size) {
  const auto scheme = url.find("://");
  const auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  base_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
}

RowMatrix HttpProvider::embed(const std::vector<std::string>& texts) const {
  httplib::Client client(base_);
  client.set_read_timeout(120, 0);
  std::vector<std::vector<double>> vectors;
  vectors.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
    const auto end = std::min(texts.size(), start + batch_size_);
    json request = {{"texts", std::vector<std::string>(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                                       texts.begin() + static_cast<std::ptrdiff_t>(end))}};
    auto response = client.Post(path_, request.dump(), "application/json");
    if (!response) {
      throw Error(ErrorKind::io, "embedding request to " + base_ + path_ + " failed: " +
                                     httplib::to_string(response.error()));
    }
    if (response->status != 200) {
      throw Error(ErrorKind::io, "embedding endpoint returned HTTP " + std::to_string(response->status));
    }
    json reply;
    try {
      reply = json::parse(response->body);
      for (const auto& v : reply.at("vectors")) vectors.push_back(v.get<std::vector<double>>());
    } catch (const json::exception& e) {
      throw Error(ErrorKind::format, std::string("malformed embedding response: ") + e.what());
    }
    if (vectors.size() != end) {
      throw Error(ErrorKind::format, "embedding endpoint returned " + std::to_string(vectors.size()) +
                                         " vectors for " + std::to_string(end) + " texts");
    }
  }
  if (vectors.empty()) return RowMatrix(0, 0);
  RowMatrix out(static_cast<Eigen::Index>(vectors.size()), static_cast<Eigen::Index>(vectors.front().size()));
  for (std::size_t r = 0; r < vectors.size(); ++r) {
    if (vectors[r].size() != vectors.front().size()) {
      throw Error(ErrorKind::format, "dim mismatch at row " + std::to_string(r) + " of embedding response");
    }
    for (std::size_t c = 0; c < vectors[r].size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = vectors[r][c];
    }
  }
  return out;
}

JointEmbedding embed_vocabulary(const corpus::Corpus& corpus, const EmbeddingMatrix& docs,
                                const EmbeddingProvider& provider, std::size_t min_word_count) {
  std::vector<std::string> words;
  for (std::size_t id = 0; id < corpus.vocabulary.size(); ++id) {
    if (corpus.vocabulary_counts[id] >= min_word_count) words.push_back(corpus.vocabulary[id]);
  }
  RowMatrix rows = provider.embed(words);
  if (!words.empty() && static_cast<std::size_t>(rows.cols()) != docs.dim()) {
    throw Error(ErrorKind::invalid_argument, "provider dim " + std::to_string(rows.cols()) +
                                                 " differs from document dim " + std::to_string(docs.dim()));
  }
  if (static_cast<std::size_t>(rows.rows()) != words.size()) {
    throw Error(ErrorKind::format, "provider returned " + std::to_string(rows.rows()) + " rows for " +
                                       std::to_string(words.size()) + " words");
  }
  std::string embedder = provider.id();
  if (embedder.empty()) embedder = docs.embedder();
  EmbeddingMatrix word_matrix(std::move(words), std::move(rows), false, std::move(embedder));
  if (word_matrix.size() != 0) validate(word_matrix);
  return {docs, std::move(word_matrix)};
}

}  // namespace topicmap::embed
