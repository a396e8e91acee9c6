#include <doctest.h>

#include <cstring>
#include <nlohmann/json.hpp>
#include <thread>

#include "convert.hpp"
#include "topicmap/embed.hpp"
#include "topicmap/error.hpp"
#include "topicmap/util.hpp"

// After Eigen: the socket headers define macros that clash with its internals.
#include <httplib.h>

using namespace topicmap;
using namespace topicmap::embed;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected topicmap::Error");
  return ErrorKind::io;
}

EmbeddingMatrix small() {
  RowMatrix rows(3, 2);
  rows << 1.0, 0.0, 0.5, -0.25, 3.0, 4.0;
  return EmbeddingMatrix({"a", "b:1.2", "c"}, rows, false, "enc");
}

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace

TEST_CASE("EMB1 layout is magic, count, dim, then length-prefixed ids and float32 rows") {
  const auto bytes = serialize_emb1(small());
  CHECK(bytes.substr(0, 4) == "EMB1");
  std::uint32_t count = 0;
  std::uint32_t dim = 0;
  std::memcpy(&count, bytes.data() + 4, 4);
  std::memcpy(&dim, bytes.data() + 8, 4);
  CHECK(count == 3);
  CHECK(dim == 2);
  CHECK(bytes.size() == 12 + (2 + 1) + (2 + 5) + (2 + 1) + 3 * 2 * 4);
}

TEST_CASE("EMB1 round-trips values representable in float32") {
  const auto m = small();
  const auto back = parse_embeddings(serialize_emb1(m));
  CHECK(back.item_ids() == m.item_ids());
  CHECK(back.rows() == m.rows());
}

TEST_CASE("hand-built EMB1 parses") {
  std::string bytes = "EMB1";
  put_u32(bytes, 1);
  put_u32(bytes, 3);
  bytes += std::string("\x02\x00", 2) + "id";
  for (float f : {1.0f, 2.0f, -0.5f}) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    put_u32(bytes, u);
  }
  const auto m = parse_embeddings(bytes);
  CHECK(m.item_ids() == std::vector<std::string>{"id"});
  CHECK(m.rows()(0, 2) == -0.5);
}

TEST_CASE("malformed EMB1 payloads are format errors") {
  auto good = serialize_emb1(small());
  CHECK(kind_of([&] { parse_embeddings("EMB2" + good.substr(4)); }) == ErrorKind::format);
  CHECK(kind_of([&] { parse_embeddings(good.substr(0, good.size() - 3)); }) == ErrorKind::format);
  CHECK(kind_of([&] { parse_embeddings(good + "x"); }) == ErrorKind::format);
  std::string zero_dim = "EMB1";
  put_u32(zero_dim, 0);
  put_u32(zero_dim, 0);
  CHECK(kind_of([&] { parse_embeddings(zero_dim); }) == ErrorKind::format);
}

TEST_CASE("JSONL embeddings are accepted and validated") {
  const auto m = parse_embeddings("{\"id\":\"x\",\"vector\":[1,2]}\n{\"id\":\"y\",\"vector\":[0,1]}\n");
  CHECK(m.size() == 2);
  CHECK(m.dim() == 2);
  CHECK(kind_of([] { parse_embeddings("{\"id\":\"x\",\"vector\":[1,2]}\n{\"id\":\"y\",\"vector\":[1]}\n"); }) ==
        ErrorKind::format);
  CHECK(kind_of([] { parse_embeddings("{\"id\":\"x\",\"vector\":[0,0]}\n"); }) == ErrorKind::format);
  CHECK(kind_of([] { parse_embeddings("{\"id\":\"x\",\"vector\":[1]}\n{\"id\":\"x\",\"vector\":[2]}\n"); }) ==
        ErrorKind::format);
}

TEST_CASE("validate rejects non-finite values and non-unit normalised rows") {
  RowMatrix rows(1, 2);
  rows << std::nan(""), 1.0;
  CHECK(kind_of([&] { validate(EmbeddingMatrix({"a"}, rows)); }) == ErrorKind::format);
  rows << 2.0, 0.0;
  CHECK(kind_of([&] { validate(EmbeddingMatrix({"a"}, rows, true)); }) == ErrorKind::format);
  CHECK_NOTHROW(validate(EmbeddingMatrix({"a"}, rows, false)));
}

TEST_CASE("normalize yields unit rows and keeps ids and embedder") {
  const auto n = normalize(small());
  CHECK(n.normalized());
  CHECK(n.embedder() == "enc");
  for (Eigen::Index r = 0; r < n.rows().rows(); ++r) CHECK(n.rows().row(r).norm() == doctest::Approx(1.0));
  CHECK(n.rows()(2, 0) == doctest::Approx(0.6));
  CHECK(n.index_of("b:1.2") == 1u);
}

TEST_CASE("read_embeddings picks the embedder up from the manifest") {
  const auto dir = testing::scratch_dir("embed");
  write_embeddings(dir / "m.emb", small());
  CHECK(read_embeddings(dir / "m.emb").embedder().empty());
  write_file(dir / "m.emb.manifest.json", R"({"format":"EMB1","model":"enc-v2","dim":2,"count":3})");
  CHECK(read_embeddings(dir / "m.emb").embedder() == "enc-v2");
  write_file(dir / "m.emb.manifest.json", "{broken");
  CHECK(kind_of([&] { read_embeddings(dir / "m.emb"); }) == ErrorKind::format);
}

TEST_CASE("embed_vocabulary keeps words seen at least min_word_count times") {
  std::vector<corpus::Document> docs(2);
  docs[0].id = "d0";
  docs[0].text = "alpha beta alpha the";
  docs[1].id = "d1";
  docs[1].text = "alpha gamma beta";
  const auto c = corpus::build_corpus(docs, "t", corpus::StopwordSet{"the"});
  RowMatrix dv(2, 2);
  dv << 1, 0, 0, 1;
  const EmbeddingMatrix doc_m({"d0", "d1"}, dv, true, "enc");
  RowMatrix wv(4, 2);
  wv << 1, 1, 1, -1, 2, 0, 0, 3;
  const TableProvider table(EmbeddingMatrix({"alpha", "beta", "gamma", "zeta"}, wv, false, "enc"));
  const auto joint = embed_vocabulary(c, doc_m, table, 2);
  CHECK(joint.words.item_ids() == std::vector<std::string>{"alpha", "beta"});
  CHECK(joint.words.embedder() == "enc");
  CHECK(joint.words.rows()(1, 1) == -1.0);

  const TableProvider missing(EmbeddingMatrix({"alpha"}, RowMatrix::Ones(1, 2), false, "enc"));
  CHECK(kind_of([&] { embed_vocabulary(c, doc_m, missing, 1); }) == ErrorKind::missing_input);
  const TableProvider wrong_dim(EmbeddingMatrix({"alpha", "beta", "gamma"}, RowMatrix::Ones(3, 3), false, "enc"));
  CHECK(kind_of([&] { embed_vocabulary(c, doc_m, wrong_dim, 1); }) == ErrorKind::invalid_argument);
}

TEST_CASE("HttpProvider batches texts against a JSON endpoint") {
  httplib::Server server;
  int calls = 0;
  server.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json vectors = nlohmann::json::array();
    for (const auto& t : body.at("texts")) {
      const auto s = t.get<std::string>();
      vectors.push_back({static_cast<double>(s.size()), 1.0});
    }
    res.set_content(nlohmann::json{{"vectors", vectors}}.dump(), "application/json");
  });
  server.Post("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  const HttpProvider provider(base + "/embed", "remote-enc", 2);
  CHECK(provider.id() == "remote-enc");
  const auto rows = provider.embed({"a", "bbb", "cc"});
  CHECK(calls == 2);
  REQUIRE(rows.rows() == 3);
  CHECK(rows(1, 0) == 3.0);
  CHECK(rows(2, 1) == 1.0);
  CHECK(kind_of([&] { HttpProvider(base + "/broken", "x").embed({"a"}); }) == ErrorKind::io);

  server.stop();
  worker.join();
  CHECK(kind_of([&] { HttpProvider(base + "/embed", "x").embed({"a"}); }) == ErrorKind::io);
}
