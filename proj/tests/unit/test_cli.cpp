#include <doctest.h>

#include <cstdlib>
#include <map>
#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include "convert.hpp"
#include "topicmap/util.hpp"

using namespace topicmap;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result run(const std::string& args, const std::string& tag) {
  const auto dir = fs::temp_directory_path() / "topicmap_cli_io";
  fs::create_directories(dir);
  const auto out = dir / (tag + ".out");
  const auto err = dir / (tag + ".err");
  const std::string cmd = std::string("\"") + TOPICMAP_CLI_PATH + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

std::string fixture_args(const std::string& name) {
  const auto dir = testing::fixtures_dir() / name;
  return "--corpus \"" + (dir / (name + ".txt")).string() + "\" --embeddings \"" +
         (dir / (name + ".docs.emb")).string() + "\" --words \"" + (dir / (name + ".words.emb")).string() + "\"";
}

std::map<std::string, std::string> digests(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = sha256_file(e.path());
  }
  return out;
}

void expect_error(const Result& r, int code, const std::string& kind) {
  CHECK(r.code == code);
  CHECK(r.out.empty());
  const auto j = nlohmann::json::parse(r.err);
  CHECK(j.at("error") == kind);
  CHECK(!j.at("message").get<std::string>().empty());
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
}

}  // namespace

TEST_CASE("usage errors exit 2 with a JSON error line") {
  expect_error(run("", "none"), 2, "invalid_argument");
  expect_error(run("topics --bogus", "bogus"), 2, "invalid_argument");
  expect_error(run("topics --reducer tsne", "reducer"), 2, "invalid_argument");
  expect_error(run("lda " + fixture_args("gita").substr(0, fixture_args("gita").find(" --embeddings")), "nok"), 2,
               "invalid_argument");
  expect_error(run("ingest --corpus x --set novalue", "set"), 2, "invalid_argument");
}

TEST_CASE("missing inputs exit 3") {
  expect_error(run("ingest --corpus /nonexistent/file.txt", "missing"), 3, "missing_input");
  expect_error(run("topics --corpus \"" + (testing::fixtures_dir() / "gita" / "gita.txt").string() + "\"", "noemb"), 3,
               "missing_input");
}

TEST_CASE("malformed inputs exit 4") {
  const auto dir = testing::scratch_dir("cli_format");
  write_file(dir / "bad.emb", "EMB1garbage");
  const auto gita = testing::fixtures_dir() / "gita" / "gita.txt";
  expect_error(run("topics --corpus \"" + gita.string() + "\" --embeddings \"" + (dir / "bad.emb").string() + "\"",
                   "bademb"),
               4, "format");
  write_file(dir / "cfg.txt", "this is not a setting\n");
  expect_error(run("ingest --config \"" + (dir / "cfg.txt").string() + "\"", "badcfg"), 4, "format");
}

TEST_CASE("comparing models from different embedders exits 5") {
  const auto dir = testing::scratch_dir("cli_prov");
  auto r = run("topics " + fixture_args("gita") + " --reducer pca --clusterer kmeans --k 4 --out \"" +
                   (dir / "a").string() + "\"",
               "prov_a");
  REQUIRE(r.code == 0);
  auto model = nlohmann::json::parse(read_file(dir / "a" / "topics.json"));
  model["provenance"]["embedder"] = "another-encoder";
  write_file(dir / "b.json", model.dump());
  expect_error(run("compare --a \"" + (dir / "a" / "topics.json").string() + "\" --b \"" + (dir / "b.json").string() +
                       "\" --out \"" + (dir / "c").string() + "\"",
                   "prov_cmp"),
               5, "provenance");
}

TEST_CASE("topics and compare are byte-identical across runs") {
  const auto dir = testing::scratch_dir("cli_det");
  for (const char* pass : {"one", "two"}) {
    const auto root = dir / pass;
    auto r = run("topics " + fixture_args("gita") + " --out \"" + (root / "gita").string() + "\"", "det_g");
    REQUIRE(r.code == 0);
    const auto summary = nlohmann::json::parse(r.out);
    CHECK(summary.at("status") == "ok");
    CHECK(summary.at("topics").get<int>() >= 10);
    r = run("topics " + fixture_args("upanishads") + " --out \"" + (root / "upan").string() + "\"", "det_u");
    REQUIRE(r.code == 0);
    r = run("compare --a \"" + (root / "gita" / "topics.json").string() + "\" --b \"" +
                (root / "upan" / "topics.json").string() + "\" --out \"" + (root / "cmp").string() + "\"",
            "det_c");
    REQUIRE(r.code == 0);
  }
  const auto a = digests(dir / "one");
  const auto b = digests(dir / "two");
  CHECK(a.size() == 9);
  CHECK(a == b);
}

TEST_CASE("settings from --config and --set reach the pipeline") {
  const auto dir = testing::scratch_dir("cli_cfg");
  const auto gita = testing::fixtures_dir() / "gita";
  write_file(dir / "run.cfg", "corpus = " + (gita / "gita.txt").string() + "\nembeddings = " +
                                  (gita / "gita.docs.emb").string() + "\nwords = " + (gita / "gita.words.emb").string() +
                                  "\nreducer = pca\nclusterer = kmeans\nk = 6\n");
  auto r = run("topics --config \"" + (dir / "run.cfg").string() + "\" --set k=5 --out \"" + (dir / "o").string() + "\"",
               "cfg");
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out).at("topics") == 5);
  const auto model = nlohmann::json::parse(read_file(dir / "o" / "topics.json"));
  CHECK(model.at("provenance").at("params").at("kmeans").at("k") == 5);
  CHECK(model.at("provenance").at("reducer") == "pca");
}
