#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "topicmap/error.hpp"
#include "topicmap/pipeline.hpp"

namespace {

using topicmap::pipeline::Config;
using nlohmann::json;

struct Flags {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::string corpus;
  std::string embeddings;
  std::string words;
  std::string reducer;
  std::string clusterer;
  std::optional<std::size_t> k;
  std::optional<std::size_t> topn;
  std::optional<std::size_t> window;
  std::optional<std::size_t> target_k;
  std::string topics;
  std::string model_a;
  std::string model_b;
  std::string corpus_b;
  std::string embeddings_b;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "key = value settings file");
  cmd->add_option("--out", f.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", f.seed, "random seed (default 42)");
  cmd->add_option("--set", f.overrides, "extra setting as key=value (repeatable)");
}

void add_corpus(CLI::App* cmd, Flags& f) {
  cmd->add_option("--corpus", f.corpus, "corpus text (verse-numbered or paragraphs) or JSONL");
}

void add_model_inputs(CLI::App* cmd, Flags& f) {
  add_corpus(cmd, f);
  cmd->add_option("--embeddings", f.embeddings, "document embeddings (EMB1 or JSONL)");
  cmd->add_option("--words", f.words, "vocabulary embeddings (EMB1 or JSONL)");
  cmd->add_option("--reducer", f.reducer, "pca or umap")->check(CLI::IsMember({"pca", "umap"}));
  cmd->add_option("--topn", f.topn, "topic words per topic (default 50)");
  cmd->add_option("--window", f.window, "coherence window length (default 110)");
}

Config build_config(const Flags& f) {
  Config cfg = f.config.empty() ? Config{} : Config::load(f.config);
  auto put = [&](const char* key, const std::string& value) {
    if (!value.empty()) cfg.set(key, value);
  };
  auto put_num = [&](const char* key, const auto& value) {
    if (value) cfg.set(key, std::to_string(*value));
  };
  put("corpus", f.corpus);
  put("embeddings", f.embeddings);
  put("words", f.words);
  put("reducer", f.reducer);
  put("clusterer", f.clusterer);
  put("topics", f.topics);
  put("model_a", f.model_a);
  put("model_b", f.model_b);
  put("corpus_b", f.corpus_b);
  put("embeddings_b", f.embeddings_b);
  put_num("seed", f.seed);
  put_num("k", f.k);
  put_num("topn", f.topn);
  put_num("window", f.window);
  put_num("target_k", f.target_k);
  for (const auto& entry : f.overrides) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw topicmap::Error(topicmap::ErrorKind::invalid_argument, "--set expects key=value, got '" + entry + "'");
    }
    cfg.set(entry.substr(0, eq), entry.substr(eq + 1));
  }
  return cfg;
}

void emit_error(std::string_view kind, std::string_view message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-corpus topic modelling engine"};
  app.require_subcommand(1);
  Flags f;

  auto* ingest = app.add_subcommand("ingest", "segment and clean a corpus; write corpus.jsonl and stats.json");
  add_common(ingest, f);
  add_corpus(ingest, f);

  auto* ngrams = app.add_subcommand("ngrams", "write top n-gram tables for n up to 3");
  add_common(ngrams, f);
  add_corpus(ngrams, f);

  auto* topics = app.add_subcommand("topics", "cluster document embeddings into topic vectors");
  add_common(topics, f);
  add_model_inputs(topics, f);
  topics->add_option("--clusterer", f.clusterer, "kmeans or hdbscan")->check(CLI::IsMember({"kmeans", "hdbscan"}));
  topics->add_option("--k", f.k, "cluster count for kmeans");
  topics->add_option("--target-k", f.target_k, "merge topics down to this count");

  auto* sweep = app.add_subcommand("sweep", "choose HDBSCAN parameters by topic coherence");
  add_common(sweep, f);
  add_model_inputs(sweep, f);

  auto* coherence = app.add_subcommand("coherence", "score a topic model against a reference corpus");
  add_common(coherence, f);
  add_corpus(coherence, f);
  coherence->add_option("--topics", f.topics, "topics.json to score");
  coherence->add_option("--topn", f.topn, "words per topic (default 50)");
  coherence->add_option("--window", f.window, "window length (default 110)");

  auto* lda = app.add_subcommand("lda", "fit the LDA baseline and score its topics");
  add_common(lda, f);
  add_corpus(lda, f);
  lda->add_option("--k", f.k, "topic count");
  lda->add_option("--topn", f.topn, "words per topic (default 50)");
  lda->add_option("--window", f.window, "window length (default 110)");

  auto* cmp = app.add_subcommand("compare", "cosine similarity between two topic models");
  add_common(cmp, f);
  cmp->add_option("--a", f.model_a, "first topics.json (rows)");
  cmp->add_option("--b", f.model_b, "second topics.json (columns)");

  auto* project = app.add_subcommand("project", "2-D projection of document embeddings");
  add_common(project, f);
  add_corpus(project, f);
  project->add_option("--embeddings", f.embeddings, "document embeddings");
  project->add_option("--reducer", f.reducer, "pca or umap")->check(CLI::IsMember({"pca", "umap"}));
  project->add_option("--topics", f.topics, "colour points by the topics of this model");
  project->add_option("--corpus-b", f.corpus_b, "second corpus to place in the same space");
  project->add_option("--embeddings-b", f.embeddings_b, "document embeddings of the second corpus");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("invalid_argument", e.what());
    return topicmap::exit_code(topicmap::ErrorKind::invalid_argument);
  }

  try {
    const Config cfg = build_config(f);
    const std::filesystem::path out = cfg.get("out", f.out);
    json summary{{"status", "ok"}, {"out", out.string()}};
    if (*ingest) {
      summary["command"] = "ingest";
      topicmap::pipeline::run_ingest(cfg, out);
    } else if (*ngrams) {
      summary["command"] = "ngrams";
      topicmap::pipeline::run_ngrams(cfg, out);
    } else if (*topics) {
      summary["command"] = "topics";
      const auto run = topicmap::pipeline::run_topics(cfg);
      topicmap::pipeline::write_topics(run, out);
      summary["topics"] = run.model.k();
      summary["noise"] = run.model.noise_count();
      summary["coherence"] = run.coherence.mean;
    } else if (*sweep) {
      summary["command"] = "sweep";
      const auto run = topicmap::pipeline::run_sweep(cfg);
      topicmap::pipeline::write_sweep(run, out);
      summary["topics"] = run.best.model.k();
      summary["coherence"] = run.best.coherence.mean;
    } else if (*coherence) {
      summary["command"] = "coherence";
      topicmap::pipeline::run_coherence(cfg, out);
    } else if (*lda) {
      summary["command"] = "lda";
      summary["coherence"] = topicmap::pipeline::run_lda(cfg, out);
    } else if (*cmp) {
      summary["command"] = "compare";
      topicmap::pipeline::run_compare(cfg, out);
    } else if (*project) {
      summary["command"] = "project";
      topicmap::pipeline::run_project(cfg, out);
    }
    std::cout << summary.dump() << '\n';
    return 0;
  } catch (const topicmap::Error& e) {
    emit_error(topicmap::to_string(e.kind()), e.what());
    return topicmap::exit_code(e.kind());
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 1;
  }
}
