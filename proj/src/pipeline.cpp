#include "topicmap/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <unordered_map>

#include "topicmap/cluster.hpp"
#include "topicmap/compare.hpp"
#include "topicmap/error.hpp"
#include "topicmap/lda.hpp"
#include "topicmap/report.hpp"
#include "topicmap/util.hpp"

namespace topicmap::pipeline {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::string_view kVersion = "topicmap 0.1.0";

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw Error(ErrorKind::invalid_argument, "config key '" + key + "' has invalid value '" + text + "'");
  }
  return value;
}

corpus::CleanOptions clean_options(const Config& cfg) {
  if (const auto path = cfg.find("archaic")) {
    return corpus::CleanOptions{corpus::parse_replacement_table(read_file(*path))};
  }
  return corpus::CleanOptions::defaults();
}

std::string file_digest(const Config& cfg, const std::string& key) {
  const auto path = cfg.find(key);
  return path ? sha256_file(*path) : std::string();
}

json input_digests(const Config& cfg, std::initializer_list<const char*> keys) {
  json inputs = json::object();
  for (const auto* key : keys) {
    if (cfg.has(key)) inputs[key] = file_digest(cfg, key);
  }
  return inputs;
}

json corpus_provenance(const Config& cfg, json params) {
  return {{"tool", kVersion},
          {"seed", cfg.get_u64("seed", 42)},
          {"params", std::move(params)},
          {"inputs", input_digests(cfg, {"corpus", "stopwords", "archaic"})}};
}

std::vector<std::string> topic_labels(const topics::TopicModel& model, const std::vector<std::string>& ids) {
  std::unordered_map<std::string, int> label_of;
  for (std::size_t i = 0; i < model.assignment.item_ids.size(); ++i) {
    label_of.emplace(model.assignment.item_ids[i], model.assignment.labels[i]);
  }
  std::vector<std::string> labels;
  labels.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = label_of.find(id);
    if (it == label_of.end() || it->second < 0) {
      labels.emplace_back("noise");
    } else {
      char buf[16];
      std::snprintf(buf, sizeof buf, "T%02d", it->second);
      labels.emplace_back(buf);
    }
  }
  return labels;
}

}  // namespace

Config Config::parse(std::string_view text, std::string_view origin) {
  Config cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::format, std::string(origin) + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw Error(ErrorKind::format, std::string(origin) + ":" + std::to_string(line_no) + ": empty key");
    cfg.set(key, trim(std::string_view(line).substr(eq + 1)));
  }
  return cfg;
}

Config Config::load(const fs::path& path) { return parse(read_file(path), path.string()); }

void Config::set(const std::string& key, std::string value) { values_[key] = std::move(value); }

std::optional<std::string> Config::find(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  return find(key).value_or(fallback);
}

std::string Config::require(const std::string& key) const {
  if (auto value = find(key)) return *value;
  throw Error(ErrorKind::missing_input, "required setting '" + key + "' is missing");
}

std::size_t Config::get_size(const std::string& key, std::size_t fallback) const {
  const auto value = find(key);
  return value ? parse_number<std::size_t>(key, *value) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto value = find(key);
  return value ? parse_number<std::uint64_t>(key, *value) : fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto value = find(key);
  return value ? parse_number<double>(key, *value) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto value = find(key);
  if (!value) return fallback;
  if (*value == "true" || *value == "1" || *value == "yes") return true;
  if (*value == "false" || *value == "0" || *value == "no") return false;
  throw Error(ErrorKind::invalid_argument, "config key '" + key + "' expects true or false, got '" + *value + "'");
}

std::vector<std::size_t> Config::get_size_list(const std::string& key, std::vector<std::size_t> fallback) const {
  const auto value = find(key);
  if (!value) return fallback;
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= value->size()) {
    auto end = value->find(',', pos);
    if (end == std::string::npos) end = value->size();
    out.push_back(parse_number<std::size_t>(key, trim(std::string_view(*value).substr(pos, end - pos))));
    pos = end + 1;
  }
  return out;
}

corpus::Corpus load_corpus(const Config& cfg, const std::string& key) {
  const fs::path path = cfg.require(key);
  const std::string raw = read_file(path);
  const std::string name = cfg.get(key + ".name", path.stem().string());
  const auto clean = clean_options(cfg);
  std::vector<corpus::Document> docs;
  if (path.extension() == ".jsonl") {
    docs = corpus::parse_jsonl(raw, name, clean);
  } else {
    corpus::SegmentOptions options;
    const auto mode = cfg.get(key + ".mode", cfg.get("mode", "verse"));
    if (mode == "verse") {
      options.mode = corpus::SegmentMode::verse_numbered;
    } else if (mode == "paragraph") {
      options.mode = corpus::SegmentMode::paragraph;
    } else {
      throw Error(ErrorKind::invalid_argument, "segment mode '" + mode + "' (expected verse or paragraph)");
    }
    options.verse_pattern = cfg.get("verse_pattern", options.verse_pattern);
    options.max_tokens = cfg.get_size("max_tokens", options.max_tokens);
    options.source = name;
    options.clean = clean;
    docs = corpus::segment(raw, options);
  }
  auto stopwords = cfg.find("stopwords") ? corpus::parse_stopwords(read_file(cfg.require("stopwords")))
                                         : corpus::default_stopwords();
  return corpus::build_corpus(std::move(docs), name, std::move(stopwords));
}

embed::EmbeddingMatrix load_document_embeddings(const Config& cfg, const corpus::Corpus& corpus,
                                                const std::string& key) {
  const auto raw = embed::read_embeddings(cfg.require(key));
  if (!raw.has_unique_ids()) throw Error(ErrorKind::format, "document embeddings repeat an id");
  RowMatrix rows(static_cast<Eigen::Index>(corpus.documents.size()), static_cast<Eigen::Index>(raw.dim()));
  std::vector<std::string> ids;
  ids.reserve(corpus.documents.size());
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const auto& id = corpus.documents[d].id;
    const auto row = raw.index_of(id);
    if (!row) throw Error(ErrorKind::missing_input, "no embedding row for document '" + id + "'");
    rows.row(static_cast<Eigen::Index>(d)) = raw.rows().row(static_cast<Eigen::Index>(*row));
    ids.push_back(id);
  }
  embed::EmbeddingMatrix ordered(std::move(ids), std::move(rows), false, raw.embedder());
  embed::validate(ordered);
  return cfg.get_bool("normalize", true) ? embed::normalize(ordered) : ordered;
}

embed::JointEmbedding load_joint(const Config& cfg, const corpus::Corpus& corpus) {
  auto docs = load_document_embeddings(cfg, corpus);
  const auto min_count = cfg.get_size("min_word_count", 3);
  if (const auto url = cfg.find("embed.url")) {
    embed::HttpProvider provider(*url, cfg.get("embed.model", docs.embedder()));
    return embed::embed_vocabulary(corpus, docs, provider, min_count);
  }
  auto table = embed::read_embeddings(cfg.require("words"));
  if (table.embedder().empty()) table.set_embedder(docs.embedder());
  if (!docs.embedder().empty() && table.embedder() != docs.embedder()) {
    throw Error(ErrorKind::provenance, "word embeddings come from '" + table.embedder() +
                                           "' but document embeddings from '" + docs.embedder() + "'");
  }
  embed::TableProvider provider(std::move(table));
  return embed::embed_vocabulary(corpus, docs, provider, min_count);
}

reduce::UmapParams umap_params(const Config& cfg) {
  reduce::UmapParams p;
  p.n_neighbors = cfg.get_size("umap.n_neighbors", p.n_neighbors);
  p.min_dist = cfg.get_double("umap.min_dist", p.min_dist);
  p.n_components = cfg.get_size("umap.n_components", p.n_components);
  p.metric = reduce::parse_metric(cfg.get("umap.metric", reduce::to_string(p.metric)));
  p.seed = cfg.get_u64("seed", p.seed);
  p.n_epochs = cfg.get_size("umap.n_epochs", p.n_epochs);
  p.negative_sample_rate = cfg.get_size("umap.negative_sample_rate", p.negative_sample_rate);
  reduce::validate(p);
  return p;
}

cluster::HdbscanParams hdbscan_params(const Config& cfg) {
  cluster::HdbscanParams p;
  p.min_cluster_size = cfg.get_size("hdbscan.min_cluster_size", p.min_cluster_size);
  p.min_samples = cfg.get_size("hdbscan.min_samples", p.min_samples);
  cluster::validate(p);
  return p;
}

reduce::ReducedMatrix reduce_documents(const Config& cfg, const embed::EmbeddingMatrix& docs) {
  const auto method = reduce::parse_method(cfg.get("reducer", "umap"));
  if (method == reduce::Method::pca) {
    auto result = reduce::pca(docs, cfg.get_size("umap.n_components", 5));
    result.projection.seed = cfg.get_u64("seed", 42);
    return result.projection;
  }
  return reduce::umap(docs, umap_params(cfg));
}

json provenance(const Config& cfg, const embed::JointEmbedding& joint) {
  const auto reducer = reduce::parse_method(cfg.get("reducer", "umap"));
  const auto clusterer = cluster::parse_method(cfg.get("clusterer", "hdbscan"));
  json params = json::object();
  if (reducer == reduce::Method::umap) {
    const auto p = umap_params(cfg);
    params["umap"] = {{"n_neighbors", p.n_neighbors},
                      {"min_dist", p.min_dist},
                      {"n_components", p.n_components},
                      {"metric", reduce::to_string(p.metric)},
                      {"n_epochs", p.n_epochs},
                      {"negative_sample_rate", p.negative_sample_rate}};
  } else {
    params["pca"] = {{"n_components", cfg.get_size("umap.n_components", 5)}};
  }
  if (clusterer == cluster::Method::hdbscan) {
    const auto p = hdbscan_params(cfg);
    params["hdbscan"] = {{"min_cluster_size", p.min_cluster_size}, {"min_samples", p.min_samples}, {"metric", p.metric}};
  } else {
    params["kmeans"] = {{"k", cfg.get_size("k", 0)}, {"iterations", cfg.get_size("kmeans.iterations", 300)}};
  }
  params["topn"] = cfg.get_size("topn", 50);
  params["window"] = cfg.get_size("window", 110);
  params["min_word_count"] = cfg.get_size("min_word_count", 3);
  params["normalize"] = cfg.get_bool("normalize", true);
  params["target_k"] = cfg.get_size("target_k", 0);
  json inputs = input_digests(cfg, {"corpus", "embeddings", "words", "stopwords", "archaic"});
  return {{"tool", kVersion},
          {"embedder", joint.docs.embedder()},
          {"reducer", reduce::to_string(reducer)},
          {"clusterer", cluster::to_string(clusterer)},
          {"seed", cfg.get_u64("seed", 42)},
          {"params", std::move(params)},
          {"inputs", std::move(inputs)}};
}

TopicsRun run_topics(const Config& cfg) {
  TopicsRun run;
  run.corpus = load_corpus(cfg);
  run.joint = load_joint(cfg, run.corpus);
  const auto prov = provenance(cfg, run.joint);
  const auto topn = cfg.get_size("topn", 50);
  run.reduced = reduce_documents(cfg, run.joint.docs);
  cluster::ClusterAssignment assignment;
  if (cluster::parse_method(cfg.get("clusterer", "hdbscan")) == cluster::Method::kmeans) {
    const auto k = cfg.get_size("k", 0);
    if (k == 0) throw Error(ErrorKind::invalid_argument, "kmeans needs --k");
    assignment = cluster::kmeans(run.reduced, k, cfg.get_size("kmeans.iterations", 300), cfg.get_u64("seed", 42))
                     .assignment;
  } else {
    assignment = cluster::hdbscan(run.reduced, hdbscan_params(cfg)).assignment;
  }
  run.model = topics::build_model(run.joint.docs, run.joint.words, std::move(assignment), topn, prov);
  const auto target = cfg.get_size("target_k", 0);
  if (target > 0 && target < run.model.k()) {
    run.unreduced = run.model;
    run.model = topics::reduce_topics(run.model, run.joint.docs, run.joint.words, target);
  }
  const coherence::WindowIndex index(run.corpus, cfg.get_size("window", 110));
  run.coherence = coherence::coherence(run.model.word_lists(topn), index, topn);
  return run;
}

void write_topics(const TopicsRun& run, const fs::path& out) {
  write_file(out / "topics.json", topics::model_json(run.model));
  write_file(out / "assignment.csv", cluster::assignment_csv(run.model.assignment));
  write_file(out / "coherence.json", coherence::report_json(run.coherence, run.model.provenance));
  if (run.unreduced) write_file(out / "topics_unreduced.json", topics::model_json(*run.unreduced));
}

SweepRun run_sweep(const Config& cfg) {
  SweepRun run;
  auto& best = run.best;
  best.corpus = load_corpus(cfg);
  best.joint = load_joint(cfg, best.corpus);
  const auto topn = cfg.get_size("topn", 50);
  best.reduced = reduce_documents(cfg, best.joint.docs);
  const coherence::WindowIndex index(best.corpus, cfg.get_size("window", 110));
  std::vector<cluster::HdbscanParams> grid;
  for (const auto mcs : cfg.get_size_list("sweep.min_cluster_size", {5, 10, 15, 20, 25})) {
    for (const auto ms : cfg.get_size_list("sweep.min_samples", {3, 5, 8})) grid.push_back({mcs, ms, "euclidean"});
  }
  topics::SweepInputs inputs{&best.joint.docs, &best.joint.words, &index, &best.reduced, topn};
  run.sweep = topics::sweep(inputs, grid);
  Config chosen = cfg;
  chosen.set("clusterer", "hdbscan");
  chosen.set("hdbscan.min_cluster_size", std::to_string(run.sweep.grid[run.sweep.best].params.min_cluster_size));
  chosen.set("hdbscan.min_samples", std::to_string(run.sweep.grid[run.sweep.best].params.min_samples));
  best.model = std::move(run.sweep.best_model);
  best.model.provenance = provenance(chosen, best.joint);
  best.coherence = coherence::coherence(best.model.word_lists(topn), index, topn);
  run.sweep.best_model = best.model;
  return run;
}

void write_sweep(const SweepRun& run, const fs::path& out) {
  auto j = topics::to_json(run.sweep);
  j["provenance"] = run.best.model.provenance;
  write_file(out / "sweep.json", j.dump(2) + "\n");
  write_topics(run.best, out);
}

void run_ingest(const Config& cfg, const fs::path& out) {
  const auto corpus = load_corpus(cfg);
  write_file(out / "corpus.jsonl", corpus::to_jsonl(corpus.documents));
  write_file(out / "stats.json",
             corpus::stats_json(corpus, corpus_provenance(cfg, {{"mode", cfg.get("mode", "verse")}})));
}

void run_ngrams(const Config& cfg, const fs::path& out) {
  const auto corpus = load_corpus(cfg);
  const auto top_k = cfg.get_size("ngrams.top_k", 20);
  const bool drop = cfg.get_bool("ngrams.drop_stopwords", true);
  const json params{{"mode", cfg.get("mode", "verse")}, {"top_k", top_k}, {"drop_stopwords", drop}};
  write_file(out / "provenance.json", corpus_provenance(cfg, params).dump(2) + "\n");
  for (int n = 1; n <= 3; ++n) {
    const auto table = corpus::ngrams(corpus, n, top_k, drop);
    const auto stem = "ngrams_" + std::to_string(n);
    write_file(out / (stem + ".csv"), corpus::ngrams_csv(table));
    if (!table.entries.empty()) {
      write_file(out / (stem + ".svg"),
                 report::ngram_chart_svg(table, corpus.name + ": top " + std::to_string(n) + "-grams"));
    }
  }
}

void run_coherence(const Config& cfg, const fs::path& out) {
  const auto corpus = load_corpus(cfg);
  const auto model = topics::parse_model(read_file(cfg.require("topics")));
  const auto topn = cfg.get_size("topn", 50);
  const coherence::WindowIndex index(corpus, cfg.get_size("window", 110));
  const auto report = coherence::coherence(model.word_lists(topn), index, topn);
  json prov = model.provenance;
  prov["reference_corpus"] = file_digest(cfg, "corpus");
  write_file(out / "coherence.json", coherence::report_json(report, prov));
}

double run_lda(const Config& cfg, const fs::path& out) {
  const auto corpus = load_corpus(cfg);
  const auto k = cfg.get_size("lda.k", cfg.get_size("k", 0));
  if (k == 0) throw Error(ErrorKind::invalid_argument, "lda needs --k (or lda.k)");
  const auto seed = cfg.get_u64("seed", 42);
  const auto iters = cfg.get_size("lda.iterations", 200);
  const auto topn = cfg.get_size("topn", 50);
  const auto model = lda::lda_fit(corpus, k, iters, seed);
  json prov{{"tool", kVersion},
            {"seed", seed},
            {"params", {{"K", k}, {"iterations", iters}, {"topn", topn}, {"window", cfg.get_size("window", 110)}}},
            {"inputs", {{"corpus", file_digest(cfg, "corpus")}}}};
  write_file(out / "lda.json", lda::model_json(model, topn, prov));
  std::vector<std::vector<std::string>> words;
  for (const auto& ranked : lda::lda_topics(model, topn)) {
    std::vector<std::string> list;
    for (const auto& wp : ranked) list.push_back(wp.word);
    words.push_back(std::move(list));
  }
  const coherence::WindowIndex index(corpus, cfg.get_size("window", 110));
  const auto report = coherence::coherence(words, index, topn);
  write_file(out / "lda_coherence.json", coherence::report_json(report, prov));
  return report.mean;
}

void run_compare(const Config& cfg, const fs::path& out) {
  const auto a = topics::parse_model(read_file(cfg.require("model_a")));
  const auto b = topics::parse_model(read_file(cfg.require("model_b")));
  const auto report = compare::similarity_matrix(a, b);
  write_file(out / "similarity.csv", compare::matrix_csv(report));
  write_file(out / "similarity.json", compare::report_json(report));
  report::write_heatmap(report, out / "heatmap.svg", cfg.get("title", "Topic similarity"));
}

void run_project(const Config& cfg, const fs::path& out) {
  const auto method = reduce::parse_method(cfg.get("reducer", "pca"));
  const auto seed = cfg.get_u64("seed", 42);
  const auto first = load_corpus(cfg);
  const auto docs = load_document_embeddings(cfg, first);
  std::vector<std::string> ids = docs.item_ids();
  RowMatrix rows = docs.rows();
  std::vector<std::string> labels;
  std::map<std::string, std::string> legend;
  if (const auto topics_path = cfg.find("topics")) {
    const auto model = topics::parse_model(read_file(*topics_path));
    labels = topic_labels(model, ids);
    for (std::size_t t = 0; t < model.k(); ++t) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "T%02zu", t);
      legend[buf] = model.label(t, 3);
    }
  } else {
    labels.assign(ids.size(), first.name);
  }
  if (cfg.has("corpus_b")) {
    const auto second = load_corpus(cfg, "corpus_b");
    const auto docs_b = load_document_embeddings(cfg, second, "embeddings_b");
    if (docs_b.dim() != docs.dim() || docs_b.embedder() != docs.embedder()) {
      throw Error(ErrorKind::provenance, "second corpus embeddings use a different space ('" + docs_b.embedder() +
                                             "' vs '" + docs.embedder() + "')");
    }
    RowMatrix both(rows.rows() + docs_b.rows().rows(), rows.cols());
    both << rows, docs_b.rows();
    rows = std::move(both);
    ids.insert(ids.end(), docs_b.item_ids().begin(), docs_b.item_ids().end());
    labels.insert(labels.end(), docs_b.size(), second.name);
  }
  const embed::EmbeddingMatrix combined(ids, rows, cfg.get_bool("normalize", true), docs.embedder());
  const auto proj = reduce::project_2d(combined, method, seed);
  const json prov{{"tool", kVersion},
                  {"embedder", docs.embedder()},
                  {"reducer", reduce::to_string(method)},
                  {"seed", seed},
                  {"params", {{"normalize", cfg.get_bool("normalize", true)}}},
                  {"inputs", input_digests(cfg, {"corpus", "embeddings", "topics", "corpus_b", "embeddings_b"})}};
  write_file(out / "provenance.json", prov.dump(2) + "\n");
  write_file(out / "projection.csv", reduce::projection_csv(proj, labels));
  report::write_scatter(proj, labels, out / "scatter.svg", legend, cfg.get("title", "Semantic space"));
}

}  // namespace topicmap::pipeline
