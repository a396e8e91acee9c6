// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Each check carries its own runtime budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "convert.hpp"
#include "oracles.hpp"
#include "topicmap/cluster.hpp"
#include "topicmap/coherence.hpp"
#include "topicmap/compare.hpp"
#include "topicmap/lda.hpp"
#include "topicmap/pipeline.hpp"
#include "topicmap/reduce.hpp"
#include "topicmap/topics.hpp"
#include "topicmap/util.hpp"

namespace fs = std::filesystem;
using namespace topicmap;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome npmi_oracle() {
  Outcome out;
  std::mt19937_64 gen(7);
  std::vector<std::string> vocab;
  for (int i = 0; i < 40; ++i) vocab.push_back("w" + std::to_string(i));
  // Skewed draws so some pairs never meet and some words are rare.
  std::vector<double> weights;
  for (int i = 0; i < 40; ++i) weights.push_back(1.0 / (1.0 + i));
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  std::uniform_int_distribution<int> length(1, 30);
  std::vector<std::vector<std::string>> docs;
  for (int d = 0; d < 50; ++d) {
    std::vector<std::string> doc;
    const int n = length(gen);
    for (int t = 0; t < n; ++t) doc.push_back(vocab[static_cast<std::size_t>(pick(gen))]);
    docs.push_back(std::move(doc));
  }
  auto probe = vocab;
  probe.push_back("absent");

  double worst = 0.0;
  for (const std::size_t window : {std::size_t{110}, std::size_t{10}, std::size_t{4}}) {
    for (const std::size_t stride : {std::size_t{1}, std::size_t{3}}) {
      const coherence::WindowIndex idx(docs, window, stride);
      const auto ref = oracle::enumerate_windows(docs, window, stride);
      out.require(idx.virtual_doc_count() == ref.windows, "window count differs at s=" + std::to_string(window));
      for (std::size_t i = 0; i < probe.size(); ++i) {
        worst = std::max(worst, std::abs(idx.probability(probe[i]) - oracle::probability(ref, probe[i])));
        for (std::size_t j = i + 1; j < probe.size(); ++j) {
          worst = std::max(worst, std::abs(idx.joint_probability(probe[i], probe[j]) -
                                           oracle::joint_probability(ref, probe[i], probe[j])));
          worst = std::max(worst, std::abs(coherence::npmi(probe[i], probe[j], idx) -
                                           oracle::npmi(ref, probe[i], probe[j], 1e-12)));
        }
      }
      std::vector<std::vector<std::string>> topics{{vocab.begin(), vocab.begin() + 10},
                                                   {vocab.begin() + 20, vocab.begin() + 35}};
      const auto report = coherence::coherence(topics, idx, 10);
      for (std::size_t t = 0; t < topics.size(); ++t) {
        const std::vector<std::string> head(topics[t].begin(), topics[t].begin() + 10);
        worst = std::max(worst, std::abs(*report.per_topic[t] - oracle::topic_coherence(ref, head, 1e-12)));
      }
    }
  }
  out.require(worst <= 1e-12, "max deviation " + fmt(worst));
  out.detail = "max |lib - oracle| = " + fmt(worst) + (out.detail.empty() ? "" : " (" + out.detail + ")");
  return out;
}

// ---------------------------------------------------------------------------

Outcome hdbscan_recovery() {
  Outcome out;
  std::vector<int> truth;
  auto pts = oracle::gaussian_blobs({{0.0, 0.0}, {10.0, 0.0}}, 50, 0.3, 11, &truth);
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> ux(-4.0, 14.0);
  std::uniform_real_distribution<double> uy(-6.0, 6.0);
  for (int i = 0; i < 20; ++i) {
    pts.push_back({ux(gen), uy(gen)});
    truth.push_back(-1);
  }
  const auto data = testing::to_rows(pts);
  const cluster::HdbscanParams params{10, 5, "euclidean"};
  const auto result = cluster::hdbscan(data, testing::numbered_ids(pts.size()), params);
  out.require(result.assignment.k == 2, "found " + std::to_string(result.assignment.k) + " clusters");

  double purity = 1.0;
  std::set<int> majority;
  for (int blob = 0; blob < 2; ++blob) {
    std::map<int, int> votes;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] == blob) ++votes[result.assignment.labels[i]];
    }
    int best_label = -1;
    int best = 0;
    for (const auto& [label, n] : votes) {
      if (label >= 0 && n > best) {
        best = n;
        best_label = label;
      }
    }
    majority.insert(best_label);
    purity = std::min(purity, best / 50.0);
  }
  out.require(purity >= 0.95, "blob purity " + fmt(purity));
  out.require(majority.size() == 2 && !majority.count(-1), "blobs share a cluster");

  const auto core = cluster::core_distances(data, params.min_samples);
  const auto ref_core = oracle::core_distances(pts, params.min_samples);
  std::size_t violations = 0;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    violations += std::abs(core[a] - ref_core[a]) > 1e-12 ? 1 : 0;
    for (std::size_t b = 0; b < pts.size(); ++b) {
      const double ab = cluster::mutual_reachability(a, b, core, data);
      const double ba = cluster::mutual_reachability(b, a, core, data);
      const double d = (data.row(static_cast<Eigen::Index>(a)) - data.row(static_cast<Eigen::Index>(b))).norm();
      if (ab != ba || ab < d) ++violations;
    }
  }
  out.require(violations == 0, std::to_string(violations) + " reachability invariant violations");

  oracle::Mat sub;
  for (std::size_t i = 0; i < pts.size(); i += 2) sub.push_back(pts[i]);
  sub.resize(50);
  const auto sub_rows = testing::to_rows(sub);
  const auto sub_core = cluster::core_distances(sub_rows, params.min_samples);
  double mst = 0.0;
  for (const auto& e : cluster::mutual_reachability_mst(sub_rows, sub_core)) mst += e.weight;
  const double ref_mst = oracle::kruskal_mst_weight(sub, oracle::core_distances(sub, params.min_samples));
  out.require(std::abs(mst - ref_mst) <= 1e-9 * std::max(1.0, ref_mst), "MST weight " + fmt(mst) + " vs " + fmt(ref_mst));
  out.detail = "k=" + std::to_string(result.assignment.k) + " purity=" + fmt(purity) + " mst=" + fmt(mst) +
               " oracle=" + fmt(ref_mst) + (out.detail.empty() ? "" : " (" + out.detail + ")");
  return out;
}

// ---------------------------------------------------------------------------

Outcome kmeans_checks() {
  Outcome out;
  std::size_t increases = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    std::mt19937_64 gen(100 + s);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    oracle::Mat pts(300, std::vector<double>(4));
    for (auto& p : pts) {
      for (auto& x : p) x = u(gen);
    }
    const auto r = cluster::kmeans(testing::to_rows(pts), testing::numbered_ids(pts.size()), 6, 300, s);
    for (std::size_t i = 1; i < r.sse_trace.size(); ++i) {
      if (r.sse_trace[i] > r.sse_trace[i - 1]) ++increases;
    }
  }
  out.require(increases == 0, std::to_string(increases) + " SSE increases");
  std::vector<int> truth;
  const auto blobs = oracle::gaussian_blobs({{0, 0, 0}, {6, 0, 0}, {0, 6, 0}}, 100, 0.8, 21, &truth);
  const auto r = cluster::kmeans(testing::to_rows(blobs), testing::numbered_ids(blobs.size()), 3);
  const double ari = oracle::adjusted_rand_index(truth, r.assignment.labels);
  out.require(ari >= 0.99, "ARI " + fmt(ari));
  out.detail = "SSE increases=" + std::to_string(increases) + " ARI=" + fmt(ari) +
               (out.detail.empty() ? "" : " (" + out.detail + ")");
  return out;
}

// ---------------------------------------------------------------------------

Outcome pca_vs_svd() {
  Outcome out;
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n01;
  oracle::Mat data(40, std::vector<double>(6));
  const double scale[6] = {5.0, 3.0, 2.0, 1.0, 0.5, 0.25};
  for (auto& row : data) {
    for (std::size_t j = 0; j < 6; ++j) row[j] = scale[j] * n01(gen) + 0.3 * row[0];
  }
  const auto r = reduce::pca(testing::to_rows(data), testing::numbered_ids(40), 3);
  std::vector<double> variances;
  const auto ref = oracle::pca_scores(data, 3, &variances);
  double worst = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    double same = 0.0;
    double flipped = 0.0;
    for (std::size_t i = 0; i < 40; ++i) {
      const double v = r.projection.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
      same = std::max(same, std::abs(v - ref[i][c]));
      flipped = std::max(flipped, std::abs(v + ref[i][c]));
    }
    worst = std::max(worst, std::min(same, flipped));
  }
  out.require(worst <= 1e-8, "projection deviation " + fmt(worst));
  const topicmap::RowMatrix gram = r.components * r.components.transpose();
  const double ortho = (gram - topicmap::RowMatrix::Identity(3, 3)).cwiseAbs().maxCoeff();
  out.require(ortho <= 1e-10, "components not orthonormal: " + fmt(ortho));
  bool descending = true;
  for (std::size_t i = 1; i < r.explained_variance_ratio.size(); ++i) {
    descending = descending && r.explained_variance_ratio[i] <= r.explained_variance_ratio[i - 1];
  }
  out.require(descending, "explained variance increases");
  double total = 0.0;
  for (double v : variances) total += v;
  double ratio_err = 0.0;
  for (std::size_t i = 0; i < 3; ++i) ratio_err = std::max(ratio_err, std::abs(r.explained_variance_ratio[i] - variances[i] / total));
  out.require(ratio_err <= 1e-10, "variance ratio deviation " + fmt(ratio_err));
  out.detail = "max |proj - oracle| up to sign = " + fmt(worst) + " |CC'-I| = " + fmt(ortho) +
               (out.detail.empty() ? "" : " (" + out.detail + ")");
  return out;
}

// ---------------------------------------------------------------------------

Outcome umap_checks() {
  Outcome out;
  std::mt19937_64 gen(31);
  std::normal_distribution<double> n01;
  oracle::Mat centres(5, std::vector<double>(20, 0.0));
  for (auto& c : centres) {
    for (auto& x : c) x = 4.0 * n01(gen);
  }
  std::vector<int> truth;
  const auto pts = oracle::gaussian_blobs(centres, 100, 1.0, 32, &truth);
  reduce::UmapParams p;
  p.metric = reduce::Metric::euclidean;
  p.n_components = 5;
  p.seed = 42;
  const auto data = testing::to_rows(pts);
  const auto first = reduce::umap(data, testing::numbered_ids(pts.size()), p);
  const auto second = reduce::umap(data, testing::numbered_ids(pts.size()), p);
  const bool identical = first.rows.size() == second.rows.size() &&
                         std::memcmp(first.rows.data(), second.rows.data(), sizeof(double) * first.rows.size()) == 0;
  out.require(identical, "two runs differ");
  const bool finite = first.rows.allFinite();
  out.require(finite, "NaN or inf in the layout");
  out.require(first.dim() == 5, "dimension " + std::to_string(first.dim()));
  const double acc = oracle::one_nn_accuracy(testing::to_mat(first.rows), truth);
  out.require(acc >= 0.98, "1-NN accuracy " + fmt(acc));
  out.detail = "n=500 bitwise-identical=" + std::string(identical ? "yes" : "no") + " 1-NN=" + fmt(acc) +
               (out.detail.empty() ? "" : " (" + out.detail + ")");
  return out;
}

// ---------------------------------------------------------------------------

struct SyntheticLda {
  lda::BagOfWords bow;
  oracle::Mat beta;
};

SyntheticLda synthetic_lda(std::size_t K, std::size_t V, std::size_t M, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::gamma_distribution<double> word_gamma(0.1, 1.0);
  std::gamma_distribution<double> topic_gamma(0.3, 1.0);
  std::uniform_int_distribution<int> length(60, 100);
  SyntheticLda s;
  for (std::size_t v = 0; v < V; ++v) s.bow.vocabulary.push_back("v" + std::to_string(v));
  s.beta.assign(K, std::vector<double>(V));
  for (auto& row : s.beta) {
    double z = 0.0;
    for (auto& x : row) z += (x = word_gamma(gen) + 1e-6);
    for (auto& x : row) x /= z;
  }
  for (std::size_t d = 0; d < M; ++d) {
    std::vector<double> theta(K);
    double z = 0.0;
    for (auto& t : theta) z += (t = topic_gamma(gen) + 1e-9);
    for (auto& t : theta) t /= z;
    std::discrete_distribution<std::size_t> pick_topic(theta.begin(), theta.end());
    std::map<std::size_t, std::size_t> counts;
    const int n = length(gen);
    for (int i = 0; i < n; ++i) {
      const auto k = pick_topic(gen);
      std::discrete_distribution<std::size_t> pick_word(s.beta[k].begin(), s.beta[k].end());
      ++counts[pick_word(gen)];
    }
    s.bow.documents.emplace_back(counts.begin(), counts.end());
  }
  return s;
}

Outcome lda_checks() {
  Outcome out;
  const auto synth = synthetic_lda(3, 50, 200, 41);
  const auto model = lda::lda_fit(synth.bow, 3, 200, 42);
  double worst_drop = 0.0;
  for (std::size_t i = 1; i < model.elbo_trace.size(); ++i) {
    worst_drop = std::max(worst_drop, model.elbo_trace[i - 1] - model.elbo_trace[i]);
  }
  out.require(model.elbo_trace.size() == 200, "trace has " + std::to_string(model.elbo_trace.size()) + " entries");
  out.require(worst_drop <= 1e-6, "ELBO drop " + fmt(worst_drop));
  const double recovery = oracle::best_permutation_cosine(testing::to_mat(model.beta), synth.beta);
  out.require(recovery >= 0.8, "recovery cosine " + fmt(recovery));

  lda::LdaModel tiny;
  tiny.K = 2;
  tiny.alpha = 0.5;
  tiny.vocabulary = {"a", "b", "c", "d"};
  const oracle::Mat beta2{{0.5, 0.3, 0.15, 0.05}, {0.1, 0.1, 0.3, 0.5}};
  tiny.beta = testing::to_rows(beta2);
  double rel = 0.0;
  for (const auto& tokens : std::vector<std::vector<std::size_t>>{{0, 3}, {0, 0, 1, 3}, {2, 3, 3, 1, 0}}) {
    const double lib = lda::document_likelihood(tiny, tokens);
    const double ref = oracle::lda_likelihood_k2(tiny.alpha, beta2, tokens);
    rel = std::max(rel, std::abs(lib - ref) / ref);
  }
  tiny.K = 3;
  tiny.alpha = 1.0;
  const oracle::Mat beta3{{0.5, 0.3, 0.15, 0.05}, {0.1, 0.1, 0.3, 0.5}, {0.25, 0.25, 0.25, 0.25}};
  tiny.beta = testing::to_rows(beta3);
  for (const auto& tokens : std::vector<std::vector<std::size_t>>{{1, 2}, {0, 3, 3}, {0, 1, 2, 3}}) {
    const double lib = lda::document_likelihood(tiny, tokens);
    const double ref = oracle::lda_likelihood_k3(tiny.alpha, beta3, tokens);
    rel = std::max(rel, std::abs(lib - ref) / ref);
  }
  out.require(rel <= 1e-4, "likelihood relative error " + fmt(rel));
  out.detail = "max ELBO drop=" + fmt(worst_drop) + " recovery=" + fmt(recovery) + " likelihood rel err=" + fmt(rel) +
               (out.detail.empty() ? "" : " (" + out.detail + ")");
  return out;
}

// ---------------------------------------------------------------------------

Outcome compare_checks() {
  Outcome out;
  std::mt19937_64 gen(61);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> pos(0.01, 100.0);
  auto random_rows = [&](std::size_t r, std::size_t c) {
    topicmap::RowMatrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n01(gen);
    return m;
  };
  const auto a = random_rows(12, 64);
  const auto self = compare::similarity_matrix(a, a);
  bool exact = self.avg_sim == 1.0;
  for (std::size_t i = 0; i < self.best_match.size(); ++i) {
    exact = exact && self.best_match[i].score == 1.0 && self.best_match[i].index == i;
  }
  out.require(exact, "self comparison is not exactly 1.0");

  double transpose_err = 0.0;
  std::size_t argmax_changes = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = random_rows(7, 16);
    auto y = random_rows(9, 16);
    const auto xy = compare::similarity_matrix(x, y);
    const auto yx = compare::similarity_matrix(y, x);
    transpose_err = std::max(transpose_err, (xy.matrix - yx.matrix.transpose()).cwiseAbs().maxCoeff());
    for (Eigen::Index r = 0; r < y.rows(); ++r) y.row(r) *= pos(gen);
    const auto scaled = compare::similarity_matrix(x, y);
    for (std::size_t i = 0; i < xy.best_match.size(); ++i) {
      argmax_changes += xy.best_match[i].index != scaled.best_match[i].index ? 1 : 0;
    }
  }
  out.require(transpose_err <= 1e-12, "transpose deviation " + fmt(transpose_err));
  out.require(argmax_changes == 0, std::to_string(argmax_changes) + " argmax changes under scaling");
  out.detail = "self AvgSim=" + format_double(self.avg_sim) + " transpose err=" + fmt(transpose_err) +
               " argmax changes=" + std::to_string(argmax_changes) + (out.detail.empty() ? "" : " (" + out.detail + ")");
  return out;
}

// ---------------------------------------------------------------------------

pipeline::Config corpus_config(const std::string& name) {
  const auto dir = testing::fixtures_dir() / name;
  pipeline::Config cfg;
  cfg.set("corpus", (dir / (name + ".txt")).string());
  cfg.set("embeddings", (dir / (name + ".docs.emb")).string());
  cfg.set("words", (dir / (name + ".words.emb")).string());
  return cfg;
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files[fs::relative(entry.path(), root).string()] = read_file(entry.path());
  }
  return files;
}

Outcome end_to_end() {
  Outcome out;
  std::vector<std::map<std::string, std::string>> trees;
  std::map<std::string, pipeline::TopicsRun> runs;
  for (int pass = 0; pass < 2; ++pass) {
    const auto root = testing::scratch_dir("e2e_" + std::to_string(pass));
    for (const std::string name : {"gita", "upanishads"}) {
      auto run = pipeline::run_topics(corpus_config(name));
      pipeline::write_topics(run, root / name);
      if (pass == 0) runs.emplace(name, std::move(run));
    }
    pipeline::Config cmp;
    cmp.set("model_a", (root / "gita" / "topics.json").string());
    cmp.set("model_b", (root / "upanishads" / "topics.json").string());
    pipeline::run_compare(cmp, root / "compare");
    trees.push_back(tree_contents(root));
  }
  out.require(trees[0] == trees[1], "output trees differ between runs");
  out.require(trees[0].size() >= 9, "expected at least 9 output files, got " + std::to_string(trees[0].size()));
  std::string summary = "files=" + std::to_string(trees[0].size()) + (trees[0] == trees[1] ? " identical" : " DIFFER");
  for (const auto& [name, run] : runs) {
    const auto k = run.model.k();
    out.require(k >= 10 && k <= 20, name + " has " + std::to_string(k) + " topics");
    out.require(run.coherence.mean > 0.4, name + " coherence " + fmt(run.coherence.mean));
    auto lda_cfg = corpus_config(name);
    lda_cfg.set("k", std::to_string(k));
    const double baseline = pipeline::run_lda(lda_cfg, testing::scratch_dir("e2e_lda_" + name));
    out.require(run.coherence.mean > baseline, name + " not above LDA baseline " + fmt(baseline));
    summary += " | " + name + ": k=" + std::to_string(k) + " npmi=" + fmt(run.coherence.mean) + " lda=" + fmt(baseline);
  }
  out.detail = summary + (out.detail.empty() ? "" : " (" + out.detail + ")");
  return out;
}

// ---------------------------------------------------------------------------

double centroid_gap(const topics::TopicModel& model, const embed::EmbeddingMatrix& docs) {
  const auto means = oracle::group_means(testing::to_mat(docs.rows()), model.assignment.labels,
                                         static_cast<int>(model.k()));
  double worst = 0.0;
  for (std::size_t t = 0; t < model.k(); ++t) {
    for (std::size_t j = 0; j < means[t].size(); ++j) {
      worst = std::max(worst, std::abs(means[t][j] - model.topic_vectors(static_cast<Eigen::Index>(t),
                                                                         static_cast<Eigen::Index>(j))));
    }
  }
  return worst;
}

Outcome centroid_invariant() {
  Outcome out;
  const auto run = pipeline::run_topics(corpus_config("gita"));
  const auto& docs = run.joint.docs;
  double worst = centroid_gap(run.model, docs);
  const auto start_k = run.model.k();
  out.require(start_k == 14, "expected 14 topics before reduction, got " + std::to_string(start_k));

  const auto parsed = topics::parse_model(topics::model_json(run.model));
  worst = std::max(worst, centroid_gap(parsed, docs));

  auto stepwise = run.model;
  while (stepwise.k() > 10) {
    stepwise = topics::reduce_topics(stepwise, docs, run.joint.words, stepwise.k() - 1);
    worst = std::max(worst, centroid_gap(stepwise, docs));
  }
  const auto direct = topics::reduce_topics(run.model, docs, run.joint.words, 10);
  worst = std::max(worst, centroid_gap(direct, docs));
  out.require(direct.k() == 10, "reduced to " + std::to_string(direct.k()));
  const auto replayed = topics::apply_merges(run.model.assignment.labels, direct.merges);
  out.require(replayed == direct.assignment.labels, "merge chain does not replay");
  out.require(worst <= 1e-9, "centroid deviation " + fmt(worst));
  out.detail = std::to_string(start_k) + "->" + std::to_string(direct.k()) + " max deviation=" + fmt(worst) +
               (out.detail.empty() ? "" : " (" + out.detail + ")");
  return out;
}

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"npmi_matches_window_enumeration", 5.0, npmi_oracle},
      {"hdbscan_recovers_blobs", 10.0, hdbscan_recovery},
      {"kmeans_sse_and_ari", 5.0, kmeans_checks},
      {"pca_matches_eigen_oracle", 5.0, pca_vs_svd},
      {"umap_deterministic_and_separating", 60.0, umap_checks},
      {"lda_elbo_recovery_likelihood", 60.0, lda_checks},
      {"compare_self_transpose_scaling", 5.0, compare_checks},
      {"end_to_end_fixture_pipeline", 300.0, end_to_end},
      {"topic_centroid_invariant", 60.0, centroid_invariant},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > c.budget_seconds) {
      outcome.pass = false;
      outcome.detail += " (over budget " + fmt(c.budget_seconds) + " s)";
    }
    failures += outcome.pass ? 0 : 1;
    std::printf("%s %-36s %7.2fs  %s\n", outcome.pass ? "PASS" : "FAIL", c.name, seconds, outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
