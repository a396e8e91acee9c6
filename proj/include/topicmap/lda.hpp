#pragma once

#include <cstddef>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "topicmap/corpus.hpp"
#include "topicmap/matrix.hpp"

namespace topicmap::lda {

/// Sparse counts: (word id, count) pairs sorted by word id.
using BagDocument = std::vector<std::pair<std::size_t, std::size_t>>;

struct BagOfWords {
  std::vector<std::string> vocabulary;
  std::vector<BagDocument> documents;
};

/// Stopwords are left out; every vocabulary token of the corpus keeps its id.
BagOfWords bag_of_words(const corpus::Corpus& corpus);

struct LdaOptions {
  double alpha = 0.0;  // 0 selects 1/K
  std::size_t max_inner = 100;
  double inner_tolerance = 1e-3;
  double beta_floor = 1e-9;
};

struct LdaModel {
  std::size_t K = 0;
  double alpha = 0.0;
  RowMatrix beta;   // K x V, rows sum to 1
  RowMatrix gamma;  // M x K variational Dirichlet parameters
  std::vector<double> elbo_trace;
  std::vector<std::string> vocabulary;
  std::uint64_t seed = 0;
};

LdaModel lda_fit(const BagOfWords& bow, std::size_t K, std::size_t iters = 200, std::uint64_t seed = 42,
                 const LdaOptions& options = {});
LdaModel lda_fit(const corpus::Corpus& corpus, std::size_t K, std::size_t iters = 200, std::uint64_t seed = 42,
                 const LdaOptions& options = {});

struct WordProb {
  std::string word;
  double prob = 0.0;
};

/// Top-n words by beta probability per topic; ties keep vocabulary order.
std::vector<std::vector<WordProb>> lda_topics(const LdaModel& model, std::size_t n);

/// Marginal likelihood p(w | alpha, beta) of a token sequence, with theta
/// integrated exactly through Dirichlet moments.
double document_likelihood(const LdaModel& model, const std::vector<std::size_t>& tokens);

std::string model_json(const LdaModel& model, std::size_t n, const nlohmann::json& provenance = nullptr);

}  // namespace topicmap::lda
