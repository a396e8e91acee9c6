#include "topicmap/lda.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "topicmap/error.hpp"
#include "topicmap/rng.hpp"

namespace topicmap::lda {
namespace {

using boost::math::digamma;
using boost::math::lgamma;

struct DocState {
  std::vector<double> phi;  // unique words x K, row-major
};

// Maximises sum_v n_v log b_v over the simplex with b_v >= floor.
void floored_normalize(std::vector<double>& counts, double floor) {
  const std::size_t V = counts.size();
  std::vector<bool> floored(V, false);
  double lambda = 0.0;
  for (;;) {
    double free_mass = 0.0;
    std::size_t n_floored = 0;
    for (std::size_t v = 0; v < V; ++v) {
      if (floored[v]) {
        ++n_floored;
      } else {
        free_mass += counts[v];
      }
    }
    const double remaining = 1.0 - static_cast<double>(n_floored) * floor;
    if (free_mass <= 0.0 || remaining <= 0.0) {
      std::fill(counts.begin(), counts.end(), 1.0 / static_cast<double>(V));
      return;
    }
    lambda = free_mass / remaining;
    bool changed = false;
    for (std::size_t v = 0; v < V; ++v) {
      if (!floored[v] && counts[v] / lambda < floor) {
        floored[v] = true;
        changed = true;
      }
    }
    if (!changed) break;
  }
  for (std::size_t v = 0; v < V; ++v) counts[v] = floored[v] ? floor : counts[v] / lambda;
}

class Fitter {
 public:
  Fitter(const BagOfWords& bow, std::size_t K, double alpha, const LdaOptions& options)
      : bow_(bow), K_(K), alpha_(alpha), options_(options) {}

  void init(std::uint64_t seed, LdaModel& model) {
    const std::size_t V = bow_.vocabulary.size();
    const CounterRng rng = CounterRng(seed).substream(31);
    model.beta.resize(static_cast<Eigen::Index>(K_), static_cast<Eigen::Index>(V));
    for (std::size_t k = 0; k < K_; ++k) {
      double total = 0.0;
      for (std::size_t v = 0; v < V; ++v) {
        const double x = 1.0 / static_cast<double>(V) + rng.uniform(k * V + v);
        model.beta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(v)) = x;
        total += x;
      }
      model.beta.row(static_cast<Eigen::Index>(k)) /= total;
    }
    const std::size_t M = bow_.documents.size();
    model.gamma.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(K_));
    states_.resize(M);
    for (std::size_t d = 0; d < M; ++d) {
      std::size_t length = 0;
      for (const auto& [w, c] : bow_.documents[d]) length += c;
      for (std::size_t k = 0; k < K_; ++k) {
        model.gamma(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k)) =
            alpha_ + static_cast<double>(length) / static_cast<double>(K_);
      }
      states_[d].phi.assign(bow_.documents[d].size() * K_, 1.0 / static_cast<double>(K_));
    }
  }

  // Coordinate ascent on one document: phi given gamma, then gamma given phi.
  void e_step(std::size_t d, const RowMatrix& log_beta, RowMatrix& gamma) {
    const auto& doc = bow_.documents[d];
    auto& phi = states_[d].phi;
    std::vector<double> digamma_gamma(K_);
    std::vector<double> next(K_);
    for (std::size_t inner = 0; inner < options_.max_inner; ++inner) {
      for (std::size_t k = 0; k < K_; ++k) {
        digamma_gamma[k] = digamma(gamma(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k)));
      }
      std::fill(next.begin(), next.end(), alpha_);
      for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto [w, c] = doc[i];
        double* row = &phi[i * K_];
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < K_; ++k) {
          row[k] = log_beta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(w)) + digamma_gamma[k];
          top = std::max(top, row[k]);
        }
        double total = 0.0;
        for (std::size_t k = 0; k < K_; ++k) {
          row[k] = std::exp(row[k] - top);
          total += row[k];
        }
        for (std::size_t k = 0; k < K_; ++k) {
          row[k] /= total;
          next[k] += static_cast<double>(c) * row[k];
        }
      }
      double change = 0.0;
      for (std::size_t k = 0; k < K_; ++k) {
        change += std::abs(next[k] - gamma(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k)));
        gamma(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k)) = next[k];
      }
      if (change / static_cast<double>(K_) < options_.inner_tolerance) break;
    }
  }

  void m_step(RowMatrix& beta) const {
    const std::size_t V = bow_.vocabulary.size();
    std::vector<std::vector<double>> counts(K_, std::vector<double>(V, 0.0));
    for (std::size_t d = 0; d < bow_.documents.size(); ++d) {
      const auto& doc = bow_.documents[d];
      const auto& phi = states_[d].phi;
      for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto [w, c] = doc[i];
        for (std::size_t k = 0; k < K_; ++k) counts[k][w] += static_cast<double>(c) * phi[i * K_ + k];
      }
    }
    for (std::size_t k = 0; k < K_; ++k) {
      floored_normalize(counts[k], options_.beta_floor);
      for (std::size_t v = 0; v < V; ++v) {
        beta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(v)) = counts[k][v];
      }
    }
  }

  double elbo(const RowMatrix& log_beta, const RowMatrix& gamma) const {
    const auto K = static_cast<double>(K_);
    const long double prior_const = lgamma(K * alpha_) - K * lgamma(alpha_);
    long double total = 0.0L;
    std::vector<double> elog(K_);
    for (std::size_t d = 0; d < bow_.documents.size(); ++d) {
      const auto& doc = bow_.documents[d];
      const auto& phi = states_[d].phi;
      double gamma_sum = 0.0;
      for (std::size_t k = 0; k < K_; ++k) gamma_sum += gamma(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k));
      const double digamma_sum = digamma(gamma_sum);
      long double doc_total = prior_const - lgamma(gamma_sum);
      for (std::size_t k = 0; k < K_; ++k) {
        const double g = gamma(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k));
        elog[k] = digamma(g) - digamma_sum;
        doc_total += (alpha_ - 1.0) * elog[k] + lgamma(g) - (g - 1.0) * elog[k];
      }
      for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto [w, c] = doc[i];
        long double word_total = 0.0L;
        for (std::size_t k = 0; k < K_; ++k) {
          const double p = phi[i * K_ + k];
          if (p <= 0.0) continue;
          word_total += p * (elog[k] + log_beta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(w)) - std::log(p));
        }
        doc_total += static_cast<long double>(c) * word_total;
      }
      total += doc_total;
    }
    return static_cast<double>(total);
  }

 private:
  const BagOfWords& bow_;
  std::size_t K_;
  double alpha_;
  LdaOptions options_;
  std::vector<DocState> states_;
};

}  // namespace

BagOfWords bag_of_words(const corpus::Corpus& corpus) {
  BagOfWords bow;
  bow.vocabulary = corpus.vocabulary;
  bow.documents.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents) {
    std::map<std::size_t, std::size_t> counts;
    for (const auto& token : corpus::tokenize(doc.text)) {
      if (const auto id = corpus.word_id(token)) ++counts[*id];
    }
    bow.documents.emplace_back(counts.begin(), counts.end());
  }
  return bow;
}

LdaModel lda_fit(const BagOfWords& bow, std::size_t K, std::size_t iters, std::uint64_t seed,
                 const LdaOptions& options) {
  if (bow.vocabulary.empty()) throw Error(ErrorKind::invalid_argument, "LDA vocabulary is empty");
  if (bow.documents.empty()) throw Error(ErrorKind::invalid_argument, "LDA needs at least one document");
  if (K < 1) throw Error(ErrorKind::invalid_argument, "LDA needs K >= 1");
  if (iters < 1) throw Error(ErrorKind::invalid_argument, "LDA needs at least one iteration");
  for (const auto& doc : bow.documents) {
    for (const auto& [w, c] : doc) {
      if (w >= bow.vocabulary.size()) throw Error(ErrorKind::invalid_argument, "word id outside vocabulary");
    }
  }
  LdaModel model;
  model.K = K;
  model.alpha = options.alpha > 0.0 ? options.alpha : 1.0 / static_cast<double>(K);
  model.vocabulary = bow.vocabulary;
  model.seed = seed;

  Fitter fitter(bow, K, model.alpha, options);
  fitter.init(seed, model);
  RowMatrix log_beta = model.beta.array().log().matrix();
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t d = 0; d < bow.documents.size(); ++d) fitter.e_step(d, log_beta, model.gamma);
    fitter.m_step(model.beta);
    log_beta = model.beta.array().log().matrix();
    model.elbo_trace.push_back(fitter.elbo(log_beta, model.gamma));
  }
  return model;
}

LdaModel lda_fit(const corpus::Corpus& corpus, std::size_t K, std::size_t iters, std::uint64_t seed,
                 const LdaOptions& options) {
  return lda_fit(bag_of_words(corpus), K, iters, seed, options);
}

std::vector<std::vector<WordProb>> lda_topics(const LdaModel& model, std::size_t n) {
  const auto V = static_cast<std::size_t>(model.beta.cols());
  if (n == 0 || n > V) {
    throw Error(ErrorKind::invalid_argument, "top word count " + std::to_string(n) + " must lie in [1, " +
                                                 std::to_string(V) + "]");
  }
  std::vector<std::vector<WordProb>> out;
  std::vector<std::size_t> order(V);
  for (Eigen::Index k = 0; k < model.beta.rows(); ++k) {
    std::iota(order.begin(), order.end(), 0);
    const auto row = model.beta.row(k);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double pa = row(static_cast<Eigen::Index>(a));
                        const double pb = row(static_cast<Eigen::Index>(b));
                        return pa > pb || (pa == pb && a < b);
                      });
    std::vector<WordProb> ranked;
    for (std::size_t i = 0; i < n; ++i) {
      ranked.push_back({model.vocabulary[order[i]], row(static_cast<Eigen::Index>(order[i]))});
    }
    out.push_back(std::move(ranked));
  }
  return out;
}

double document_likelihood(const LdaModel& model, const std::vector<std::size_t>& tokens) {
  const std::size_t K = model.K;
  // Expand prod_n sum_k theta_k beta_{k,w_n} as a polynomial in theta keyed
  // by exponent vectors, then take Dirichlet moments of each monomial.
  std::map<std::vector<int>, double> poly{{std::vector<int>(K, 0), 1.0}};
  for (const auto w : tokens) {
    if (w >= static_cast<std::size_t>(model.beta.cols())) throw Error(ErrorKind::invalid_argument, "token outside vocabulary");
    std::map<std::vector<int>, double> next;
    for (const auto& [exponents, coeff] : poly) {
      for (std::size_t k = 0; k < K; ++k) {
        auto e = exponents;
        ++e[k];
        next[e] += coeff * model.beta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(w));
      }
    }
    poly = std::move(next);
    if (poly.size() > 2'000'000) throw Error(ErrorKind::invalid_argument, "document too long for exact likelihood");
  }
  const double a = model.alpha;
  const double N = static_cast<double>(tokens.size());
  const double log_norm = lgamma(static_cast<double>(K) * a) - lgamma(static_cast<double>(K) * a + N);
  double total = 0.0;
  for (const auto& [exponents, coeff] : poly) {
    double log_moment = log_norm;
    for (const int e : exponents) {
      if (e > 0) log_moment += lgamma(a + e) - lgamma(a);
    }
    total += coeff * std::exp(log_moment);
  }
  return total;
}

std::string model_json(const LdaModel& model, std::size_t n, const nlohmann::json& provenance) {
  nlohmann::json topics = nlohmann::json::array();
  for (const auto& ranked : lda_topics(model, n)) {
    nlohmann::json words = nlohmann::json::array();
    for (const auto& wp : ranked) words.push_back(nlohmann::json::array({wp.word, wp.prob}));
    topics.push_back(std::move(words));
  }
  nlohmann::json j{{"K", model.K},
                   {"alpha", model.alpha},
                   {"iterations", model.elbo_trace.size()},
                   {"seed", model.seed},
                   {"vocabulary_size", model.vocabulary.size()},
                   {"topics", std::move(topics)},
                   {"elbo_trace", model.elbo_trace}};
  if (!provenance.is_null()) j["provenance"] = provenance;
  return j.dump(2) + "\n";
}

}  // namespace topicmap::lda
