#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "storytopics/textprep.hpp"
#include "storytopics/vectorize.hpp"

namespace storytopics {

enum class LdaInput {
  counts,          ///< raw token occurrences
  tfidf_weighted,  ///< round(scale * tfidf) pseudo-counts per token
};

struct LdaConfig {
  int k = 5;
  /// Symmetric document-topic prior; unset means 50 / k.
  std::optional<double> alpha;
  double beta = 0.01;
  int iterations = 1000;
  std::uint64_t seed = 1;
  LdaInput mode = LdaInput::counts;
  double tfidf_scale = 10.0;

  double effective_alpha() const { return alpha.value_or(50.0 / k); }
  void validate() const;
};

struct LdaModel {
  Eigen::MatrixXd theta;  ///< n×k document-topic probabilities
  Eigen::MatrixXd phi;    ///< k×V topic-word probabilities
  LdaConfig config;
  /// Documents with no tokens; their theta row is uniform.
  std::vector<bool> empty_documents;
};

/// Collapsed Gibbs sampling. Deterministic for a given seed.
LdaModel fit_lda(std::span<const TokenizedStory> stories, const Vocabulary& vocab,
                 const LdaConfig& cfg, const TfidfMatrix* weights = nullptr);

inline const Eigen::MatrixXd& doc_topics(const LdaModel& model) { return model.theta; }

void save_lda(std::ostream& out, const LdaModel& model);
LdaModel load_lda(std::istream& in);

}  // namespace storytopics
