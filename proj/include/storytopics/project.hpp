#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "storytopics/corpus.hpp"

namespace storytopics {

enum class TsneInput { features, distances };

struct TsneConfig {
  double perplexity = 30.0;
  double learning_rate = 200.0;
  int iterations = 1000;
  double early_exaggeration = 12.0;
  int exaggeration_iterations = 250;
  std::uint64_t seed = 1;
  /// Require perplexity < (n - 1) / 3. When false only the hard limit
  /// perplexity <= n - 1 applies (tiny inputs in tests).
  bool enforce_neighbor_bound = true;

  void validate(Eigen::Index n) const;
};

struct Projection2D {
  Eigen::MatrixXd coords;  ///< n×2
  std::vector<DomainLabel> labels;
  std::vector<std::int64_t> story_ids;
  /// KL(P || Q) before each gradient step, computed with the unexaggerated P.
  std::vector<double> kl_trace;
};

/// Symmetrized joint affinities P (n×n, sums to 1) from squared distances,
/// with per-point Gaussian bandwidths binary-searched to the perplexity.
Eigen::MatrixXd joint_affinities(const Eigen::MatrixXd& squared_distances, double perplexity);

/// Exact O(n²) t-SNE. For `distances` input the matrix is used as the metric
/// in the Gaussian kernel (squared, as feature distances are). Empty label or
/// id spans default to Other / row index.
Projection2D tsne(const Eigen::MatrixXd& input, TsneInput kind, const TsneConfig& cfg,
                  std::span<const DomainLabel> labels = {}, std::span<const std::int64_t> ids = {});

/// "story_id,x,y,domain"
void write_projection_csv(std::ostream& out, const Projection2D& p);
Projection2D read_projection_csv(std::istream& in);
/// "iteration,kl"
void write_kl_trace_csv(std::ostream& out, const Projection2D& p);

}  // namespace storytopics
