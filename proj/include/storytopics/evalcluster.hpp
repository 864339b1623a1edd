#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "storytopics/corpus.hpp"

namespace storytopics {

struct ClusterAssignment {
  std::vector<std::int64_t> story_ids;
  std::vector<int> cluster_ids;
  int k = 0;
  double inertia = 0.0;
  /// Inertia after each Lloyd assignment step.
  std::vector<double> inertia_trace;
  /// Cluster ids that ended with no members.
  std::vector<int> empty_clusters;
};

/// k-means++ seeding then Lloyd iterations until the assignment stops
/// changing or max_iter is reached.
ClusterAssignment kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int max_iter = 300,
                         std::span<const std::int64_t> ids = {});

/// Lowest-inertia result over `restarts` consecutive seeds starting at `seed`.
ClusterAssignment kmeans_best_of(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts,
                                 int max_iter = 300);

struct AgreementScores {
  double purity = 0.0;
  double adjusted_rand_index = 0.0;
  double normalized_mutual_information = 0.0;
};

/// Contingency-table scores; NMI uses the arithmetic mean of the entropies.
AgreementScores agreement(std::span<const int> clusters, std::span<const DomainLabel> labels);

/// Majority label of each cluster; ties go to the alphabetically first
/// domain name.
std::vector<DomainLabel> majority_labels(std::span<const int> clusters, std::span<const DomainLabel> labels,
                                         int k);

/// Share of `label` inside the cluster holding most stories with that label,
/// alongside the label's share of the whole corpus.
struct LabelConcentration {
  int cluster = -1;
  double within_cluster = 0.0;
  double base_rate = 0.0;
};
LabelConcentration label_concentration(std::span<const int> clusters, std::span<const DomainLabel> labels,
                                       DomainLabel label);

/// Classical multidimensional scaling: double-centered squared distances,
/// top `components` eigenvectors scaled by sqrt(eigenvalue). Negative
/// eigenvalues contribute zero columns.
Eigen::MatrixXd classical_mds(const Eigen::MatrixXd& distances, int components);

struct Neighbor {
  std::int64_t story_id = 0;
  double distance = 0.0;
  std::string full_text;
  DomainLabel domain = DomainLabel::Other;
};

/// top_k nearest stories (excluding the story itself) by the given distance
/// matrix; NaN distances rank last. Ties break by story id.
std::vector<Neighbor> neighbor_report(const Eigen::MatrixXd& distances, const Corpus& corpus,
                                      std::int64_t story_id, std::size_t top_k);

/// Same, with Euclidean distances between rows of `coords`.
std::vector<Neighbor> neighbor_report_coords(const Eigen::MatrixXd& coords, const Corpus& corpus,
                                             std::int64_t story_id, std::size_t top_k);

std::string format_neighbor_table(std::span<const Neighbor> neighbors);

}  // namespace storytopics
