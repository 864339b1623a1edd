#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "storytopics/embed.hpp"

namespace storytopics {

/// Normalized bag of words over embedding-table rows.
struct NbowDistribution {
  std::int64_t story_id = 0;
  std::vector<Eigen::Index> support;  ///< ascending, unique
  std::vector<double> weights;        ///< positive, sum to 1
};

/// Throws EmptyDocument when no token of the story is embeddable.
NbowDistribution nbow(const TokenizedStory& story, const EmbeddingTable& table);

/// Word Mover's Distance with Euclidean ground cost, solved exactly.
double wmd(const NbowDistribution& a, const NbowDistribution& b, const EmbeddingTable& table);

/// Distance between the weighted embedding centroids; a lower bound on wmd.
double word_centroid_distance(const NbowDistribution& a, const NbowDistribution& b,
                              const EmbeddingTable& table);

/// Symmetric n×n matrix, zero diagonal. Rows and columns of empty stories
/// hold NaN off the diagonal.
struct DistanceMatrix {
  Eigen::MatrixXd values;
  std::vector<bool> empty;

  Eigen::Index n() const noexcept { return values.rows(); }
};

struct DistanceOptions {
  /// Worker threads for the pair fan-out; results do not depend on it.
  int threads = 1;
  /// Called with (pairs done, pairs total) from the calling thread.
  std::function<void(std::size_t, std::size_t)> progress;
};

/// nullopt entries mark empty stories.
DistanceMatrix distance_matrix(std::span<const std::optional<NbowDistribution>> docs,
                               const EmbeddingTable& table, const DistanceOptions& options = {});

/// nBOW for every story; nullopt where the story has no embeddable token.
std::vector<std::optional<NbowDistribution>> nbow_all(std::span<const TokenizedStory> stories,
                                                      const EmbeddingTable& table);

/// Replaces NaN sentinels: entry (i,j) with one empty side takes the median
/// of the non-empty story's finite off-diagonal distances; both-empty pairs
/// take the median over all finite off-diagonal entries.
Eigen::MatrixXd impute_sentinels(const DistanceMatrix& d);

/// "WMDM", u32 version 1, u64 n, n·n f64 row-major, little-endian.
void write_distance_matrix(std::ostream& out, const DistanceMatrix& d);
DistanceMatrix read_distance_matrix(std::istream& in);

}  // namespace storytopics
