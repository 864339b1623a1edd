#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "storytopics/embed.hpp"
#include "storytopics/errors.hpp"

namespace storytopics {

/// t×d embedding rows of the embeddable tokens of one story, in order.
struct StoryMatrix {
  std::int64_t story_id = 0;
  Eigen::MatrixXd rows;
};

StoryMatrix embed_story(const TokenizedStory& story, const EmbeddingTable& table);

/// Smallest non-zero row count. Throws AllEmpty if every story is empty.
Eigen::Index shortest_length(std::span<const StoryMatrix> matrices);

/// Flips `v` so its largest-magnitude entry (first one on ties) is positive.
template <typename Derived>
void orient_by_largest_entry(Eigen::MatrixBase<Derived>& v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0) v = -v;
}

/// Summarizes a t×d story matrix by s rows: the top-s right singular vectors
/// of the row-centered matrix, each scaled by its singular value. Stories
/// with t <= s are returned unchanged and zero-padded to s rows.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> pca_reduce(
    const Eigen::MatrixBase<Derived>& m, Eigen::Index s, bool center = true) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (s < 1) throw ConfigError("pca target length must be >= 1");

  Matrix out = Matrix::Zero(s, m.cols());
  if (m.rows() <= s) {
    out.topRows(m.rows()) = m;
    return out;
  }
  Matrix centered = m;
  if (center) centered.rowwise() -= centered.colwise().mean();

  Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const Eigen::Index available = std::min<Eigen::Index>(s, sigma.size());
  for (Eigen::Index k = 0; k < available; ++k) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v = svd.matrixV().col(k);
    orient_by_largest_entry(v);
    out.row(k) = sigma(k) * v.transpose();
  }
  return out;
}

/// n×(d·s) concatenation of the reduced story matrices (T′).
struct FlatRepresentation {
  Eigen::MatrixXd matrix;
  Eigen::Index s = 0;
  Eigen::Index d = 0;
  /// Stories with no embeddable token (all-zero rows).
  std::vector<bool> empty;
};

/// Row i is reduced[i] flattened row-major. All inputs must be s×d.
FlatRepresentation assemble_flat(std::span<const Eigen::MatrixXd> reduced);

/// Convenience: embed, reduce to the shortest length and assemble.
FlatRepresentation build_flat(std::span<const TokenizedStory> stories, const EmbeddingTable& table,
                              bool center = true);

/// "FLAT", u32 version 1, u64 n, u64 width, n·width f64, all little-endian.
void write_flat(std::ostream& out, const Eigen::MatrixXd& matrix);
Eigen::MatrixXd read_flat(std::istream& in);

}  // namespace storytopics
