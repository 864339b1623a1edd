#pragma once

#include <iosfwd>
#include <span>

#include <Eigen/SparseCore>

#include "storytopics/textprep.hpp"

namespace storytopics {

/// n×V token counts; row i is story i.
using BowMatrix = Eigen::SparseMatrix<int, Eigen::RowMajor>;
/// n×V TF-IDF weights with unit-norm (or zero) rows.
using TfidfMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct DropReport {
  /// Token occurrences skipped because the vocabulary does not contain them.
  std::size_t dropped_tokens = 0;
};

BowMatrix bow(std::span<const TokenizedStory> stories, const Vocabulary& vocab,
              DropReport* report = nullptr);

/// weight(i,j) = count(i,j) * ln(n / df(j)), then each row L2-normalized.
/// n is the number of rows of `counts`; df comes from `vocab`.
TfidfMatrix tfidf(const BowMatrix& counts, const Vocabulary& vocab);

/// Writes "row col value" lines for each stored nonzero, row-major.
template <typename Scalar>
void write_triplets(std::ostream& out, const Eigen::SparseMatrix<Scalar, Eigen::RowMajor>& m);

}  // namespace storytopics
