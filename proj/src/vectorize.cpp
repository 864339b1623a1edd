#include "storytopics/vectorize.hpp"

#include <cmath>
#include <map>
#include <ostream>

#include <fmt/format.h>

namespace storytopics {

BowMatrix bow(std::span<const TokenizedStory> stories, const Vocabulary& vocab,
              DropReport* report) {
  std::vector<Eigen::Triplet<int>> triplets;
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < stories.size(); ++i) {
    std::map<std::size_t, int> row;
    for (const auto& token : stories[i].tokens) {
      if (auto j = vocab.index_of(token)) {
        ++row[*j];
      } else {
        ++dropped;
      }
    }
    for (const auto& [j, count] : row) {
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), count);
    }
  }
  BowMatrix m(static_cast<Eigen::Index>(stories.size()), static_cast<Eigen::Index>(vocab.size()));
  m.setFromTriplets(triplets.begin(), triplets.end());
  if (report) report->dropped_tokens = dropped;
  return m;
}

TfidfMatrix tfidf(const BowMatrix& counts, const Vocabulary& vocab) {
  const double n = static_cast<double>(counts.rows());
  std::vector<double> idf(vocab.size(), 0.0);
  for (std::size_t j = 0; j < vocab.size(); ++j) {
    const auto df = vocab.doc_freq(j);
    idf[j] = df == 0 ? 0.0 : std::log(n / static_cast<double>(df));
  }

  TfidfMatrix out(counts.rows(), counts.cols());
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index i = 0; i < counts.outerSize(); ++i) {
    std::vector<std::pair<Eigen::Index, double>> row;
    double norm2 = 0.0;
    for (BowMatrix::InnerIterator it(counts, i); it; ++it) {
      const double w = it.value() * idf[static_cast<std::size_t>(it.col())];
      if (w == 0.0) continue;
      row.emplace_back(it.col(), w);
      norm2 += w * w;
    }
    const double norm = std::sqrt(norm2);
    for (const auto& [j, w] : row) triplets.emplace_back(i, j, w / norm);
  }
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

template <typename Scalar>
void write_triplets(std::ostream& out, const Eigen::SparseMatrix<Scalar, Eigen::RowMajor>& m) {
  for (Eigen::Index i = 0; i < m.outerSize(); ++i) {
    for (typename Eigen::SparseMatrix<Scalar, Eigen::RowMajor>::InnerIterator it(m, i); it; ++it) {
      out << fmt::format("{} {} {}\n", it.row(), it.col(), it.value());
    }
  }
}

template void write_triplets<int>(std::ostream&, const BowMatrix&);
template void write_triplets<double>(std::ostream&, const TfidfMatrix&);

}  // namespace storytopics
