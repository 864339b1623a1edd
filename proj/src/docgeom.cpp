#include "storytopics/docgeom.hpp"

#include <limits>

#include "binio.hpp"

namespace storytopics {

StoryMatrix embed_story(const TokenizedStory& story, const EmbeddingTable& table) {
  std::vector<Eigen::Index> rows;
  rows.reserve(story.tokens.size());
  for (const auto& token : story.tokens) {
    if (auto match = table.find_variant(token)) rows.push_back(match->index);
  }
  StoryMatrix out{story.story_id, Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), table.dim())};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.rows.row(static_cast<Eigen::Index>(r)) = table.row(rows[r]).cast<double>();
  }
  return out;
}

Eigen::Index shortest_length(std::span<const StoryMatrix> matrices) {
  Eigen::Index best = std::numeric_limits<Eigen::Index>::max();
  for (const auto& m : matrices) {
    if (m.rows.rows() >= 1) best = std::min(best, m.rows.rows());
  }
  if (best == std::numeric_limits<Eigen::Index>::max()) {
    throw AllEmpty("no story has an embeddable token");
  }
  return best;
}

FlatRepresentation assemble_flat(std::span<const Eigen::MatrixXd> reduced) {
  FlatRepresentation flat;
  if (reduced.empty()) return flat;
  flat.s = reduced.front().rows();
  flat.d = reduced.front().cols();
  flat.matrix.resize(static_cast<Eigen::Index>(reduced.size()), flat.s * flat.d);
  flat.empty.assign(reduced.size(), false);
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    const auto& m = reduced[i];
    if (m.rows() != flat.s || m.cols() != flat.d) {
      throw ShapeMismatch("story " + std::to_string(i) + " is " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()) + ", expected " + std::to_string(flat.s) + "x" +
                          std::to_string(flat.d));
    }
    for (Eigen::Index r = 0; r < flat.s; ++r) {
      flat.matrix.row(static_cast<Eigen::Index>(i)).segment(r * flat.d, flat.d) = m.row(r);
    }
  }
  return flat;
}

FlatRepresentation build_flat(std::span<const TokenizedStory> stories, const EmbeddingTable& table,
                              bool center) {
  std::vector<StoryMatrix> matrices;
  matrices.reserve(stories.size());
  for (const auto& s : stories) matrices.push_back(embed_story(s, table));
  const auto s = shortest_length(matrices);
  std::vector<Eigen::MatrixXd> reduced;
  reduced.reserve(matrices.size());
  for (const auto& m : matrices) reduced.push_back(pca_reduce(m.rows, s, center));
  auto flat = assemble_flat(reduced);
  for (std::size_t i = 0; i < matrices.size(); ++i) flat.empty[i] = matrices[i].rows.rows() == 0;
  return flat;
}

void write_flat(std::ostream& out, const Eigen::MatrixXd& matrix) {
  out.write("FLAT", 4);
  binio::put_le<std::uint32_t>(out, 1);
  binio::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(matrix.rows()));
  binio::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(matrix.cols()));
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) binio::put_le<double>(out, matrix(i, j));
  }
  if (!out) throw IoError("failed writing FLAT file");
}

Eigen::MatrixXd read_flat(std::istream& in) {
  binio::expect_magic(in, "FLAT");
  const auto version = binio::get_le<std::uint32_t>(in, "FLAT version");
  if (version != 1) throw FormatError("unsupported FLAT version " + std::to_string(version));
  const auto n = binio::get_le<std::uint64_t>(in, "FLAT rows");
  const auto width = binio::get_le<std::uint64_t>(in, "FLAT width");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(width));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = binio::get_le<double>(in, "FLAT data");
  }
  return m;
}

}  // namespace storytopics
