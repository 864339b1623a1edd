#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "storytopics/textprep.hpp"

namespace storytopics {

enum class EmbeddingSource { self_trained, pretrained };

/// Which spelling of a lowercase corpus token matched a table entry.
enum class MatchForm { exact, capitalized, lowercase };

/// Token -> d-dimensional float vector. Rows are stored as read, in float,
/// so pretrained values stay bit-exact.
class EmbeddingTable {
 public:
  using Matrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  EmbeddingTable() = default;
  EmbeddingTable(std::vector<std::string> tokens, Matrix vectors, EmbeddingSource source);

  Eigen::Index dim() const noexcept { return vectors_.cols(); }
  std::size_t size() const noexcept { return tokens_.size(); }
  EmbeddingSource source() const noexcept { return source_; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const Matrix& vectors() const noexcept { return vectors_; }
  auto row(Eigen::Index i) const { return vectors_.row(i); }

  std::optional<Eigen::Index> find(std::string_view token) const;

  struct Match {
    Eigen::Index index;
    MatchForm form;
  };
  /// Exact spelling first, then Capitalized, then lowercase.
  std::optional<Match> find_variant(std::string_view token) const;

  /// Copy with every nonzero row scaled to unit L2 norm.
  EmbeddingTable normalized() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, Eigen::Index> index_;
  Matrix vectors_;
  EmbeddingSource source_ = EmbeddingSource::self_trained;
};

struct SkipgramConfig {
  int dim = 50;
  int window = 5;
  int min_count = 5;
  int negatives = 5;
  int epochs = 15;
  double learning_rate = 0.025;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Skip-gram with negative sampling, single worker, linearly decaying
/// learning rate. Vocabulary is {t : occurrences(t) >= min_count}.
EmbeddingTable train_skipgram(std::span<const TokenizedStory> stories, const SkipgramConfig& cfg);

enum class NonUtf8Policy { replace, skip, fail };

struct Word2VecLoadOptions {
  NonUtf8Policy non_utf8 = NonUtf8Policy::replace;
  /// When set, only records whose token matches one of these spellings are
  /// kept. Lets the multi-gigabyte Google News file load in small memory.
  const std::unordered_set<std::string>* keep = nullptr;
};

/// word2vec binary: "<count> <dim>\n", then per record the token bytes, a
/// space, dim little-endian float32 values, and an optional '\n'.
EmbeddingTable read_word2vec_binary(std::istream& in, const Word2VecLoadOptions& options = {});
EmbeddingTable load_word2vec_binary(const std::filesystem::path& path,
                                    const Word2VecLoadOptions& options = {});
void write_word2vec_binary(std::ostream& out, const EmbeddingTable& table);
void save_word2vec_binary(const std::filesystem::path& path, const EmbeddingTable& table);

/// Spellings of `vocab` tokens that find_variant may look up.
std::unordered_set<std::string> lookup_spellings(const Vocabulary& vocab);

struct CoverageReport {
  double token_coverage = 0.0;
  double affected_story_fraction = 0.0;
  std::size_t embeddable_tokens = 0;
  std::size_t vocabulary_size = 0;
  std::vector<std::size_t> dropped_per_story;
  std::size_t exact_matches = 0;
  std::size_t capitalized_matches = 0;
  std::size_t lowercase_matches = 0;
};

CoverageReport coverage_report(std::span<const TokenizedStory> stories, const Vocabulary& vocab,
                               const EmbeddingTable& table);

}  // namespace storytopics
