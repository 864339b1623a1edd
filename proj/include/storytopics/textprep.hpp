#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "storytopics/corpus.hpp"

namespace storytopics {

using TokenSet = std::set<std::string, std::less<>>;

struct TokenizedStory {
  std::int64_t story_id = 0;
  /// Lowercase [a-z]+ tokens in sentence order; may be empty.
  std::vector<std::string> tokens;
};

/// Dense token index with per-token document and corpus frequencies.
/// Tokens are indexed in lexicographic order, so the index is independent of
/// story order.
class Vocabulary {
 public:
  Vocabulary() = default;
  static Vocabulary build(std::span<const TokenizedStory> stories);

  std::size_t size() const noexcept { return tokens_.size(); }
  std::optional<std::size_t> index_of(std::string_view token) const;
  const std::string& token(std::size_t index) const { return tokens_[index]; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::size_t doc_freq(std::size_t index) const { return doc_freq_[index]; }
  std::size_t corpus_freq(std::size_t index) const { return corpus_freq_[index]; }
  /// Number of stories the statistics were computed over.
  std::size_t document_count() const noexcept { return documents_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::size_t> doc_freq_;
  std::vector<std::size_t> corpus_freq_;
  std::size_t documents_ = 0;
};

/// Lowercases ASCII letters, deletes every other non-whitespace character and
/// collapses whitespace runs to one space with no leading/trailing space.
std::string clean_text(std::string_view raw);

std::vector<std::string> tokenize(std::string_view cleaned);

std::vector<std::string> remove_stopwords(std::span<const std::string> tokens,
                                          const TokenSet& stopwords,
                                          const TokenSet& template_words);

/// The eight boilerplate words of the CrowdRE user-story template.
const TokenSet& default_template_words();

/// One token per line, '#' starts a comment, blank lines ignored.
TokenSet load_token_list(const std::filesystem::path& path);

/// Location of the bundled English stopword list.
std::filesystem::path default_stopword_path();

struct PreprocessResult {
  std::vector<TokenizedStory> stories;
  Vocabulary before_removal;
  Vocabulary after_removal;
};

PreprocessResult preprocess_corpus(const Corpus& corpus, const TokenSet& stopwords,
                                   const TokenSet& template_words);

}  // namespace storytopics
