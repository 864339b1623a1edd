#include "storytopics/textprep.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "storytopics/errors.hpp"

#ifndef STORYTOPICS_DATA_DIR
#define STORYTOPICS_DATA_DIR "data"
#endif

namespace storytopics {

namespace {

bool is_ascii_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

Vocabulary Vocabulary::build(std::span<const TokenizedStory> stories) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> stats;  // doc, corpus
  for (const auto& story : stories) {
    std::vector<std::string_view> seen(story.tokens.begin(), story.tokens.end());
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 0; i < seen.size(); ++i) {
      auto& entry = stats[std::string(seen[i])];
      ++entry.second;
      if (i == 0 || seen[i] != seen[i - 1]) ++entry.first;
    }
  }
  Vocabulary vocab;
  vocab.documents_ = stories.size();
  vocab.tokens_.reserve(stats.size());
  for (auto& [token, freq] : stats) {
    vocab.index_.emplace(token, vocab.tokens_.size());
    vocab.tokens_.push_back(token);
    vocab.doc_freq_.push_back(freq.first);
    vocab.corpus_freq_.push_back(freq.second);
  }
  return vocab;
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view token) const {
  if (auto it = index_.find(std::string(token)); it != index_.end()) return it->second;
  return std::nullopt;
}

std::string clean_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (is_ascii_letter(c)) {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(c | 0x20));
    } else if (is_space(c)) {
      pending_space = !out.empty();
    }
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view cleaned) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < cleaned.size()) {
    while (i < cleaned.size() && is_space(cleaned[i])) ++i;
    const auto start = i;
    while (i < cleaned.size() && !is_space(cleaned[i])) ++i;
    if (i > start) tokens.emplace_back(cleaned.substr(start, i - start));
  }
  return tokens;
}

std::vector<std::string> remove_stopwords(std::span<const std::string> tokens,
                                          const TokenSet& stopwords,
                                          const TokenSet& template_words) {
  std::vector<std::string> kept;
  kept.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!stopwords.contains(t) && !template_words.contains(t)) kept.push_back(t);
  }
  return kept;
}

const TokenSet& default_template_words() {
  static const TokenSet words{"as", "smart", "home", "owner", "i", "want", "be", "able"};
  return words;
}

TokenSet load_token_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open token list " + path.string());
  TokenSet tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto first = std::find_if_not(line.begin(), line.end(), is_space);
    auto last = std::find_if_not(line.rbegin(), line.rend(), is_space).base();
    if (first < last) tokens.emplace(first, last);
  }
  return tokens;
}

std::filesystem::path default_stopword_path() {
  return std::filesystem::path(STORYTOPICS_DATA_DIR) / "stopwords_en.txt";
}

PreprocessResult preprocess_corpus(const Corpus& corpus, const TokenSet& stopwords,
                                   const TokenSet& template_words) {
  std::vector<TokenizedStory> raw;
  raw.reserve(corpus.size());
  for (const auto& story : corpus) {
    raw.push_back({story.id, tokenize(clean_text(story.full_text))});
  }
  PreprocessResult result;
  result.before_removal = Vocabulary::build(raw);
  result.stories.reserve(raw.size());
  for (const auto& story : raw) {
    result.stories.push_back({story.story_id, remove_stopwords(story.tokens, stopwords, template_words)});
  }
  result.after_removal = Vocabulary::build(result.stories);
  return result;
}

}  // namespace storytopics
