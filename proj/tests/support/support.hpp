#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "storytopics/corpus.hpp"
#include "storytopics/embed.hpp"
#include "storytopics/textprep.hpp"

namespace support {

/// Domain-specific word pools; stories of one domain draw only from its pool.
const std::vector<std::vector<std::string>>& domain_words();

/// CSV with header id,role,feature,benefit,domain,tags and `per_domain` stories per domain.
std::string synthetic_csv(std::size_t per_domain, std::uint64_t seed);
storytopics::Corpus synthetic_corpus(std::size_t per_domain, std::uint64_t seed);

std::vector<storytopics::TokenizedStory> stories(const std::vector<std::vector<std::string>>& docs);

/// Documents of 0..max_len tokens over "w0".."w{vocab-1}".
std::vector<std::vector<std::string>> random_docs(std::mt19937_64& rng, std::size_t count, std::size_t vocab,
                                                  std::size_t max_len);

/// Gaussian vectors for the given tokens.
storytopics::EmbeddingTable random_table(const std::vector<std::string>& tokens, int dim, std::uint64_t seed);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace support
