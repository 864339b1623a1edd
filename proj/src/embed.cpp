#include "storytopics/embed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "storytopics/errors.hpp"
#include "storytopics/random.hpp"

namespace storytopics {

namespace {

std::string capitalize(std::string_view token) {
  std::string out(token);
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') out[0] = static_cast<char>(out[0] - 'a' + 'A');
  return out;
}

std::string lowercase(std::string_view token) {
  std::string out(token);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::vector<std::string> tokens, Matrix vectors, EmbeddingSource source)
    : tokens_(std::move(tokens)), vectors_(std::move(vectors)), source_(source) {
  if (static_cast<Eigen::Index>(tokens_.size()) != vectors_.rows()) {
    throw ShapeMismatch("token count does not match vector rows");
  }
  if (!vectors_.allFinite()) throw FormatError("embedding contains non-finite values");
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    index_.emplace(tokens_[i], static_cast<Eigen::Index>(i));  // first occurrence wins
  }
}

std::optional<Eigen::Index> EmbeddingTable::find(std::string_view token) const {
  if (auto it = index_.find(std::string(token)); it != index_.end()) return it->second;
  return std::nullopt;
}

std::optional<EmbeddingTable::Match> EmbeddingTable::find_variant(std::string_view token) const {
  if (auto i = find(token)) return Match{*i, MatchForm::exact};
  if (auto i = find(capitalize(token))) return Match{*i, MatchForm::capitalized};
  if (auto i = find(lowercase(token))) return Match{*i, MatchForm::lowercase};
  return std::nullopt;
}

EmbeddingTable EmbeddingTable::normalized() const {
  Matrix m = vectors_;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const float norm = m.row(i).norm();
    if (norm > 0.0f) m.row(i) /= norm;
  }
  return EmbeddingTable(tokens_, std::move(m), source_);
}

void SkipgramConfig::validate() const {
  if (dim < 1 || window < 1 || min_count < 1 || negatives < 1 || epochs < 1 || !(learning_rate > 0.0)) {
    throw ConfigError("skip-gram settings must all be positive");
  }
}

EmbeddingTable train_skipgram(std::span<const TokenizedStory> stories, const SkipgramConfig& cfg) {
  cfg.validate();
  std::map<std::string, std::size_t> counts;
  for (const auto& s : stories) {
    for (const auto& t : s.tokens) ++counts[t];
  }
  if (counts.empty()) throw EmptyCorpus("no tokens to train on");

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [token, count] : counts) {
    if (count >= static_cast<std::size_t>(cfg.min_count)) kept.emplace_back(token, count);
  }
  if (kept.empty()) {
    throw NoTokenMeetsMinCount("no token occurs at least " + std::to_string(cfg.min_count) + " times");
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  std::unordered_map<std::string, int> id;
  std::vector<std::string> tokens;
  for (const auto& [token, count] : kept) {
    id.emplace(token, static_cast<int>(tokens.size()));
    tokens.push_back(token);
  }

  std::vector<std::vector<int>> sentences;
  std::size_t total_words = 0;
  for (const auto& s : stories) {
    std::vector<int> sentence;
    for (const auto& t : s.tokens) {
      if (auto it = id.find(t); it != id.end()) sentence.push_back(it->second);
    }
    total_words += sentence.size();
    if (sentence.size() > 1) sentences.push_back(std::move(sentence));
  }

  // Negative-sampling distribution: unigram counts raised to 3/4.
  std::vector<double> cumulative(kept.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    acc += std::pow(static_cast<double>(kept[i].second), 0.75);
    cumulative[i] = acc;
  }

  const auto vocab_size = static_cast<Eigen::Index>(tokens.size());
  const Eigen::Index dim = cfg.dim;
  Rng rng(cfg.seed);
  EmbeddingTable::Matrix input(vocab_size, dim);
  for (Eigen::Index i = 0; i < vocab_size; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      input(i, j) = static_cast<float>((rng.uniform() - 0.5) / static_cast<double>(dim));
    }
  }
  EmbeddingTable::Matrix output = EmbeddingTable::Matrix::Zero(vocab_size, dim);

  auto sample_negative = [&] {
    const double u = rng.uniform() * acc;
    return static_cast<int>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
  };

  const double schedule_length = static_cast<double>(cfg.epochs) * static_cast<double>(total_words) + 1.0;
  double processed = 0.0;
  Eigen::VectorXf gradient(dim);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& sentence : sentences) {
      const auto len = static_cast<int>(sentence.size());
      for (int pos = 0; pos < len; ++pos) {
        const float lr = static_cast<float>(cfg.learning_rate * std::max(1e-4, 1.0 - processed / schedule_length));
        processed += 1.0;
        const int center = sentence[static_cast<std::size_t>(pos)];
        for (int c = std::max(0, pos - cfg.window); c <= std::min(len - 1, pos + cfg.window); ++c) {
          if (c == pos) continue;
          const int context = sentence[static_cast<std::size_t>(c)];
          gradient.setZero();
          for (int n = 0; n <= cfg.negatives; ++n) {
            int target = center;
            float label = 1.0f;
            if (n > 0) {
              target = sample_negative();
              if (target == center) continue;
              label = 0.0f;
            }
            const float f = input.row(context).dot(output.row(target));
            float g;
            if (f > 6.0f) {
              g = (label - 1.0f) * lr;
            } else if (f < -6.0f) {
              g = label * lr;
            } else {
              g = (label - 1.0f / (1.0f + std::exp(-f))) * lr;
            }
            gradient += g * output.row(target).transpose();
            output.row(target) += g * input.row(context);
          }
          input.row(context) += gradient.transpose();
        }
      }
    }
  }
  return EmbeddingTable(std::move(tokens), std::move(input), EmbeddingSource::self_trained);
}

namespace {

/// Returns the valid-UTF-8 form of `s` (invalid bytes -> U+FFFD) and whether
/// any replacement happened.
std::pair<std::string, bool> sanitize_utf8(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool replaced = false;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t min_cp = 0;
    if (c < 0x80) {
      len = 1;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      min_cp = 0x80;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      min_cp = 0x800;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      min_cp = 0x10000;
    }
    bool ok = len > 0 && i + len <= s.size();
    std::uint32_t cp = len == 1 ? c : (len == 2 ? c & 0x1F : (len == 3 ? c & 0x0F : c & 0x07));
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (ok && len > 1 && (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) ok = false;
    if (ok) {
      out.append(s.substr(i, len));
      i += len;
    } else {
      out.append("\xEF\xBF\xBD");
      replaced = true;
      ++i;
    }
  }
  return {std::move(out), replaced};
}

float float_from_le(const unsigned char* p) {
  std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                       (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

void float_to_le(float v, unsigned char* p) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int k = 0; k < 4; ++k) p[k] = static_cast<unsigned char>((bits >> (8 * k)) & 0xFF);
}

bool parse_count(std::string_view text, std::size_t& value) {
  if (text.empty()) return false;
  value = 0;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
    value = value * 10 + static_cast<std::size_t>(c - '0');
  }
  return true;
}

}  // namespace

EmbeddingTable read_word2vec_binary(std::istream& in, const Word2VecLoadOptions& options) {
  std::string header;
  if (!std::getline(in, header)) throw MalformedHeader("missing header line");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  const auto space = header.find(' ');
  std::size_t count = 0;
  std::size_t dim = 0;
  if (space == std::string::npos || !parse_count(std::string_view(header).substr(0, space), count) ||
      !parse_count(std::string_view(header).substr(space + 1), dim) || dim == 0) {
    throw MalformedHeader("expected '<vocab_count> <dim>', got '" + header + "'");
  }

  std::vector<std::string> tokens;
  std::vector<float> values;
  const bool filtering = options.keep != nullptr;
  if (!filtering) {
    tokens.reserve(count);
    values.reserve(count * dim);
  }
  std::vector<unsigned char> buffer(dim * sizeof(float));
  std::string token;
  for (std::size_t r = 0; r < count; ++r) {
    token.clear();
    if (in.peek() == '\n') in.get();
    for (int c = in.get(); c != ' '; c = in.get()) {
      if (c == std::char_traits<char>::eof()) {
        throw TruncatedFile("record " + std::to_string(r) + " of " + std::to_string(count) + " is incomplete");
      }
      token.push_back(static_cast<char>(c));
    }
    if (!in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()))) {
      throw TruncatedFile("vector of record " + std::to_string(r) + " is incomplete");
    }
    auto [clean, replaced] = sanitize_utf8(token);
    if (replaced) {
      if (options.non_utf8 == NonUtf8Policy::fail) {
        throw NonUtf8Token("record " + std::to_string(r) + " has an invalid UTF-8 token");
      }
      if (options.non_utf8 == NonUtf8Policy::skip) continue;
    }
    if (filtering && !options.keep->contains(clean)) continue;
    tokens.push_back(std::move(clean));
    for (std::size_t j = 0; j < dim; ++j) values.push_back(float_from_le(buffer.data() + 4 * j));
  }
  if (in.peek() == '\n') in.get();

  EmbeddingTable::Matrix m(static_cast<Eigen::Index>(tokens.size()), static_cast<Eigen::Index>(dim));
  if (!values.empty()) std::memcpy(m.data(), values.data(), values.size() * sizeof(float));
  return EmbeddingTable(std::move(tokens), std::move(m), EmbeddingSource::pretrained);
}

EmbeddingTable load_word2vec_binary(const std::filesystem::path& path, const Word2VecLoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_word2vec_binary(in, options);
}

void write_word2vec_binary(std::ostream& out, const EmbeddingTable& table) {
  out << table.size() << ' ' << table.dim() << '\n';
  std::vector<unsigned char> buffer(static_cast<std::size_t>(table.dim()) * sizeof(float));
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.tokens()[i] << ' ';
    const auto row = table.row(static_cast<Eigen::Index>(i));
    for (Eigen::Index j = 0; j < table.dim(); ++j) float_to_le(row(j), buffer.data() + 4 * j);
    out.write(reinterpret_cast<const char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
    out << '\n';
  }
}

void save_word2vec_binary(const std::filesystem::path& path, const EmbeddingTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_word2vec_binary(out, table);
  if (!out) throw IoError("write failed for " + path.string());
}

std::unordered_set<std::string> lookup_spellings(const Vocabulary& vocab) {
  std::unordered_set<std::string> spellings;
  for (const auto& t : vocab.tokens()) {
    spellings.insert(t);
    spellings.insert(capitalize(t));
    spellings.insert(lowercase(t));
  }
  return spellings;
}

CoverageReport coverage_report(std::span<const TokenizedStory> stories, const Vocabulary& vocab,
                               const EmbeddingTable& table) {
  CoverageReport report;
  report.vocabulary_size = vocab.size();
  for (const auto& t : vocab.tokens()) {
    const auto match = table.find_variant(t);
    if (!match) continue;
    ++report.embeddable_tokens;
    switch (match->form) {
      case MatchForm::exact: ++report.exact_matches; break;
      case MatchForm::capitalized: ++report.capitalized_matches; break;
      case MatchForm::lowercase: ++report.lowercase_matches; break;
    }
  }
  report.token_coverage = vocab.size() == 0
                              ? 1.0
                              : static_cast<double>(report.embeddable_tokens) / static_cast<double>(vocab.size());
  std::size_t affected = 0;
  report.dropped_per_story.reserve(stories.size());
  for (const auto& s : stories) {
    std::size_t dropped = 0;
    for (const auto& t : s.tokens) {
      if (!table.find_variant(t)) ++dropped;
    }
    report.dropped_per_story.push_back(dropped);
    if (dropped > 0) ++affected;
  }
  report.affected_story_fraction =
      stories.empty() ? 0.0 : static_cast<double>(affected) / static_cast<double>(stories.size());
  return report;
}

}  // namespace storytopics
