#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "storytopics/corpus.hpp"
#include "storytopics/embed.hpp"
#include "storytopics/evalcluster.hpp"
#include "storytopics/lda.hpp"
#include "storytopics/project.hpp"

namespace storytopics {

enum class Approach { a1, a2, a3 };

std::string_view to_string(Approach approach);
Approach parse_approach(std::string_view text);

struct EmbeddingConfig {
  EmbeddingSource source = EmbeddingSource::self_trained;
  /// word2vec binary for the pretrained source.
  std::filesystem::path path;
  /// L2-normalize vectors before use.
  bool normalize = false;
  NonUtf8Policy non_utf8 = NonUtf8Policy::replace;
};

struct RunConfig {
  std::filesystem::path dataset;
  ColumnMapping columns;
  std::filesystem::path stopwords = default_stopword_path();
  /// Empty means the built-in template word list.
  std::filesystem::path template_words;
  Approach approach = Approach::a3;
  EmbeddingConfig embedding;
  LdaConfig lda;
  SkipgramConfig skipgram;
  TsneConfig tsne;
  bool pca_center = true;
  int kmeans_k = 5;
  int kmeans_restarts = 10;
  int mds_components = 10;
  std::size_t neighbor_top_k = 10;
  std::uint64_t seed = 1;
  std::filesystem::path out = "out";
  int pairs_parallelism = 1;

  /// Sets every module seed from `seed`.
  void apply_seed(std::uint64_t value);
  /// Checks referenced files exist and module settings are valid.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64-bit, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);
std::string file_digest(const std::filesystem::path& path);
/// Hash of the canonical (sorted-key) JSON dump.
std::string json_hash(const nlohmann::json& j);

struct RunResult {
  std::filesystem::path projection_csv;
  std::filesystem::path kl_trace_csv;
  std::filesystem::path plot_svg;
  std::filesystem::path report_json;
  std::filesystem::path manifest_json;
  /// Cache file of the approach's final representation (LDA model, FLAT or WMDM).
  std::filesystem::path representation_cache;
  nlohmann::json report;
  nlohmann::json manifest;
  /// Stage names whose cached artifact was reused.
  std::vector<std::string> cache_hits;
};

using LogFn = std::function<void(std::string_view)>;

/// Runs the selected approach end to end into cfg.out. Takes an exclusive
/// lock on the output directory; on failure removes the outputs this run
/// wrote (cache entries are complete files and are kept).
RunResult run_pipeline(const RunConfig& cfg, const LogFn& log = {});

/// Writes `content` to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Exclusive ownership of an output directory via a lock file.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace storytopics
