#include "storytopics/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "storytopics/docgeom.hpp"
#include "storytopics/errors.hpp"
#include "storytopics/plot.hpp"
#include "storytopics/textprep.hpp"
#include "storytopics/vectorize.hpp"
#include "storytopics/version.hpp"
#include "storytopics/wmd.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace storytopics {

std::string_view to_string(Approach approach) {
  switch (approach) {
    case Approach::a1: return "a1";
    case Approach::a2: return "a2";
    case Approach::a3: return "a3";
  }
  return "a3";
}

Approach parse_approach(std::string_view text) {
  if (text == "a1") return Approach::a1;
  if (text == "a2") return Approach::a2;
  if (text == "a3") return Approach::a3;
  throw ConfigError("unknown approach '" + std::string(text) + "' (expected a1, a2 or a3)");
}

void RunConfig::apply_seed(std::uint64_t value) {
  seed = value;
  lda.seed = value;
  skipgram.seed = value;
  tsne.seed = value;
}

void RunConfig::validate() const {
  auto require_file = [](const fs::path& p, std::string_view what) {
    if (p.empty()) throw ConfigError(std::string(what) + " path is not set");
    if (!fs::is_regular_file(p)) throw ConfigError(fmt::format("{} '{}' does not exist", what, p.string()));
  };
  require_file(dataset, "dataset");
  require_file(stopwords, "stopword list");
  if (!template_words.empty()) require_file(template_words, "template word list");
  if (approach != Approach::a1 && embedding.source == EmbeddingSource::pretrained) {
    require_file(embedding.path, "pretrained embedding");
  }
  lda.validate();
  skipgram.validate();
  if (kmeans_k < 1) throw ConfigError("kmeans.k must be >= 1");
  if (kmeans_restarts < 1) throw ConfigError("kmeans.restarts must be >= 1");
  if (mds_components < 1) throw ConfigError("kmeans.mds_components must be >= 1");
  if (pairs_parallelism < 1) throw ConfigError("pairs_parallelism must be >= 1");
  if (out.empty()) throw ConfigError("output directory is not set");
}

namespace {

std::string_view to_string(EmbeddingSource s) {
  return s == EmbeddingSource::self_trained ? "self_trained" : "pretrained";
}

std::string_view to_string(NonUtf8Policy p) {
  switch (p) {
    case NonUtf8Policy::replace: return "replace";
    case NonUtf8Policy::skip: return "skip";
    case NonUtf8Policy::fail: return "fail";
  }
  return "replace";
}

json lda_json(const LdaConfig& c) {
  json j = {{"k", c.k},
            {"beta", c.beta},
            {"iterations", c.iterations},
            {"seed", c.seed},
            {"mode", c.mode == LdaInput::counts ? "counts" : "tfidf_weighted"},
            {"tfidf_scale", c.tfidf_scale}};
  j["alpha"] = c.alpha ? json(*c.alpha) : json(nullptr);
  return j;
}

json skipgram_json(const SkipgramConfig& c) {
  return {{"dim", c.dim},           {"window", c.window}, {"min_count", c.min_count},
          {"negatives", c.negatives}, {"epochs", c.epochs}, {"learning_rate", c.learning_rate},
          {"seed", c.seed}};
}

json tsne_json(const TsneConfig& c) {
  return {{"perplexity", c.perplexity},
          {"learning_rate", c.learning_rate},
          {"iterations", c.iterations},
          {"early_exaggeration", c.early_exaggeration},
          {"exaggeration_iterations", c.exaggeration_iterations},
          {"seed", c.seed},
          {"enforce_neighbor_bound", c.enforce_neighbor_bound}};
}

template <typename T>
void read_opt(const json& j, const char* key, T& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

}  // namespace

json to_json(const RunConfig& cfg) {
  json j;
  j["dataset"] = cfg.dataset.string();
  j["columns"] = {{"id", cfg.columns.id},           {"role", cfg.columns.role},
                  {"feature", cfg.columns.feature}, {"benefit", cfg.columns.benefit},
                  {"domain", cfg.columns.domain},   {"tags", cfg.columns.tags}};
  j["stopwords"] = cfg.stopwords.string();
  j["template_words"] = cfg.template_words.string();
  j["approach"] = to_string(cfg.approach);
  j["embedding"] = {{"source", to_string(cfg.embedding.source)},
                    {"path", cfg.embedding.path.string()},
                    {"normalize", cfg.embedding.normalize},
                    {"non_utf8", to_string(cfg.embedding.non_utf8)}};
  j["lda"] = lda_json(cfg.lda);
  j["skipgram"] = skipgram_json(cfg.skipgram);
  j["tsne"] = tsne_json(cfg.tsne);
  j["pca"] = {{"center", cfg.pca_center}};
  j["kmeans"] = {{"k", cfg.kmeans_k}, {"restarts", cfg.kmeans_restarts}, {"mds_components", cfg.mds_components}};
  j["neighbor_top_k"] = cfg.neighbor_top_k;
  j["seed"] = cfg.seed;
  j["out"] = cfg.out.string();
  j["pairs_parallelism"] = cfg.pairs_parallelism;
  return j;
}

RunConfig config_from_json(const json& j) {
  try {
    RunConfig cfg;
    if (j.contains("dataset")) cfg.dataset = j.at("dataset").get<std::string>();
    if (j.contains("columns")) {
      const auto& c = j.at("columns");
      read_opt(c, "id", cfg.columns.id);
      read_opt(c, "role", cfg.columns.role);
      read_opt(c, "feature", cfg.columns.feature);
      read_opt(c, "benefit", cfg.columns.benefit);
      read_opt(c, "domain", cfg.columns.domain);
      read_opt(c, "tags", cfg.columns.tags);
    }
    if (j.contains("stopwords")) cfg.stopwords = j.at("stopwords").get<std::string>();
    if (j.contains("template_words")) cfg.template_words = j.at("template_words").get<std::string>();
    if (j.contains("approach")) cfg.approach = parse_approach(j.at("approach").get<std::string>());
    if (j.contains("embedding")) {
      const auto& e = j.at("embedding");
      if (e.contains("source")) {
        const auto s = e.at("source").get<std::string>();
        if (s == "self_trained") {
          cfg.embedding.source = EmbeddingSource::self_trained;
        } else if (s == "pretrained") {
          cfg.embedding.source = EmbeddingSource::pretrained;
        } else {
          throw ConfigError("embedding.source must be self_trained or pretrained");
        }
      }
      if (e.contains("path")) cfg.embedding.path = e.at("path").get<std::string>();
      read_opt(e, "normalize", cfg.embedding.normalize);
      if (e.contains("non_utf8")) {
        const auto p = e.at("non_utf8").get<std::string>();
        if (p == "replace") {
          cfg.embedding.non_utf8 = NonUtf8Policy::replace;
        } else if (p == "skip") {
          cfg.embedding.non_utf8 = NonUtf8Policy::skip;
        } else if (p == "fail") {
          cfg.embedding.non_utf8 = NonUtf8Policy::fail;
        } else {
          throw ConfigError("embedding.non_utf8 must be replace, skip or fail");
        }
      }
    }
    if (j.contains("lda")) {
      const auto& l = j.at("lda");
      read_opt(l, "k", cfg.lda.k);
      if (l.contains("alpha") && !l.at("alpha").is_null()) cfg.lda.alpha = l.at("alpha").get<double>();
      read_opt(l, "beta", cfg.lda.beta);
      read_opt(l, "iterations", cfg.lda.iterations);
      read_opt(l, "seed", cfg.lda.seed);
      read_opt(l, "tfidf_scale", cfg.lda.tfidf_scale);
      if (l.contains("mode")) {
        const auto m = l.at("mode").get<std::string>();
        if (m == "counts") {
          cfg.lda.mode = LdaInput::counts;
        } else if (m == "tfidf_weighted") {
          cfg.lda.mode = LdaInput::tfidf_weighted;
        } else {
          throw ConfigError("lda.mode must be counts or tfidf_weighted");
        }
      }
    }
    if (j.contains("skipgram")) {
      const auto& s = j.at("skipgram");
      read_opt(s, "dim", cfg.skipgram.dim);
      read_opt(s, "window", cfg.skipgram.window);
      read_opt(s, "min_count", cfg.skipgram.min_count);
      read_opt(s, "negatives", cfg.skipgram.negatives);
      read_opt(s, "epochs", cfg.skipgram.epochs);
      read_opt(s, "learning_rate", cfg.skipgram.learning_rate);
      read_opt(s, "seed", cfg.skipgram.seed);
    }
    if (j.contains("tsne")) {
      const auto& t = j.at("tsne");
      read_opt(t, "perplexity", cfg.tsne.perplexity);
      read_opt(t, "learning_rate", cfg.tsne.learning_rate);
      read_opt(t, "iterations", cfg.tsne.iterations);
      read_opt(t, "early_exaggeration", cfg.tsne.early_exaggeration);
      read_opt(t, "exaggeration_iterations", cfg.tsne.exaggeration_iterations);
      read_opt(t, "seed", cfg.tsne.seed);
      read_opt(t, "enforce_neighbor_bound", cfg.tsne.enforce_neighbor_bound);
    }
    if (j.contains("pca")) read_opt(j.at("pca"), "center", cfg.pca_center);
    if (j.contains("kmeans")) {
      const auto& k = j.at("kmeans");
      read_opt(k, "k", cfg.kmeans_k);
      read_opt(k, "restarts", cfg.kmeans_restarts);
      read_opt(k, "mds_components", cfg.mds_components);
    }
    read_opt(j, "neighbor_top_k", cfg.neighbor_top_k);
    read_opt(j, "seed", cfg.seed);
    if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
    read_opt(j, "pairs_parallelism", cfg.pairs_parallelism);
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config {}: {}", path.string(), e.what()));
  }
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buffer[1 << 16];
  while (in.read(buffer, sizeof buffer) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buffer[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return fmt::format("{:016x}", h);
}

std::string json_hash(const json& j) { return fnv1a_hex(j.dump()); }

void write_file_atomic(const fs::path& path, std::string_view content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError(fmt::format("cannot move {} into place: {}", path.string(), ec.message()));
}

OutputLock::OutputLock(const fs::path& dir) : path_(dir / ".lock") {
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (!f) {
    throw ConfigError(fmt::format("output directory {} is locked by another run (remove {} if stale)",
                                  dir.string(), path_.string()));
  }
  std::fclose(f);
}

OutputLock::~OutputLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

namespace {

using Clock = std::chrono::steady_clock;

class Runner {
 public:
  Runner(const RunConfig& cfg, const LogFn& log) : cfg_(cfg), log_(log) {}

  RunResult run();
  void remove_partial_outputs();

 private:
  template <typename F>
  auto stage(const std::string& name, F&& body) {
    info(fmt::format("[{}] start", name));
    const auto start = Clock::now();
    try {
      if constexpr (std::is_void_v<decltype(body())>) {
        body();
        timings_[name] = seconds_since(start);
      } else {
        auto value = body();
        timings_[name] = seconds_since(start);
        return value;
      }
    } catch (Error& e) {
      e.add_context(fmt::format("stage '{}'", name));
      throw;
    }
  }

  static double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
  }

  void info(std::string_view msg) const {
    if (log_) log_(msg);
  }

  fs::path cache_file(std::string_view stage, const json& key, std::string_view ext) const {
    return cfg_.out / "cache" / fmt::format("{}-{}.{}", stage, json_hash(key), ext);
  }

  void write_output(const fs::path& path, std::string_view content) {
    written_.push_back(path);
    write_file_atomic(path, content);
  }

  void write_cache(const fs::path& path, std::string_view content) { write_file_atomic(path, content); }

  EmbeddingTable embedding(const PreprocessResult& prep, const json& emb_key);
  Projection2D project(const Eigen::MatrixXd& input, TsneInput kind, const json& rep_key,
                       std::span<const DomainLabel> labels, std::span<const std::int64_t> ids);
  json evaluate(const Eigen::MatrixXd& high_dim, std::string_view representation, const Projection2D& proj,
                std::span<const DomainLabel> labels);

  const RunConfig& cfg_;
  const LogFn& log_;
  std::map<std::string, double> timings_;
  std::vector<fs::path> written_;
  std::vector<std::string> cache_hits_;
  json seeds_ = json::object();
  json coverage_ = json::object();
  json drops_ = json::object();
  fs::path representation_cache_;
};

EmbeddingTable Runner::embedding(const PreprocessResult& prep, const json& emb_key) {
  EmbeddingTable table;
  if (cfg_.embedding.source == EmbeddingSource::self_trained) {
    const auto path = cache_file("embedding", emb_key, "bin");
    seeds_["skipgram"] = cfg_.skipgram.seed;
    if (fs::exists(path)) {
      cache_hits_.push_back("embedding");
      table = stage("embed", [&] {
        auto t = load_word2vec_binary(path);
        return EmbeddingTable(t.tokens(), t.vectors(), EmbeddingSource::self_trained);
      });
    } else {
      table = stage("embed", [&] { return train_skipgram(prep.stories, cfg_.skipgram); });
      std::ostringstream buf;
      write_word2vec_binary(buf, table);
      write_cache(path, buf.str());
    }
  } else {
    table = stage("embed", [&] {
      const auto spellings = lookup_spellings(prep.after_removal);
      Word2VecLoadOptions options;
      options.non_utf8 = cfg_.embedding.non_utf8;
      options.keep = &spellings;
      return load_word2vec_binary(cfg_.embedding.path, options);
    });
  }
  if (cfg_.embedding.normalize) table = table.normalized();

  const auto report = coverage_report(prep.stories, prep.after_removal, table);
  std::size_t emptied = 0;
  for (std::size_t i = 0; i < prep.stories.size(); ++i) {
    if (report.dropped_per_story[i] == prep.stories[i].tokens.size()) ++emptied;
  }
  coverage_ = {{"embedding_vocabulary", table.size()},
               {"dim", table.dim()},
               {"token_coverage", report.token_coverage},
               {"embeddable_tokens", report.embeddable_tokens},
               {"vocabulary_size", report.vocabulary_size},
               {"affected_story_fraction", report.affected_story_fraction},
               {"stories_without_embeddable_tokens", emptied},
               {"match_forms",
                {{"exact", report.exact_matches},
                 {"capitalized", report.capitalized_matches},
                 {"lowercase", report.lowercase_matches}}}};
  info(fmt::format("embedding: {} vectors of dim {}, coverage {:.3f}", table.size(), table.dim(),
                   report.token_coverage));
  return table;
}

Projection2D Runner::project(const Eigen::MatrixXd& input, TsneInput kind, const json& rep_key,
                             std::span<const DomainLabel> labels, std::span<const std::int64_t> ids) {
  const json key = {{"representation", rep_key}, {"tsne", tsne_json(cfg_.tsne)}};
  const auto coords_path = cache_file("projection", key, "csv");
  const auto kl_path = cache_file("kl", key, "csv");
  seeds_["tsne"] = cfg_.tsne.seed;
  if (fs::exists(coords_path) && fs::exists(kl_path)) {
    cache_hits_.push_back("projection");
    return stage("tsne", [&] {
      std::ifstream in(coords_path);
      auto p = read_projection_csv(in);
      std::ifstream kin(kl_path);
      for (const auto& rec : read_csv(kin)) {
        if (rec.line == 1) continue;
        p.kl_trace.push_back(std::stod(rec.fields.at(1)));
      }
      return p;
    });
  }
  auto p = stage("tsne", [&] { return tsne(input, kind, cfg_.tsne, labels, ids); });
  std::ostringstream coords;
  write_projection_csv(coords, p);
  std::ostringstream kl;
  write_kl_trace_csv(kl, p);
  write_cache(coords_path, coords.str());
  write_cache(kl_path, kl.str());
  return p;
}

json Runner::evaluate(const Eigen::MatrixXd& high_dim, std::string_view representation, const Projection2D& proj,
                      std::span<const DomainLabel> labels) {
  return stage("evaluate", [&] {
    json seeds = json::array();
    for (int r = 0; r < cfg_.kmeans_restarts; ++r) seeds.push_back(cfg_.seed + static_cast<std::uint64_t>(r));
    seeds_["kmeans"] = seeds;

    auto score = [&](const Eigen::MatrixXd& points) {
      const int k = std::min<int>(cfg_.kmeans_k, static_cast<int>(points.rows()));
      const auto a = kmeans_best_of(points, k, cfg_.seed, cfg_.kmeans_restarts);
      const auto s = agreement(a.cluster_ids, labels);
      json conc = json::object();
      for (auto d : kAllDomains) {
        const auto c = label_concentration(a.cluster_ids, labels, d);
        conc[std::string(to_string(d))] = {
            {"cluster", c.cluster}, {"within_cluster", c.within_cluster}, {"base_rate", c.base_rate}};
      }
      json majority = json::array();
      for (auto d : majority_labels(a.cluster_ids, labels, k)) majority.push_back(to_string(d));
      return json{{"k", k},
                  {"inertia", a.inertia},
                  {"purity", s.purity},
                  {"adjusted_rand_index", s.adjusted_rand_index},
                  {"normalized_mutual_information", s.normalized_mutual_information},
                  {"majority_labels", majority},
                  {"empty_clusters", a.empty_clusters},
                  {"label_concentration", conc}};
    };
    json report;
    report["high_dimensional"] = score(high_dim);
    report["high_dimensional"]["representation"] = representation;
    report["projection_2d"] = score(proj.coords);
    const auto exag = static_cast<std::size_t>(cfg_.tsne.exaggeration_iterations);
    report["kl"] = {{"final", proj.kl_trace.back()},
                    {"at_exaggeration_end", proj.kl_trace.at(std::min(exag, proj.kl_trace.size() - 1))}};
    return report;
  });
}

RunResult Runner::run() {
  RunResult result;
  const auto run_start = Clock::now();
  const auto corpus = stage("ingest", [&] { return load_corpus(cfg_.dataset, cfg_.columns); });
  const auto labels = corpus.labels();
  const auto ids = corpus.ids();
  info(fmt::format("corpus: {} stories", corpus.size()));

  const TokenSet stopwords = load_token_list(cfg_.stopwords);
  const TokenSet templates =
      cfg_.template_words.empty() ? default_template_words() : load_token_list(cfg_.template_words);
  const auto prep = stage("preprocess", [&] { return preprocess_corpus(corpus, stopwords, templates); });
  info(fmt::format("vocabulary: {} tokens before removal, {} after", prep.before_removal.size(),
                   prep.after_removal.size()));

  const json prep_key = {
      {"input", file_digest(cfg_.dataset)},
      {"columns", to_json(cfg_)["columns"]},
      {"stopwords", json(std::vector<std::string>(stopwords.begin(), stopwords.end()))},
      {"template_words", json(std::vector<std::string>(templates.begin(), templates.end()))},
  };

  json emb_key = {{"prep", prep_key},
                  {"source", to_string(cfg_.embedding.source)},
                  {"normalize", cfg_.embedding.normalize}};
  if (cfg_.embedding.source == EmbeddingSource::self_trained) {
    emb_key["skipgram"] = skipgram_json(cfg_.skipgram);
  } else {
    const auto& p = cfg_.embedding.path;
    emb_key["pretrained"] = {{"path", fs::absolute(p).string()},
                             {"size", fs::file_size(p)},
                             {"mtime", fs::last_write_time(p).time_since_epoch().count()},
                             {"non_utf8", to_string(cfg_.embedding.non_utf8)}};
  }

  Projection2D proj;
  json report;
  std::size_t empty_stories = 0;
  const auto title = fmt::format("{} ({})", to_string(cfg_.approach),
                                 cfg_.approach == Approach::a1 ? "LDA" : std::string(to_string(cfg_.embedding.source)));
  switch (cfg_.approach) {
    case Approach::a1: {
      DropReport drop;
      const auto counts = stage("bow", [&] { return bow(prep.stories, prep.after_removal, &drop); });
      const auto weights = stage("tfidf", [&] { return tfidf(counts, prep.after_removal); });
      drops_["bow_dropped_tokens"] = drop.dropped_tokens;
      const json key = {{"prep", prep_key}, {"lda", lda_json(cfg_.lda)}};
      const auto path = cache_file("lda", key, "json");
      seeds_["lda"] = cfg_.lda.seed;
      LdaModel model;
      if (fs::exists(path)) {
        cache_hits_.push_back("lda");
        model = stage("lda", [&] {
          std::ifstream in(path);
          return load_lda(in);
        });
      } else {
        model = stage("lda", [&] { return fit_lda(prep.stories, prep.after_removal, cfg_.lda, &weights); });
        std::ostringstream buf;
        save_lda(buf, model);
        write_cache(path, buf.str());
      }
      representation_cache_ = path;
      for (bool e : model.empty_documents) empty_stories += e ? 1 : 0;
      proj = project(doc_topics(model), TsneInput::features, key, labels, ids);
      report = evaluate(doc_topics(model), "lda_theta", proj, labels);
      break;
    }
    case Approach::a2: {
      const auto table = embedding(prep, emb_key);
      const json key = {{"embedding", emb_key}, {"center", cfg_.pca_center}};
      const auto path = cache_file("flat", key, "bin");
      FlatRepresentation flat;
      if (fs::exists(path)) {
        cache_hits_.push_back("flat");
        flat = stage("pca", [&] {
          std::ifstream in(path, std::ios::binary);
          FlatRepresentation f;
          f.matrix = read_flat(in);
          f.empty.resize(static_cast<std::size_t>(f.matrix.rows()));
          for (Eigen::Index i = 0; i < f.matrix.rows(); ++i) f.empty[static_cast<std::size_t>(i)] = f.matrix.row(i).isZero(0.0);
          return f;
        });
      } else {
        flat = stage("pca", [&] { return build_flat(prep.stories, table, cfg_.pca_center); });
        std::ostringstream buf;
        write_flat(buf, flat.matrix);
        write_cache(path, buf.str());
      }
      representation_cache_ = path;
      for (bool e : flat.empty) empty_stories += e ? 1 : 0;
      info(fmt::format("flat representation: {} x {}", flat.matrix.rows(), flat.matrix.cols()));
      proj = project(flat.matrix, TsneInput::features, key, labels, ids);
      report = evaluate(flat.matrix, "flat_concatenation", proj, labels);
      report["flat_width"] = flat.matrix.cols();
      break;
    }
    case Approach::a3: {
      const auto table = embedding(prep, emb_key);
      const json key = {{"embedding", emb_key}};
      const auto path = cache_file("wmd", key, "bin");
      DistanceMatrix d;
      if (fs::exists(path)) {
        cache_hits_.push_back("wmd");
        d = stage("wmd", [&] {
          std::ifstream in(path, std::ios::binary);
          return read_distance_matrix(in);
        });
      } else {
        d = stage("wmd", [&] {
          const auto docs = nbow_all(prep.stories, table);
          DistanceOptions options;
          options.threads = cfg_.pairs_parallelism;
          auto last = Clock::now();
          options.progress = [&](std::size_t done, std::size_t total) {
            if (Clock::now() - last > std::chrono::seconds(10) || done == total) {
              last = Clock::now();
              info(fmt::format("wmd: {}/{} pairs", done, total));
            }
          };
          return distance_matrix(docs, table, options);
        });
        std::ostringstream buf;
        write_distance_matrix(buf, d);
        write_cache(path, buf.str());
      }
      representation_cache_ = path;
      for (bool e : d.empty) empty_stories += e ? 1 : 0;
      const auto imputed = impute_sentinels(d);
      proj = project(imputed, TsneInput::distances, key, labels, ids);
      const auto mds = stage("mds", [&] { return classical_mds(imputed, cfg_.mds_components); });
      report = evaluate(mds, fmt::format("classical_mds_{}", cfg_.mds_components), proj, labels);
      break;
    }
  }
  drops_["empty_stories"] = empty_stories;

  const auto config_json = to_json(cfg_);
  const auto config_hash = json_hash(config_json);
  report["approach"] = to_string(cfg_.approach);
  report["config_hash"] = config_hash;
  report["n"] = corpus.size();
  report["vocabulary"] = {{"before_removal", prep.before_removal.size()},
                          {"after_removal", prep.after_removal.size()}};

  result.projection_csv = cfg_.out / "projection.csv";
  result.kl_trace_csv = cfg_.out / "kl_trace.csv";
  result.plot_svg = cfg_.out / "plot.svg";
  result.report_json = cfg_.out / "report.json";
  result.manifest_json = cfg_.out / "manifest.json";
  result.representation_cache = representation_cache_;

  std::ostringstream coords;
  write_projection_csv(coords, proj);
  write_output(result.projection_csv, coords.str());
  std::ostringstream kl;
  write_kl_trace_csv(kl, proj);
  write_output(result.kl_trace_csv, kl.str());
  stage("plot", [&] {
    std::ostringstream svg;
    render_svg(svg, proj, title);
    write_output(result.plot_svg, svg.str());
  });
  write_output(result.report_json, report.dump(2) + "\n");

  json manifest;
  manifest["config_hash"] = config_hash;
  manifest["config"] = config_json;
  manifest["module_versions"] = {{"storytopics", kVersion}};
  manifest["input_digest"] = file_digest(cfg_.dataset);
  manifest["stage_timings_seconds"] = timings_;
  manifest["total_seconds"] = seconds_since(run_start);
  manifest["coverage"] = coverage_;
  manifest["drops"] = drops_;
  manifest["seeds"] = seeds_;
  manifest["cache_hits"] = cache_hits_;
  manifest["representation_cache"] = representation_cache_.filename().string();
  manifest["determinism"] = {{"skipgram_single_worker", true},
                             {"wmd_schedule_independent", true},
                             {"tsne_seeded", true},
                             {"kmeans_seeded", true}};
  write_output(result.manifest_json, manifest.dump(2) + "\n");

  result.report = std::move(report);
  result.manifest = std::move(manifest);
  result.cache_hits = cache_hits_;
  return result;
}

void Runner::remove_partial_outputs() {
  for (const auto& p : written_) {
    std::error_code ec;
    fs::remove(p, ec);
  }
}

}  // namespace

RunResult run_pipeline(const RunConfig& cfg, const LogFn& log) {
  cfg.validate();
  fs::create_directories(cfg.out / "cache");
  OutputLock lock(cfg.out);
  Runner runner(cfg, log);
  try {
    return runner.run();
  } catch (...) {
    runner.remove_partial_outputs();
    throw;
  }
}

}  // namespace storytopics
