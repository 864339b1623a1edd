// Acceptance gate. One line per criterion: PASS, FAIL or SKIPPED.
//
//   acceptance <id> [work_dir]    run one criterion; exit 0 pass, 1 fail, 77 skipped
//   acceptance all [work_dir]     run every criterion
//
// Criteria on the real corpus read STORYTOPICS_CROWDRE (CSV) and
// STORYTOPICS_GOOGLENEWS (word2vec binary); they are skipped when unset.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "oracles/oracles.hpp"
#include "storytopics/docgeom.hpp"
#include "storytopics/embed.hpp"
#include "storytopics/errors.hpp"
#include "storytopics/evalcluster.hpp"
#include "storytopics/lda.hpp"
#include "storytopics/pipeline.hpp"
#include "storytopics/project.hpp"
#include "storytopics/textprep.hpp"
#include "storytopics/vectorize.hpp"
#include "storytopics/wmd.hpp"
#include "support/support.hpp"

using namespace storytopics;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool within(double value, double target, double rel) { return std::abs(value - target) <= rel * target; }

enum class Outcome { pass, fail, skipped };

struct Result {
  Outcome outcome;
  std::string detail;
};

Result verdict(bool ok, std::string detail) { return {ok ? Outcome::pass : Outcome::fail, std::move(detail)}; }

void note(std::string_view text) { fmt::print("       {}\n", text); }

unsigned cores() { return std::max(1u, std::thread::hardware_concurrency()); }

std::optional<fs::path> env_path(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return fs::path(v);
}

// Real-corpus state shared by the criteria that need it.
class Context {
 public:
  explicit Context(fs::path work) : work_(std::move(work)) {}

  std::optional<fs::path> crowdre() const { return env_path("STORYTOPICS_CROWDRE"); }
  std::optional<fs::path> googlenews() const { return env_path("STORYTOPICS_GOOGLENEWS"); }
  const fs::path& work() const { return work_; }

  const Corpus& corpus() {
    if (!corpus_) corpus_ = load_corpus(*crowdre());
    return *corpus_;
  }

  const PreprocessResult& prep() {
    if (!prep_) prep_ = preprocess_corpus(corpus(), load_token_list(default_stopword_path()), default_template_words());
    return *prep_;
  }

  const EmbeddingTable& self_trained() {
    if (!table_) table_ = train_skipgram(prep().stories, SkipgramConfig{});
    return *table_;
  }

  RunConfig run_config(Approach approach) const {
    RunConfig cfg;
    cfg.dataset = *crowdre();
    cfg.approach = approach;
    cfg.out = work_ / std::string(to_string(approach));
    cfg.pairs_parallelism = static_cast<int>(std::min(8u, cores()));
    return cfg;
  }

 private:
  fs::path work_;
  std::optional<Corpus> corpus_;
  std::optional<PreprocessResult> prep_;
  std::optional<EmbeddingTable> table_;
};

Result skipped(std::string why) { return {Outcome::skipped, std::move(why)}; }

// 1. Dataset ingestion.
Result ingestion(Context& ctx) {
  if (!ctx.crowdre()) return skipped("STORYTOPICS_CROWDRE not set");
  const auto start = Clock::now();
  const auto corpus = load_corpus(*ctx.crowdre());
  const double secs = seconds_since(start);
  const auto hist = domain_histogram(corpus);
  std::size_t safety = 0;
  std::size_t other = 0;
  bool safety_largest = true;
  bool other_smallest = true;
  for (const auto& [label, count] : hist) {
    if (label == DomainLabel::Safety) safety = count;
    if (label == DomainLabel::Other) other = count;
  }
  for (const auto& [label, count] : hist) {
    if (label != DomainLabel::Safety && count >= safety) safety_largest = false;
    if (label != DomainLabel::Other && count <= other) other_smallest = false;
  }
  for (const auto& [label, count] : hist) note(fmt::format("{:<14}{}", to_string(label), count));
  const bool ok = corpus.size() == 2966 && safety_largest && other_smallest && within(other, 400, 0.10) && secs < 5.0;
  return verdict(ok, fmt::format("{} stories (2966), Safety largest {}, Other {} smallest {} (400 +/- 10%), {:.2f} s (< 5)",
                                 corpus.size(), safety_largest, other, other_smallest, secs));
}

// 2. Preprocessing checkpoints.
Result preprocessing(Context& ctx) {
  if (!ctx.crowdre()) return skipped("STORYTOPICS_CROWDRE not set");
  const auto& corpus = ctx.corpus();
  const auto start = Clock::now();
  const auto prep = preprocess_corpus(corpus, load_token_list(default_stopword_path()), default_template_words());
  const double secs = seconds_since(start);
  const auto before = prep.before_removal.size();
  const auto after = prep.after_removal.size();
  const bool ok = within(before, 4968, 0.02) && within(after, 4851, 0.02) && secs < 10.0;
  return verdict(ok, fmt::format("unique tokens {} (4968 +/- 2%), after removal {} (4851 +/- 2%), {:.2f} s (< 10)",
                                 before, after, secs));
}

// 3. Embedding coverage, self-trained vocabulary.
Result coverage_self_trained(Context& ctx) {
  if (!ctx.crowdre()) return skipped("STORYTOPICS_CROWDRE not set");
  const auto size = ctx.self_trained().size();
  return verdict(within(size, 1159, 0.05), fmt::format("min-count-5 vocabulary {} (1159 +/- 5%)", size));
}

// 3. Embedding coverage, pretrained vectors.
Result coverage_pretrained(Context& ctx) {
  if (!ctx.crowdre()) return skipped("STORYTOPICS_CROWDRE not set");
  if (!ctx.googlenews()) return skipped("STORYTOPICS_GOOGLENEWS not set");
  const auto& prep = ctx.prep();
  const auto spellings = lookup_spellings(prep.after_removal);
  Word2VecLoadOptions options;
  options.keep = &spellings;
  const auto table = load_word2vec_binary(*ctx.googlenews(), options);
  const auto r = coverage_report(prep.stories, prep.after_removal, table);
  const bool ok = within(r.token_coverage, 0.93, 0.02 / 0.93) && within(r.affected_story_fraction, 0.13, 0.03 / 0.13);
  return verdict(ok, fmt::format("token coverage {:.3f} (0.93 +/- 0.02), affected stories {:.3f} (0.13 +/- 0.03)",
                                 r.token_coverage, r.affected_story_fraction));
}

// 3. Fallback when the pretrained file is absent: a table covering every token.
Result coverage_synthetic(Context&) {
  const auto corpus = support::synthetic_corpus(30, 5);
  const auto prep = preprocess_corpus(corpus, load_token_list(default_stopword_path()), default_template_words());
  const auto& vocab = prep.after_removal;
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < vocab.size(); ++i) tokens.push_back(vocab.token(i));
  const auto table = support::random_table(tokens, 8, 1);
  const auto r = coverage_report(prep.stories, vocab, table);
  return verdict(r.token_coverage == 1.0 && r.affected_story_fraction == 0.0,
                 fmt::format("full-coverage table: token coverage {:.3f} (1.000), affected stories {:.3f} (0.000)",
                             r.token_coverage, r.affected_story_fraction));
}

// 4. WMD against the LP oracle on random instances.
Result wmd_oracle(Context&) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> side(1, 4);
  std::uniform_int_distribution<int> reps(1, 3);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = side(rng);
    const int n = side(rng);
    std::vector<std::string> words;
    for (int i = 0; i < m + n; ++i) words.push_back("t" + std::to_string(i));
    const auto table = support::random_table(words, 6, static_cast<std::uint64_t>(trial) + 1);
    std::vector<std::string> da;
    std::vector<std::string> db;
    std::vector<double> a(static_cast<std::size_t>(m));
    std::vector<double> b(static_cast<std::size_t>(n));
    for (int i = 0; i < m; ++i) {
      const int r = reps(rng);
      a[static_cast<std::size_t>(i)] = r;
      for (int k = 0; k < r; ++k) da.push_back(words[static_cast<std::size_t>(i)]);
    }
    for (int j = 0; j < n; ++j) {
      const int r = reps(rng);
      b[static_cast<std::size_t>(j)] = r;
      for (int k = 0; k < r; ++k) db.push_back(words[static_cast<std::size_t>(m + j)]);
    }
    for (auto& x : a) x /= static_cast<double>(da.size());
    for (auto& x : b) x /= static_cast<double>(db.size());
    double sa = 0;
    double sb = 0;
    for (double x : a) sa += x;
    for (double x : b) sb += x;
    b.back() += sa - sb;
    oracles::Table cost(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(n)));
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        const auto ri = table.row(i).cast<double>();
        const auto rj = table.row(m + j).cast<double>();
        cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = (ri - rj).norm();
      }
    }
    const double expected = oracles::lp_transport(a, b, cost);
    const double value = wmd(nbow({1, da}, table), nbow({2, db}, table), table);
    worst = std::max(worst, std::abs(value - expected) / std::max(1.0, std::abs(expected)));
  }
  return verdict(worst <= 1e-9, fmt::format("100 random instances up to 4x4: max relative gap {:.2e} (<= 1e-9)", worst));
}

// 4. WMD matrix properties on a CrowdRE subsample.
Result wmd_subsample(Context& ctx) {
  if (!ctx.crowdre()) return skipped("STORYTOPICS_CROWDRE not set");
  const auto& table = ctx.self_trained();
  auto docs = nbow_all(ctx.prep().stories, table);
  std::vector<std::optional<NbowDistribution>> kept;
  for (auto& d : docs) {
    if (d) kept.push_back(std::move(d));
  }
  std::mt19937_64 rng(300);
  std::shuffle(kept.begin(), kept.end(), rng);
  kept.resize(std::min<std::size_t>(300, kept.size()));

  DistanceOptions options;
  options.threads = static_cast<int>(std::min(4u, cores()));
  const auto start = Clock::now();
  const auto d = distance_matrix(kept, table, options).values;
  const double secs = seconds_since(start);

  const auto n = d.rows();
  const bool symmetric = d == d.transpose();
  const bool zero_diagonal = (d.diagonal().array() == 0.0).all();
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  int violations = 0;
  for (int t = 0; t < 10000; ++t) {
    const auto i = pick(rng);
    const auto j = pick(rng);
    const auto k = pick(rng);
    if (d(i, k) > d(i, j) + d(j, k) + 1e-9) ++violations;
  }
  const bool ok = n == 300 && symmetric && zero_diagonal && violations == 0 && secs < 60.0;
  return verdict(ok, fmt::format("{}x{} matrix: symmetric {}, zero diagonal {}, triangle violations {}/10000, "
                                 "{:.1f} s on {} thread(s) (< 60 s on 4 cores)",
                                 n, n, symmetric, zero_diagonal, violations, secs, options.threads));
}

// 5. Full-scale A3.
Result full_scale_a3(Context& ctx) {
  if (!ctx.crowdre()) return skipped("STORYTOPICS_CROWDRE not set");
  const auto cfg = ctx.run_config(Approach::a3);
  std::error_code ec;
  if (fs::exists(cfg.out / "cache")) {
    for (const auto& e : fs::directory_iterator(cfg.out / "cache")) {
      if (e.path().filename().string().starts_with("wmd-")) fs::remove(e.path(), ec);
    }
  }
  const auto result = run_pipeline(cfg);
  const double secs = result.manifest["stage_timings_seconds"]["wmd"].get<double>();

  std::ifstream in(result.representation_cache, std::ios::binary);
  std::ostringstream original;
  original << in.rdbuf();
  std::istringstream again(original.str());
  const auto d = read_distance_matrix(again);
  std::ostringstream rewritten;
  write_distance_matrix(rewritten, d);
  const bool round_trip = rewritten.str() == original.str();
  const bool ok = d.n() == 2966 && round_trip && secs < 1800.0;
  return verdict(ok, fmt::format("{0}x{0} WMD matrix in {1:.1f} s on {2} thread(s) (< 1800 s on 8 cores), "
                                 "cache round trip bit-exact {3}",
                                 d.n(), secs, cfg.pairs_parallelism, round_trip));
}

std::vector<std::vector<std::string>> disjoint_docs(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<std::vector<std::string>> pools{{"a", "b", "c"}, {"x", "y", "z"}};
  std::uniform_int_distribution<int> pick(0, 2);
  std::vector<std::vector<std::string>> docs;
  for (const auto& pool : pools) {
    for (int d = 0; d < 50; ++d) {
      std::vector<std::string> doc;
      for (int t = 0; t < 8; ++t) doc.push_back(pool[static_cast<std::size_t>(pick(rng))]);
      docs.push_back(doc);
    }
  }
  return docs;
}

// 6. LDA properties.
Result lda_properties(Context&) {
  const auto stories = support::stories(disjoint_docs(6));
  const auto vocab = Vocabulary::build(stories);
  double worst_sum = 0.0;
  int pure = 0;
  bool identical = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    LdaConfig cfg;
    cfg.k = 2;
    cfg.seed = seed;
    const auto m = fit_lda(stories, vocab, cfg);
    for (Eigen::Index i = 0; i < m.theta.rows(); ++i) worst_sum = std::max(worst_sum, std::abs(m.theta.row(i).sum() - 1.0));
    for (Eigen::Index i = 0; i < m.phi.rows(); ++i) worst_sum = std::max(worst_sum, std::abs(m.phi.row(i).sum() - 1.0));
    std::vector<int> topics;
    std::vector<DomainLabel> labels;
    for (Eigen::Index i = 0; i < m.theta.rows(); ++i) {
      Eigen::Index t = 0;
      m.theta.row(i).maxCoeff(&t);
      topics.push_back(static_cast<int>(t));
      labels.push_back(i < 50 ? DomainLabel::Health : DomainLabel::Energy);
    }
    const double purity = agreement(topics, labels).purity;
    if (purity >= 0.95) ++pure;
    note(fmt::format("seed {} argmax purity {:.3f}", seed, purity));
    const auto again = fit_lda(stories, vocab, cfg);
    identical = identical && again.theta == m.theta && again.phi == m.phi;
  }
  const bool ok = worst_sum <= 1e-9 && identical && pure >= 4;
  return verdict(ok, fmt::format("row sums within {:.1e} (<= 1e-9), reruns bit-identical {}, purity >= 0.95 for {}/5 seeds (>= 4)",
                                 worst_sum, identical, pure));
}

// 7. t-SNE properties on synthetic blobs.
Result tsne_synthetic(Context&) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(10.0));
  Eigen::MatrixXd x(100, 10);
  for (Eigen::Index i = 0; i < 100; ++i) {
    for (Eigen::Index j = 0; j < 10; ++j) x(i, j) = normal(rng);
    if (i >= 50) x(i, 0) += 100.0;
  }
  TsneConfig cfg;
  cfg.perplexity = 10;
  cfg.learning_rate = 50;
  const auto a = tsne(x, TsneInput::features, cfg);
  const auto b = tsne(x, TsneInput::features, cfg);
  const bool identical = a.coords == b.coords;
  double max_intra = 0.0;
  double min_inter = 1e300;
  for (Eigen::Index i = 0; i < 100; ++i) {
    for (Eigen::Index j = i + 1; j < 100; ++j) {
      const double d = (a.coords.row(i) - a.coords.row(j)).norm();
      if ((i < 50) == (j < 50)) {
        max_intra = std::max(max_intra, d);
      } else {
        min_inter = std::min(min_inter, d);
      }
    }
  }
  const bool ok = identical && min_inter > max_intra && a.kl_trace.back() < a.kl_trace[250];
  return verdict(ok, fmt::format("rerun bit-identical {}, blobs: min inter {:.2f} > max intra {:.2f}, KL {:.4f} -> {:.4f}",
                                 identical, min_inter, max_intra, a.kl_trace[250], a.kl_trace.back()));
}

// 7. Final KL below KL at iteration 250 on every CrowdRE run.
Result tsne_crowdre(Context& ctx) {
  if (!ctx.crowdre()) return skipped("STORYTOPICS_CROWDRE not set");
  bool ok = true;
  std::string detail;
  for (auto approach : {Approach::a1, Approach::a2, Approach::a3}) {
    const auto result = run_pipeline(ctx.run_config(approach));
    const double end = result.report["kl"]["final"].get<double>();
    const double at = result.report["kl"]["at_exaggeration_end"].get<double>();
    ok = ok && end < at;
    detail += fmt::format("{}: KL {:.4f} -> {:.4f}; ", to_string(approach), at, end);
  }
  return verdict(ok, detail);
}

std::optional<std::int64_t> find_story(const Corpus& corpus, std::string_view phrase) {
  for (const auto& s : corpus.stories()) {
    std::string lower = s.full_text;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower.find(phrase) != std::string::npos) return s.id;
  }
  return std::nullopt;
}

// 8. Cluster claims on the A3 self-trained pipeline.
Result cluster_claims(Context& ctx) {
  if (!ctx.crowdre()) return skipped("STORYTOPICS_CROWDRE not set");
  auto cfg = ctx.run_config(Approach::a3);
  const auto result = run_pipeline(cfg);
  const auto& hd = result.report["high_dimensional"];
  const double ari = hd["adjusted_rand_index"].get<double>();
  const auto& ent = hd["label_concentration"]["Entertainment"];
  const double within_cluster = ent["within_cluster"].get<double>();
  const double base = ent["base_rate"].get<double>();

  const auto& corpus = ctx.corpus();
  const auto sensor = find_story(corpus, "room thermostat sensor");
  const auto plural = find_story(corpus, "room thermostats");
  if (sensor && plural) {
    std::ifstream in(result.representation_cache, std::ios::binary);
    const auto d = read_distance_matrix(in).values;
    auto contains = [&](std::int64_t from, std::int64_t to) {
      for (const auto& n : neighbor_report(d, corpus, from, 10)) {
        if (n.story_id == to) return true;
      }
      return false;
    };
    const bool mutual = contains(*sensor, *plural) && contains(*plural, *sensor);
    note(fmt::format("{} thermostat pair {} / {} in each other's top 10: {}", mutual ? "soft check ok:" : "WARN:",
                     *sensor, *plural, mutual));
  } else {
    note("WARN: thermostat pair not found in the corpus");
  }
  const bool ok = ari > 0.05 && within_cluster > base;
  return verdict(ok, fmt::format("{} k-means ARI {:.3f} (> 0.05), Entertainment share in its majority cluster {:.3f} > base rate {:.3f}",
                                 hd["representation"].get<std::string>(), ari, within_cluster, base));
}

// 9. Oracle equivalences on randomized small instances.
Result oracle_equivalences(Context&) {
  const auto start = Clock::now();
  std::mt19937_64 rng(9);
  double bow_gap = 0;
  double tfidf_gap = 0;
  double stats_gap = 0;
  double pca_gap = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto docs = support::random_docs(rng, 12, 15, 9);
    const auto stories = support::stories(docs);
    const auto vocab = Vocabulary::build(stories);
    const auto stats = oracles::recount(docs);
    if (stats.doc_freq.size() != vocab.size()) stats_gap = 1.0;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      const auto t = vocab.token(i);
      stats_gap = std::max(stats_gap, std::abs(static_cast<double>(vocab.doc_freq(i)) - static_cast<double>(stats.doc_freq.at(t))));
      stats_gap = std::max(stats_gap, std::abs(static_cast<double>(vocab.corpus_freq(i)) - static_cast<double>(stats.corpus_freq.at(t))));
    }
    const auto counts = bow(stories, vocab);
    const Eigen::MatrixXd weights = Eigen::MatrixXd(tfidf(counts, vocab));
    const Eigen::MatrixXi dense = Eigen::MatrixXi(counts);
    const auto bow_o = oracles::bow(docs);
    const auto tfidf_o = oracles::tfidf(docs);
    for (Eigen::Index r = 0; r < dense.rows(); ++r) {
      for (Eigen::Index c = 0; c < dense.cols(); ++c) {
        const auto rr = static_cast<std::size_t>(r);
        const auto cc = static_cast<std::size_t>(c);
        bow_gap = std::max(bow_gap, std::abs(dense(r, c) - bow_o[rr][cc]));
        tfidf_gap = std::max(tfidf_gap, std::abs(weights(r, c) - tfidf_o[rr][cc]));
      }
    }

    std::normal_distribution<double> normal;
    std::uniform_int_distribution<int> rows(2, 8);
    std::uniform_int_distribution<int> cols(2, 10);
    const int t = rows(rng);
    const int d = cols(rng);
    Eigen::MatrixXd m(t, d);
    for (Eigen::Index i = 0; i < t; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) m(i, j) = normal(rng);
    }
    const int s = std::uniform_int_distribution<int>(1, t - 1)(rng);
    const Eigen::MatrixXd reduced = pca_reduce(m, s);
    pca_gap = std::max(pca_gap, (reduced - oracles::pca(m, s).factors).cwiseAbs().maxCoeff());
  }
  const double secs = seconds_since(start);
  const bool ok = bow_gap <= 1e-12 && stats_gap <= 1e-12 && tfidf_gap <= 1e-9 && pca_gap <= 1e-9 && secs < 300.0;
  return verdict(ok, fmt::format("200 instances each: BoW gap {:.1e}, vocabulary gap {:.1e} (<= 1e-12), TF-IDF gap {:.1e}, "
                                 "PCA gap {:.1e} (<= 1e-9), {:.1f} s",
                                 bow_gap, stats_gap, tfidf_gap, pca_gap, secs));
}

struct Criterion {
  std::string id;
  std::function<Result(Context&)> check;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"1", ingestion},
      {"2", preprocessing},
      {"3-self-trained", coverage_self_trained},
      {"3-pretrained", coverage_pretrained},
      {"3-synthetic", coverage_synthetic},
      {"4-oracle", wmd_oracle},
      {"4-subsample", wmd_subsample},
      {"5", full_scale_a3},
      {"6", lda_properties},
      {"7-synthetic", tsne_synthetic},
      {"7-crowdre", tsne_crowdre},
      {"8", cluster_claims},
      {"9", oracle_equivalences},
  };
  return all;
}

Outcome run(const Criterion& c, Context& ctx) {
  Result r;
  try {
    r = c.check(ctx);
  } catch (const std::exception& e) {
    r = {Outcome::fail, std::string("error: ") + e.what()};
  }
  const char* tag = r.outcome == Outcome::pass ? "PASS" : r.outcome == Outcome::fail ? "FAIL" : "SKIPPED";
  fmt::print("{:<7} [{}] {}\n", tag, c.id, r.detail);
  std::fflush(stdout);
  return r.outcome;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    fmt::print(stderr, "usage: acceptance <id|all> [work_dir]\n");
    return 2;
  }
  const std::string which = argv[1];
  Context ctx(argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "storytopics-acceptance");

  if (which == "all") {
    int failed = 0;
    for (const auto& c : criteria()) failed += run(c, ctx) == Outcome::fail ? 1 : 0;
    return failed == 0 ? 0 : 1;
  }
  for (const auto& c : criteria()) {
    if (c.id != which) continue;
    switch (run(c, ctx)) {
      case Outcome::pass: return 0;
      case Outcome::fail: return 1;
      case Outcome::skipped: return 77;
    }
  }
  fmt::print(stderr, "unknown criterion {}\n", which);
  return 2;
}
