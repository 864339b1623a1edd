#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "storytopics/docgeom.hpp"
#include "storytopics/errors.hpp"
#include "storytopics/pipeline.hpp"
#include "storytopics/plot.hpp"
#include "storytopics/textprep.hpp"
#include "storytopics/vectorize.hpp"
#include "storytopics/wmd.hpp"

namespace fs = std::filesystem;
using namespace storytopics;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> pairs_parallelism;
  std::string dataset;
  std::string stopwords;
  std::string template_words;
  std::string embedding;
  bool no_center = false;
  std::optional<int> k;
  std::optional<double> perplexity;
  std::optional<double> learning_rate;
  std::optional<int> iterations;
};

RunConfig resolve(const Overrides& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.seed) cfg.apply_seed(*o.seed);
  if (!o.out.empty()) cfg.out = o.out;
  if (o.pairs_parallelism) cfg.pairs_parallelism = *o.pairs_parallelism;
  if (!o.dataset.empty()) cfg.dataset = o.dataset;
  if (!o.stopwords.empty()) cfg.stopwords = o.stopwords;
  if (!o.template_words.empty()) cfg.template_words = o.template_words;
  if (!o.embedding.empty()) {
    cfg.embedding.source = EmbeddingSource::pretrained;
    cfg.embedding.path = o.embedding;
  }
  if (o.no_center) cfg.pca_center = false;
  if (o.k) {
    cfg.lda.k = *o.k;
    cfg.kmeans_k = *o.k;
  }
  if (o.perplexity) cfg.tsne.perplexity = *o.perplexity;
  if (o.learning_rate) cfg.tsne.learning_rate = *o.learning_rate;
  if (o.iterations) cfg.tsne.iterations = *o.iterations;
  return cfg;
}

void log_line(std::string_view msg) { std::cerr << msg << '\n'; }

Corpus corpus_for(const RunConfig& cfg) {
  if (cfg.dataset.empty()) throw ConfigError("--dataset is required");
  if (!fs::exists(cfg.dataset)) throw ConfigError("dataset not found: " + cfg.dataset.string());
  return load_corpus(cfg.dataset, cfg.columns);
}

PreprocessResult preprocess_for(const RunConfig& cfg, const Corpus& corpus) {
  const TokenSet stop = load_token_list(cfg.stopwords);
  const TokenSet templ =
      cfg.template_words.empty() ? default_template_words() : load_token_list(cfg.template_words);
  return preprocess_corpus(corpus, stop, templ);
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void cmd_ingest(const RunConfig& cfg) {
  const auto corpus = corpus_for(cfg);
  fs::create_directories(cfg.out);
  nlohmann::json j;
  j["stories"] = corpus.size();
  j["input_digest"] = file_digest(cfg.dataset);
  for (const auto& [label, count] : domain_histogram(corpus)) j["domains"][std::string(to_string(label))] = count;
  write_file_atomic(cfg.out / "ingest.json", j.dump(2) + "\n");
  fmt::print("{} stories\n", corpus.size());
  for (const auto& [label, count] : domain_histogram(corpus)) fmt::print("  {:<14}{}\n", to_string(label), count);
}

void cmd_preprocess(const RunConfig& cfg) {
  const auto corpus = corpus_for(cfg);
  const auto prep = preprocess_for(cfg, corpus);
  fs::create_directories(cfg.out);

  std::ostringstream tokens;
  for (const auto& s : prep.stories) {
    tokens << s.story_id;
    for (const auto& t : s.tokens) tokens << ' ' << t;
    tokens << '\n';
  }
  write_file_atomic(cfg.out / "tokens.txt", tokens.str());

  std::ostringstream vocab;
  vocab << "index\ttoken\tdoc_freq\tcorpus_freq\n";
  const auto& v = prep.after_removal;
  for (std::size_t i = 0; i < v.size(); ++i) {
    vocab << fmt::format("{}\t{}\t{}\t{}\n", i, v.token(i), v.doc_freq(i), v.corpus_freq(i));
  }
  write_file_atomic(cfg.out / "vocabulary.tsv", vocab.str());

  const auto counts = bow(prep.stories, v);
  std::ostringstream b;
  write_triplets(b, counts);
  write_file_atomic(cfg.out / "bow.txt", b.str());
  std::ostringstream t;
  write_triplets(t, tfidf(counts, v));
  write_file_atomic(cfg.out / "tfidf.txt", t.str());

  fmt::print("unique tokens after tokenization: {}\n", prep.before_removal.size());
  fmt::print("unique tokens after stopword and template removal: {}\n", prep.after_removal.size());
}

void cmd_run(const RunConfig& cfg) {
  const auto result = run_pipeline(cfg, log_line);
  const auto& hd = result.report["high_dimensional"];
  const auto& p2 = result.report["projection_2d"];
  fmt::print("approach {}: {} stories\n", to_string(cfg.approach), result.report["n"].get<std::size_t>());
  fmt::print("  {:<20} purity {:.3f}  ARI {:.3f}  NMI {:.3f}\n", hd["representation"].get<std::string>(),
             hd["purity"].get<double>(), hd["adjusted_rand_index"].get<double>(),
             hd["normalized_mutual_information"].get<double>());
  fmt::print("  {:<20} purity {:.3f}  ARI {:.3f}  NMI {:.3f}\n", "tsne_2d", p2["purity"].get<double>(),
             p2["adjusted_rand_index"].get<double>(), p2["normalized_mutual_information"].get<double>());
  fmt::print("  final KL {:.4f}\n", result.report["kl"]["final"].get<double>());
  fmt::print("outputs in {}\n", cfg.out.string());
}

// Loads an LDA model, FLAT matrix or WMDM distance file, detected by content.
std::pair<Eigen::MatrixXd, TsneInput> load_representation(const fs::path& path) {
  const auto bytes = read_all(path);
  std::istringstream in(bytes);
  if (bytes.starts_with("FLAT")) return {read_flat(in), TsneInput::features};
  if (bytes.starts_with("WMDM")) return {impute_sentinels(read_distance_matrix(in)), TsneInput::distances};
  if (bytes.starts_with("{")) return {doc_topics(load_lda(in)), TsneInput::features};
  throw FormatError(path.string() + " is not an LDA model, FLAT or WMDM file");
}

void cmd_project(const RunConfig& cfg, const fs::path& input) {
  const auto [matrix, kind] = load_representation(input);
  std::vector<DomainLabel> labels;
  std::vector<std::int64_t> ids;
  if (!cfg.dataset.empty()) {
    const auto corpus = corpus_for(cfg);
    if (static_cast<Eigen::Index>(corpus.size()) != matrix.rows()) {
      throw ShapeMismatch(fmt::format("{} has {} rows but the dataset has {} stories", input.string(),
                                      matrix.rows(), corpus.size()));
    }
    labels = corpus.labels();
    ids = corpus.ids();
  }
  const auto p = tsne(matrix, kind, cfg.tsne, labels, ids);
  fs::create_directories(cfg.out);
  std::ostringstream coords;
  write_projection_csv(coords, p);
  write_file_atomic(cfg.out / "projection.csv", coords.str());
  std::ostringstream kl;
  write_kl_trace_csv(kl, p);
  write_file_atomic(cfg.out / "kl_trace.csv", kl.str());
  fmt::print("projected {} points, final KL {:.4f}\n", p.coords.rows(), p.kl_trace.back());
}

Projection2D read_projection(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  return read_projection_csv(in);
}

void cmd_evaluate(const RunConfig& cfg, const fs::path& projection, const fs::path& representation) {
  const auto p = read_projection(projection);
  nlohmann::json report;
  auto score = [&](const Eigen::MatrixXd& points, std::string_view name) {
    const int k = std::min<int>(cfg.kmeans_k, static_cast<int>(points.rows()));
    const auto a = kmeans_best_of(points, k, cfg.seed, cfg.kmeans_restarts);
    const auto s = agreement(a.cluster_ids, p.labels);
    report[std::string(name)] = {{"k", k},
                                 {"inertia", a.inertia},
                                 {"purity", s.purity},
                                 {"adjusted_rand_index", s.adjusted_rand_index},
                                 {"normalized_mutual_information", s.normalized_mutual_information}};
    fmt::print("{:<20} purity {:.3f}  ARI {:.3f}  NMI {:.3f}\n", name, s.purity, s.adjusted_rand_index,
               s.normalized_mutual_information);
  };
  score(p.coords, "projection_2d");
  if (!representation.empty()) {
    auto [matrix, kind] = load_representation(representation);
    if (matrix.rows() != p.coords.rows()) throw ShapeMismatch("representation and projection sizes differ");
    if (kind == TsneInput::distances) matrix = classical_mds(matrix, cfg.mds_components);
    score(matrix, "high_dimensional");
  }
  fs::create_directories(cfg.out);
  write_file_atomic(cfg.out / "evaluation.json", report.dump(2) + "\n");
}

void cmd_plot(const fs::path& projection, const fs::path& output, const std::string& title) {
  plot(read_projection(projection), output, title);
  fmt::print("wrote {}\n", output.string());
}

void cmd_report(const RunConfig& cfg, std::int64_t story, std::size_t top_k, const fs::path& distances,
                const fs::path& projection) {
  const auto corpus = corpus_for(cfg);
  std::vector<Neighbor> neighbors;
  if (!distances.empty()) {
    std::ifstream in(distances, std::ios::binary);
    if (!in) throw IoError("cannot read " + distances.string());
    neighbors = neighbor_report(read_distance_matrix(in).values, corpus, story, top_k);
  } else if (!projection.empty()) {
    neighbors = neighbor_report_coords(read_projection(projection).coords, corpus, story, top_k);
  } else {
    throw ConfigError("report needs --distances or --projection");
  }
  const auto idx = corpus.index_of(story);
  fmt::print("{} [{}] {}\n", story, to_string(corpus[*idx].domain), corpus[*idx].full_text);
  std::cout << format_neighbor_table(neighbors);
}

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::data: return 3;
    case ErrorCategory::io: return 3;
    case ErrorCategory::numeric: return 4;
  }
  return 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topic clustering of crowd-sourced user stories"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "JSON run configuration");
  app.add_option("--seed", o.seed, "Seed for every stochastic stage");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--pairs-parallelism", o.pairs_parallelism, "Worker threads for pairwise WMD")->check(CLI::PositiveNumber);
  app.add_option("--dataset", o.dataset, "User story CSV");
  app.add_option("--stopwords", o.stopwords, "Stopword list, one token per line");
  app.add_option("--template-words", o.template_words, "Template word list, one token per line");
  app.add_option("--embedding", o.embedding, "Pretrained word2vec binary (selects the pretrained source)");
  app.add_flag("--no-center", o.no_center, "Skip row-centering before per-story PCA");
  app.add_option("--k", o.k, "Topic count for LDA and cluster count for k-means");
  app.add_option("--perplexity", o.perplexity, "t-SNE perplexity");
  app.add_option("--learning-rate", o.learning_rate, "t-SNE learning rate");
  app.add_option("--iterations", o.iterations, "t-SNE iterations");

  auto* ingest = app.add_subcommand("ingest", "Load the dataset and print the domain histogram");
  auto* preprocess = app.add_subcommand("preprocess", "Tokenize, write vocabulary, BoW and TF-IDF");

  auto* run = app.add_subcommand("run", "Run one approach end to end");
  std::string approach = "a3";
  run->add_option("--approach", approach, "a1, a2 or a3")->check(CLI::IsMember({"a1", "a2", "a3"}));

  auto* project = app.add_subcommand("project", "t-SNE of a cached representation");
  std::string project_input;
  project->add_option("--input", project_input, "LDA model, FLAT or WMDM file")->required();

  auto* evaluate = app.add_subcommand("evaluate", "k-means agreement with domain labels");
  std::string eval_projection;
  std::string eval_representation;
  evaluate->add_option("--projection", eval_projection, "Projection CSV")->required();
  evaluate->add_option("--representation", eval_representation, "LDA model, FLAT or WMDM file");

  auto* plot_cmd = app.add_subcommand("plot", "Render a projection CSV as SVG");
  std::string plot_projection;
  std::string plot_output = "plot.svg";
  std::string plot_title;
  plot_cmd->add_option("--projection", plot_projection, "Projection CSV")->required();
  plot_cmd->add_option("--output", plot_output, "SVG path");
  plot_cmd->add_option("--title", plot_title, "Plot title");

  auto* report = app.add_subcommand("report", "Nearest stories of one story");
  std::int64_t story = 0;
  std::size_t top_k = 10;
  std::string report_distances;
  std::string report_projection;
  report->add_option("--story", story, "Story id")->required();
  report->add_option("--top-k", top_k, "Number of neighbors");
  report->add_option("--distances", report_distances, "WMDM distance file");
  report->add_option("--projection", report_projection, "Projection CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    auto cfg = resolve(o);
    if (*ingest) {
      cmd_ingest(cfg);
    } else if (*preprocess) {
      cmd_preprocess(cfg);
    } else if (*run) {
      cfg.approach = parse_approach(approach);
      cmd_run(cfg);
    } else if (*project) {
      cmd_project(cfg, project_input);
    } else if (*evaluate) {
      cmd_evaluate(cfg, eval_projection, eval_representation);
    } else if (*plot_cmd) {
      cmd_plot(plot_projection, plot_output, plot_title);
    } else if (*report) {
      cmd_report(cfg, story, top_k, report_distances, report_projection);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
