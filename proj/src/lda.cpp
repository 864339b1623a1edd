#include "storytopics/lda.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "storytopics/errors.hpp"
#include "storytopics/random.hpp"

namespace storytopics {

void LdaConfig::validate() const {
  if (k < 1) throw ConfigError("lda.k must be >= 1");
  if (!(effective_alpha() > 0.0)) throw ConfigError("lda.alpha must be > 0");
  if (!(beta > 0.0)) throw ConfigError("lda.beta must be > 0");
  if (iterations < 1) throw ConfigError("lda.iterations must be >= 1");
  if (mode == LdaInput::tfidf_weighted && !(tfidf_scale > 0.0)) {
    throw ConfigError("lda.tfidf_scale must be > 0");
  }
}

namespace {

using Documents = std::vector<std::vector<int>>;

Documents count_documents(std::span<const TokenizedStory> stories, const Vocabulary& vocab) {
  Documents docs(stories.size());
  for (std::size_t d = 0; d < stories.size(); ++d) {
    for (const auto& token : stories[d].tokens) {
      if (auto w = vocab.index_of(token)) docs[d].push_back(static_cast<int>(*w));
    }
  }
  return docs;
}

Documents weighted_documents(const TfidfMatrix& weights, double scale) {
  Documents docs(static_cast<std::size_t>(weights.rows()));
  for (Eigen::Index d = 0; d < weights.outerSize(); ++d) {
    for (TfidfMatrix::InnerIterator it(weights, d); it; ++it) {
      const auto copies = static_cast<long>(std::lround(scale * it.value()));
      docs[static_cast<std::size_t>(d)].insert(docs[static_cast<std::size_t>(d)].end(),
                                               static_cast<std::size_t>(std::max(0L, copies)),
                                               static_cast<int>(it.col()));
    }
  }
  return docs;
}

}  // namespace

LdaModel fit_lda(std::span<const TokenizedStory> stories, const Vocabulary& vocab,
                 const LdaConfig& cfg, const TfidfMatrix* weights) {
  cfg.validate();
  if (stories.empty()) throw EmptyCorpus("no documents to fit");
  if (cfg.mode == LdaInput::tfidf_weighted) {
    if (!weights) throw ConfigError("tfidf_weighted LDA needs a TF-IDF matrix");
    if (weights->rows() != static_cast<Eigen::Index>(stories.size()) ||
        weights->cols() != static_cast<Eigen::Index>(vocab.size())) {
      throw ShapeMismatch("TF-IDF matrix does not match stories × vocabulary");
    }
  }

  const Documents docs = cfg.mode == LdaInput::counts
                             ? count_documents(stories, vocab)
                             : weighted_documents(*weights, cfg.tfidf_scale);

  const int k = cfg.k;
  const auto n = static_cast<Eigen::Index>(docs.size());
  const auto vocab_size = static_cast<Eigen::Index>(vocab.size());
  const double alpha = cfg.effective_alpha();
  const double beta = cfg.beta;
  const double v_beta = beta * static_cast<double>(vocab_size);

  Eigen::MatrixXi doc_topic = Eigen::MatrixXi::Zero(n, k);
  Eigen::MatrixXi topic_word = Eigen::MatrixXi::Zero(k, vocab_size);
  Eigen::VectorXi topic_total = Eigen::VectorXi::Zero(k);
  std::vector<std::vector<int>> assignment(docs.size());

  Rng rng(cfg.seed);
  bool any_tokens = false;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    assignment[d].resize(docs[d].size());
    for (std::size_t i = 0; i < docs[d].size(); ++i) {
      const int z = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
      assignment[d][i] = z;
      ++doc_topic(static_cast<Eigen::Index>(d), z);
      ++topic_word(z, docs[d][i]);
      ++topic_total(z);
      any_tokens = true;
    }
  }
  if (!any_tokens) throw AllEmptyDocuments("every document is empty after filtering");

  std::vector<double> cumulative(static_cast<std::size_t>(k));
  for (int sweep = 0; sweep < cfg.iterations; ++sweep) {
    for (std::size_t d = 0; d < docs.size(); ++d) {
      const auto row = static_cast<Eigen::Index>(d);
      for (std::size_t i = 0; i < docs[d].size(); ++i) {
        const int w = docs[d][i];
        int z = assignment[d][i];
        --doc_topic(row, z);
        --topic_word(z, w);
        --topic_total(z);

        double total = 0.0;
        for (int t = 0; t < k; ++t) {
          total += (doc_topic(row, t) + alpha) * (topic_word(t, w) + beta) /
                   (topic_total(t) + v_beta);
          cumulative[static_cast<std::size_t>(t)] = total;
        }
        const double u = rng.uniform() * total;
        z = 0;
        while (z < k - 1 && cumulative[static_cast<std::size_t>(z)] <= u) ++z;

        assignment[d][i] = z;
        ++doc_topic(row, z);
        ++topic_word(z, w);
        ++topic_total(z);
      }
    }
  }

  LdaModel model;
  model.config = cfg;
  model.theta.resize(n, k);
  model.empty_documents.assign(docs.size(), false);
  for (Eigen::Index d = 0; d < n; ++d) {
    const auto len = static_cast<double>(docs[static_cast<std::size_t>(d)].size());
    if (len == 0.0) {
      model.empty_documents[static_cast<std::size_t>(d)] = true;
      model.theta.row(d).setConstant(1.0 / k);
      continue;
    }
    for (int t = 0; t < k; ++t) {
      model.theta(d, t) = (doc_topic(d, t) + alpha) / (len + k * alpha);
    }
  }
  model.phi.resize(k, vocab_size);
  for (int t = 0; t < k; ++t) {
    for (Eigen::Index w = 0; w < vocab_size; ++w) {
      model.phi(t, w) = (topic_word(t, w) + beta) / (topic_total(t) + v_beta);
    }
  }
  return model;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw FormatError("ragged matrix in LDA file");
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
  }
  return m;
}

}  // namespace

void save_lda(std::ostream& out, const LdaModel& model) {
  nlohmann::json j;
  const auto& c = model.config;
  j["config"] = {{"k", c.k},
                 {"alpha", c.effective_alpha()},
                 {"beta", c.beta},
                 {"iterations", c.iterations},
                 {"seed", c.seed},
                 {"mode", c.mode == LdaInput::counts ? "counts" : "tfidf_weighted"},
                 {"tfidf_scale", c.tfidf_scale}};
  j["vocabulary_size"] = model.phi.cols();
  j["theta"] = matrix_to_json(model.theta);
  j["phi"] = matrix_to_json(model.phi);
  j["empty_documents"] = model.empty_documents;
  out << j.dump() << '\n';
}

LdaModel load_lda(std::istream& in) {
  try {
    const auto j = nlohmann::json::parse(in);
    LdaModel model;
    const auto& c = j.at("config");
    model.config.k = c.at("k").get<int>();
    model.config.alpha = c.at("alpha").get<double>();
    model.config.beta = c.at("beta").get<double>();
    model.config.iterations = c.at("iterations").get<int>();
    model.config.seed = c.at("seed").get<std::uint64_t>();
    model.config.mode = c.at("mode").get<std::string>() == "counts" ? LdaInput::counts
                                                                    : LdaInput::tfidf_weighted;
    model.config.tfidf_scale = c.at("tfidf_scale").get<double>();
    model.theta = matrix_from_json(j.at("theta"), model.config.k);
    model.phi = matrix_from_json(j.at("phi"), j.at("vocabulary_size").get<Eigen::Index>());
    model.empty_documents = j.at("empty_documents").get<std::vector<bool>>();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("LDA model file: ") + e.what());
  }
}

}  // namespace storytopics
