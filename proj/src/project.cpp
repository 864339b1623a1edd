#include "storytopics/project.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "storytopics/errors.hpp"
#include "storytopics/random.hpp"

namespace storytopics {

void TsneConfig::validate(Eigen::Index n) const {
  if (n < 2) throw ConfigError("t-SNE needs at least two points");
  if (!(perplexity >= 1.0)) throw ConfigError("perplexity must be >= 1");
  const double limit = static_cast<double>(n - 1);
  if (enforce_neighbor_bound ? !(3.0 * perplexity < limit) : !(perplexity <= limit)) {
    throw PerplexityTooLarge(fmt::format("perplexity {} too large for {} points", perplexity, n));
  }
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (iterations < 250) throw ConfigError("t-SNE needs at least 250 iterations");
  if (exaggeration_iterations < 0 || exaggeration_iterations > iterations) {
    throw ConfigError("exaggeration phase longer than the run");
  }
  if (!(early_exaggeration >= 1.0)) throw ConfigError("early exaggeration must be >= 1");
}

Eigen::MatrixXd joint_affinities(const Eigen::MatrixXd& squared_distances, double perplexity) {
  const auto n = squared_distances.rows();
  const double target = std::log(perplexity);
  Eigen::MatrixXd conditional = Eigen::MatrixXd::Zero(n, n);
  Eigen::ArrayXd shifted(n);
  Eigen::ArrayXd p(n);

  for (Eigen::Index i = 0; i < n; ++i) {
    double dmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) dmin = std::min(dmin, squared_distances(j, i));
    }
    // Shift by the nearest distance so exp() cannot underflow to all zeros;
    // the normalized distribution is unchanged.
    shifted = squared_distances.col(i).array() - dmin;
    shifted(i) = 0.0;

    double beta = 1.0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int step = 0; step < 50; ++step) {
      p = (-shifted * beta).exp();
      p(i) = 0.0;
      const double sum = p.sum();
      const double entropy = std::log(sum) + beta * (shifted * p).sum() / sum;
      const double diff = entropy - target;
      if (std::abs(diff) < 1e-5) break;
      if (diff > 0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = std::isinf(lo) ? beta * 0.5 : 0.5 * (beta + lo);
      }
    }
    p = (-shifted * beta).exp();
    p(i) = 0.0;
    conditional.col(i) = p / p.sum();
  }
  // conditional(j, i) = p_{j|i}
  Eigen::MatrixXd joint = conditional + conditional.transpose();
  joint /= joint.sum();
  return joint;
}

namespace {

Eigen::MatrixXd squared_euclidean(const Eigen::MatrixXd& x) {
  const Eigen::VectorXd norms = x.rowwise().squaredNorm();
  Eigen::MatrixXd d = -2.0 * (x * x.transpose());
  d.colwise() += norms;
  d.rowwise() += norms.transpose();
  d = d.cwiseMax(0.0);
  d.diagonal().setZero();
  return d;
}

}  // namespace

Projection2D tsne(const Eigen::MatrixXd& input, TsneInput kind, const TsneConfig& cfg,
                  std::span<const DomainLabel> labels, std::span<const std::int64_t> ids) {
  const auto n = input.rows();
  if (kind == TsneInput::distances && input.cols() != n) throw ShapeMismatch("distance matrix is not square");
  cfg.validate(n);
  if (!input.allFinite()) throw NonFiniteInput("t-SNE input has NaN or infinite entries");
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != n) {
    throw ShapeMismatch("label count does not match input rows");
  }
  if (!ids.empty() && static_cast<Eigen::Index>(ids.size()) != n) {
    throw ShapeMismatch("id count does not match input rows");
  }

  Eigen::MatrixXd squared;
  if (kind == TsneInput::features) {
    squared = squared_euclidean(input);
  } else {
    const double tol = 1e-9 * std::max(1.0, input.cwiseAbs().maxCoeff());
    if ((input - input.transpose()).cwiseAbs().maxCoeff() > tol) {
      throw InvalidDistanceMatrix("distance matrix is not symmetric");
    }
    if (input.diagonal().cwiseAbs().maxCoeff() > tol) throw InvalidDistanceMatrix("distance matrix diagonal is not zero");
    if (input.minCoeff() < 0.0) throw InvalidDistanceMatrix("distance matrix has negative entries");
    squared = input.array().square().matrix();
    squared.diagonal().setZero();
  }

  const Eigen::MatrixXd P = joint_affinities(squared, cfg.perplexity);
  squared.resize(0, 0);
  double p_log_p = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = P(i, j);
      if (v > 0.0) p_log_p += v * std::log(v);
    }
  }

  Rng rng(cfg.seed);
  Eigen::MatrixXd Y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    Y(i, 0) = 1e-4 * rng.normal();
    Y(i, 1) = 1e-4 * rng.normal();
  }
  Eigen::MatrixXd update = Eigen::MatrixXd::Zero(n, 2);
  Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);
  Eigen::MatrixXd dist(n, n);
  Eigen::MatrixXd num(n, n);
  Eigen::MatrixXd weight(n, n);
  Eigen::MatrixXd grad(n, 2);

  Projection2D out;
  out.kl_trace.reserve(static_cast<std::size_t>(cfg.iterations));
  // After exaggeration a step that raises KL is rejected: restart from the previous point
  // without momentum and with a halved step.
  Eigen::MatrixXd Y_prev;
  Eigen::MatrixXd grad_prev;
  double kl_prev = 0.0;
  double step_scale = 1.0;
  for (int it = 0; it < cfg.iterations; ++it) {
    const bool early = it < cfg.exaggeration_iterations;
    const double exaggeration = early ? cfg.early_exaggeration : 1.0;
    const double momentum = early ? 0.5 : 0.8;
    if (it == cfg.exaggeration_iterations) {
      update.setZero();
      gains.setOnes();
    }

    dist.noalias() = squared_euclidean(Y);
    num = (1.0 + dist.array()).inverse().matrix();
    num.diagonal().setZero();
    const double z = num.sum();
    double kl = p_log_p + (P.array() * (1.0 + dist.array()).log()).sum() + std::log(z);

    bool rejected = false;
    if (it > cfg.exaggeration_iterations && kl > kl_prev) {
      rejected = true;
      Y = Y_prev;
      grad = grad_prev;
      kl = kl_prev;
      update.setZero();
      gains.setOnes();
      step_scale *= 0.5;
    } else {
      weight = ((exaggeration * P.array() - num.array() / z) * num.array()).matrix();
      grad.noalias() = weight * Y;
      grad = 4.0 * ((weight.rowwise().sum().asDiagonal() * Y) - grad);
      if (!early) step_scale = std::min(1.0, 2.0 * step_scale);
    }
    out.kl_trace.push_back(kl);
    if (!early) {
      Y_prev = Y;
      grad_prev = grad;
      kl_prev = kl;
    }

    if (!rejected) {
      for (Eigen::Index i = 0; i < n; ++i) {
        for (int c = 0; c < 2; ++c) {
          const bool same_sign = (grad(i, c) > 0.0) == (update(i, c) > 0.0);
          gains(i, c) = same_sign ? std::max(0.01, gains(i, c) * 0.8) : gains(i, c) + 0.2;
        }
      }
    }
    update = momentum * update - step_scale * cfg.learning_rate * gains.cwiseProduct(grad);
    Y += update;
    Y.rowwise() -= Y.colwise().mean();
    if (!Y.allFinite()) throw NonFiniteInput(fmt::format("t-SNE diverged at iteration {}", it));
  }

  out.coords = std::move(Y);
  out.labels.assign(labels.begin(), labels.end());
  if (out.labels.empty()) out.labels.assign(static_cast<std::size_t>(n), DomainLabel::Other);
  out.story_ids.assign(ids.begin(), ids.end());
  if (out.story_ids.empty()) {
    for (Eigen::Index i = 0; i < n; ++i) out.story_ids.push_back(i);
  }
  return out;
}

void write_projection_csv(std::ostream& out, const Projection2D& p) {
  out << "story_id,x,y,domain\n";
  for (Eigen::Index i = 0; i < p.coords.rows(); ++i) {
    out << fmt::format("{},{},{},{}\n", p.story_ids[static_cast<std::size_t>(i)], p.coords(i, 0), p.coords(i, 1),
                       to_string(p.labels[static_cast<std::size_t>(i)]));
  }
}

Projection2D read_projection_csv(std::istream& in) {
  const auto records = read_csv(in);
  if (records.empty()) throw FormatError("projection CSV has no header");
  const std::vector<std::string> expected{"story_id", "x", "y", "domain"};
  if (records.front().fields != expected) throw FormatError("projection CSV header must be story_id,x,y,domain");
  Projection2D p;
  p.coords.resize(static_cast<Eigen::Index>(records.size() - 1), 2);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r].fields;
    if (f.size() != 4) throw MalformedRow("line " + std::to_string(records[r].line) + ": expected 4 fields");
    try {
      p.story_ids.push_back(std::stoll(f[0]));
      p.coords(static_cast<Eigen::Index>(r - 1), 0) = std::stod(f[1]);
      p.coords(static_cast<Eigen::Index>(r - 1), 1) = std::stod(f[2]);
    } catch (const std::exception&) {
      throw MalformedRow("line " + std::to_string(records[r].line) + ": bad number");
    }
    p.labels.push_back(parse_domain(f[3]));
  }
  return p;
}

void write_kl_trace_csv(std::ostream& out, const Projection2D& p) {
  out << "iteration,kl\n";
  for (std::size_t i = 0; i < p.kl_trace.size(); ++i) out << fmt::format("{},{}\n", i, p.kl_trace[i]);
}

}  // namespace storytopics
