#include "storytopics/evalcluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "storytopics/errors.hpp"
#include "storytopics/random.hpp"

namespace storytopics {

namespace {

double assign(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids, std::vector<int>& ids) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
      const double d = (points.row(i) - centroids.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    ids[static_cast<std::size_t>(i)] = arg;
    inertia += best;
  }
  return inertia;
}

}  // namespace

ClusterAssignment kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int max_iter,
                         std::span<const std::int64_t> ids) {
  const auto n = points.rows();
  if (k < 1 || k > n) throw KTooLarge(fmt::format("k = {} with {} points", k, n));
  if (!points.allFinite()) throw NonFiniteInput("k-means input has non-finite entries");

  Rng rng(seed);
  Eigen::MatrixXd centroids(k, points.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  Eigen::VectorXd nearest = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  Eigen::Index first = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
  for (int c = 0; c < k; ++c) {
    Eigen::Index pick = first;
    if (c > 0) {
      const double total = nearest.sum();
      if (total > 0.0) {
        const double u = rng.uniform() * total;
        double acc = 0.0;
        pick = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
          acc += nearest(i);
          if (nearest(i) > 0.0 && u < acc) {
            pick = i;
            break;
          }
        }
        if (pick < 0) {  // rounding at the top end
          for (Eigen::Index i = n - 1; i >= 0; --i) {
            if (nearest(i) > 0.0) {
              pick = i;
              break;
            }
          }
        }
      } else {
        // Every point coincides with a centroid: take the next unused one.
        pick = 0;
        while (chosen[static_cast<std::size_t>(pick)]) ++pick;
      }
    }
    chosen[static_cast<std::size_t>(pick)] = true;
    centroids.row(c) = points.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      nearest(i) = std::min(nearest(i), (points.row(i) - centroids.row(c)).squaredNorm());
    }
  }

  ClusterAssignment out;
  out.k = k;
  out.cluster_ids.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> next(static_cast<std::size_t>(n));
  for (int iter = 0; iter < max_iter; ++iter) {
    const double inertia = assign(points, centroids, next);
    out.inertia_trace.push_back(inertia);
    out.inertia = inertia;
    if (next == out.cluster_ids) break;
    out.cluster_ids = next;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(out.cluster_ids[static_cast<std::size_t>(i)]) += points.row(i);
      ++counts[static_cast<std::size_t>(out.cluster_ids[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < k; ++c) {
      // An empty cluster keeps its centroid.
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      }
    }
  }
  std::vector<bool> used(static_cast<std::size_t>(k), false);
  for (int c : out.cluster_ids) used[static_cast<std::size_t>(c)] = true;
  for (int c = 0; c < k; ++c) {
    if (!used[static_cast<std::size_t>(c)]) out.empty_clusters.push_back(c);
  }
  if (ids.empty()) {
    out.story_ids.resize(static_cast<std::size_t>(n));
    std::iota(out.story_ids.begin(), out.story_ids.end(), std::int64_t{0});
  } else {
    out.story_ids.assign(ids.begin(), ids.end());
  }
  return out;
}

ClusterAssignment kmeans_best_of(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts,
                                 int max_iter) {
  ClusterAssignment best;
  for (int r = 0; r < std::max(1, restarts); ++r) {
    auto run = kmeans(points, k, seed + static_cast<std::uint64_t>(r), max_iter);
    if (r == 0 || run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

namespace {

struct Contingency {
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows;  // clusters
  std::map<int, double> cols;  // labels
  double n = 0.0;
};

Contingency tabulate(std::span<const int> clusters, std::span<const DomainLabel> labels) {
  if (clusters.size() != labels.size()) throw ShapeMismatch("clusters and labels differ in length");
  Contingency t;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const int l = static_cast<int>(labels[i]);
    t.cells[{clusters[i], l}] += 1.0;
    t.rows[clusters[i]] += 1.0;
    t.cols[l] += 1.0;
  }
  t.n = static_cast<double>(clusters.size());
  return t;
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

double entropy(const std::map<int, double>& marginal, double n) {
  double h = 0.0;
  for (const auto& [key, count] : marginal) {
    if (count > 0.0) h -= (count / n) * std::log(count / n);
  }
  return h;
}

}  // namespace

AgreementScores agreement(std::span<const int> clusters, std::span<const DomainLabel> labels) {
  const auto t = tabulate(clusters, labels);
  AgreementScores s;
  if (t.n == 0.0) return s;

  std::map<int, double> best_in_cluster;
  for (const auto& [cell, count] : t.cells) {
    best_in_cluster[cell.first] = std::max(best_in_cluster[cell.first], count);
  }
  for (const auto& [c, count] : best_in_cluster) s.purity += count;
  s.purity /= t.n;

  double sum_cells = 0.0;
  for (const auto& [cell, count] : t.cells) sum_cells += choose2(count);
  double sum_rows = 0.0;
  for (const auto& [c, count] : t.rows) sum_rows += choose2(count);
  double sum_cols = 0.0;
  for (const auto& [l, count] : t.cols) sum_cols += choose2(count);
  const double expected = sum_rows * sum_cols / choose2(t.n);
  const double max_index = 0.5 * (sum_rows + sum_cols);
  const double denom = max_index - expected;
  // Both partitions trivial (all singletons or one block): perfect agreement.
  s.adjusted_rand_index = denom == 0.0 ? 1.0 : (sum_cells - expected) / denom;

  double mutual = 0.0;
  for (const auto& [cell, count] : t.cells) {
    mutual += (count / t.n) * std::log(count * t.n / (t.rows.at(cell.first) * t.cols.at(cell.second)));
  }
  const double h_clusters = entropy(t.rows, t.n);
  const double h_labels = entropy(t.cols, t.n);
  const double mean_h = 0.5 * (h_clusters + h_labels);
  if (h_clusters == 0.0 && h_labels == 0.0) {
    s.normalized_mutual_information = 1.0;
  } else {
    s.normalized_mutual_information = std::clamp(mutual / mean_h, 0.0, 1.0);
  }
  return s;
}

std::vector<DomainLabel> majority_labels(std::span<const int> clusters, std::span<const DomainLabel> labels,
                                         int k) {
  auto domains = std::vector<DomainLabel>(kAllDomains.begin(), kAllDomains.end());
  std::sort(domains.begin(), domains.end(),
            [](DomainLabel a, DomainLabel b) { return to_string(a) < to_string(b); });
  const auto t = tabulate(clusters, labels);
  std::vector<DomainLabel> out(static_cast<std::size_t>(k), domains.front());
  for (int c = 0; c < k; ++c) {
    double best = -1.0;
    for (auto d : domains) {
      const auto it = t.cells.find({c, static_cast<int>(d)});
      const double count = it == t.cells.end() ? 0.0 : it->second;
      if (count > best) {
        best = count;
        out[static_cast<std::size_t>(c)] = d;
      }
    }
  }
  return out;
}

LabelConcentration label_concentration(std::span<const int> clusters, std::span<const DomainLabel> labels,
                                       DomainLabel label) {
  const auto t = tabulate(clusters, labels);
  LabelConcentration out;
  const int l = static_cast<int>(label);
  double best = -1.0;
  for (const auto& [c, size] : t.rows) {
    const auto it = t.cells.find({c, l});
    const double count = it == t.cells.end() ? 0.0 : it->second;
    if (count > best) {
      best = count;
      out.cluster = c;
      out.within_cluster = count / size;
    }
  }
  const auto total = t.cols.find(l);
  out.base_rate = (total == t.cols.end() || t.n == 0.0) ? 0.0 : total->second / t.n;
  return out;
}

Eigen::MatrixXd classical_mds(const Eigen::MatrixXd& distances, int components) {
  const auto n = distances.rows();
  if (distances.cols() != n) throw ShapeMismatch("distance matrix is not square");
  if (!distances.allFinite()) throw NonFiniteInput("MDS input has non-finite entries");
  const Eigen::MatrixXd sq = distances.array().square().matrix();
  const Eigen::VectorXd row_mean = sq.rowwise().mean();
  const Eigen::RowVectorXd col_mean = sq.colwise().mean();
  const double grand = sq.mean();
  Eigen::MatrixXd b = sq;
  b.colwise() -= row_mean;
  b.rowwise() -= col_mean;
  b.array() += grand;
  b *= -0.5;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  const auto m = std::min<Eigen::Index>(components, n);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    const Eigen::Index src = n - 1 - c;  // eigenvalues ascend
    const double lambda = eig.eigenvalues()(src);
    if (lambda <= 0.0) continue;
    Eigen::VectorXd v = eig.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    out.col(c) = std::sqrt(lambda) * v;
  }
  return out;
}

namespace {

std::vector<Neighbor> rank_neighbors(const Eigen::VectorXd& dist, const Corpus& corpus, std::size_t self,
                                     std::size_t top_k) {
  std::vector<std::size_t> order;
  for (std::size_t j = 0; j < corpus.size(); ++j) {
    if (j != self) order.push_back(j);
  }
  auto key = [&](std::size_t j) {
    const double d = dist(static_cast<Eigen::Index>(j));
    return std::isnan(d) ? std::numeric_limits<double>::infinity() : d;
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double da = key(a);
    const double db = key(b);
    if (da != db) return da < db;
    return corpus[a].id < corpus[b].id;
  });
  order.resize(std::min(order.size(), top_k));
  std::vector<Neighbor> out;
  for (auto j : order) {
    out.push_back({corpus[j].id, dist(static_cast<Eigen::Index>(j)), corpus[j].full_text, corpus[j].domain});
  }
  return out;
}

std::size_t require_story(const Corpus& corpus, std::int64_t story_id, Eigen::Index rows) {
  if (rows != static_cast<Eigen::Index>(corpus.size())) throw ShapeMismatch("matrix rows do not match corpus");
  const auto idx = corpus.index_of(story_id);
  if (!idx) throw UnknownStory("no story with id " + std::to_string(story_id));
  return *idx;
}

}  // namespace

std::vector<Neighbor> neighbor_report(const Eigen::MatrixXd& distances, const Corpus& corpus,
                                      std::int64_t story_id, std::size_t top_k) {
  const auto self = require_story(corpus, story_id, distances.rows());
  return rank_neighbors(distances.row(static_cast<Eigen::Index>(self)).transpose(), corpus, self, top_k);
}

std::vector<Neighbor> neighbor_report_coords(const Eigen::MatrixXd& coords, const Corpus& corpus,
                                             std::int64_t story_id, std::size_t top_k) {
  const auto self = require_story(corpus, story_id, coords.rows());
  const Eigen::VectorXd dist =
      (coords.rowwise() - coords.row(static_cast<Eigen::Index>(self))).rowwise().norm();
  return rank_neighbors(dist, corpus, self, top_k);
}

std::string format_neighbor_table(std::span<const Neighbor> neighbors) {
  std::string out = fmt::format("{:>4}  {:>10}  {:>12}  {:<13}  {}\n", "rank", "story_id", "distance", "domain", "text");
  for (std::size_t r = 0; r < neighbors.size(); ++r) {
    const auto& nb = neighbors[r];
    out += fmt::format("{:>4}  {:>10}  {:>12.6f}  {:<13}  {}\n", r + 1, nb.story_id, nb.distance, to_string(nb.domain),
                       nb.full_text);
  }
  return out;
}

}  // namespace storytopics
