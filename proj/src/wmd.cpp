#include "storytopics/wmd.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cassert>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "binio.hpp"
#include "storytopics/errors.hpp"
#include "storytopics/transport.hpp"

namespace storytopics {

NbowDistribution nbow(const TokenizedStory& story, const EmbeddingTable& table) {
  std::map<Eigen::Index, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& token : story.tokens) {
    if (auto match = table.find_variant(token)) {
      ++counts[match->index];
      ++total;
    }
  }
  if (total == 0) {
    throw EmptyDocument("story " + std::to_string(story.story_id) + " has no embeddable token");
  }
  NbowDistribution out;
  out.story_id = story.story_id;
  for (const auto& [index, count] : counts) {
    out.support.push_back(index);
    out.weights.push_back(static_cast<double>(count) / static_cast<double>(total));
  }
  return out;
}

double word_centroid_distance(const NbowDistribution& a, const NbowDistribution& b,
                              const EmbeddingTable& table) {
  Eigen::VectorXd ca = Eigen::VectorXd::Zero(table.dim());
  Eigen::VectorXd cb = Eigen::VectorXd::Zero(table.dim());
  for (std::size_t i = 0; i < a.support.size(); ++i) {
    ca += a.weights[i] * table.row(a.support[i]).cast<double>().transpose();
  }
  for (std::size_t j = 0; j < b.support.size(); ++j) {
    cb += b.weights[j] * table.row(b.support[j]).cast<double>().transpose();
  }
  return (ca - cb).norm();
}

double wmd(const NbowDistribution& a, const NbowDistribution& b, const EmbeddingTable& table) {
  if (a.support.empty() || b.support.empty()) throw EmptyDocument("wmd of an empty distribution");
  const auto m = static_cast<Eigen::Index>(a.support.size());
  const auto n = static_cast<Eigen::Index>(b.support.size());
  Eigen::MatrixXd cost(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::RowVectorXd xi = table.row(a.support[static_cast<std::size_t>(i)]).cast<double>();
    for (Eigen::Index j = 0; j < n; ++j) {
      cost(i, j) = (xi - table.row(b.support[static_cast<std::size_t>(j)]).cast<double>()).norm();
    }
  }
  const auto solution = solve_transport<double>(a.weights, b.weights, cost);
  const double d = std::max(0.0, solution.cost);
  assert(word_centroid_distance(a, b, table) <= d + 1e-9 * std::max(1.0, d));
  return d;
}

std::vector<std::optional<NbowDistribution>> nbow_all(std::span<const TokenizedStory> stories,
                                                      const EmbeddingTable& table) {
  std::vector<std::optional<NbowDistribution>> out;
  out.reserve(stories.size());
  for (const auto& s : stories) {
    try {
      out.emplace_back(nbow(s, table));
    } catch (const EmptyDocument&) {
      out.emplace_back(std::nullopt);
    }
  }
  return out;
}

DistanceMatrix distance_matrix(std::span<const std::optional<NbowDistribution>> docs,
                               const EmbeddingTable& table, const DistanceOptions& options) {
  const auto n = static_cast<Eigen::Index>(docs.size());
  DistanceMatrix out;
  out.values = Eigen::MatrixXd::Zero(n, n);
  out.empty.resize(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) out.empty[i] = !docs[i].has_value();

  const std::size_t total = docs.size() < 2 ? 0 : docs.size() * (docs.size() - 1) / 2;
  std::atomic<Eigen::Index> next_row{0};
  std::atomic<std::size_t> done{0};
  std::atomic<bool> failed{false};

  // Rows are handed out one at a time; each upper-triangle cell is written by
  // exactly one worker, so the result does not depend on scheduling.
  auto run_rows = [&](bool report) {
    for (Eigen::Index i = next_row++; i < n && !failed; i = next_row++) {
      const auto& a = docs[static_cast<std::size_t>(i)];
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const auto& b = docs[static_cast<std::size_t>(j)];
        out.values(i, j) = (a && b) ? wmd(*a, *b, table) : std::numeric_limits<double>::quiet_NaN();
      }
      done += static_cast<std::size_t>(n - 1 - i);
      if (report && options.progress) options.progress(done.load(), total);
    }
  };

  const int threads = std::max(1, options.threads);
  if (threads == 1) {
    run_rows(true);
  } else {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    {
      std::vector<std::jthread> pool;
      for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          try {
            run_rows(false);
          } catch (...) {
            errors[static_cast<std::size_t>(t)] = std::current_exception();
            failed = true;
          }
        });
      }
      if (options.progress) {
        while (!failed && done.load() < total) {
          options.progress(done.load(), total);
          std::this_thread::sleep_for(std::chrono::milliseconds(250));
        }
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    if (options.progress) options.progress(done.load(), total);
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) out.values(j, i) = out.values(i, j);
  }
  return out;
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

Eigen::MatrixXd impute_sentinels(const DistanceMatrix& d) {
  const auto n = d.n();
  Eigen::MatrixXd out = d.values;
  std::vector<double> row_median(static_cast<std::size_t>(n), std::numeric_limits<double>::quiet_NaN());
  std::vector<double> all;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> row;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && std::isfinite(d.values(i, j))) {
        row.push_back(d.values(i, j));
        if (j > i) all.push_back(d.values(i, j));
      }
    }
    row_median[static_cast<std::size_t>(i)] = median(std::move(row));
  }
  const double global = median(std::move(all));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || std::isfinite(out(i, j))) continue;
      const bool i_empty = !std::isfinite(row_median[static_cast<std::size_t>(i)]);
      const bool j_empty = !std::isfinite(row_median[static_cast<std::size_t>(j)]);
      double fill = global;
      if (i_empty && !j_empty) fill = row_median[static_cast<std::size_t>(j)];
      if (j_empty && !i_empty) fill = row_median[static_cast<std::size_t>(i)];
      out(i, j) = std::isfinite(fill) ? fill : 0.0;
    }
  }
  return out;
}

void write_distance_matrix(std::ostream& out, const DistanceMatrix& d) {
  out.write("WMDM", 4);
  binio::put_le<std::uint32_t>(out, 1);
  binio::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(d.n()));
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    for (Eigen::Index j = 0; j < d.n(); ++j) binio::put_le<double>(out, d.values(i, j));
  }
  if (!out) throw IoError("failed writing WMDM file");
}

DistanceMatrix read_distance_matrix(std::istream& in) {
  binio::expect_magic(in, "WMDM");
  const auto version = binio::get_le<std::uint32_t>(in, "WMDM version");
  if (version != 1) throw FormatError("unsupported WMDM version " + std::to_string(version));
  const auto n = static_cast<Eigen::Index>(binio::get_le<std::uint64_t>(in, "WMDM size"));
  DistanceMatrix d;
  d.values.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) d.values(i, j) = binio::get_le<double>(in, "WMDM data");
  }
  // A story is empty when its whole off-diagonal row is NaN.
  d.empty.assign(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n && n > 1; ++i) {
    bool all_nan = true;
    for (Eigen::Index j = 0; j < n && all_nan; ++j) {
      if (j != i && !std::isnan(d.values(i, j))) all_nan = false;
    }
    d.empty[static_cast<std::size_t>(i)] = all_nan;
  }
  return d;
}

}  // namespace storytopics
