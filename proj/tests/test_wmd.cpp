#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "storytopics/errors.hpp"
#include "storytopics/wmd.hpp"
#include "support/support.hpp"

using namespace storytopics;

namespace {

double euclid(const EmbeddingTable& t, Eigen::Index a, Eigen::Index b) {
  return (t.row(a).cast<double>() - t.row(b).cast<double>()).norm();
}

std::vector<std::string> word_list(std::size_t n) {
  std::vector<std::string> w;
  for (std::size_t i = 0; i < n; ++i) w.push_back("w" + std::to_string(i));
  return w;
}

}  // namespace

TEST_CASE("nBOW weights") {
  const auto table = support::random_table({"door", "music"}, 3, 1);
  const auto d = nbow({1, {"music", "music", "door"}}, table);
  CHECK(d.support == std::vector<Eigen::Index>{0, 1});
  CHECK(d.weights[0] == doctest::Approx(1.0 / 3));
  CHECK(d.weights[1] == doctest::Approx(2.0 / 3));
  const auto m = nbow({2, {"music", "zzqv"}}, table);
  CHECK(m.support == std::vector<Eigen::Index>{1});
  CHECK(m.weights == std::vector<double>{1.0});
  CHECK_THROWS_AS(nbow({3, {"zzqv"}}, table), EmptyDocument);
}

TEST_CASE("basic distances") {
  const auto table = support::random_table({"music", "song", "door"}, 5, 2);
  const auto a = nbow({1, {"music", "door", "door"}}, table);
  CHECK(wmd(a, a, table) == 0.0);
  const auto m = nbow({2, {"music"}}, table);
  const auto s = nbow({3, {"song"}}, table);
  CHECK(wmd(m, s, table) == doctest::Approx(euclid(table, 0, 1)).epsilon(1e-12));
}

TEST_CASE("one-word stories") {
  const auto table = support::random_table({"a", "b", "c"}, 4, 3);
  const auto docs = nbow_all(support::stories({{"a"}, {"b"}, {"c"}}), table);
  const auto d = distance_matrix(docs, table);
  for (Eigen::Index i = 0; i < 3; ++i) {
    CHECK(d.values(i, i) == 0.0);
    for (Eigen::Index j = 0; j < 3; ++j) {
      CHECK(d.values(i, j) == d.values(j, i));
      if (i != j) CHECK(d.values(i, j) == doctest::Approx(euclid(table, i, j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("matrix is consistent, symmetric and schedule independent") {
  std::mt19937_64 rng(5);
  const auto words = word_list(30);
  const auto table = support::random_table(words, 6, 4);
  auto raw = support::random_docs(rng, 40, 30, 7);
  raw[3] = {"zzqv"};
  raw[17] = {};
  const auto stories = support::stories(raw);
  const auto docs = nbow_all(stories, table);

  std::size_t last_done = 0;
  std::size_t last_total = 0;
  DistanceOptions one;
  one.progress = [&](std::size_t done, std::size_t total) {
    CHECK(done >= last_done);
    last_done = done;
    last_total = total;
  };
  const auto d1 = distance_matrix(docs, table, one);
  CHECK(last_done == last_total);

  DistanceOptions many;
  many.threads = 4;
  const auto d4 = distance_matrix(docs, table, many);
  const auto n = d1.n();
  CHECK(d1.empty == d4.empty);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double x = d1.values(i, j);
      const double y = d4.values(i, j);
      CHECK(((std::isnan(x) && std::isnan(y)) || std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y)));
    }
  }

  CHECK(d1.empty[3]);
  CHECK(d1.empty[17]);
  for (Eigen::Index i = 0; i < n; ++i) {
    CHECK(d1.values(i, i) == 0.0);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto& a = docs[static_cast<std::size_t>(i)];
      const auto& b = docs[static_cast<std::size_t>(j)];
      if (!a || !b) {
        CHECK(std::isnan(d1.values(i, j)));
        continue;
      }
      CHECK(d1.values(i, j) == d1.values(j, i));
      CHECK(d1.values(i, j) == wmd(*a, *b, table));
      CHECK(word_centroid_distance(*a, *b, table) <= d1.values(i, j) + 1e-12);
    }
  }
}

TEST_CASE("triangle inequality") {
  std::mt19937_64 rng(6);
  const auto table = support::random_table(word_list(50), 8, 7);
  const auto docs = nbow_all(support::stories(support::random_docs(rng, 100, 50, 8)), table);
  std::vector<std::optional<NbowDistribution>> kept;
  for (const auto& d : docs) {
    if (d) kept.push_back(d);
  }
  const auto d = distance_matrix(kept, table).values;
  const auto n = d.rows();
  std::size_t violations = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index k = 0; k < n; ++k) {
        if (d(i, k) > d(i, j) + d(j, k) + 1e-9) ++violations;
      }
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("moving a word away never shrinks the distance") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  for (int trial = 0; trial < 50; ++trial) {
    // Words of b sit at x < 0; word a0 starts at x > 0 and moves along +x.
    EmbeddingTable::Matrix m(5, 3);
    for (Eigen::Index i = 0; i < 5; ++i) {
      for (Eigen::Index j = 0; j < 3; ++j) m(i, j) = u(rng);
    }
    for (Eigen::Index i = 2; i < 5; ++i) m(i, 0) = -std::abs(m(i, 0)) - 0.1f;
    m(0, 0) = std::abs(m(0, 0));
    const std::vector<std::string> words{"a0", "a1", "b0", "b1", "b2"};
    const TokenizedStory sa{1, {"a0", "a1", "a1"}};
    const TokenizedStory sb{2, {"b0", "b1", "b2", "b2"}};
    double previous = 0;
    for (int step = 0; step < 6; ++step) {
      const EmbeddingTable t(words, m, EmbeddingSource::pretrained);
      const double d = wmd(nbow(sa, t), nbow(sb, t), t);
      CHECK(d >= previous - 1e-12);
      previous = d;
      m(0, 0) += 0.5f;
    }
  }
}

TEST_CASE("sentinel imputation") {
  DistanceMatrix d;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  d.values.resize(4, 4);
  d.values << 0, 1, 4, nan,
              1, 0, 2, nan,
              4, 2, 0, nan,
              nan, nan, nan, 0;
  d.empty = {false, false, false, true};
  const auto out = impute_sentinels(d);
  CHECK(out(0, 3) == 2.5);  // median of {1, 4}
  CHECK(out(3, 1) == 1.5);  // median of {1, 2}
  CHECK(out(2, 3) == 3.0);  // median of {4, 2}
  CHECK(out(3, 3) == 0.0);
  CHECK(out.allFinite());

  DistanceMatrix two_empty;
  two_empty.values.resize(3, 3);
  two_empty.values << 0, nan, nan, nan, 0, nan, nan, nan, 0;
  two_empty.empty = {true, true, false};
  CHECK(impute_sentinels(two_empty).allFinite());
}

TEST_CASE("WMDM file") {
  std::mt19937_64 rng(9);
  const auto table = support::random_table(word_list(10), 4, 2);
  auto raw = support::random_docs(rng, 12, 10, 5);
  raw[4] = {};
  const auto d = distance_matrix(nbow_all(support::stories(raw), table), table);
  std::stringstream buf;
  write_distance_matrix(buf, d);
  const auto bytes = buf.str();
  CHECK(bytes.size() == 4 + 4 + 8 + 12 * 12 * 8);
  CHECK(bytes.substr(0, 4) == "WMDM");
  const auto back = read_distance_matrix(buf);
  CHECK(back.empty == d.empty);
  std::ostringstream again;
  write_distance_matrix(again, back);
  CHECK(again.str() == bytes);

  std::istringstream cut(bytes.substr(0, bytes.size() - 1));
  CHECK_THROWS_AS(read_distance_matrix(cut), TruncatedFile);
  std::istringstream bad("FLAT" + bytes.substr(4));
  CHECK_THROWS_AS(read_distance_matrix(bad), FormatError);
}
