// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <thread>

#include "sake/embedding.hpp"
#include "support.hpp"

using namespace sake;
using sake::testing::Rng;

namespace {

double norm(const Embedding& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("hash encoder is deterministic, unit norm and seed dependent") {
  HashEncoder a(64, 0), b(64, 0), c(64, 7);
  const auto va = a.encode_one("mental_disorder");
  CHECK(va.size() == 64);
  CHECK(norm(va) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(va == b.encode_one("mental_disorder"));
  CHECK(va != c.encode_one("mental_disorder"));
  CHECK(a.name() == "hash-d64-s0");
  CHECK(norm(a.encode_one("")) == 0.0);
}

TEST_CASE("hash encoder puts related labels closer than unrelated ones") {
  HashEncoder enc;
  const auto x = enc.encode_one("sleep_disorder");
  const auto y = enc.encode_one("sleep_disorders");
  const auto z = enc.encode_one("pharmacologic_substance");
  CHECK(dot(x, y) > dot(x, z));
}

TEST_CASE("table encoder normalizes and falls back to hashing") {
  TableEncoder enc(2, {{"A b", {3.0, 4.0}}});
  const auto v = enc.encode_one("a_b");
  CHECK(v[0] == doctest::Approx(0.6));
  CHECK(v[1] == doctest::Approx(0.8));
  CHECK(enc.encode_one("other") == HashEncoder(2, 0).encode_one("other"));
  CHECK_THROWS_AS(TableEncoder(2, {{"z", {0.0, 0.0}}}), EncoderError);
  CHECK_THROWS_AS(TableEncoder(3, {{"z", {1.0, 0.0}}}), EncoderError);
}

TEST_CASE("index rows follow sorted labels") {
  testing::Toy toy;
  const auto& idx = toy.index;
  CHECK(idx.size() == toy.kg.entities().size());
  CHECK(idx.labels() == toy.kg.entities());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto want = toy.encoder.encode_one(idx.labels()[i]);
    const auto row = idx.row(i);
    CHECK(std::equal(row.begin(), row.end(), want.begin()));
  }
  CHECK(idx.find("hormone").has_value());
  CHECK_FALSE(idx.find("melatonin").has_value());
  CHECK_THROWS_AS(EntityIndex({"b", "a"}, 1, {1.0, 1.0}, "x"),
                  std::invalid_argument);
}

TEST_CASE("top_p_similar equals full argsort on random indices") {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = testing::uniform(rng, 1, 120);
    const auto dim = testing::uniform(rng, 1, 6);
    const auto index = testing::random_index(rng, n, dim);
    // Query either an indexed label (exclusion case) or a fresh one.
    std::string label = "query";
    Embedding q(dim);
    if (testing::uniform(rng, 0, 2) == 0) {
      const auto i = testing::uniform(rng, 0, n - 1);
      label = index.labels()[i];
      const auto row = index.row(i);
      q.assign(row.begin(), row.end());
    } else {
      std::normal_distribution<double> gauss;
      do {
        for (auto& x : q) x = gauss(rng);
      } while (!l2_normalize(q));
    }
    for (std::size_t p : {std::size_t{0}, std::size_t{1}, std::size_t{3},
                          n - 1, n, n + 5}) {
      const auto got = top_p_similar(index, label, q, p);
      CHECK(got.neighbors == testing::brute_force_top_p(index, label, q, p));
      CHECK_FALSE(got.warning.has_value());
    }
  }
}

TEST_CASE("query present in the index is excluded") {
  testing::Toy toy;
  const auto r = top_p_similar(toy.index, "Hormone", toy.encoder, 11);
  CHECK(r.neighbors.size() == 11);
  for (const auto& nb : r.neighbors) CHECK(nb.label != "hormone");
}

TEST_CASE("zero query vector yields no neighbors and a warning") {
  testing::Toy toy;
  const auto r = top_p_similar(toy.index, "   ", toy.encoder, 3);
  CHECK(r.neighbors.empty());
  CHECK(r.warning.has_value());
}

TEST_CASE("toy neighborhoods") {
  testing::Toy toy;
  auto labels = [&](const std::string& q) {
    std::vector<std::string> out;
    for (const auto& nb : top_p_similar(toy.index, q, toy.encoder, 3).neighbors) {
      out.push_back(nb.label);
    }
    return out;
  };
  const auto mel = labels("melatonin");
  const auto ins = labels("insomnia");
  CHECK(std::find(mel.begin(), mel.end(), "hormone") != mel.end());
  CHECK(std::find(ins.begin(), ins.end(), "mental_disorder") != ins.end());
}

TEST_CASE("concurrent queries agree with sequential ones") {
  Rng rng(22);
  const auto index = testing::random_index(rng, 150, 8);
  HashEncoder enc(8, 3);
  std::vector<std::string> queries;
  for (int i = 0; i < 40; ++i) queries.push_back("q" + std::to_string(i));
  std::vector<std::vector<Neighbor>> seq, par(queries.size());
  for (const auto& q : queries) {
    seq.push_back(top_p_similar(index, q, enc, 5).neighbors);
  }
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (std::size_t i = t; i < queries.size(); i += 4) {
        par[i] = top_p_similar(index, queries[i], enc, 5).neighbors;
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(seq == par);
}
