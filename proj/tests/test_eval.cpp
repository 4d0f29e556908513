// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "sake/eval.hpp"
#include "sake/index_file.hpp"
#include "sake/prompt.hpp"
#include "support.hpp"

using namespace sake;
using nlohmann::json;

namespace {

QaDataset numbered(const std::string& name, std::size_t n) {
  QaDataset ds{name, {}};
  for (std::size_t i = 0; i < n; ++i) {
    ds.items.push_back({std::to_string(i), "question " + std::to_string(i),
                        i % 2 ? "yes" : "no", std::nullopt});
  }
  return ds;
}

Trajectory answered(const std::string& id, const std::string& answer) {
  Trajectory t;
  t.id = id;
  Segment s;
  s.text = "<answer> " + answer + " </answer>";
  s.tokens = whitespace_tokenize(s.text);
  s.logprobs.assign(s.tokens.size(), -1.0);
  t.mask.assign(s.tokens.size(), 1);
  t.segments.push_back(s);
  t.answer = answer;
  return t;
}

std::string wrong(const std::string& gold) { return gold == "yes" ? "no" : "yes"; }

}  // namespace

TEST_CASE("split is a seeded, disjoint, covering partition") {
  const auto ds = numbered("d", 37);
  for (double f : {0.1, 0.5, 0.8, 0.99}) {
    const auto [train, test] = split_dataset(ds, f, 7);
    const auto expected = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(37 * f)), 1, 36);
    CHECK(train.items.size() == expected);
    CHECK(train.items.size() + test.items.size() == 37);
    std::set<std::string> ids;
    for (const auto& it : train.items) ids.insert(it.id);
    for (const auto& it : test.items) CHECK(ids.insert(it.id).second);
    CHECK(ids.size() == 37);
    const auto again = split_dataset(ds, f, 7);
    CHECK(again.first.items == train.items);
  }
  CHECK(split_dataset(ds, 0.5, 7).first.items !=
        split_dataset(ds, 0.5, 8).first.items);
  CHECK_THROWS_AS(split_dataset(ds, 1.0, 7), std::invalid_argument);
  CHECK_THROWS_AS(split_dataset(numbered("d", 1), 0.5, 7),
                  std::invalid_argument);
}

TEST_CASE("weighted average pools items across datasets") {
  const std::vector<QaDataset> sets = {numbered("a", 100), numbered("b", 84)};
  std::vector<Trajectory> ts;
  for (std::size_t i = 0; i < 100; ++i) {
    const auto& g = sets[0].items[i].gold;
    ts.push_back(answered("a/" + std::to_string(i), i < 80 ? g : wrong(g)));
  }
  for (std::size_t i = 0; i < 84; ++i) {
    const auto& g = sets[1].items[i].gold;
    ts.push_back(answered("b/" + std::to_string(i), i < 57 ? g : wrong(g)));
  }
  const auto report = evaluate(ts, sets);
  CHECK(report.per_dataset[0].correct == 80);
  CHECK(report.per_dataset[0].accuracy == doctest::Approx(0.8));
  CHECK(report.per_dataset[1].correct == 57);
  CHECK(report.weighted_average == doctest::Approx(137.0 / 184.0));
  // Not the mean of the two accuracies.
  CHECK(report.weighted_average !=
        doctest::Approx((0.8 + 57.0 / 84.0) / 2.0));
}

TEST_CASE("missing trajectories count as wrong; bare ids resolve when unique") {
  const std::vector<QaDataset> sets = {numbered("a", 4)};
  std::vector<Trajectory> ts = {answered("0", "no"), answered("a/1", "yes")};
  const auto report = evaluate(ts, sets);
  CHECK(report.per_dataset[0].n == 4);
  CHECK(report.per_dataset[0].correct == 2);
  const std::vector<QaDataset> two = {numbered("a", 2), numbered("b", 2)};
  const auto ambiguous = evaluate(ts, two);
  CHECK(ambiguous.per_dataset[0].correct == 1);  // only "a/1" matched
  std::vector<Trajectory> dup = {answered("a/1", "yes"), answered("1", "yes")};
  CHECK_THROWS_AS(evaluate(dup, sets), std::invalid_argument);
}

TEST_CASE("evaluate properties on random answer sheets") {
  testing::Rng rng(11);
  const std::vector<QaDataset> sets = {numbered("a", 13), numbered("b", 29),
                                       numbered("c", 6)};
  CHECK(evaluate({}, sets).weighted_average == 0.0);
  for (int round = 0; round < 50; ++round) {
    std::vector<Trajectory> ts;
    for (const auto& ds : sets) {
      for (const auto& it : ds.items) {
        const auto r = rng() % 3;
        if (r == 0) continue;  // missing
        ts.push_back(answered(ds.name + "/" + it.id, r == 1 ? it.gold : wrong(it.gold)));
      }
    }
    const auto report = evaluate(ts, sets);
    double lo = 1.0, hi = 0.0;
    for (const auto& d : report.per_dataset) {
      lo = std::min(lo, d.accuracy);
      hi = std::max(hi, d.accuracy);
    }
    CHECK(report.weighted_average >= lo - 1e-12);
    CHECK(report.weighted_average <= hi + 1e-12);
    std::shuffle(ts.begin(), ts.end(), rng);
    const auto shuffled = evaluate(ts, sets);
    CHECK(shuffled.weighted_average == report.weighted_average);
    for (std::size_t i = 0; i < sets.size(); ++i) {
      CHECK(shuffled.per_dataset[i].correct == report.per_dataset[i].correct);
    }
  }
}

TEST_CASE("token accounting is monotone in every segment") {
  testing::Toy toy;
  const auto t = run_rollout(toy.policy, testing::Toy::kQuestion,
                             {toy.kg, toy.index, toy.encoder}, {});
  const auto base = token_accounting(t);
  CHECK(base.total_input_tokens >= base.per_call.back());
  for (std::size_t i = 0; i < t.segments.size(); ++i) {
    auto longer = t;
    longer.segments[i].tokens.push_back("extra");
    longer.segments[i].logprobs.push_back(0.0);
    CHECK(token_accounting(longer).total_input_tokens >= base.total_input_tokens);
  }
}

TEST_CASE("token accounting follows the single-context closed form") {
  testing::Toy toy;
  const auto t = run_rollout(toy.policy, testing::Toy::kQuestion,
                             {toy.kg, toy.index, toy.encoder}, {});
  const auto prompt = whitespace_tokenize(
      render_system_prompt(t.query, PipelineVariant::full)).size();
  CHECK(t.prompt_tokens == prompt);
  const auto u = token_accounting(t);
  std::size_t seg[5];
  for (int i = 0; i < 5; ++i) seg[i] = t.segments[i].tokens.size();
  CHECK(u.policy_calls == 3);
  CHECK(u.per_call == std::vector<std::size_t>{
                          prompt, prompt + seg[0] + seg[1],
                          prompt + seg[0] + seg[1] + seg[2] + seg[3]});
  CHECK(u.total_input_tokens ==
        3 * prompt + 2 * (seg[0] + seg[1]) + seg[2] + seg[3]);
  CHECK(u.final_context_tokens == prompt + t.token_count());
  CHECK(token_accounting(t, render_system_prompt(t.query, PipelineVariant::full))
            .total_input_tokens == u.total_input_tokens);
}

TEST_CASE("report JSON layout") {
  const std::vector<QaDataset> sets = {numbered("a", 2)};
  std::vector<Trajectory> ts = {answered("a/0", "no")};
  const auto j = to_json(evaluate(ts, sets));
  CHECK(j["per_dataset"]["a"]["n"] == 2);
  CHECK(j["per_dataset"]["a"]["correct"] == 1);
  CHECK(j["weighted_average"] == 0.5);
  CHECK(j["token_stats"]["per_question"].size() == 1);
}

TEST_CASE("dataset loading") {
  const auto path = std::filesystem::temp_directory_path() / "sake_ds.ndjson";
  {
    std::ofstream f(path);
    f << R"({"id": 7, "question": "Q?", "answer": " YES ", "choices": ["yes", "no"]})"
      << "\n\n"
      << R"({"id": "b", "question": "R?", "answer": "No"})" << "\n";
  }
  const auto ds = load_dataset(path, "x");
  REQUIRE(ds.items.size() == 2);
  CHECK(ds.items[0].id == "7");
  CHECK(ds.items[0].gold == "yes");
  CHECK(ds.items[0].choices->size() == 2);
  CHECK(ds.items[1].gold == "no");
  CHECK_THROWS(dataset_from_json({json{{"id", "a"}, {"question", "q"},
                                       {"answer", "x"}},
                                  json{{"id", "a"}, {"question", "q"},
                                       {"answer", "y"}}},
                                 "dup"));
  std::filesystem::remove(path);
}

TEST_CASE("index file round-trips graph and embeddings") {
  testing::Toy toy;
  const auto path = std::filesystem::temp_directory_path() / "sake_index.json";
  save_index(path, toy.kg, &toy.index);
  const auto back = load_index(path);
  CHECK(back.kg == toy.kg);
  REQUIRE(back.entities.has_value());
  CHECK(*back.entities == toy.index);
  save_index(path, toy.kg, nullptr);
  CHECK_FALSE(load_index(path).entities.has_value());
  std::filesystem::remove(path);
}
