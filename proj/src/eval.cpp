// SPDX-License-Identifier: Apache-2.0
#include "sake/eval.hpp"

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include "sake/json_io.hpp"
#include "sake/labels.hpp"
#include "sake/policy.hpp"
#include "sake/reward.hpp"

namespace sake {

void QaDataset::validate() const {
  std::set<std::string> seen;
  for (const auto& item : items) {
    if (!seen.insert(item.id).second) {
      throw std::invalid_argument(name + ": duplicate id '" + item.id + "'");
    }
    if (item.gold.empty()) {
      throw std::invalid_argument(name + ": empty answer for id '" + item.id +
                                  "'");
    }
  }
}

QaDataset dataset_from_json(const std::vector<nlohmann::json>& records,
                            std::string name) {
  QaDataset ds;
  ds.name = std::move(name);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    try {
      QaItem item;
      const auto& id = r.at("id");
      item.id = id.is_string() ? id.get<std::string>() : id.dump();
      item.question = r.at("question").get<std::string>();
      item.gold = normalize_answer(r.at("answer").get<std::string>());
      if (r.contains("choices") && !r["choices"].is_null()) {
        item.choices = r["choices"].get<std::vector<std::string>>();
      }
      ds.items.push_back(std::move(item));
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(ds.name + ": record " +
                                  std::to_string(i + 1) + ": " + e.what());
    }
  }
  ds.validate();
  return ds;
}

QaDataset load_dataset(const std::filesystem::path& path, std::string name) {
  return dataset_from_json(read_ndjson_file(path), std::move(name));
}

std::pair<QaDataset, QaDataset> split_dataset(const QaDataset& ds,
                                              double train_fraction,
                                              std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
  const std::size_t n = ds.items.size();
  if (n < 2) throw std::invalid_argument("need at least 2 items to split");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(order[i], order[j]);
  }
  auto train_n = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * train_fraction));
  train_n = std::clamp<std::size_t>(train_n, 1, n - 1);

  QaDataset train{ds.name + "/train", {}};
  QaDataset test{ds.name + "/test", {}};
  for (std::size_t i = 0; i < n; ++i) {
    (i < train_n ? train : test).items.push_back(ds.items[order[i]]);
  }
  return {std::move(train), std::move(test)};
}

TokenUsage token_accounting(const Trajectory& t, std::size_t prompt_tokens) {
  TokenUsage u;
  std::size_t context = prompt_tokens;
  for (const auto& s : t.segments) {
    if (s.kind == SegmentKind::model_turn) {
      u.per_call.push_back(context);
      u.total_input_tokens += context;
    }
    context += s.tokens.size();
  }
  u.policy_calls = u.per_call.size();
  u.final_context_tokens = context;
  return u;
}

TokenUsage token_accounting(const Trajectory& t,
                            std::string_view system_prompt) {
  return token_accounting(t, whitespace_tokenize(system_prompt).size());
}

TokenUsage token_accounting(const Trajectory& t) {
  return token_accounting(t, t.prompt_tokens);
}

EvalReport evaluate(std::span<const Trajectory> trajectories,
                    std::span<const QaDataset> datasets) {
  std::map<std::string, std::size_t> id_owners;
  for (const auto& ds : datasets) {
    for (const auto& item : ds.items) ++id_owners[item.id];
  }

  // (dataset index, item index) for every trajectory that maps onto an item.
  std::map<std::pair<std::size_t, std::size_t>, const Trajectory*> answered;
  for (const auto& t : trajectories) {
    for (std::size_t d = 0; d < datasets.size(); ++d) {
      const auto& ds = datasets[d];
      for (std::size_t i = 0; i < ds.items.size(); ++i) {
        const auto& id = ds.items[i].id;
        const bool match = t.id == ds.name + "/" + id ||
                           (t.id == id && id_owners[id] == 1);
        if (!match) continue;
        if (!answered.emplace(std::pair{d, i}, &t).second) {
          throw std::invalid_argument("duplicate trajectory for " + ds.name +
                                      "/" + id);
        }
      }
    }
  }

  EvalReport report;
  std::size_t total_correct = 0;
  std::size_t total_n = 0;
  double token_sum = 0.0;
  double final_sum = 0.0;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    const auto& ds = datasets[d];
    DatasetScore score{ds.name, ds.items.size(), 0, 0.0};
    for (std::size_t i = 0; i < ds.items.size(); ++i) {
      const auto it = answered.find({d, i});
      if (it == answered.end()) continue;
      const Trajectory& t = *it->second;
      score.correct += accuracy_reward(t.model_text(), ds.items[i].gold);
      const auto usage = token_accounting(t);
      report.per_question.push_back({ds.name, ds.items[i].id,
                                     usage.total_input_tokens,
                                     usage.final_context_tokens});
      token_sum += static_cast<double>(usage.total_input_tokens);
      final_sum += static_cast<double>(usage.final_context_tokens);
    }
    score.accuracy = score.n == 0 ? 0.0
                                  : static_cast<double>(score.correct) /
                                        static_cast<double>(score.n);
    total_correct += score.correct;
    total_n += score.n;
    report.per_dataset.push_back(std::move(score));
  }
  report.weighted_average =
      total_n == 0 ? 0.0
                   : static_cast<double>(total_correct) /
                         static_cast<double>(total_n);
  if (!report.per_question.empty()) {
    const auto q = static_cast<double>(report.per_question.size());
    report.mean_total_input_tokens = token_sum / q;
    report.mean_final_context_tokens = final_sum / q;
  }
  return report;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json per_dataset = nlohmann::json::object();
  for (const auto& s : report.per_dataset) {
    per_dataset[s.name] = {
        {"accuracy", s.accuracy}, {"n", s.n}, {"correct", s.correct}};
  }
  nlohmann::json per_question = nlohmann::json::array();
  for (const auto& q : report.per_question) {
    per_question.push_back({{"dataset", q.dataset},
                            {"id", q.id},
                            {"total_input_tokens", q.total_input_tokens},
                            {"final_context_tokens", q.final_context_tokens}});
  }
  return {{"per_dataset", per_dataset},
          {"weighted_average", report.weighted_average},
          {"token_stats",
           {{"mean_total_input_tokens", report.mean_total_input_tokens},
            {"mean_final_context_tokens", report.mean_final_context_tokens},
            {"per_question", per_question}}}};
}

}  // namespace sake
