// SPDX-License-Identifier: Apache-2.0
// Shared fixtures, random generators and brute-force oracles for the tests.
#pragma once

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <chrono>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "sake/embedding.hpp"
#include "sake/kg_store.hpp"
#include "sake/labels.hpp"
#include "sake/policy.hpp"
#include "sake/tools.hpp"

namespace sake::testing {

using Rng = std::mt19937_64;

inline std::filesystem::path data_dir() { return SAKE_DATA_DIR; }
inline std::filesystem::path toy_dir() { return data_dir() / "toy"; }

inline std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline std::string entity_name(std::size_t i) {
  return "e" + std::to_string(i);
}

// Random graph over at most `max_nodes` entities and `max_edges` draws.
inline KnowledgeGraph random_kg(Rng& rng, std::size_t max_nodes,
                                std::size_t max_edges) {
  const auto nodes = uniform(rng, 2, max_nodes);
  const auto draws = uniform(rng, 1, max_edges);
  const auto relations = uniform(rng, 1, 6);
  std::vector<Triplet> edges;
  for (std::size_t i = 0; i < draws; ++i) {
    edges.push_back({entity_name(uniform(rng, 0, nodes - 1)),
                     "r" + std::to_string(uniform(rng, 0, relations - 1)),
                     entity_name(uniform(rng, 0, nodes - 1))});
  }
  return KnowledgeGraph::from_triplets(std::move(edges));
}

// Random groups whose members are drawn from the graph's entities plus a few
// labels the graph does not contain.
inline std::vector<EntityGroup> random_groups(Rng& rng,
                                              const KnowledgeGraph& kg,
                                              std::size_t max_groups) {
  const auto& ents = kg.entities();
  std::vector<EntityGroup> groups;
  const auto n = uniform(rng, 0, max_groups);
  for (std::size_t g = 0; g < n; ++g) {
    EntityGroup group;
    group.index = static_cast<int>(g + 1);
    std::set<std::string> seen;
    const auto size = uniform(rng, 1, 6);
    for (std::size_t k = 0; k < size; ++k) {
      std::string m = uniform(rng, 0, 9) == 0
                          ? "missing" + std::to_string(uniform(rng, 0, 3))
                          : ents[uniform(rng, 0, ents.size() - 1)];
      if (seen.insert(m).second) group.members.push_back(m);
    }
    group.seed = group.members.front();
    groups.push_back(std::move(group));
  }
  return groups;
}

inline std::set<int> random_selection(Rng& rng, std::size_t group_count) {
  std::set<int> s;
  const auto picks = uniform(rng, 0, group_count + 2);
  for (std::size_t i = 0; i < picks; ++i) {
    // Occasionally out of range to exercise the drop path.
    s.insert(static_cast<int>(uniform(rng, 0, group_count + 1)));
  }
  return s;
}

// Cross-group predicate checked edge by edge over the whole graph.
inline std::vector<Triplet> brute_force_tool2(
    const std::vector<EntityGroup>& groups, const std::set<int>& selected,
    const KnowledgeGraph& kg) {
  std::vector<const EntityGroup*> chosen;
  for (const auto& g : groups) {
    if (selected.count(g.index)) chosen.push_back(&g);
  }
  auto in = [](const EntityGroup& g, const std::string& label) {
    return std::find(g.members.begin(), g.members.end(), label) !=
           g.members.end();
  };
  std::vector<Triplet> out;
  for (const auto& e : kg.edges()) {
    bool hit = false;
    for (std::size_t i = 0; i < chosen.size() && !hit; ++i) {
      for (std::size_t j = 0; j < chosen.size() && !hit; ++j) {
        if (i != j && in(*chosen[i], e.head) && in(*chosen[j], e.tail)) {
          hit = true;
        }
      }
    }
    if (hit) out.push_back(e);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Scores every label, sorts the whole list, then truncates.
inline std::vector<Neighbor> brute_force_top_p(const EntityIndex& index,
                                               const std::string& query_label,
                                               const std::vector<double>& q,
                                               std::size_t p) {
  std::vector<Neighbor> all;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index.labels()[i] == query_label) continue;
    double s = 0.0;
    const auto row = index.row(i);
    for (std::size_t k = 0; k < q.size(); ++k) s += q[k] * row[k];
    s = std::clamp(s, -1.0, 1.0);
    all.push_back({index.labels()[i], s});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.label < b.label;
  });
  if (all.size() > p) all.resize(p);
  return all;
}

struct Toy {
  KnowledgeGraph kg;
  TableEncoder encoder;
  EntityIndex index;
  ScriptedPolicy policy;

  static constexpr const char* kQuestion =
      "Is melatonin effective for treating insomnia?";

  Toy()
      : kg(ingest_kg_file(toy_dir() / "toy_kg.tsv", TripletFormat::tsv)),
        encoder(TableEncoder::load(toy_dir() / "toy_embeddings.json")),
        index(build_index(kg, encoder)),
        policy(ScriptedPolicy::load(toy_dir() / "toy_script.json")) {}
};

// Local HTTP server on a free port for exercising the remote clients.
class StubServer {
 public:
  explicit StubServer(std::size_t threads = 8) {
    server_.new_task_queue = [threads] {
      return new httplib::ThreadPool(threads);
    };
    port_ = server_.bind_to_any_port("127.0.0.1");
  }
  ~StubServer() { stop(); }

  httplib::Server& http() { return server_; }
  int port() const { return port_; }
  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }

  void start() {
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

 private:
  httplib::Server server_;
  int port_ = -1;
  std::thread thread_;
};

}  // namespace sake::testing

namespace sake::testing {

// Builds plausible but noisy turn texts: tags are sometimes missing, entity
// lists mix graph labels with unknown words, selections contain junk.
inline std::string random_turn_text(Rng& rng, int turn,
                                    const std::vector<std::string>& vocab) {
  auto word = [&] { return vocab[uniform(rng, 0, vocab.size() - 1)]; };
  auto words = [&](std::size_t lo, std::size_t hi) {
    std::string s;
    for (std::size_t n = uniform(rng, lo, hi); n > 0; --n) s += word() + " ";
    return s;
  };
  const bool well_formed = uniform(rng, 0, 4) != 0;
  std::string s = "<think> " + words(0, 12) + "</think>\n";
  switch (turn) {
    case 1: {
      s += "<extract_entities> ";
      for (std::size_t n = uniform(rng, 0, 4); n > 0; --n) {
        s += word() + (n > 1 ? " | " : " ");
      }
      if (well_formed) s += "</extract_entities>";
      s += words(0, 5);  // text past the stop marker is never emitted
      break;
    }
    case 2: {
      s += "<filtered_groups> ";
      for (std::size_t n = uniform(rng, 0, 4); n > 0; --n) {
        s += (uniform(rng, 0, 5) == 0 ? std::string("x")
                                      : std::to_string(uniform(rng, 0, 5))) +
             " | ";
      }
      if (well_formed) s += "</filtered_groups>";
      break;
    }
    default: {
      s += "<associative_reasoning> " + words(1, 20) +
           "</associative_reasoning>\n<answer> " +
           (uniform(rng, 0, 1) ? "yes" : "no") + " </answer>";
      if (!well_formed) s.resize(uniform(rng, 0, s.size()));
      break;
    }
  }
  return s;
}

// Scripted policy whose turns are random but fixed per (seed, query, turn).
inline ScriptedPolicy random_policy(std::uint64_t seed,
                                    std::vector<std::string> vocab) {
  return ScriptedPolicy([seed, vocab = std::move(vocab)](
                            const GenerationRequest& req) {
    Rng rng(seed ^ (std::hash<std::string>{}(req.query) * 31 + req.turn));
    return random_turn_text(rng, req.turn, vocab);
  });
}

inline std::vector<std::string> toy_vocab() {
  return {"melatonin", "insomnia", "hormone", "mental_disorder",
          "sleep_disorder", "gene", "cell", "steroid", "Body Part",
          "unknown_thing", "treats", "because", "the", "and"};
}

}  // namespace sake::testing

#include "sake/grpo.hpp"
#include "sake/rollout.hpp"

namespace sake::testing {

// Trajectory with random alternating model/tool segments; only the token
// layout and mask matter for the objective.
inline Trajectory synthetic_trajectory(Rng& rng, const std::string& query) {
  Trajectory t;
  t.query = query;
  const auto segments = uniform(rng, 1, 5);
  for (std::size_t k = 0; k < segments; ++k) {
    Segment s;
    s.kind = k % 2 == 0 ? SegmentKind::model_turn : SegmentKind::tool_output;
    s.id = static_cast<int>(k / 2 + 1);
    for (std::size_t n = uniform(rng, 0, 12); n > 0; --n) {
      s.tokens.push_back("t" + std::to_string(n) + " ");
      s.text += s.tokens.back();
      if (s.kind == SegmentKind::model_turn) s.logprobs.push_back(-0.5);
    }
    if (s.kind == SegmentKind::model_turn) {
      s.stop_reason = StopReason::end_of_sequence;
    }
    t.mask.insert(t.mask.end(), s.tokens.size(),
                  s.kind == SegmentKind::model_turn ? 1 : 0);
    t.segments.push_back(std::move(s));
  }
  return t;
}

inline std::vector<double> random_logprobs(Rng& rng, std::size_t n,
                                           double lo = -6.0) {
  std::uniform_real_distribution<double> u(lo, -1e-3);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Group of 2..8 synthetic members. Current log-probs stay near old ones so
// both clipped and unclipped ratios occur.
inline RolloutGroup random_group(Rng& rng) {
  RolloutGroup g;
  g.query = "q";
  const auto n = uniform(rng, 2, 8);
  std::uniform_real_distribution<double> jitter(-0.4, 0.4);
  for (std::size_t k = 0; k < n; ++k) {
    GroupMember m;
    m.trajectory = synthetic_trajectory(rng, g.query);
    const auto len = m.trajectory.token_count();
    m.logprobs_old = random_logprobs(rng, len);
    m.logprobs_current = m.logprobs_old;
    for (auto& x : m.logprobs_current) x = std::min(-1e-6, x + jitter(rng));
    m.logprobs_ref = random_logprobs(rng, len);
    m.reward = static_cast<double>(uniform(rng, 0, 1));
    if (uniform(rng, 0, 3) == 0) m.reward = uniform(rng, 0, 100) / 10.0;
    g.members.push_back(std::move(m));
  }
  return g;
}

}  // namespace sake::testing

namespace sake::testing {

// Index over labels e0..e{n-1}. Rows are drawn from a small pool of vectors so
// that exact score ties are common.
inline EntityIndex random_index(Rng& rng, std::size_t n, std::size_t dim) {
  std::vector<Embedding> pool;
  const auto pool_size = uniform(rng, 1, std::max<std::size_t>(1, n / 2));
  std::normal_distribution<double> gauss;
  for (std::size_t i = 0; i < pool_size; ++i) {
    Embedding v(dim);
    do {
      for (auto& x : v) x = std::round(gauss(rng) * 4.0) / 4.0;
    } while (!l2_normalize(v));
    pool.push_back(v);
  }
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(entity_name(i));
  std::sort(labels.begin(), labels.end());
  std::vector<double> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = pool[uniform(rng, 0, pool.size() - 1)];
    rows.insert(rows.end(), v.begin(), v.end());
  }
  return EntityIndex(labels, dim, rows, "random");
}

}  // namespace sake::testing

namespace sake::testing {

// Straight transcription of the objective, kept independent of the library:
// advantages use a two-pass population variance over a copy, the ratio and
// clip are spelled out with branches.
struct Reference {
  double loss;
  double kl;
  std::vector<double> advantages;
  std::vector<std::vector<double>> terms;
};

inline Reference reference_objective(const RolloutGroup& g, double eps, double beta,
                    double floor) {
  Reference out;
  const double n = static_cast<double>(g.members.size());
  double mean = 0.0;
  for (const auto& m : g.members) mean += m.reward / n;
  double var = 0.0;
  for (const auto& m : g.members) {
    var += (m.reward - mean) * (m.reward - mean) / n;
  }
  const double sd = std::sqrt(var) < floor ? floor : std::sqrt(var);
  double term_sum = 0.0, kl_sum = 0.0;
  std::size_t count = 0;
  for (const auto& m : g.members) {
    const double a = (m.reward - mean) / sd;
    out.advantages.push_back(a);
    out.terms.emplace_back();
    for (std::size_t i = 0; i < m.trajectory.mask.size(); ++i) {
      if (!m.trajectory.mask[i]) continue;
      const double rho = std::exp(m.logprobs_current[i] - m.logprobs_old[i]);
      double clipped = rho;
      if (clipped < 1.0 - eps) clipped = 1.0 - eps;
      if (clipped > 1.0 + eps) clipped = 1.0 + eps;
      const double unclipped_obj = rho * a;
      const double clipped_obj = clipped * a;
      const double term =
          a == 0.0 ? 0.0
                   : (unclipped_obj < clipped_obj ? unclipped_obj : clipped_obj);
      out.terms.back().push_back(term);
      term_sum += term;
      const double d = m.logprobs_ref[i] - m.logprobs_current[i];
      kl_sum += std::exp(d) - d - 1.0;
      ++count;
    }
  }
  out.kl = count ? kl_sum / count : 0.0;
  out.loss = (count ? -term_sum / count : 0.0) + beta * out.kl;
  return out;
}

inline bool rel_close(double a, double b, double tol = 1e-10) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace sake::testing
