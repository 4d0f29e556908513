// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sake/config.hpp"
#include "sake/eval.hpp"
#include "sake/grpo.hpp"
#include "sake/index_file.hpp"
#include "sake/json_io.hpp"
#include "sake/labels.hpp"
#include "sake/reward.hpp"
#include "sake/rollout.hpp"
#include "sake/server.hpp"

namespace sake {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Bad flags, missing files, malformed configuration: exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Anything thrown while setting up a command is a configuration problem.
template <typename F>
auto setup(F&& f) {
  try {
    return f();
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw UsageError(what + " not found: " + p.string());
}

struct ConfigFile {
  json doc = json::object();
  fs::path base;

  static ConfigFile load(const std::string& path) {
    ConfigFile c;
    if (path.empty()) return c;
    require_file(path, "config file");
    std::ifstream in(path);
    c.doc = json::parse(in, nullptr, false);
    if (c.doc.is_discarded() || !c.doc.is_object()) {
      throw UsageError("config file is not a JSON object: " + path);
    }
    c.base = fs::path(path).parent_path();
    return c;
  }

  // Flag value if given, else the config key resolved against the config
  // directory, else empty.
  std::string path(const std::string& flag, const char* key) const {
    if (!flag.empty()) return flag;
    if (!doc.contains(key)) return {};
    fs::path p(doc[key].get<std::string>());
    return (p.is_relative() && !base.empty() ? base / p : p).string();
  }

  json section(const char* key, json fallback = json::object()) const {
    return doc.contains(key) ? doc[key] : fallback;
  }
};

struct Graph {
  KnowledgeGraph kg;
  std::unique_ptr<Encoder> encoder;
  std::optional<EntityIndex> index;
};

Graph load_graph(const std::string& index_path, const std::string& kg_path,
                 const std::string& format, const json& encoder_spec,
                 const fs::path& base, spdlog::logger& log) {
  Graph g;
  g.encoder = make_encoder(encoder_spec, base);
  if (!index_path.empty()) {
    require_file(index_path, "index file");
    auto bundle = load_index(index_path);
    g.kg = std::move(bundle.kg);
    if (bundle.entities &&
        bundle.entities->encoder_name() == g.encoder->name() &&
        bundle.entities->dimension() == g.encoder->dimension()) {
      g.index = std::move(bundle.entities);
    } else if (bundle.entities) {
      log.warn("index embeddings from '{}' do not match encoder '{}'; "
               "re-encoding",
               bundle.entities->encoder_name(), g.encoder->name());
    }
  } else if (!kg_path.empty()) {
    require_file(kg_path, "kg file");
    g.kg = ingest_kg_file(kg_path, parse_triplet_format(format));
  } else {
    throw UsageError("one of --index or --kg is required");
  }
  if (!g.index) g.index = build_index(g.kg, *g.encoder);
  return g;
}

RolloutConfig rollout_config(const ConfigFile& cfg, std::optional<std::size_t> p,
                             const std::string& variant,
                             std::optional<std::size_t> max_tokens) {
  RolloutConfig rc = cfg.section("rollout").get<RolloutConfig>();
  if (p) rc.p = *p;
  if (!variant.empty()) rc.variant = parse_variant(variant);
  if (max_tokens) rc.max_tokens_per_turn = *max_tokens;
  rc.validate();
  return rc;
}

std::unique_ptr<Policy> load_policy(const ConfigFile& cfg,
                                    const std::string& script) {
  json spec;
  fs::path base = cfg.base;
  if (!script.empty()) {
    spec = {{"type", "scripted"}, {"script", script}};
    base.clear();
  } else if (cfg.doc.contains("policy")) {
    spec = cfg.doc["policy"];
  } else {
    throw UsageError("no policy configured (use --script or a config file)");
  }
  if (spec.value("type", "") == "scripted" && spec.contains("script")) {
    fs::path p(spec["script"].get<std::string>());
    require_file(p.is_relative() && !base.empty() ? base / p : p,
                 "policy script");
  }
  return make_policy(spec, base);
}

RewardSchedule schedule_from(const ConfigFile& cfg,
                             std::optional<std::uint64_t> s1,
                             std::optional<std::uint64_t> s2) {
  const auto sec = cfg.section("schedule");
  return RewardSchedule(s1.value_or(sec.value("s1", RewardSchedule::kDefaultS1)),
                        s2.value_or(sec.value("s2", RewardSchedule::kDefaultS2)));
}

json breakdown_json(const RewardBreakdown& r) {
  return {{"format", r.format},
          {"accuracy", r.accuracy},
          {"phase", r.phase},
          {"total", r.total}};
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception
// is rethrown after all workers finish.
template <typename F>
void parallel_for(std::size_t n, std::size_t workers, F&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

std::vector<QaDataset> load_datasets(const std::vector<std::string>& paths) {
  std::vector<QaDataset> out;
  for (const auto& p : paths) {
    require_file(p, "dataset file");
    out.push_back(load_dataset(p, fs::path(p).stem().string()));
  }
  return out;
}

// Gold answers keyed by "<dataset>/<id>" and by bare id when unambiguous.
std::map<std::string, std::string> gold_table(
    const std::vector<QaDataset>& datasets) {
  std::map<std::string, std::string> table;
  std::map<std::string, int> bare_count;
  for (const auto& ds : datasets) {
    for (const auto& item : ds.items) ++bare_count[item.id];
  }
  for (const auto& ds : datasets) {
    for (const auto& item : ds.items) {
      table[ds.name + "/" + item.id] = item.gold;
      if (bare_count[item.id] == 1) table[item.id] = item.gold;
    }
  }
  return table;
}

std::vector<std::pair<json, Trajectory>> read_raw_trajectories(
    const std::string& path) {
  require_file(path, "trajectory file");
  std::vector<std::pair<json, Trajectory>> out;
  for (auto& j : read_ndjson_file(path)) {
    Trajectory t = j.get<Trajectory>();
    out.emplace_back(std::move(j), std::move(t));
  }
  return out;
}

struct GoldSource {
  std::map<std::string, std::string> table;
  std::optional<std::string> fallback;

  std::optional<std::string> lookup(const json& raw,
                                    const Trajectory& t) const {
    if (raw.contains("gold") && raw["gold"].is_string()) {
      return normalize_answer(raw["gold"].get<std::string>());
    }
    if (auto it = table.find(t.id); it != table.end()) return it->second;
    if (fallback) return normalize_answer(*fallback);
    return std::nullopt;
  }
};

std::atomic<ToolServer*> g_running_server{nullptr};

void handle_stop_signal(int) {
  if (auto* s = g_running_server.load()) s->stop();
}

void print_segment_block(std::ostream& out, const std::string& label,
                         const std::string& body) {
  out << "--- " << label << " ---\n" << body;
  if (body.empty() || body.back() != '\n') out << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
  spdlog::logger log("sake", sink);
  log.set_pattern("%l: %v");
  log.set_level(spdlog::level::warn);

  CLI::App app{"Knowledge-graph tool engine for three-turn agentic rollouts"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  std::string config_path;
  std::string index_path, kg_path, format = "tsv";
  std::string question, id, script, variant, gold, output;
  std::optional<std::size_t> p, max_tokens;
  std::optional<std::uint64_t> step, s1, s2;
  std::size_t workers = 1;
  std::vector<std::string> dataset_paths;
  std::string trajectories_path, report_path, logprobs_path, batch_path;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
  };
  auto add_graph = [&](CLI::App* sub) {
    sub->add_option("--index", index_path, "Index written by `ingest`");
    sub->add_option("--kg", kg_path, "Triplet file (ingested on the fly)");
    sub->add_option("--format", format, "Triplet format: tsv or csv");
  };
  auto add_rollout = [&](CLI::App* sub) {
    sub->add_option("--p", p, "Neighbors per entity group");
    sub->add_option("--variant", variant,
                    "full, no_filtering, precomputed_retrieval, "
                    "no_extrapolation");
    sub->add_option("--max-tokens", max_tokens, "Token budget per turn");
    sub->add_option("--script", script, "Scripted policy file");
  };
  auto add_schedule = [&](CLI::App* sub) {
    sub->add_option("--step", step, "Training step for the reward phase");
    sub->add_option("--s1", s1, "First phase boundary");
    sub->add_option("--s2", s2, "Second phase boundary");
  };

  auto* ingest = app.add_subcommand("ingest", "Build an index from triplets");
  add_config(ingest);
  std::string input;
  bool no_embeddings = false;
  ingest->add_option("--input", input, "Triplet file")->required();
  ingest->add_option("--format", format, "tsv or csv");
  ingest->add_option("--output", output, "Index path")->required();
  ingest->add_flag("--no-embeddings", no_embeddings,
                   "Store only the graph, not entity vectors");

  auto* serve = app.add_subcommand("serve", "Run the HTTP tool server");
  add_config(serve);
  add_graph(serve);
  std::string host, auth_token;
  std::optional<int> port;
  std::optional<std::size_t> concurrency;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--p", p, "Default neighbors per entity group");
  serve->add_option("--concurrency", concurrency, "Concurrent request limit");
  serve->add_option("--script", script, "Scripted policy for /rollout");

  auto* rollout = app.add_subcommand("rollout", "Generate trajectories");
  add_config(rollout);
  add_graph(rollout);
  add_rollout(rollout);
  rollout->add_option("--question", question, "Single question");
  rollout->add_option("--id", id, "Trajectory id for --question");
  rollout->add_option("--batch", batch_path,
                      "Dataset NDJSON {id, question, answer}");
  rollout->add_option("--workers", workers, "Concurrent rollouts for --batch");
  rollout->add_option("--output", output, "Write NDJSON here, not stdout");

  auto* replay = app.add_subcommand("reward-replay",
                                    "Score stored trajectories");
  add_config(replay);
  add_schedule(replay);
  replay->add_option("--trajectories", trajectories_path)->required();
  replay->add_option("--dataset", dataset_paths, "Gold answers (repeatable)");
  replay->add_option("--gold", gold, "Gold answer for every trajectory");

  auto* eval = app.add_subcommand("eval", "Accuracy and token report");
  add_config(eval);
  eval->add_option("--trajectories", trajectories_path)->required();
  eval->add_option("--dataset", dataset_paths, "Dataset NDJSON (repeatable)")
      ->required();
  eval->add_option("--report", report_path, "Also write the report here");

  auto* demo = app.add_subcommand("demo", "Run and print one rollout");
  add_config(demo);
  add_graph(demo);
  add_rollout(demo);
  add_schedule(demo);
  demo->add_option("--question", question)->required();
  demo->add_option("--gold", gold, "Gold answer for the reward");

  auto* grpo = app.add_subcommand("grpo", "Group objective report");
  add_config(grpo);
  add_schedule(grpo);
  grpo->add_option("--trajectories", trajectories_path)->required();
  grpo->add_option("--logprobs", logprobs_path,
                   "NDJSON {id, logprobs_current, logprobs_old, "
                   "logprobs_ref, reward}")
      ->required();
  grpo->add_option("--dataset", dataset_paths, "Gold answers for rewards");
  grpo->add_option("--gold", gold, "Gold answer for every trajectory");
  std::optional<double> clip_epsilon, kl_beta, std_floor;
  std::string aggregation, kl_mode;
  grpo->add_option("--clip-epsilon", clip_epsilon);
  grpo->add_option("--kl-beta", kl_beta);
  grpo->add_option("--std-floor", std_floor);
  grpo->add_option("--aggregation", aggregation,
                   "token_mean or sequence_mean");
  grpo->add_option("--kl-mode", kl_mode, "per_token or per_sequence");
  grpo->add_option("--workers", workers, "Groups processed concurrently");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 1;
  }
  if (verbose) log.set_level(spdlog::level::debug);

  try {
    const auto cfg = setup([&] { return ConfigFile::load(config_path); });
    const auto encoder_spec = cfg.section("encoder", {{"type", "hash"}});

    if (*ingest) {
      require_file(input, "kg file");
      auto kg = setup([&] {
        return ingest_kg_file(input, parse_triplet_format(format));
      });
      std::optional<EntityIndex> index;
      std::string encoder_name;
      if (!no_embeddings) {
        auto enc = setup([&] { return make_encoder(encoder_spec, cfg.base); });
        index = build_index(kg, *enc);
        encoder_name = enc->name();
      }
      save_index(output, kg, index ? &*index : nullptr);
      const auto s = kg.stats();
      write_ndjson_line(
          out, {{"output", output},
                {"stats",
                 {{"node_count", s.node_count},
                  {"edge_count", s.edge_count},
                  {"relation_count", s.relation_count}}},
                {"entities_indexed", index ? index->size() : 0},
                {"encoder", index ? json(encoder_name) : json()}});
      return 0;
    }

    if (*serve) {
      auto sc = setup([&] {
        auto c = ServerConfig::from_json(cfg.doc, cfg.base);
        c.apply_environment();
        if (!index_path.empty()) c.index_path = index_path;
        if (!host.empty()) c.host = host;
        if (port) c.port = *port;
        if (p) c.rollout.p = *p;
        if (concurrency) c.concurrency_limit = *concurrency;
        c.validate();
        return c;
      });
      auto g = setup([&] {
        return load_graph(sc.index_path.string(), cfg.path(kg_path, "kg"),
                          format, sc.encoder, cfg.base, log);
      });
      std::unique_ptr<Policy> policy;
      if (!script.empty() || sc.policy) {
        policy = setup([&] { return load_policy(cfg, script); });
      }
      ToolService service(g.kg, *g.index, *g.encoder, policy.get(),
                          sc.rollout);
      ToolServer server(service, sc);
      const int bound = server.bind();
      write_ndjson_line(out, {{"listening", sc.host + ":" +
                                                std::to_string(bound)}});
      out.flush();
      g_running_server = &server;
      std::signal(SIGINT, handle_stop_signal);
      std::signal(SIGTERM, handle_stop_signal);
      server.listen();
      g_running_server = nullptr;
      return 0;
    }

    if (*rollout || *demo) {
      if (*rollout && question.empty() == batch_path.empty()) {
        throw UsageError("exactly one of --question or --batch is required");
      }
      auto g = setup([&] {
        return load_graph(cfg.path(index_path, "index"),
                          cfg.path(kg_path, "kg"), format, encoder_spec,
                          cfg.base, log);
      });
      const auto rc =
          setup([&] { return rollout_config(cfg, p, variant, max_tokens); });
      const auto policy = setup([&] { return load_policy(cfg, script); });
      const RolloutResources res{g.kg, *g.index, *g.encoder};

      if (*demo) {
        const auto schedule = setup([&] { return schedule_from(cfg, s1, s2); });
        const auto at = step.value_or(cfg.doc.value("step", schedule.s2()));
        Trajectory t;
        try {
          t = run_rollout(*policy, question, res, rc, "demo");
        } catch (const RolloutError& e) {
          log.error("policy backend failed: {}", e.what());
          return 2;
        }
        out << "Question: " << question << "\n";
        for (const auto& seg : t.segments) {
          const bool model = seg.kind == SegmentKind::model_turn;
          print_segment_block(
              out, (model ? "Turn " : "Tool ") + std::to_string(seg.id),
              seg.text);
        }
        out << "--- Answer ---\n" << t.answer.value_or("(none)") << "\n";
        if (gold.empty()) {
          out << "--- Reward ---\n(no --gold given)\n";
        } else {
          const auto r = curriculum_reward(t.model_text(),
                                           normalize_answer(gold), at,
                                           schedule);
          out << "--- Reward (step " << at << ") ---\n"
              << breakdown_json(r).dump() << "\n";
        }
        for (const auto& w : t.warnings) log.warn("{}", w);
        return 0;
      }

      std::vector<std::pair<std::string, std::string>> jobs;  // id, question
      if (!batch_path.empty()) {
        require_file(batch_path, "batch file");
        const auto ds = setup([&] {
          return load_dataset(batch_path, fs::path(batch_path).stem().string());
        });
        for (const auto& item : ds.items) {
          jobs.emplace_back(ds.name + "/" + item.id, item.question);
        }
      } else {
        jobs.emplace_back(id, question);
      }
      std::vector<std::optional<Trajectory>> results(jobs.size());
      std::atomic<int> failures{0};
      parallel_for(jobs.size(), workers, [&](std::size_t i) {
        try {
          results[i] = run_rollout(*policy, jobs[i].second, res, rc,
                                   jobs[i].first);
          log.debug("rollout {} done", jobs[i].first);
        } catch (const RolloutError& e) {
          ++failures;
          log.error("rollout {} failed: {}", jobs[i].first, e.what());
        }
      });
      std::ofstream file;
      if (!output.empty()) {
        file.open(output);
        if (!file) throw UsageError("cannot write " + output);
      }
      std::ostream& sinkout = output.empty() ? out : file;
      for (const auto& r : results) {
        if (r) write_ndjson_line(sinkout, json(*r));
      }
      return failures > 0 ? 2 : 0;
    }

    if (*replay) {
      const auto schedule = setup([&] { return schedule_from(cfg, s1, s2); });
      const auto rows = setup([&] {
        return read_raw_trajectories(trajectories_path);
      });
      GoldSource golds{gold_table(setup([&] {
                         return load_datasets(dataset_paths);
                       })),
                       gold.empty() ? std::nullopt
                                    : std::optional<std::string>(gold)};
      const std::uint64_t default_step = step.value_or(cfg.doc.value("step", 0));
      std::size_t format_sum = 0, accuracy_sum = 0;
      long long total_sum = 0;
      for (const auto& [raw, t] : rows) {
        const auto g = golds.lookup(raw, t);
        if (!g) throw UsageError("no gold answer for trajectory '" + t.id + "'");
        const std::uint64_t at =
            raw.contains("step") ? raw["step"].get<std::uint64_t>()
                                 : default_step;
        const auto r = curriculum_reward(t.model_text(), *g, at, schedule);
        format_sum += r.format;
        accuracy_sum += r.accuracy;
        total_sum += r.total;
        auto line = breakdown_json(r);
        line["id"] = t.id;
        line["step"] = at;
        line["answer"] = t.answer ? json(*t.answer) : json();
        write_ndjson_line(out, line);
      }
      const double n = rows.empty() ? 1.0 : static_cast<double>(rows.size());
      write_ndjson_line(out, {{"aggregate",
                               {{"count", rows.size()},
                                {"format_rate", format_sum / n},
                                {"accuracy_rate", accuracy_sum / n},
                                {"mean_total", total_sum / n}}}});
      return 0;
    }

    if (*eval) {
      const auto trajectories = setup([&] {
        require_file(trajectories_path, "trajectory file");
        return read_trajectories(trajectories_path);
      });
      const auto datasets = setup([&] { return load_datasets(dataset_paths); });
      const auto report = to_json(evaluate(trajectories, datasets));
      if (!report_path.empty()) {
        std::ofstream f(report_path);
        if (!f) throw UsageError("cannot write " + report_path);
        f << report.dump(2) << "\n";
      }
      write_ndjson_line(out, report);
      return 0;
    }

    if (*grpo) {
      GrpoConfig gc;
      setup([&] {
        const auto sec = cfg.section("grpo");
        gc.clip_epsilon = clip_epsilon.value_or(
            sec.value("clip_epsilon", gc.clip_epsilon));
        gc.kl_beta = kl_beta.value_or(sec.value("kl_beta", gc.kl_beta));
        gc.advantage_std_floor = std_floor.value_or(
            sec.value("advantage_std_floor", gc.advantage_std_floor));
        const auto agg = aggregation.empty()
                             ? sec.value("aggregation", std::string())
                             : aggregation;
        if (agg == "sequence_mean") {
          gc.aggregation = LossAggregation::sequence_mean;
        } else if (!agg.empty() && agg != "token_mean") {
          throw UsageError("unknown aggregation: " + agg);
        }
        const auto km =
            kl_mode.empty() ? sec.value("kl_mode", std::string()) : kl_mode;
        if (km == "per_sequence") {
          gc.kl_mode = KlMode::per_sequence;
        } else if (!km.empty() && km != "per_token") {
          throw UsageError("unknown kl mode: " + km);
        }
        gc.validate();
        return 0;
      });
      const auto schedule = setup([&] { return schedule_from(cfg, s1, s2); });
      const auto rows = setup([&] {
        return read_raw_trajectories(trajectories_path);
      });
      require_file(logprobs_path, "logprob file");
      const auto records = setup([&] { return read_ndjson_file(logprobs_path); });
      GoldSource golds{gold_table(setup([&] {
                         return load_datasets(dataset_paths);
                       })),
                       gold.empty() ? std::nullopt
                                    : std::optional<std::string>(gold)};
      const std::uint64_t at = step.value_or(cfg.doc.value("step", 0));

      std::map<std::string, const json*> by_id;
      for (const auto& r : records) {
        if (!r.contains("id") || !r["id"].is_string()) {
          throw UsageError("logprob record without string id");
        }
        by_id[r["id"].get<std::string>()] = &r;
      }
      std::vector<RolloutGroup> groups;
      std::map<std::string, std::size_t> group_of;
      setup([&] {
        for (const auto& [raw, t] : rows) {
          auto it = by_id.find(t.id);
          if (it == by_id.end()) {
            throw UsageError("no logprob record for trajectory '" + t.id + "'");
          }
          const json& rec = *it->second;
          GroupMember m;
          m.trajectory = t;
          m.logprobs_current =
              rec.at("logprobs_current").get<std::vector<double>>();
          m.logprobs_old = rec.contains("logprobs_old")
                               ? rec["logprobs_old"].get<std::vector<double>>()
                               : m.logprobs_current;
          m.logprobs_ref = rec.contains("logprobs_ref")
                               ? rec["logprobs_ref"].get<std::vector<double>>()
                               : m.logprobs_current;
          if (rec.contains("reward")) {
            m.reward = rec["reward"].get<double>();
          } else {
            const auto g = golds.lookup(raw, t);
            if (!g) {
              throw UsageError("no reward or gold answer for trajectory '" +
                               t.id + "'");
            }
            m.reward = curriculum_reward(t.model_text(), *g, at, schedule).total;
          }
          auto [pos, fresh] = group_of.emplace(t.query, groups.size());
          if (fresh) groups.push_back({t.query, {}});
          groups[pos->second].members.push_back(std::move(m));
        }
        for (const auto& g : groups) {
          if (g.members.size() < 2) {
            throw UsageError("group for query '" + g.query +
                             "' has fewer than two trajectories");
          }
          g.validate();
        }
        return 0;
      });
      std::vector<ObjectiveResult> results(groups.size());
      parallel_for(groups.size(), workers, [&](std::size_t i) {
        results[i] = clipped_objective(groups[i], gc);
      });
      for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto& g = groups[i];
        const auto& r = results[i];
        json ids = json::array(), rewards = json::array();
        for (const auto& m : g.members) {
          ids.push_back(m.trajectory.id);
          rewards.push_back(m.reward);
        }
        write_ndjson_line(out, {{"query", g.query},
                                {"ids", ids},
                                {"rewards", rewards},
                                {"advantages", r.advantages},
                                {"loss", r.loss},
                                {"policy_loss", r.policy_loss},
                                {"kl", r.kl_value},
                                {"token_count", r.token_count},
                                {"per_token_terms", r.per_token_terms}});
      }
      return 0;
    }
  } catch (const UsageError& e) {
    log.error("{}", e.what());
    return 1;
  } catch (const std::exception& e) {
    log.error("{}", e.what());
    return 2;
  }
  return 1;
}

}  // namespace sake
