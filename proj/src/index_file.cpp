// SPDX-License-Identifier: Apache-2.0
#include "sake/index_file.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "sake/json_io.hpp"

namespace sake {

void save_index(const std::filesystem::path& path, const KnowledgeGraph& kg,
                const EntityIndex* entities) {
  const auto stats = kg.stats();
  nlohmann::json doc = {
      {"format", "sake-index"},
      {"version", 1},
      {"stats",
       {{"node_count", stats.node_count},
        {"edge_count", stats.edge_count},
        {"relation_count", stats.relation_count}}},
      {"edges", kg.edges()},
  };
  if (entities) {
    doc["embedding"] = {{"encoder", entities->encoder_name()},
                        {"dimension", entities->dimension()},
                        {"labels", entities->labels()},
                        {"vectors", entities->data()}};
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump() << '\n';
  if (!out) throw std::runtime_error("error writing " + path.string());
}

IndexBundle load_index(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  if (doc.value("format", std::string()) != "sake-index") {
    throw std::runtime_error(path.string() + ": not a sake index file");
  }
  IndexBundle bundle;
  bundle.kg =
      KnowledgeGraph::from_triplets(doc.at("edges").get<std::vector<Triplet>>());
  if (doc.contains("embedding")) {
    const auto& e = doc["embedding"];
    bundle.entities.emplace(e.at("labels").get<std::vector<std::string>>(),
                            e.at("dimension").get<std::size_t>(),
                            e.at("vectors").get<std::vector<double>>(),
                            e.at("encoder").get<std::string>());
    if (bundle.entities->labels() != bundle.kg.entities()) {
      throw std::runtime_error(path.string() +
                               ": embedding labels do not match the graph");
    }
  }
  return bundle;
}

}  // namespace sake
