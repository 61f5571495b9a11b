#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "reliroute/reliroute.hpp"

namespace fixtures {

using namespace reliroute;

inline std::filesystem::path data_dir() { return RELIROUTE_DATA_DIR; }

inline std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("reliroute_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

inline IntermodalNetwork load_fixture6(const RateConfig& rates = {}) {
  auto d = data_dir() / "fixture6";
  return load_network(d / "nodes.csv", d / "links.csv", d / "terminals.csv", rates);
}

inline DemandSet load_fixture6_demands(const IntermodalNetwork& net, const std::string& file = "demands.csv") {
  return load_demands(data_dir() / "fixture6" / file, net);
}

inline NodeRecord node(const std::string& id, NodeKind k) { return NodeRecord{id, k, std::nullopt, std::nullopt}; }

inline DemandSet one_demand(const std::string& o, const std::string& d, long long containers,
                            double deadline = 168.0, const std::string& commodity = "general") {
  DemandSet s;
  s.ods.push_back({"OD1", o, d});
  s.demands.push_back({"OD1", commodity, containers, deadline});
  return s;
}

// Origin A, destination B, parallel roads through M1..Mk of the given
// lengths (each split in two halves) with the given capacity.
inline IntermodalNetwork parallel_roads(const std::vector<double>& lengths, double capacity) {
  RateConfig r;
  std::vector<NodeRecord> nodes{node("A", NodeKind::highway), node("B", NodeKind::highway)};
  std::vector<LinkRecord> links;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    std::string m = "M" + std::to_string(i + 1);
    nodes.push_back(node(m, NodeKind::highway));
    links.push_back(make_link("A_" + m, "A", m, Mode::road, lengths[i] / 2, capacity, r));
    links.push_back(make_link(m + "_B", m, "B", Mode::road, lengths[i] / 2, capacity, r));
  }
  return IntermodalNetwork(nodes, links, {});
}

// Small random road-rail network: a highway path backbone with a chord, two
// terminals tied to highway nodes and a rail path between them through up
// to two rail nodes, at most 10 nodes, one or two ODs of 10 containers.
// Capacities are multiples of the total demand (or zero) so that an unsplit
// routing is optimal.
struct TinyInstance {
  IntermodalNetwork net;
  DemandSet demands;
};

inline TinyInstance tiny_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  RateConfig rates;
  std::size_t nh = 4 + pick(3);  // 4..6
  std::size_t nr = 1 + pick(2);  // 1..2
  std::vector<NodeRecord> nodes;
  for (std::size_t i = 0; i < nh; ++i) nodes.push_back(node("H" + std::to_string(i), NodeKind::highway));
  for (std::size_t i = 0; i < nr; ++i) nodes.push_back(node("R" + std::to_string(i), NodeKind::rail));
  nodes.push_back(node("S0", NodeKind::terminal));
  nodes.push_back(node("S1", NodeKind::terminal));
  std::vector<LinkRecord> links;
  auto both = [&](const std::string& a, const std::string& b, Mode m, double len, double cap) {
    links.push_back(make_link(a + "-" + b, a, b, m, len, cap, rates));
    links.push_back(make_link(b + "-" + a, b, a, m, len, cap, rates));
  };
  std::size_t n_od = 1 + pick(2);
  const double unit = 10.0 * static_cast<double>(n_od);
  auto cap = [&] { return pick(6) == 0 ? 0.0 : unit * static_cast<double>(1 + pick(2)); };
  for (std::size_t i = 0; i + 1 < nh; ++i) both(nodes[i].id, nodes[i + 1].id, Mode::road, std::round(uni(50, 150)), cap());
  both("H0", "H" + std::to_string(nh - 1), Mode::road, std::round(uni(200, 400)), cap());
  std::size_t a = pick(nh / 2);
  std::size_t b = nh / 2 + pick(nh - nh / 2);
  both("H" + std::to_string(a), "S0", Mode::road, std::round(uni(5, 20)), cap());
  both("H" + std::to_string(b), "S1", Mode::road, std::round(uni(5, 20)), cap());
  std::string prev = "S0";
  for (std::size_t i = 0; i < nr; ++i) {
    std::string r = "R" + std::to_string(i);
    both(prev, r, Mode::rail, std::round(uni(50, 150)), cap());
    prev = r;
  }
  both(prev, "S1", Mode::rail, std::round(uni(50, 150)), cap());
  std::vector<TerminalRecord> terms{{"S0", cap(), 70, 0}, {"S1", cap(), 70, 0}};
  TinyInstance t{IntermodalNetwork(nodes, links, terms), {}};
  for (std::size_t k = 0; k < n_od; ++k) {
    std::size_t o = pick(nh);
    std::size_t d = (o + 1 + pick(nh - 1)) % nh;
    std::string id = "OD" + std::to_string(k + 1);
    t.demands.ods.push_back({id, "H" + std::to_string(o), "H" + std::to_string(d)});
    t.demands.demands.push_back({id, "general", 10, 168.0});
  }
  return t;
}

}  // namespace fixtures
