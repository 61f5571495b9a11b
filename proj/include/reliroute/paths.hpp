#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "reliroute/csv.hpp"
#include "reliroute/error.hpp"
#include "reliroute/netmodel.hpp"

namespace reliroute {

struct CandidatePath {
  std::string od;
  std::vector<std::size_t> links;      // link indices, origin to destination
  std::vector<std::size_t> nodes;      // node indices, links.size() + 1 entries
  std::vector<std::size_t> terminals;  // terminal nodes where the mode changes
  double length_miles = 0;
  double base_hours = 0;
  std::int64_t length_key = 0;  // length in micro-miles, used for ordering

  bool uses_rail(const IntermodalNetwork& net) const {
    return std::any_of(links.begin(), links.end(),
                       [&](std::size_t l) { return net.links()[l].mode == Mode::rail; });
  }
};

struct PathSet {
  std::string od;
  double min_length = 0;
  double cutoff_factor = 5.0;
  std::vector<CandidatePath> paths;
};

namespace detail {

inline std::int64_t length_key(double miles) { return std::llround(miles * 1e6); }

inline CandidatePath make_path(const IntermodalNetwork& net, const std::string& od, std::size_t origin,
                               std::vector<std::size_t> links) {
  CandidatePath p;
  p.od = od;
  p.links = std::move(links);
  p.nodes.push_back(origin);
  for (std::size_t l : p.links) {
    const auto& rec = net.links()[l];
    p.nodes.push_back(net.link_to(l));
    p.length_miles += rec.length_miles;
    p.base_hours += rec.travel_time_h;
    p.length_key += length_key(rec.length_miles);
  }
  for (std::size_t k = 1; k < p.links.size(); ++k) {
    if (net.links()[p.links[k - 1]].mode != net.links()[p.links[k]].mode) {
      std::size_t node = p.nodes[k];
      p.terminals.push_back(node);
      std::size_t t = net.terminal_at(node);
      if (t != npos) p.base_hours += net.terminals()[t].processing_hours;
    }
  }
  return p;
}

// Lexicographic comparison of link-id sequences.
inline bool ids_less(const IntermodalNetwork& net, const std::vector<std::size_t>& a,
                     const std::vector<std::size_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), [&](std::size_t x, std::size_t y) {
    return net.links()[x].id < net.links()[y].id;
  });
}

// Shortest path by length key, ties by fewer links. Banned nodes and links
// are skipped. Returns link indices.
inline std::optional<std::vector<std::size_t>> dijkstra(const IntermodalNetwork& net, std::size_t src,
                                                        std::size_t dst, const std::vector<char>& banned_node,
                                                        const std::vector<char>& banned_link) {
  const std::size_t n = net.nodes().size();
  constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max();
  std::vector<std::int64_t> dist(n, inf);
  std::vector<std::size_t> hops(n, npos);
  std::vector<std::size_t> pred(n, npos);
  using Item = std::tuple<std::int64_t, std::size_t, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[src] = 0;
  hops[src] = 0;
  heap.emplace(0, 0, src);
  while (!heap.empty()) {
    auto [du, hu, u] = heap.top();
    heap.pop();
    if (du != dist[u] || hu != hops[u]) continue;
    if (u == dst) break;
    for (std::size_t l : net.out_links(u)) {
      if (banned_link[l]) continue;
      std::size_t v = net.link_to(l);
      if (banned_node[v]) continue;
      std::int64_t dv = du + length_key(net.links()[l].length_miles);
      if (dv < dist[v] || (dv == dist[v] && hu + 1 < hops[v])) {
        dist[v] = dv;
        hops[v] = hu + 1;
        pred[v] = l;
        heap.emplace(dv, hu + 1, v);
      }
    }
  }
  if (dist[dst] == inf) return std::nullopt;
  std::vector<std::size_t> links;
  for (std::size_t v = dst; v != src; v = net.link_from(pred[v])) links.push_back(pred[v]);
  std::reverse(links.begin(), links.end());
  return links;
}

inline std::pair<std::size_t, std::size_t> od_nodes(const IntermodalNetwork& net, const OdPair& od) {
  auto o = net.find_node(od.origin);
  auto d = net.find_node(od.destination);
  if (!o) throw ReferenceError("OD '" + od.id + "': unknown origin '" + od.origin + "'");
  if (!d) throw ReferenceError("OD '" + od.id + "': unknown destination '" + od.destination + "'");
  return {*o, *d};
}

}  // namespace detail

// Minimum length over valid paths. Road links touch only highway nodes and
// terminals, rail links only rail junctions and terminals, so every simple
// directed path between two highway nodes respects the mode-change rules.
inline double shortest_path_length(const IntermodalNetwork& net, const OdPair& od) {
  auto [o, d] = detail::od_nodes(net, od);
  std::vector<char> no_nodes(net.nodes().size(), 0);
  std::vector<char> no_links(net.links().size(), 0);
  auto p = detail::dijkstra(net, o, d, no_nodes, no_links);
  if (!p) throw UnreachableError("OD '" + od.id + "' is unreachable: no path from '" + od.origin + "' to '" +
                                 od.destination + "'");
  return detail::make_path(net, od.id, o, *p).length_miles;
}

// Loopless paths no longer than cutoff_factor times the shortest, ordered by
// length then link-id sequence, truncated to max_paths. Deviation search
// (Yen); ties at the truncation boundary are all generated before sorting so
// the result does not depend on discovery order.
inline PathSet enumerate_candidate_paths(const IntermodalNetwork& net, const OdPair& od, double cutoff_factor = 5.0,
                                         std::size_t max_paths = 50) {
  if (!(cutoff_factor >= 1)) throw ConfigurationError("cutoff_factor must be >= 1");
  if (max_paths < 1) throw ConfigurationError("max_paths must be >= 1");
  auto [o, d] = detail::od_nodes(net, od);
  const std::size_t n_nodes = net.nodes().size();
  const std::size_t n_links = net.links().size();

  std::vector<char> banned_node(n_nodes, 0);
  std::vector<char> banned_link(n_links, 0);
  auto first = detail::dijkstra(net, o, d, banned_node, banned_link);
  if (!first) throw UnreachableError("OD '" + od.id + "' is unreachable: no path from '" + od.origin + "' to '" +
                                     od.destination + "'");

  std::vector<CandidatePath> found;
  found.push_back(detail::make_path(net, od.id, o, *first));
  const double min_length = found.front().length_miles;
  const double limit = cutoff_factor * static_cast<double>(found.front().length_key) * (1 + 1e-12);

  auto cand_less = [&](const CandidatePath& a, const CandidatePath& b) {
    if (a.length_key != b.length_key) return a.length_key < b.length_key;
    return detail::ids_less(net, a.links, b.links);
  };
  std::set<std::vector<std::size_t>> seen{found.front().links};
  std::vector<CandidatePath> pool;  // kept as a heap with the smallest candidate on top
  auto heap_cmp = [&](const CandidatePath& a, const CandidatePath& b) { return cand_less(b, a); };

  std::optional<std::int64_t> boundary;
  if (found.size() >= max_paths) boundary = found.back().length_key;

  while (true) {
    const CandidatePath last = found.back();
    for (std::size_t i = 0; i < last.links.size(); ++i) {
      std::fill(banned_node.begin(), banned_node.end(), 0);
      std::fill(banned_link.begin(), banned_link.end(), 0);
      for (std::size_t k = 0; k < i; ++k) banned_node[last.nodes[k]] = 1;
      for (const auto& p : found) {
        if (p.links.size() > i && std::equal(p.links.begin(), p.links.begin() + i, last.links.begin())) {
          banned_link[p.links[i]] = 1;
        }
      }
      auto spur = detail::dijkstra(net, last.nodes[i], d, banned_node, banned_link);
      if (!spur) continue;
      std::vector<std::size_t> links(last.links.begin(), last.links.begin() + i);
      links.insert(links.end(), spur->begin(), spur->end());
      if (!seen.insert(links).second) continue;
      auto cand = detail::make_path(net, od.id, o, std::move(links));
      if (static_cast<double>(cand.length_key) > limit) continue;
      pool.push_back(std::move(cand));
      std::push_heap(pool.begin(), pool.end(), heap_cmp);
    }
    if (pool.empty()) break;
    std::pop_heap(pool.begin(), pool.end(), heap_cmp);
    CandidatePath next = std::move(pool.back());
    pool.pop_back();
    if (boundary && next.length_key != *boundary) break;
    found.push_back(std::move(next));
    if (!boundary && found.size() >= max_paths) boundary = found.back().length_key;
  }

  std::sort(found.begin(), found.end(), cand_less);
  if (found.size() > max_paths) found.resize(max_paths);
  PathSet out;
  out.od = od.id;
  out.min_length = min_length;
  out.cutoff_factor = cutoff_factor;
  out.paths = std::move(found);
  return out;
}

inline std::string node_sequence(const IntermodalNetwork& net, const std::vector<std::size_t>& nodes) {
  std::string s;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i) s += '>';
    s += net.nodes()[nodes[i]].id;
  }
  return s;
}

// `od_id,path_rank,length_miles,base_hours,node_sequence`, ranks from 1.
inline void write_paths_csv(const IntermodalNetwork& net, const std::vector<PathSet>& sets,
                            const std::filesystem::path& file) {
  std::ofstream f(file, std::ios::binary);
  if (!f) throw IoError("cannot write " + file.string());
  f << "od_id,path_rank,length_miles,base_hours,node_sequence\n";
  for (const auto& set : sets) {
    for (std::size_t r = 0; r < set.paths.size(); ++r) {
      const auto& p = set.paths[r];
      f << csv::quote(set.od) << ',' << (r + 1) << ',' << csv::fixed_significant(p.length_miles) << ','
        << csv::fixed_significant(p.base_hours) << ',' << csv::quote(node_sequence(net, p.nodes)) << '\n';
    }
  }
}

}  // namespace reliroute
