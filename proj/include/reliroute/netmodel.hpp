#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reliroute/config.hpp"
#include "reliroute/csv.hpp"
#include "reliroute/error.hpp"

namespace reliroute {

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);
inline constexpr double kPoundsPerContainer = 40000.0;

enum class NodeKind { highway, rail, terminal };
enum class Mode { road, rail };

inline const char* to_code(NodeKind k) {
  switch (k) {
    case NodeKind::highway: return "H";
    case NodeKind::rail: return "R";
    case NodeKind::terminal: return "S";
  }
  return "?";
}

inline std::optional<NodeKind> node_kind_from_code(std::string_view s) {
  if (s == "H") return NodeKind::highway;
  if (s == "R") return NodeKind::rail;
  if (s == "S") return NodeKind::terminal;
  return std::nullopt;
}

inline const char* to_string(Mode m) { return m == Mode::road ? "road" : "rail"; }

inline std::optional<Mode> mode_from_string(std::string_view s) {
  if (s == "road") return Mode::road;
  if (s == "rail") return Mode::rail;
  return std::nullopt;
}

// Whether a link of `mode` may touch a node of `kind`.
inline bool mode_allows(Mode mode, NodeKind kind) {
  if (kind == NodeKind::terminal) return true;
  return mode == Mode::road ? kind == NodeKind::highway : kind == NodeKind::rail;
}

struct NodeRecord {
  std::string id;
  NodeKind kind = NodeKind::highway;
  std::optional<double> lat;
  std::optional<double> lon;

  bool operator==(const NodeRecord&) const = default;
};

struct LinkRecord {
  std::string id;
  std::string from;
  std::string to;
  Mode mode = Mode::road;
  double length_miles = 0;
  double capacity = 0;       // containers per planning horizon
  double speed_mph = 0;
  double travel_time_h = 0;  // length / speed
  double unit_cost = 0;      // dollars per container, rate(mode) * length

  bool operator==(const LinkRecord&) const = default;
};

struct TerminalRecord {
  std::string node_id;
  double capacity = 0;
  double transfer_cost = 0;  // dollars per container
  double processing_hours = 0;

  bool operator==(const TerminalRecord&) const = default;
};

struct RateConfig {
  double road_rate_usd_per_mile = 1.67;
  double rail_rate_usd_per_mile = 0.60;
  double default_transfer_cost_usd = 70.0;
  double road_speed_mph = 65.0;
  double rail_speed_mph = 30.0;
  double default_deadline_hours = 168.0;

  double rate(Mode m) const { return m == Mode::road ? road_rate_usd_per_mile : rail_rate_usd_per_mile; }
  double speed(Mode m) const { return m == Mode::road ? road_speed_mph : rail_speed_mph; }

  static RateConfig from(const KeyValues& kv) {
    RateConfig r;
    auto pick = [&](const char* key, double& slot, bool strictly_positive) {
      if (auto v = kv.number(key)) {
        if (*v < 0 || (strictly_positive && *v == 0)) {
          throw ConfigurationError(std::string("config key '") + key + "' out of range");
        }
        slot = *v;
      }
    };
    pick("road_rate_usd_per_mile", r.road_rate_usd_per_mile, false);
    pick("rail_rate_usd_per_mile", r.rail_rate_usd_per_mile, false);
    pick("default_transfer_cost_usd", r.default_transfer_cost_usd, false);
    pick("road_speed_mph", r.road_speed_mph, true);
    pick("rail_speed_mph", r.rail_speed_mph, true);
    pick("default_deadline_hours", r.default_deadline_hours, true);
    return r;
  }
};

// (link id, commodity) -> dollars per container, overriding rate * length.
using CommodityCostTable = std::map<std::pair<std::string, std::string>, double>;

// Directed road-rail graph. Immutable once constructed; all lookups are
// precomputed so concurrent readers need no synchronization.
class IntermodalNetwork {
 public:
  IntermodalNetwork() = default;

  IntermodalNetwork(std::vector<NodeRecord> nodes, std::vector<LinkRecord> links,
                    std::vector<TerminalRecord> terminals, CommodityCostTable commodity_costs = {})
      : nodes_(std::move(nodes)),
        links_(std::move(links)),
        terminals_(std::move(terminals)),
        commodity_costs_(std::move(commodity_costs)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) node_index_.emplace(nodes_[i].id, i);
    for (std::size_t i = 0; i < links_.size(); ++i) link_index_.emplace(links_[i].id, i);
    out_.assign(nodes_.size(), {});
    in_.assign(nodes_.size(), {});
    from_.assign(links_.size(), npos);
    to_.assign(links_.size(), npos);
    for (std::size_t i = 0; i < links_.size(); ++i) {
      from_[i] = find_node(links_[i].from).value_or(npos);
      to_[i] = find_node(links_[i].to).value_or(npos);
      if (from_[i] != npos) out_[from_[i]].push_back(i);
      if (to_[i] != npos) in_[to_[i]].push_back(i);
    }
    terminal_of_node_.assign(nodes_.size(), npos);
    for (std::size_t t = 0; t < terminals_.size(); ++t) {
      auto n = find_node(terminals_[t].node_id);
      if (n && terminal_of_node_[*n] == npos) terminal_of_node_[*n] = t;
    }
  }

  const std::vector<NodeRecord>& nodes() const { return nodes_; }
  const std::vector<LinkRecord>& links() const { return links_; }
  const std::vector<TerminalRecord>& terminals() const { return terminals_; }
  const CommodityCostTable& commodity_costs() const { return commodity_costs_; }

  std::optional<std::size_t> find_node(std::string_view id) const {
    auto it = node_index_.find(std::string(id));
    if (it == node_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<std::size_t> find_link(std::string_view id) const {
    auto it = link_index_.find(std::string(id));
    if (it == link_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<std::size_t> find_terminal(std::string_view node_id) const {
    auto n = find_node(node_id);
    if (!n || terminal_of_node_[*n] == npos) return std::nullopt;
    return terminal_of_node_[*n];
  }

  std::size_t link_from(std::size_t link) const { return from_[link]; }
  std::size_t link_to(std::size_t link) const { return to_[link]; }
  const std::vector<std::size_t>& out_links(std::size_t node) const { return out_[node]; }
  const std::vector<std::size_t>& in_links(std::size_t node) const { return in_[node]; }
  // Terminal record index for a node, or npos.
  std::size_t terminal_at(std::size_t node) const { return terminal_of_node_[node]; }
  std::size_t terminal_node(std::size_t terminal) const { return find_node(terminals_[terminal].node_id).value_or(npos); }

  // Link in the opposite direction between the same endpoints and of the
  // same mode, or npos.
  std::size_t reverse_of(std::size_t link) const {
    for (std::size_t cand : out_[to_[link]]) {
      if (to_[cand] == from_[link] && links_[cand].mode == links_[link].mode) return cand;
    }
    return npos;
  }

  double unit_cost(std::size_t link, std::string_view commodity) const {
    if (!commodity_costs_.empty()) {
      auto it = commodity_costs_.find({links_[link].id, std::string(commodity)});
      if (it != commodity_costs_.end()) return it->second;
    }
    return links_[link].unit_cost;
  }

  std::size_t count(NodeKind k) const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [k](const NodeRecord& n) { return n.kind == k; }));
  }
  std::size_t count(Mode m) const {
    return static_cast<std::size_t>(
        std::count_if(links_.begin(), links_.end(), [m](const LinkRecord& l) { return l.mode == m; }));
  }

  bool operator==(const IntermodalNetwork& o) const {
    return nodes_ == o.nodes_ && links_ == o.links_ && terminals_ == o.terminals_ &&
           commodity_costs_ == o.commodity_costs_;
  }

 private:
  std::vector<NodeRecord> nodes_;
  std::vector<LinkRecord> links_;
  std::vector<TerminalRecord> terminals_;
  CommodityCostTable commodity_costs_;
  std::map<std::string, std::size_t> node_index_;
  std::map<std::string, std::size_t> link_index_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::vector<std::size_t> from_;
  std::vector<std::size_t> to_;
  std::vector<std::size_t> terminal_of_node_;
};

// Builds a link with derived travel time and unit cost.
inline LinkRecord make_link(std::string id, std::string from, std::string to, Mode mode, double length_miles,
                            double capacity, const RateConfig& rates, std::optional<double> speed_mph = {}) {
  LinkRecord l;
  l.id = std::move(id);
  l.from = std::move(from);
  l.to = std::move(to);
  l.mode = mode;
  l.length_miles = length_miles;
  l.capacity = capacity;
  l.speed_mph = speed_mph.value_or(rates.speed(mode));
  l.travel_time_h = l.length_miles / l.speed_mph;
  l.unit_cost = rates.rate(mode) * l.length_miles;
  return l;
}

// ---------------------------------------------------------------------------
// Demand model

struct OdPair {
  std::string id;
  std::string origin;
  std::string destination;

  bool operator==(const OdPair&) const = default;
};

struct CommodityDemand {
  std::string od;
  std::string commodity;
  long long containers = 0;
  double deadline_hours = 168.0;

  bool operator==(const CommodityDemand&) const = default;
};

struct DemandSet {
  std::vector<OdPair> ods;
  std::vector<CommodityDemand> demands;

  const OdPair* find_od(std::string_view id) const {
    for (const auto& od : ods) {
      if (od.id == id) return &od;
    }
    return nullptr;
  }
  const OdPair& od(std::string_view id) const {
    const OdPair* p = find_od(id);
    if (!p) throw ReferenceError("unknown OD pair '" + std::string(id) + "'");
    return *p;
  }
  double max_deadline() const {
    double m = 0;
    for (const auto& d : demands) m = std::max(m, d.deadline_hours);
    return m;
  }
};

// ---------------------------------------------------------------------------
// Validation

struct Diagnostic {
  std::string category;  // schema | topology | completeness | reference | value | connectivity
  std::string element;
  std::string message;
};

inline std::vector<Diagnostic> validate_network(const IntermodalNetwork& net) {
  std::vector<Diagnostic> out;
  std::set<std::string> seen;
  for (const auto& n : net.nodes()) {
    if (!seen.insert(n.id).second) out.push_back({"schema", n.id, "duplicate node id"});
  }
  seen.clear();
  for (std::size_t i = 0; i < net.links().size(); ++i) {
    const auto& l = net.links()[i];
    if (!seen.insert(l.id).second) out.push_back({"schema", l.id, "duplicate link id"});
    std::size_t a = net.link_from(i);
    std::size_t b = net.link_to(i);
    if (a == npos) out.push_back({"reference", l.id, "unknown from-node '" + l.from + "'"});
    if (b == npos) out.push_back({"reference", l.id, "unknown to-node '" + l.to + "'"});
    if (a != npos && b != npos) {
      if (a == b) out.push_back({"topology", l.id, "self loop"});
      for (std::size_t end : {a, b}) {
        if (!mode_allows(l.mode, net.nodes()[end].kind)) {
          out.push_back({"topology", l.id,
                         std::string(to_string(l.mode)) + " link touches " + to_code(net.nodes()[end].kind) +
                             " node '" + net.nodes()[end].id + "'"});
        }
      }
    }
    if (!(l.length_miles > 0)) out.push_back({"value", l.id, "length must be > 0"});
    if (!(l.capacity >= 0)) out.push_back({"value", l.id, "capacity must be >= 0"});
    if (!(l.speed_mph > 0)) {
      out.push_back({"value", l.id, "speed must be > 0"});
    } else if (std::fabs(l.travel_time_h - l.length_miles / l.speed_mph) >
               1e-9 * std::max(1.0, l.length_miles / l.speed_mph)) {
      out.push_back({"value", l.id, "travel time differs from length / speed"});
    }
  }
  seen.clear();
  for (const auto& t : net.terminals()) {
    if (!seen.insert(t.node_id).second) out.push_back({"schema", t.node_id, "duplicate terminal record"});
    auto n = net.find_node(t.node_id);
    if (!n) {
      out.push_back({"reference", t.node_id, "terminal record for unknown node"});
    } else if (net.nodes()[*n].kind != NodeKind::terminal) {
      out.push_back({"topology", t.node_id, "terminal record on a non-terminal node"});
    }
    if (!(t.capacity >= 0)) out.push_back({"value", t.node_id, "terminal capacity must be >= 0"});
    if (!(t.transfer_cost >= 0)) out.push_back({"value", t.node_id, "transfer cost must be >= 0"});
    if (!(t.processing_hours >= 0)) out.push_back({"value", t.node_id, "processing time must be >= 0"});
  }
  for (std::size_t i = 0; i < net.nodes().size(); ++i) {
    if (net.nodes()[i].kind == NodeKind::terminal && net.terminal_at(i) == npos) {
      out.push_back({"completeness", net.nodes()[i].id, "terminal node without terminal record"});
    }
  }
  return out;
}

// Warns for every OD whose destination cannot be reached from its origin
// over road links alone.
inline std::vector<Diagnostic> check_od_connectivity(const IntermodalNetwork& net, const DemandSet& demands) {
  std::vector<Diagnostic> out;
  for (const auto& od : demands.ods) {
    auto o = net.find_node(od.origin);
    auto d = net.find_node(od.destination);
    if (!o || !d) continue;
    std::vector<char> seen(net.nodes().size(), 0);
    std::queue<std::size_t> q;
    q.push(*o);
    seen[*o] = 1;
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop();
      for (std::size_t l : net.out_links(u)) {
        if (net.links()[l].mode != Mode::road) continue;
        std::size_t v = net.link_to(l);
        if (!seen[v]) {
          seen[v] = 1;
          q.push(v);
        }
      }
    }
    if (!seen[*d]) out.push_back({"connectivity", od.id, "destination not road-reachable from origin"});
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV ingestion

inline bool parse_flag(const std::string& s, const std::string& where) {
  if (s.empty() || s == "0" || s == "false" || s == "no") return false;
  if (s == "1" || s == "true" || s == "yes") return true;
  throw SchemaError(where + ": bidirectional must be 0 or 1, got '" + s + "'");
}

inline std::string reverse_link_id(const std::string& id) { return id + "~r"; }

inline IntermodalNetwork load_network(const std::filesystem::path& nodes_file,
                                      const std::filesystem::path& links_file,
                                      const std::filesystem::path& terminals_file, const RateConfig& rates,
                                      CommodityCostTable commodity_costs = {}) {
  std::vector<NodeRecord> nodes;
  std::map<std::string, NodeKind> kinds;
  {
    auto t = csv::Table::read(nodes_file);
    t.require({"node_id", "kind"});
    for (const auto& row : t.rows()) {
      NodeRecord n;
      n.id = t.get(row, "node_id");
      if (n.id.empty()) throw SchemaError(t.where(row) + ": empty node_id");
      auto kind = node_kind_from_code(t.get(row, "kind"));
      if (!kind) throw SchemaError(t.where(row) + ": kind must be H, R or S");
      n.kind = *kind;
      if (auto s = t.get(row, "lat"); !s.empty()) n.lat = csv::parse_double(s, t.where(row) + " lat");
      if (auto s = t.get(row, "lon"); !s.empty()) n.lon = csv::parse_double(s, t.where(row) + " lon");
      if (!kinds.emplace(n.id, n.kind).second) {
        throw SchemaError(t.where(row) + ": duplicate node id '" + n.id + "'");
      }
      nodes.push_back(std::move(n));
    }
  }

  std::vector<LinkRecord> links;
  {
    auto t = csv::Table::read(links_file);
    t.require({"link_id", "from", "to", "mode", "length_miles", "capacity"});
    std::set<std::string> ids;
    for (const auto& row : t.rows()) {
      const std::string where = t.where(row);
      std::string id = t.get(row, "link_id");
      if (id.empty()) throw SchemaError(where + ": empty link_id");
      std::string from = t.get(row, "from");
      std::string to = t.get(row, "to");
      for (const auto& end : {from, to}) {
        if (!kinds.count(end)) {
          throw SchemaError(where + ": link '" + id + "' references missing endpoint '" + end + "'");
        }
      }
      auto mode = mode_from_string(t.get(row, "mode"));
      if (!mode) throw SchemaError(where + ": mode must be road or rail");
      for (const auto& end : {from, to}) {
        if (!mode_allows(*mode, kinds[end])) {
          throw TopologyError(where + ": " + to_string(*mode) + " link '" + id + "' touches " +
                              to_code(kinds[end]) + " node '" + end + "'");
        }
      }
      double length = csv::parse_double(t.get(row, "length_miles"), where + " length_miles");
      double capacity = csv::parse_double(t.get(row, "capacity"), where + " capacity");
      if (!(length > 0)) throw SchemaError(where + ": length_miles must be > 0");
      if (capacity < 0) throw SchemaError(where + ": capacity must be >= 0");
      std::optional<double> speed;
      if (auto s = t.get(row, "speed_mph"); !s.empty()) {
        speed = csv::parse_double(s, where + " speed_mph");
        if (!(*speed > 0)) throw SchemaError(where + ": speed_mph must be > 0");
      }
      bool both = parse_flag(t.get(row, "bidirectional"), where);
      auto add = [&](std::string lid, const std::string& a, const std::string& b) {
        if (!ids.insert(lid).second) throw SchemaError(where + ": duplicate link id '" + lid + "'");
        links.push_back(make_link(std::move(lid), a, b, *mode, length, capacity, rates, speed));
      };
      add(id, from, to);
      if (both) add(reverse_link_id(id), to, from);
    }
  }

  std::vector<TerminalRecord> terminals;
  {
    auto t = csv::Table::read(terminals_file);
    t.require({"node_id", "capacity"});
    std::set<std::string> ids;
    for (const auto& row : t.rows()) {
      const std::string where = t.where(row);
      TerminalRecord r;
      r.node_id = t.get(row, "node_id");
      auto it = kinds.find(r.node_id);
      if (it == kinds.end()) throw SchemaError(where + ": terminal references missing node '" + r.node_id + "'");
      if (it->second != NodeKind::terminal) {
        throw TopologyError(where + ": node '" + r.node_id + "' is not an intermodal terminal");
      }
      if (!ids.insert(r.node_id).second) throw SchemaError(where + ": duplicate terminal '" + r.node_id + "'");
      r.capacity = csv::parse_double(t.get(row, "capacity"), where + " capacity");
      auto cost = t.get(row, "transfer_cost_usd");
      r.transfer_cost = cost.empty() ? rates.default_transfer_cost_usd : csv::parse_double(cost, where);
      auto hours = t.get(row, "processing_hours");
      r.processing_hours = hours.empty() ? 0.0 : csv::parse_double(hours, where);
      if (r.capacity < 0 || r.transfer_cost < 0 || r.processing_hours < 0) {
        throw SchemaError(where + ": terminal values must be >= 0");
      }
      terminals.push_back(std::move(r));
    }
  }

  IntermodalNetwork net(std::move(nodes), std::move(links), std::move(terminals), std::move(commodity_costs));
  for (const auto& d : validate_network(net)) {
    std::string msg = d.category + " error at '" + d.element + "': " + d.message;
    if (d.category == "topology") throw TopologyError(msg);
    throw SchemaError(msg);
  }
  return net;
}

// Per-commodity cost overrides: `link_id,commodity,unit_cost_usd`.
inline CommodityCostTable load_commodity_costs(const std::filesystem::path& file) {
  auto t = csv::Table::read(file);
  t.require({"link_id", "commodity", "unit_cost_usd"});
  CommodityCostTable out;
  for (const auto& row : t.rows()) {
    double v = csv::parse_double(t.get(row, "unit_cost_usd"), t.where(row));
    if (v < 0) throw SchemaError(t.where(row) + ": unit cost must be >= 0");
    out[{t.get(row, "link_id"), t.get(row, "commodity")}] = v;
  }
  return out;
}

inline DemandSet load_demands(const std::filesystem::path& demands_file, const IntermodalNetwork& net,
                              double default_deadline = 168.0) {
  auto t = csv::Table::read(demands_file);
  t.require({"od_id", "origin", "destination", "commodity"});
  const bool by_count = t.has("containers");
  const bool by_weight = t.has("pounds");
  if (!by_count && !by_weight) throw SchemaError(t.source() + ": need a 'containers' or 'pounds' column");
  DemandSet out;
  for (const auto& row : t.rows()) {
    const std::string where = t.where(row);
    OdPair od{t.get(row, "od_id"), t.get(row, "origin"), t.get(row, "destination")};
    if (od.id.empty()) throw SchemaError(where + ": empty od_id");
    for (const auto& end : {od.origin, od.destination}) {
      auto n = net.find_node(end);
      if (!n) throw ReferenceError(where + ": unknown node '" + end + "'");
      if (net.nodes()[*n].kind != NodeKind::highway) {
        throw TopologyError(where + ": OD endpoint '" + end + "' must be a highway node");
      }
    }
    if (od.origin == od.destination) throw SchemaError(where + ": origin equals destination");
    if (const OdPair* known = out.find_od(od.id)) {
      if (!(*known == od)) throw SchemaError(where + ": OD '" + od.id + "' redefined with other endpoints");
    } else {
      out.ods.push_back(od);
    }

    CommodityDemand d;
    d.od = od.id;
    d.commodity = t.get(row, "commodity");
    if (d.commodity.empty()) throw SchemaError(where + ": empty commodity");
    std::string count = by_count ? t.get(row, "containers") : std::string();
    if (!count.empty()) {
      d.containers = csv::parse_integer(count, where + " containers");
    } else if (by_weight && !t.get(row, "pounds").empty()) {
      double lbs = csv::parse_double(t.get(row, "pounds"), where + " pounds");
      if (lbs < 0) throw SchemaError(where + ": negative demand");
      d.containers = static_cast<long long>(std::ceil(lbs / kPoundsPerContainer - 1e-12));
    } else {
      throw SchemaError(where + ": missing demand quantity");
    }
    if (d.containers < 0) throw SchemaError(where + ": negative demand");
    auto deadline = t.get(row, "deadline_hours");
    d.deadline_hours = deadline.empty() ? default_deadline : csv::parse_double(deadline, where + " deadline_hours");
    if (!(d.deadline_hours > 0)) throw SchemaError(where + ": deadline must be > 0");
    for (const auto& prev : out.demands) {
      if (prev.od == d.od && prev.commodity == d.commodity) {
        throw SchemaError(where + ": duplicate commodity '" + d.commodity + "' for OD '" + d.od + "'");
      }
    }
    out.demands.push_back(std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization. Links are written one row per directed record with an
// explicit speed so that reloading reproduces every field.

inline void write_network(const IntermodalNetwork& net, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw IoError("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("nodes.csv");
    f << "node_id,kind,lat,lon\n";
    for (const auto& n : net.nodes()) {
      f << csv::quote(n.id) << ',' << to_code(n.kind) << ',' << (n.lat ? csv::exact(*n.lat) : "") << ','
        << (n.lon ? csv::exact(*n.lon) : "") << '\n';
    }
  }
  {
    auto f = open("links.csv");
    f << "link_id,from,to,mode,length_miles,capacity,speed_mph,bidirectional\n";
    for (const auto& l : net.links()) {
      f << csv::quote(l.id) << ',' << csv::quote(l.from) << ',' << csv::quote(l.to) << ',' << to_string(l.mode)
        << ',' << csv::exact(l.length_miles) << ',' << csv::exact(l.capacity) << ',' << csv::exact(l.speed_mph)
        << ",0\n";
    }
  }
  {
    auto f = open("terminals.csv");
    f << "node_id,capacity,transfer_cost_usd,processing_hours\n";
    for (const auto& t : net.terminals()) {
      f << csv::quote(t.node_id) << ',' << csv::exact(t.capacity) << ',' << csv::exact(t.transfer_cost) << ','
        << csv::exact(t.processing_hours) << '\n';
    }
  }
}

inline void write_demands(const DemandSet& demands, const std::filesystem::path& file) {
  std::ofstream f(file, std::ios::binary);
  if (!f) throw IoError("cannot write " + file.string());
  f << "od_id,origin,destination,commodity,containers,deadline_hours\n";
  for (const auto& d : demands.demands) {
    const auto& od = demands.od(d.od);
    f << csv::quote(od.id) << ',' << csv::quote(od.origin) << ',' << csv::quote(od.destination) << ','
      << csv::quote(d.commodity) << ',' << d.containers << ',' << csv::exact(d.deadline_hours) << '\n';
  }
}

}  // namespace reliroute
