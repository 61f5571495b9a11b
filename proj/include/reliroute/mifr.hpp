#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <queue>
#include <string>
#include <vector>

#include "reliroute/config.hpp"
#include "reliroute/csv.hpp"
#include "reliroute/error.hpp"
#include "reliroute/netmodel.hpp"
#include "reliroute/paths.hpp"
#include "reliroute/robust.hpp"

namespace reliroute {

enum class VarFamily { X, Xr, F, U, Y, delta, delta_r };

inline const char* to_string(VarFamily f) {
  switch (f) {
    case VarFamily::X: return "X";
    case VarFamily::Xr: return "Xr";
    case VarFamily::F: return "F";
    case VarFamily::U: return "U";
    case VarFamily::Y: return "Y";
    case VarFamily::delta: return "delta";
    case VarFamily::delta_r: return "delta_r";
  }
  return "?";
}

enum class RowFamily {
  highway_balance,
  od_balance,
  road_activation,
  antiparallel,
  origin_inflow,
  rail_balance,
  terminal_balance,
  rail_gate,
  transfer,
  deadline,
  unsatisfied,
  road_relational,
  rail_relational,
  terminal_relational,
  road_capacity,
  rail_capacity,
  terminal_capacity,
};

inline const char* to_string(RowFamily f) {
  switch (f) {
    case RowFamily::highway_balance: return "highway_balance";
    case RowFamily::od_balance: return "od_balance";
    case RowFamily::road_activation: return "road_activation";
    case RowFamily::antiparallel: return "antiparallel";
    case RowFamily::origin_inflow: return "origin_inflow";
    case RowFamily::rail_balance: return "rail_balance";
    case RowFamily::terminal_balance: return "terminal_balance";
    case RowFamily::rail_gate: return "rail_gate";
    case RowFamily::transfer: return "transfer";
    case RowFamily::deadline: return "deadline";
    case RowFamily::unsatisfied: return "unsatisfied";
    case RowFamily::road_relational: return "road_relational";
    case RowFamily::rail_relational: return "rail_relational";
    case RowFamily::terminal_relational: return "terminal_relational";
    case RowFamily::road_capacity: return "road_capacity";
    case RowFamily::rail_capacity: return "rail_capacity";
    case RowFamily::terminal_capacity: return "terminal_capacity";
  }
  return "?";
}

enum class Sense { le, ge, eq };

inline const char* to_string(Sense s) {
  switch (s) {
    case Sense::le: return "<=";
    case Sense::ge: return ">=";
    case Sense::eq: return "=";
  }
  return "?";
}

struct Variable {
  VarFamily family = VarFamily::X;
  std::size_t pair = 0;     // index into MifrInstance::pairs
  std::size_t element = 0;  // link index (X, Xr, delta, delta_r), terminal index (F, Y), unused for U
  double lower = 0;
  double upper = 1;
  bool integer = false;
};

struct Row {
  RowFamily family = RowFamily::highway_balance;
  Sense sense = Sense::eq;
  double rhs = 0;
  std::vector<std::size_t> index;  // ascending variable indices
  std::vector<double> value;
  std::size_t pair = npos;     // npos for capacity rows
  std::size_t element = npos;  // node, link, terminal or path index depending on family
  bool lazy = false;           // may be withheld from the relaxation until violated

  double activity(const std::vector<double>& x) const {
    double s = 0;
    for (std::size_t k = 0; k < index.size(); ++k) s += value[k] * x[index[k]];
    return s;
  }
  // Amount by which `activity` violates the row (0 when satisfied).
  double violation(double act) const {
    switch (sense) {
      case Sense::le: return std::max(0.0, act - rhs);
      case Sense::ge: return std::max(0.0, rhs - act);
      case Sense::eq: return std::fabs(act - rhs);
    }
    return 0;
  }
};

// One (OD, commodity) combination with positive demand.
struct DemandPair {
  std::string od;
  std::string commodity;
  long long containers = 0;
  double deadline_hours = 0;
  std::size_t origin = npos;
  std::size_t destination = npos;
  std::size_t pathset = npos;  // index into MifrInstance::pathsets
};

struct ModelConfig {
  std::optional<double> psi;  // unset: 10 x the largest OD road-only cost per container
  double big_m = 1e6;
  double epsilon = 1e-6;
  double cutoff_factor = 5.0;
  std::size_t max_paths = 50;

  void validate() const {
    if (psi && !(*psi > 0)) throw ConfigurationError("psi must be > 0");
    if (!(big_m >= 1)) throw ConfigurationError("big_m must be >= 1");
    if (!(epsilon > 0 && epsilon <= 1e-3)) throw ConfigurationError("epsilon must lie in (0, 1e-3]");
    if (!(cutoff_factor >= 1)) throw ConfigurationError("cutoff_factor must be >= 1");
    if (max_paths < 1) throw ConfigurationError("max_paths must be >= 1");
  }

  static ModelConfig from(const KeyValues& kv) {
    ModelConfig c;
    if (auto v = kv.number("psi")) c.psi = *v;
    if (auto v = kv.number("big_m")) c.big_m = *v;
    if (auto v = kv.number("epsilon")) c.epsilon = *v;
    if (auto v = kv.number("cutoff_factor")) c.cutoff_factor = *v;
    if (auto v = kv.number("max_paths")) {
      if (*v < 1 || *v != std::floor(*v)) throw ConfigurationError("max_paths must be a positive integer");
      c.max_paths = static_cast<std::size_t>(*v);
    }
    c.validate();
    return c;
  }
};

struct InstanceMetadata {
  double psi = 0;
  bool psi_defaulted = false;
  double big_m = 0;          // configured value, recorded for reference
  double rail_gate_m = 1.0;  // M used in the rail gate rows
  double epsilon = 0;
  std::size_t census_rows = 0;  // closed-form row count
  std::vector<std::string> notes;
};

struct SolutionVector {
  std::vector<double> values;
  double objective_value = 0;
};

class MifrInstance {
 public:
  std::shared_ptr<const IntermodalNetwork> network;
  std::vector<DemandPair> pairs;
  std::vector<PathSet> pathsets;
  std::vector<Variable> variables;
  std::vector<double> objective;
  std::vector<Row> rows;
  std::vector<double> effective_link_capacity;
  std::vector<double> effective_terminal_capacity;
  InstanceMetadata meta;

  // Offsets of each pair's block. Within a block the order is X (road
  // links), Xr (rail links), F (terminals), U, Y (terminals), delta, delta_r.
  std::vector<std::size_t> block_start;
  std::vector<std::size_t> road_links;   // network link index per road slot
  std::vector<std::size_t> rail_links;   // network link index per rail slot
  std::vector<std::size_t> mode_slot;    // network link index -> slot within its mode

  std::size_t num_vars() const { return variables.size(); }

  std::size_t var(VarFamily f, std::size_t pair, std::size_t element = 0) const {
    const std::size_t h = road_links.size();
    const std::size_t r = rail_links.size();
    const std::size_t s = effective_terminal_capacity.size();
    std::size_t base = block_start[pair];
    switch (f) {
      case VarFamily::X: return base + mode_slot[element];
      case VarFamily::Xr: return base + h + mode_slot[element];
      case VarFamily::F: return base + h + r + element;
      case VarFamily::U: return base + h + r + s;
      case VarFamily::Y: return base + h + r + s + 1 + element;
      case VarFamily::delta: return base + h + r + 2 * s + 1 + mode_slot[element];
      case VarFamily::delta_r: return base + 2 * h + r + 2 * s + 1 + mode_slot[element];
    }
    return npos;
  }

  // Flow-fraction variable (X or Xr) of a link for a pair.
  std::size_t flow_var(std::size_t pair, std::size_t link) const {
    return var(network->links()[link].mode == Mode::road ? VarFamily::X : VarFamily::Xr, pair, link);
  }

  std::string variable_index(std::size_t j) const {
    const auto& v = variables[j];
    const auto& p = pairs[v.pair];
    std::string elem;
    switch (v.family) {
      case VarFamily::X:
      case VarFamily::Xr:
      case VarFamily::delta:
      case VarFamily::delta_r: elem = network->links()[v.element].id + "|"; break;
      case VarFamily::F:
      case VarFamily::Y: elem = network->terminals()[v.element].node_id + "|"; break;
      case VarFamily::U: break;
    }
    return elem + p.commodity + "|" + p.od;
  }

  std::string variable_name(std::size_t j) const {
    return std::string(to_string(variables[j].family)) + "[" + variable_index(j) + "]";
  }

  std::string row_name(std::size_t i) const {
    const auto& r = rows[i];
    std::string s = to_string(r.family);
    if (r.pair != npos) s += "[" + pairs[r.pair].commodity + "|" + pairs[r.pair].od + "]";
    if (r.element != npos) s += "#" + std::to_string(r.element);
    return s;
  }

  double evaluate(const std::vector<double>& x) const {
    double s = 0;
    for (std::size_t j = 0; j < x.size(); ++j) s += objective[j] * x[j];
    return s;
  }

  // Every pair fully unsatisfied: all flows and indicators zero, U = d.
  SolutionVector all_unsatisfied() const {
    SolutionVector sol;
    sol.values.assign(num_vars(), 0.0);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      sol.values[var(VarFamily::U, p)] = static_cast<double>(pairs[p].containers);
    }
    sol.objective_value = evaluate(sol.values);
    return sol;
  }

  double value(const SolutionVector& sol, VarFamily f, std::size_t pair, std::size_t element = 0) const {
    return sol.values[var(f, pair, element)];
  }
};

// Cheapest road-only route cost per container from origin to destination,
// or nullopt if no road route exists.
inline std::optional<double> road_route_cost(const IntermodalNetwork& net, std::size_t origin,
                                             std::size_t destination, bool road_only = true) {
  std::vector<double> dist(net.nodes().size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[origin] = 0;
  heap.emplace(0.0, origin);
  while (!heap.empty()) {
    auto [du, u] = heap.top();
    heap.pop();
    if (du > dist[u]) continue;
    for (std::size_t l : net.out_links(u)) {
      if (road_only && net.links()[l].mode != Mode::road) continue;
      std::size_t v = net.link_to(l);
      double dv = du + net.links()[l].unit_cost;
      if (dv < dist[v]) {
        dist[v] = dv;
        heap.emplace(dv, v);
      }
    }
  }
  if (!std::isfinite(dist[destination])) return std::nullopt;
  return dist[destination];
}

// Penalty per unsatisfied container: 10 x the largest road-only route cost
// over the ODs with demand (falls back to any-mode routes, then to 1).
inline double default_psi(const IntermodalNetwork& net, const DemandSet& demands) {
  double worst = 0;
  for (const auto& d : demands.demands) {
    if (d.containers <= 0) continue;
    const auto& od = demands.od(d.od);
    auto o = net.find_node(od.origin);
    auto t = net.find_node(od.destination);
    if (!o || !t) continue;
    auto c = road_route_cost(net, *o, *t, true);
    if (!c) c = road_route_cost(net, *o, *t, false);
    if (c) worst = std::max(worst, *c);
  }
  return worst > 0 ? 10.0 * worst : 1.0;
}

// Enumerates candidate paths for every OD that carries positive demand.
inline std::vector<PathSet> build_pathsets(const IntermodalNetwork& net, const DemandSet& demands,
                                           double cutoff_factor = 5.0, std::size_t max_paths = 50) {
  std::vector<PathSet> out;
  for (const auto& od : demands.ods) {
    bool used = std::any_of(demands.demands.begin(), demands.demands.end(),
                            [&](const CommodityDemand& d) { return d.od == od.id && d.containers > 0; });
    if (used) out.push_back(enumerate_candidate_paths(net, od, cutoff_factor, max_paths));
  }
  return out;
}

namespace detail {

class RowBuilder {
 public:
  void add(std::size_t var, double coef) {
    if (coef != 0) terms_.emplace_back(var, coef);
  }
  Row finish(RowFamily family, Sense sense, double rhs, std::size_t pair, std::size_t element, bool lazy) {
    std::sort(terms_.begin(), terms_.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    Row r;
    r.family = family;
    r.sense = sense;
    r.rhs = rhs;
    r.pair = pair;
    r.element = element;
    r.lazy = lazy;
    for (const auto& [v, c] : terms_) {
      if (!r.index.empty() && r.index.back() == v) {
        r.value.back() += c;
      } else {
        r.index.push_back(v);
        r.value.push_back(c);
      }
    }
    for (std::size_t k = r.index.size(); k-- > 0;) {
      if (r.value[k] == 0) {
        r.index.erase(r.index.begin() + static_cast<std::ptrdiff_t>(k));
        r.value.erase(r.value.begin() + static_cast<std::ptrdiff_t>(k));
      }
    }
    terms_.clear();
    return r;
  }

 private:
  std::vector<std::pair<std::size_t, double>> terms_;
};

inline bool lazy_family(RowFamily f) {
  switch (f) {
    case RowFamily::road_activation:
    case RowFamily::antiparallel:
    case RowFamily::rail_gate:
    case RowFamily::transfer:
    case RowFamily::deadline:
    case RowFamily::road_relational:
    case RowFamily::rail_relational:
    case RowFamily::terminal_relational:
    case RowFamily::road_capacity:
    case RowFamily::rail_capacity:
    case RowFamily::terminal_capacity: return true;
    default: return false;
  }
}

}  // namespace detail

// Assembles the routing program: cost objective, highway/rail/terminal flow
// conservation, terminal selection and transfer rows, per-path deadline rows,
// unsatisfied-demand accounting, relational bounds and the capacity rows
// whose right-hand sides are the effective (reduced) capacities.
inline MifrInstance build_instance(const IntermodalNetwork& net, const DemandSet& demands,
                                   const ReductionTable& reductions, const std::vector<PathSet>& pathsets,
                                   const ModelConfig& cfg = {}) {
  cfg.validate();
  if (reductions.link.size() != net.links().size() || reductions.terminal.size() != net.terminals().size()) {
    throw ConfigurationError("reduction table does not cover every capacitated element");
  }
  for (std::size_t i = 0; i < net.links().size(); ++i) {
    if (reductions.link[i].element != element_of_link(net, i)) {
      throw ReferenceError("reduction references unknown element '" + reductions.link[i].element.id + "'");
    }
  }
  for (std::size_t t = 0; t < net.terminals().size(); ++t) {
    const auto& e = reductions.terminal[t].element;
    if (e.type != ElementType::terminal || e.id != net.terminals()[t].node_id) {
      throw ReferenceError("reduction references unknown element '" + e.id + "'");
    }
  }

  MifrInstance inst;
  inst.network = std::make_shared<const IntermodalNetwork>(net);
  inst.pathsets = pathsets;
  inst.meta.big_m = cfg.big_m;
  inst.meta.epsilon = cfg.epsilon;
  inst.meta.rail_gate_m = 1.0;
  inst.meta.psi_defaulted = !cfg.psi.has_value();
  inst.meta.psi = cfg.psi ? *cfg.psi : default_psi(net, demands);
  inst.meta.notes.push_back("origin inflow is a hard equality (sum of inflow X = 0) in place of the big-M form");
  inst.meta.notes.push_back("rail gate rows use M = 1: the net rail imbalance of a fraction is bounded by 1");
  inst.meta.notes.push_back("the upper half of the road relational bound coincides with the activation row");
  inst.meta.notes.push_back("destination inflow counts every road link entering the destination");

  for (const auto& r : reductions.link) inst.effective_link_capacity.push_back(r.effective_capacity);
  for (const auto& r : reductions.terminal) inst.effective_terminal_capacity.push_back(r.effective_capacity);

  inst.mode_slot.assign(net.links().size(), npos);
  for (std::size_t l = 0; l < net.links().size(); ++l) {
    auto& list = net.links()[l].mode == Mode::road ? inst.road_links : inst.rail_links;
    inst.mode_slot[l] = list.size();
    list.push_back(l);
  }

  for (const auto& d : demands.demands) {
    if (d.containers <= 0) continue;
    const auto& od = demands.od(d.od);
    DemandPair p;
    p.od = od.id;
    p.commodity = d.commodity;
    p.containers = d.containers;
    p.deadline_hours = d.deadline_hours;
    auto o = net.find_node(od.origin);
    auto t = net.find_node(od.destination);
    if (!o || !t) throw ReferenceError("OD '" + od.id + "' references an unknown node");
    p.origin = *o;
    p.destination = *t;
    for (std::size_t k = 0; k < pathsets.size(); ++k) {
      if (pathsets[k].od == od.id) p.pathset = k;
    }
    if (p.pathset == npos) throw ConfigurationError("no path set for OD '" + od.id + "'");
    inst.pairs.push_back(std::move(p));
  }

  const std::size_t nh = inst.road_links.size();
  const std::size_t nr = inst.rail_links.size();
  const std::size_t ns = net.terminals().size();
  const std::size_t block = 2 * nh + 2 * nr + 2 * ns + 1;
  for (std::size_t p = 0; p < inst.pairs.size(); ++p) {
    inst.block_start.push_back(p * block);
    const auto& pair = inst.pairs[p];
    const double dem = static_cast<double>(pair.containers);
    auto push = [&](VarFamily f, std::size_t element, double upper, bool integer, double cost) {
      inst.variables.push_back(Variable{f, p, element, 0.0, upper, integer});
      inst.objective.push_back(cost);
    };
    for (std::size_t l : inst.road_links) push(VarFamily::X, l, 1, false, dem * net.unit_cost(l, pair.commodity));
    for (std::size_t l : inst.rail_links) push(VarFamily::Xr, l, 1, false, dem * net.unit_cost(l, pair.commodity));
    for (std::size_t s = 0; s < ns; ++s) push(VarFamily::F, s, 1, false, dem * net.terminals()[s].transfer_cost);
    push(VarFamily::U, 0, dem, true, inst.meta.psi);
    for (std::size_t s = 0; s < ns; ++s) push(VarFamily::Y, s, 1, true, 0);
    for (std::size_t l : inst.road_links) push(VarFamily::delta, l, 1, true, 0);
    for (std::size_t l : inst.rail_links) push(VarFamily::delta_r, l, 1, true, 0);
  }

  detail::RowBuilder rb;
  auto emit = [&](RowFamily f, Sense s, double rhs, std::size_t pair, std::size_t element) {
    inst.rows.push_back(rb.finish(f, s, rhs, pair, element, detail::lazy_family(f)));
  };
  const double eps = cfg.epsilon;
  const double gate = inst.meta.rail_gate_m;

  std::size_t antiparallel_count = 0;
  for (std::size_t l : inst.road_links) antiparallel_count += net.reverse_of(l) != npos ? 1 : 0;

  for (std::size_t p = 0; p < inst.pairs.size(); ++p) {
    const auto& pair = inst.pairs[p];
    const double dem = static_cast<double>(pair.containers);
    auto flow = [&](std::size_t l) { return inst.flow_var(p, l); };
    auto add_mode_balance = [&](std::size_t node, Mode mode, double sign) {
      for (std::size_t l : net.out_links(node)) {
        if (net.links()[l].mode == mode) rb.add(flow(l), sign);
      }
      for (std::size_t l : net.in_links(node)) {
        if (net.links()[l].mode == mode) rb.add(flow(l), -sign);
      }
    };

    // highway node balance
    for (std::size_t i = 0; i < net.nodes().size(); ++i) {
      if (net.nodes()[i].kind != NodeKind::highway) continue;
      add_mode_balance(i, Mode::road, 1.0);
      if (i == pair.origin) {
        emit(RowFamily::highway_balance, Sense::le, 1.0, p, i);
      } else if (i == pair.destination) {
        emit(RowFamily::highway_balance, Sense::ge, -1.0, p, i);
      } else {
        emit(RowFamily::highway_balance, Sense::eq, 0.0, p, i);
      }
    }
    // origin outflow equals destination inflow
    for (std::size_t l : net.out_links(pair.origin)) {
      if (net.links()[l].mode == Mode::road) rb.add(flow(l), 1.0);
    }
    for (std::size_t l : net.in_links(pair.destination)) {
      if (net.links()[l].mode == Mode::road) rb.add(flow(l), -1.0);
    }
    emit(RowFamily::od_balance, Sense::eq, 0.0, p, npos);
    // activation X <= delta
    for (std::size_t l : inst.road_links) {
      rb.add(flow(l), 1.0);
      rb.add(inst.var(VarFamily::delta, p, l), -1.0);
      emit(RowFamily::road_activation, Sense::le, 0.0, p, l);
    }
    // anti-parallel exclusivity X_mi + delta_im <= 1
    for (std::size_t l : inst.road_links) {
      std::size_t rev = net.reverse_of(l);
      if (rev == npos) continue;
      rb.add(flow(l), 1.0);
      rb.add(inst.var(VarFamily::delta, p, rev), 1.0);
      emit(RowFamily::antiparallel, Sense::le, 1.0, p, l);
    }
    // no inflow at the origin
    for (std::size_t l : net.in_links(pair.origin)) {
      if (net.links()[l].mode == Mode::road) rb.add(flow(l), 1.0);
    }
    emit(RowFamily::origin_inflow, Sense::eq, 0.0, p, pair.origin);
    // rail junction balance
    for (std::size_t i = 0; i < net.nodes().size(); ++i) {
      if (net.nodes()[i].kind != NodeKind::rail) continue;
      add_mode_balance(i, Mode::rail, 1.0);
      emit(RowFamily::rail_balance, Sense::eq, 0.0, p, i);
    }
    // terminal balance, rail gate, transfer fraction
    for (std::size_t s = 0; s < ns; ++s) {
      std::size_t node = net.terminal_node(s);
      add_mode_balance(node, Mode::road, 1.0);
      add_mode_balance(node, Mode::rail, 1.0);
      emit(RowFamily::terminal_balance, Sense::eq, 0.0, p, s);
    }
    for (std::size_t s = 0; s < ns; ++s) {
      std::size_t node = net.terminal_node(s);
      std::size_t y = inst.var(VarFamily::Y, p, s);
      add_mode_balance(node, Mode::rail, 1.0);
      rb.add(y, -gate);
      emit(RowFamily::rail_gate, Sense::le, 0.0, p, s);
      add_mode_balance(node, Mode::rail, 1.0);
      rb.add(y, gate);
      emit(RowFamily::rail_gate, Sense::ge, 0.0, p, s);
    }
    for (std::size_t s = 0; s < ns; ++s) {
      std::size_t node = net.terminal_node(s);
      std::size_t f = inst.var(VarFamily::F, p, s);
      add_mode_balance(node, Mode::road, 1.0);
      rb.add(f, -1.0);
      emit(RowFamily::transfer, Sense::le, 0.0, p, s);
      add_mode_balance(node, Mode::road, 1.0);
      rb.add(f, 1.0);
      emit(RowFamily::transfer, Sense::ge, 0.0, p, s);
    }
    // delivery deadline, one row per candidate path
    const auto& ps = inst.pathsets[pair.pathset];
    for (std::size_t k = 0; k < ps.paths.size(); ++k) {
      const auto& path = ps.paths[k];
      for (std::size_t l : path.links) {
        const auto& rec = net.links()[l];
        rb.add(inst.var(rec.mode == Mode::road ? VarFamily::delta : VarFamily::delta_r, p, l), rec.travel_time_h);
      }
      for (std::size_t node : path.nodes) {
        std::size_t s = net.terminal_at(node);
        if (s != npos) rb.add(inst.var(VarFamily::Y, p, s), net.terminals()[s].processing_hours);
      }
      emit(RowFamily::deadline, Sense::le, pair.deadline_hours, p, k);
    }
    // unsatisfied demand: U + d * (destination inflow) = d
    rb.add(inst.var(VarFamily::U, p), 1.0);
    for (std::size_t l : net.in_links(pair.destination)) {
      if (net.links()[l].mode == Mode::road) rb.add(flow(l), dem);
    }
    emit(RowFamily::unsatisfied, Sense::eq, dem, p, npos);
    // relational lower bounds
    for (std::size_t l : inst.road_links) {
      rb.add(flow(l), 1.0);
      rb.add(inst.var(VarFamily::delta, p, l), -eps);
      emit(RowFamily::road_relational, Sense::ge, 0.0, p, l);
    }
    for (std::size_t l : inst.rail_links) {
      rb.add(flow(l), 1.0);
      rb.add(inst.var(VarFamily::delta_r, p, l), -1.0);
      emit(RowFamily::rail_relational, Sense::le, 0.0, p, l);
      rb.add(flow(l), 1.0);
      rb.add(inst.var(VarFamily::delta_r, p, l), -eps);
      emit(RowFamily::rail_relational, Sense::ge, 0.0, p, l);
    }
    for (std::size_t s = 0; s < ns; ++s) {
      std::size_t f = inst.var(VarFamily::F, p, s);
      std::size_t y = inst.var(VarFamily::Y, p, s);
      rb.add(f, 1.0);
      rb.add(y, -1.0);
      emit(RowFamily::terminal_relational, Sense::le, 0.0, p, s);
      rb.add(f, 1.0);
      rb.add(y, -eps);
      emit(RowFamily::terminal_relational, Sense::ge, 0.0, p, s);
    }
  }

  // capacity rows against effective capacities
  for (std::size_t l : inst.road_links) {
    for (std::size_t p = 0; p < inst.pairs.size(); ++p) {
      rb.add(inst.flow_var(p, l), static_cast<double>(inst.pairs[p].containers));
    }
    emit(RowFamily::road_capacity, Sense::le, inst.effective_link_capacity[l], npos, l);
  }
  for (std::size_t l : inst.rail_links) {
    for (std::size_t p = 0; p < inst.pairs.size(); ++p) {
      rb.add(inst.flow_var(p, l), static_cast<double>(inst.pairs[p].containers));
    }
    emit(RowFamily::rail_capacity, Sense::le, inst.effective_link_capacity[l], npos, l);
  }
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t p = 0; p < inst.pairs.size(); ++p) {
      rb.add(inst.var(VarFamily::F, p, s), static_cast<double>(inst.pairs[p].containers));
    }
    emit(RowFamily::terminal_capacity, Sense::le, inst.effective_terminal_capacity[s], npos, s);
  }

  // census: per pair |H| + |R| + 7|S| + 2|A_h| + |A_h with reverse| + 2|A_r| + |P^c| + 3,
  // plus |A_h| + |A_r| + |S| capacity rows
  std::size_t census = nh + nr + ns;
  for (const auto& pair : inst.pairs) {
    census += net.count(NodeKind::highway) + net.count(NodeKind::rail) + 7 * ns + 2 * nh + antiparallel_count +
              2 * nr + inst.pathsets[pair.pathset].paths.size() + 3;
  }
  inst.meta.census_rows = census;
  return inst;
}

// ---------------------------------------------------------------------------
// Feasibility check

struct Violation {
  std::string what;
  double amount = 0;
};

inline std::vector<Violation> check_feasibility(const MifrInstance& inst, const SolutionVector& sol,
                                                double tol = 1e-7) {
  if (sol.values.size() != inst.num_vars()) {
    throw ConfigurationError("solution has " + std::to_string(sol.values.size()) + " values, instance has " +
                             std::to_string(inst.num_vars()) + " variables");
  }
  std::vector<Violation> out;
  for (std::size_t j = 0; j < inst.num_vars(); ++j) {
    const auto& v = inst.variables[j];
    double x = sol.values[j];
    if (!std::isfinite(x)) {
      out.push_back({"non-finite " + inst.variable_name(j), std::numeric_limits<double>::infinity()});
      continue;
    }
    if (x < v.lower - tol) out.push_back({"lower bound " + inst.variable_name(j), v.lower - x});
    if (x > v.upper + tol) out.push_back({"upper bound " + inst.variable_name(j), x - v.upper});
    if (v.integer && std::fabs(x - std::round(x)) > tol) {
      out.push_back({"integrality " + inst.variable_name(j), std::fabs(x - std::round(x))});
    }
  }
  for (std::size_t i = 0; i < inst.rows.size(); ++i) {
    const auto& r = inst.rows[i];
    double viol = r.violation(r.activity(sol.values));
    double scale = std::max(1.0, std::fabs(r.rhs));
    if (viol > tol * scale) out.push_back({inst.row_name(i), viol});
  }
  return out;
}

// ---------------------------------------------------------------------------
// LP-format export: plain decimals with 12 significant digits, variables
// x<j> and rows r<i> in instance order.

inline void write_lp(const MifrInstance& inst, std::ostream& os) {
  auto term = [](double c, std::size_t j) {
    std::string s = c < 0 ? " - " : " + ";
    s += csv::fixed_significant(std::fabs(c));
    s += " x" + std::to_string(j);
    return s;
  };
  os << "\\ intermodal routing instance: " << inst.num_vars() << " variables, " << inst.rows.size() << " rows\n";
  for (std::size_t j = 0; j < inst.num_vars(); ++j) os << "\\ x" << j << " = " << inst.variable_name(j) << "\n";
  os << "Minimize\n obj:";
  std::size_t on_line = 0;
  bool any = false;
  for (std::size_t j = 0; j < inst.num_vars(); ++j) {
    if (inst.objective[j] == 0) continue;
    os << term(inst.objective[j], j);
    any = true;
    if (++on_line % 8 == 0) os << "\n";
  }
  if (!any) os << " 0 x0";
  os << "\nSubject To\n";
  for (std::size_t i = 0; i < inst.rows.size(); ++i) {
    const auto& r = inst.rows[i];
    os << " r" << i << ":";
    if (r.index.empty()) os << " 0 x0";
    for (std::size_t k = 0; k < r.index.size(); ++k) {
      os << term(r.value[k], r.index[k]);
      if ((k + 1) % 8 == 0 && k + 1 < r.index.size()) os << "\n  ";
    }
    os << " " << to_string(r.sense) << " " << csv::fixed_significant(r.rhs) << "\n";
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < inst.num_vars(); ++j) {
    const auto& v = inst.variables[j];
    os << " " << csv::fixed_significant(v.lower) << " <= x" << j << " <= " << csv::fixed_significant(v.upper)
       << "\n";
  }
  os << "Generals\n";
  for (std::size_t j = 0; j < inst.num_vars(); ++j) {
    if (inst.variables[j].integer && inst.variables[j].family == VarFamily::U) os << " x" << j << "\n";
  }
  os << "Binaries\n";
  for (std::size_t j = 0; j < inst.num_vars(); ++j) {
    if (inst.variables[j].integer && inst.variables[j].family != VarFamily::U) os << " x" << j << "\n";
  }
  os << "End\n";
}

}  // namespace reliroute
