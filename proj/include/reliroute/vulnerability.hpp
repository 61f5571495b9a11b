#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "reliroute/csv.hpp"
#include "reliroute/error.hpp"
#include "reliroute/mifr.hpp"
#include "reliroute/solver.hpp"

namespace reliroute {

enum class DisruptionKind { link, node, terminal };

inline const char* to_string(DisruptionKind k) {
  switch (k) {
    case DisruptionKind::link: return "link";
    case DisruptionKind::node: return "node";
    case DisruptionKind::terminal: return "terminal";
  }
  return "?";
}

struct DisruptionScenario {
  DisruptionKind kind = DisruptionKind::link;
  std::vector<std::string> elements;
  double travel_time_multiplier = 2.0;  // alpha
  double dummy_link_time = 0;           // hours; 0 means 10 x the largest deadline
  std::map<std::string, double> link_multiplier;  // per-link alpha overrides

  void validate() const {
    if (!(travel_time_multiplier > 1)) throw ConfigurationError("travel time multiplier must be > 1");
    if (dummy_link_time < 0) throw ConfigurationError("dummy link time must be >= 0");
    for (const auto& [id, a] : link_multiplier) {
      if (!(a > 1)) throw ConfigurationError("travel time multiplier for '" + id + "' must be > 1");
    }
  }

  double multiplier(const std::string& link_id) const {
    auto it = link_multiplier.find(link_id);
    return it == link_multiplier.end() ? travel_time_multiplier : it->second;
  }

  bool uniform() const {
    return std::all_of(link_multiplier.begin(), link_multiplier.end(),
                       [&](const auto& kv) { return kv.second == travel_time_multiplier; });
  }
};

// Flow weights d * X of one routing solution.
struct ImportanceBaseline {
  std::shared_ptr<const IntermodalNetwork> network;
  std::vector<double> link_weight;      // sum over pairs of d * X for each link
  std::vector<double> terminal_weight;  // containers entering each terminal
  double objective = 0;
  double max_deadline = 0;
  std::string source = "deterministic solve (theta = 0)";
};

inline ImportanceBaseline make_baseline(const MifrInstance& inst, const SolutionVector& sol) {
  if (sol.values.size() != inst.num_vars()) throw ConfigurationError("solution does not match instance");
  const auto& net = *inst.network;
  ImportanceBaseline b;
  b.network = inst.network;
  b.link_weight.assign(net.links().size(), 0.0);
  b.terminal_weight.assign(net.terminals().size(), 0.0);
  for (std::size_t p = 0; p < inst.pairs.size(); ++p) {
    const double dem = static_cast<double>(inst.pairs[p].containers);
    b.max_deadline = std::max(b.max_deadline, inst.pairs[p].deadline_hours);
    for (std::size_t l = 0; l < net.links().size(); ++l) {
      double x = sol.values[inst.flow_var(p, l)];
      if (x > 0) b.link_weight[l] += dem * x;
    }
  }
  for (std::size_t t = 0; t < net.terminals().size(); ++t) {
    std::size_t node = net.terminal_node(t);
    for (std::size_t l : net.in_links(node)) b.terminal_weight[t] += b.link_weight[l];
  }
  b.objective = inst.evaluate(sol.values);
  return b;
}

// Baseline from a deterministic solve of the given demands.
inline ImportanceBaseline deterministic_baseline(const IntermodalNetwork& net, const DemandSet& demands,
                                                 const ModelConfig& model = {}, const SolverConfig& solver = {}) {
  auto paths = build_pathsets(net, demands, model.cutoff_factor, model.max_paths);
  auto inst = build_instance(net, demands, deterministic_reductions(net), paths, model);
  auto res = solve(inst, solver);
  auto b = make_baseline(inst, res.best);
  b.max_deadline = std::max(b.max_deadline, demands.max_deadline());
  return b;
}

namespace detail {

inline std::size_t require_link(const IntermodalNetwork& net, const std::string& id) {
  auto l = net.find_link(id);
  if (!l) throw ReferenceError("unknown link '" + id + "'");
  return *l;
}

inline std::size_t require_node(const IntermodalNetwork& net, const std::string& id) {
  auto n = net.find_node(id);
  if (!n) throw ReferenceError("unknown node '" + id + "'");
  return *n;
}

inline double link_score(const ImportanceBaseline& b, std::size_t link, double alpha) {
  const double w = b.link_weight[link];
  const double t = b.network->links()[link].travel_time_h;
  const double den = w * t;
  if (!(den > 0)) return 0.0;
  return w * (alpha * t - t) / den;
}

inline double dummy_baseline_time(const TerminalRecord& t) { return t.processing_hours > 0 ? t.processing_hours : 1.0; }

inline double dummy_time(const ImportanceBaseline& b, const DisruptionScenario& s) {
  return s.dummy_link_time > 0 ? s.dummy_link_time : 10.0 * b.max_deadline;
}

inline bool link_affected(const IntermodalNetwork& net, const DisruptionScenario& s, std::size_t link) {
  const auto& rec = net.links()[link];
  const std::string& from = rec.from;
  for (const auto& e : s.elements) {
    switch (s.kind) {
      case DisruptionKind::link:
        if (e == rec.id) return true;
        break;
      case DisruptionKind::node:
      case DisruptionKind::terminal:
        if (e == from) return true;
        break;
    }
  }
  return false;
}

}  // namespace detail

// Flow-weighted relative travel-time increase of a link under the scenario;
// 0 for unaffected links and links without baseline flow.
inline double link_importance(const ImportanceBaseline& b, const DisruptionScenario& s, const std::string& link) {
  s.validate();
  std::size_t l = detail::require_link(*b.network, link);
  if (!detail::link_affected(*b.network, s, l)) return 0.0;
  return detail::link_score(b, l, s.multiplier(link));
}

// Sum of the scores of the node's outgoing links, all slowed by the
// scenario's multiplier.
inline double node_importance(const ImportanceBaseline& b, const DisruptionScenario& s, const std::string& node) {
  s.validate();
  const auto& net = *b.network;
  std::size_t n = detail::require_node(net, node);
  double sum = 0;
  for (std::size_t l : net.out_links(n)) sum += detail::link_score(b, l, s.multiplier(net.links()[l].id));
  return sum;
}

// Node-style sum over the terminal's outgoing links plus the term of a
// dummy link carrying the terminal's throughput, whose time rises from the
// processing time (1 h if none) to the scenario's dummy link time.
inline double terminal_importance(const ImportanceBaseline& b, const DisruptionScenario& s,
                                  const std::string& terminal) {
  s.validate();
  const auto& net = *b.network;
  auto t = net.find_terminal(terminal);
  if (!t) throw ReferenceError("unknown terminal '" + terminal + "'");
  double sum = node_importance(b, s, terminal);
  const double w = b.terminal_weight[*t];
  const double t0 = detail::dummy_baseline_time(net.terminals()[*t]);
  const double td = detail::dummy_time(b, s);
  if (w * t0 > 0) sum += w * (td - t0) / (w * t0);
  return sum;
}

struct ElementScore {
  DisruptionKind type = DisruptionKind::link;
  std::string id;
  double score = 0;
  bool premise_ok = false;
  std::vector<std::string> neighbors;   // J (or J' for terminals): heads of flowing outgoing links
  std::vector<std::string> outgoing;    // outgoing link ids, for nodes and terminals
  std::vector<double> component_scores;  // per outgoing link, plus the dummy term for terminals
};

struct ImportanceReport {
  std::vector<ElementScore> links;
  std::vector<ElementScore> nodes;
  std::vector<ElementScore> terminals;
  double alpha = 2.0;
  double dummy_link_time = 0;
  bool uniform = true;
  std::string baseline_source;
};

// Scores every link, every highway and rail node and every terminal for an
// event slowing the scored element by the scenario's multiplier.
inline ImportanceReport importance_report(const ImportanceBaseline& b, const DisruptionScenario& s) {
  s.validate();
  const auto& net = *b.network;
  ImportanceReport r;
  r.alpha = s.travel_time_multiplier;
  r.dummy_link_time = detail::dummy_time(b, s);
  r.uniform = s.uniform();
  r.baseline_source = b.source;
  for (std::size_t l = 0; l < net.links().size(); ++l) {
    ElementScore e;
    e.type = DisruptionKind::link;
    e.id = net.links()[l].id;
    e.score = detail::link_score(b, l, s.multiplier(e.id));
    e.component_scores = {e.score};
    e.premise_ok = r.uniform && b.link_weight[l] > 0;
    r.links.push_back(std::move(e));
  }
  auto node_style = [&](std::size_t n, ElementScore& e) {
    std::size_t flowing = 0;
    for (std::size_t l : net.out_links(n)) {
      double v = detail::link_score(b, l, s.multiplier(net.links()[l].id));
      e.component_scores.push_back(v);
      e.outgoing.push_back(net.links()[l].id);
      e.score += v;
      if (b.link_weight[l] > 0) {
        ++flowing;
        e.neighbors.push_back(net.links()[l].to);
      }
    }
    return flowing;
  };
  for (std::size_t n = 0; n < net.nodes().size(); ++n) {
    if (net.nodes()[n].kind == NodeKind::terminal) continue;
    ElementScore e;
    e.type = DisruptionKind::node;
    e.id = net.nodes()[n].id;
    std::size_t flowing = node_style(n, e);
    e.premise_ok = r.uniform && flowing >= 2;
    r.nodes.push_back(std::move(e));
  }
  for (std::size_t t = 0; t < net.terminals().size(); ++t) {
    ElementScore e;
    e.type = DisruptionKind::terminal;
    e.id = net.terminals()[t].node_id;
    node_style(net.terminal_node(t), e);
    const double w = b.terminal_weight[t];
    const double t0 = detail::dummy_baseline_time(net.terminals()[t]);
    double dummy = w * t0 > 0 ? w * (r.dummy_link_time - t0) / (w * t0) : 0.0;
    e.component_scores.push_back(dummy);
    e.score += dummy;
    e.premise_ok = r.uniform && w > 0;
    r.terminals.push_back(std::move(e));
  }
  return r;
}

struct OrderingVerdict {
  std::string relation;  // "node>link", "terminal>node" or "terminal>link"
  std::string greater;
  std::string lesser;
  double greater_score = 0;
  double lesser_score = 0;
  std::string verdict;  // "pass", "fail" or "premise-not-met"
};

// Checks node > link for each node against its own outgoing links, and
// terminal > node, terminal > link across all premise-satisfying elements.
inline std::vector<OrderingVerdict> verify_ordering(const ImportanceReport& r) {
  std::vector<OrderingVerdict> out;
  auto judge = [&](const char* rel, const ElementScore& a, const ElementScore& b) {
    OrderingVerdict v{rel, a.id, b.id, a.score, b.score, ""};
    if (!r.uniform || !a.premise_ok || !b.premise_ok) {
      v.verdict = "premise-not-met";
    } else {
      v.verdict = a.score > b.score ? "pass" : "fail";
    }
    out.push_back(std::move(v));
  };
  std::map<std::string, const ElementScore*> link_by_id;
  for (const auto& l : r.links) link_by_id[l.id] = &l;
  for (const auto& n : r.nodes) {
    for (const auto& id : n.outgoing) judge("node>link", n, *link_by_id.at(id));
  }
  for (const auto& t : r.terminals) {
    for (const auto& n : r.nodes) judge("terminal>node", t, n);
    for (const auto& l : r.links) judge("terminal>link", t, l);
  }
  return out;
}

struct RankedElement {
  DisruptionKind type = DisruptionKind::link;
  std::string id;
  double score = 0;
  bool premise_ok = false;
};

// Descending by score, ties by id ascending.
inline std::vector<RankedElement> rank_elements(const std::vector<ElementScore>& scores) {
  std::vector<RankedElement> out;
  for (const auto& e : scores) out.push_back({e.type, e.id, e.score, e.premise_ok});
  std::sort(out.begin(), out.end(), [](const RankedElement& a, const RankedElement& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  return out;
}

inline std::vector<RankedElement> rank_elements(const ImportanceReport& r, DisruptionKind kind) {
  switch (kind) {
    case DisruptionKind::link: return rank_elements(r.links);
    case DisruptionKind::node: return rank_elements(r.nodes);
    case DisruptionKind::terminal: return rank_elements(r.terminals);
  }
  return {};
}

// `element_type,element_id,score,rank,premise_ok`; ranks count from 1 within
// each element type.
inline void write_importance_csv(const ImportanceReport& r, const std::filesystem::path& file) {
  std::ofstream f(file, std::ios::binary);
  if (!f) throw IoError("cannot write " + file.string());
  f << "element_type,element_id,score,rank,premise_ok\n";
  for (auto kind : {DisruptionKind::link, DisruptionKind::node, DisruptionKind::terminal}) {
    auto ranked = rank_elements(r, kind);
    for (std::size_t k = 0; k < ranked.size(); ++k) {
      f << to_string(kind) << ',' << csv::quote(ranked[k].id) << ',' << csv::fixed_significant(ranked[k].score)
        << ',' << (k + 1) << ',' << (ranked[k].premise_ok ? 1 : 0) << '\n';
    }
  }
}

}  // namespace reliroute
