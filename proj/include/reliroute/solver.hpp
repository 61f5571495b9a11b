#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "reliroute/config.hpp"
#include "reliroute/csv.hpp"
#include "reliroute/error.hpp"
#include "reliroute/lp.hpp"
#include "reliroute/mifr.hpp"

namespace reliroute {

enum class SolveStatus { optimal, gap_limit, time_limit, node_limit };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::gap_limit: return "gap_limit";
    case SolveStatus::time_limit: return "time_limit";
    case SolveStatus::node_limit: return "node_limit";
  }
  return "?";
}

struct SolverConfig {
  double optimality_gap = 1e-6;  // relative
  double time_limit_s = 0;        // 0: none
  std::size_t node_limit = 1'000'000;
  bool use_lazy_rows = true;
  double integrality_tol = 1e-6;
  double feasibility_tol = 1e-7;
  std::uint64_t seed = 0;  // seeds the LP cost perturbation

  void validate() const {
    if (!(optimality_gap >= 0 && optimality_gap < 1)) throw ConfigurationError("optimality_gap must lie in [0, 1)");
    if (!(time_limit_s >= 0)) throw ConfigurationError("time_limit_s must be >= 0");
    if (node_limit < 1) throw ConfigurationError("node_limit must be >= 1");
    if (!(integrality_tol > 0 && integrality_tol < 0.5)) throw ConfigurationError("integrality_tol out of range");
    if (!(feasibility_tol > 0)) throw ConfigurationError("feasibility_tol must be > 0");
  }

  static SolverConfig from(const KeyValues& kv) {
    SolverConfig c;
    if (auto v = kv.number("optimality_gap")) c.optimality_gap = *v;
    if (auto v = kv.number("feasibility_tol")) c.feasibility_tol = *v;
    if (auto v = kv.number("integrality_tol")) c.integrality_tol = *v;
    if (auto v = kv.number("time_limit_s")) c.time_limit_s = *v;
    if (auto v = kv.number("node_limit")) {
      if (*v < 1 || *v != std::floor(*v)) throw ConfigurationError("node_limit must be a positive integer");
      c.node_limit = static_cast<std::size_t>(*v);
    }
    if (auto v = kv.text("use_lazy_rows")) c.use_lazy_rows = parse_flag(*v, "config key 'use_lazy_rows'");
    c.validate();
    return c;
  }
};

struct SolveResult {
  SolveStatus status = SolveStatus::optimal;
  SolutionVector best;
  double objective = 0;
  double bound = 0;  // best lower bound
  double gap = 0;
  std::size_t nodes_explored = 0;
  std::size_t lp_iterations = 0;
  std::size_t rows_in_lp = 0;
  std::size_t lazy_rows_added = 0;
  double wall_time_s = 0;
};

namespace detail {

class BranchAndBound {
 public:
  BranchAndBound(const MifrInstance& inst, const SolverConfig& cfg)
      : inst_(inst), cfg_(cfg), start_(std::chrono::steady_clock::now()), lp_(make_lp(inst, cfg.seed)) {
    if (cfg.time_limit_s > 0) {
      deadline_ = start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                               std::chrono::duration<double>(cfg.time_limit_s));
      lp_.set_deadline(deadline_);
    }
    std::vector<lp::RowSpec> initial;
    for (std::size_t i = 0; i < inst.rows.size(); ++i) {
      if (cfg.use_lazy_rows && inst.rows[i].lazy) {
        pending_.push_back(i);
      } else {
        initial.push_back(spec(inst.rows[i]));
      }
    }
    lp_.add_rows(initial);
  }

  SolveResult run() {
    SolveResult res;
    incumbent_ = inst_.all_unsatisfied();
    double inc = incumbent_.objective_value;
    double gap_pruned = std::numeric_limits<double>::infinity();

    struct Node {
      double bound;
      std::size_t depth;
      std::size_t order;
      std::vector<std::tuple<std::size_t, double, double>> bounds;
    };
    auto worse = [](const Node& a, const Node& b) {
      if (a.bound != b.bound) return a.bound > b.bound;
      if (a.depth != b.depth) return a.depth < b.depth;
      return a.order > b.order;
    };
    std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
    std::size_t created = 0;
    open.push(Node{-std::numeric_limits<double>::infinity(), 0, created++, {}});
    SolveStatus status = SolveStatus::optimal;
    double stop_bound = std::numeric_limits<double>::infinity();

    auto prune_tol = [&] { return cfg_.optimality_gap * std::max(1.0, std::fabs(inc)); };

    while (!open.empty()) {
      if (res.nodes_explored >= cfg_.node_limit) {
        status = SolveStatus::node_limit;
        stop_bound = open.top().bound;
        break;
      }
      if (deadline_ && std::chrono::steady_clock::now() > *deadline_) {
        status = SolveStatus::time_limit;
        stop_bound = open.top().bound;
        break;
      }
      Node node = open.top();
      open.pop();
      if (node.bound >= inc - prune_tol()) {
        if (node.bound < inc) gap_pruned = std::min(gap_pruned, node.bound);
        continue;
      }
      ++res.nodes_explored;
      apply(node.bounds);
      lp::Status s = solve_lp();
      if (s == lp::Status::time_limit || s == lp::Status::iteration_limit) {
        status = SolveStatus::time_limit;
        stop_bound = node.bound;
        if (!open.empty()) stop_bound = std::min(stop_bound, open.top().bound);
        break;
      }
      if (s == lp::Status::infeasible) continue;
      const double obj = lp_.objective();
      if (obj >= inc - prune_tol()) {
        if (obj < inc) gap_pruned = std::min(gap_pruned, obj);
        continue;
      }
      auto x = lp_.primal();
      std::size_t branch = choose_branch(x);
      if (branch == npos) {
        if (try_incumbent(x)) {
          inc = incumbent_.objective_value;
        }
        continue;
      }
      const double v = x[branch];
      auto up = node.bounds;
      up.emplace_back(branch, std::ceil(v), current_upper(node.bounds, branch));
      auto down = std::move(node.bounds);
      down.emplace_back(branch, current_lower(down, branch), std::floor(v));
      open.push(Node{obj, node.depth + 1, created++, std::move(up)});
      open.push(Node{obj, node.depth + 1, created++, std::move(down)});
    }

    double best_bound = inc;
    if (status != SolveStatus::optimal) {
      best_bound = std::min(inc, stop_bound);
    }
    best_bound = std::min(best_bound, gap_pruned);
    res.gap = (inc - best_bound) / std::max(1.0, std::fabs(inc));
    if (status == SolveStatus::optimal && res.gap > cfg_.optimality_gap) status = SolveStatus::gap_limit;
    res.status = status;
    res.best = incumbent_;
    res.objective = inc;
    res.bound = best_bound;
    res.lp_iterations = lp_.iterations();
    res.rows_in_lp = lp_.num_rows();
    res.lazy_rows_added = lazy_added_;
    res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return res;
  }

 private:
  static lp::DualSimplex make_lp(const MifrInstance& inst, std::uint64_t seed) {
    std::vector<double> lo, hi;
    for (const auto& v : inst.variables) {
      lo.push_back(v.lower);
      hi.push_back(v.upper);
    }
    lp::Options opt;
    opt.seed ^= seed;
    return lp::DualSimplex(inst.objective, std::move(lo), std::move(hi), opt);
  }

  static lp::RowSpec spec(const Row& r) {
    lp::RowSpec s;
    s.index = r.index;
    s.value = r.value;
    if (r.sense != Sense::ge) s.upper = r.rhs;
    if (r.sense != Sense::le) s.lower = r.rhs;
    return s;
  }

  double current_upper(const std::vector<std::tuple<std::size_t, double, double>>& b, std::size_t j) const {
    double u = inst_.variables[j].upper;
    for (const auto& [k, lo, hi] : b) {
      if (k == j) u = hi;
    }
    return u;
  }
  double current_lower(const std::vector<std::tuple<std::size_t, double, double>>& b, std::size_t j) const {
    double l = inst_.variables[j].lower;
    for (const auto& [k, lo, hi] : b) {
      if (k == j) l = lo;
    }
    return l;
  }

  void apply(const std::vector<std::tuple<std::size_t, double, double>>& bounds) {
    for (std::size_t j : modified_) lp_.set_bounds(j, inst_.variables[j].lower, inst_.variables[j].upper);
    modified_.clear();
    for (const auto& [j, lo, hi] : bounds) {
      lp_.set_bounds(j, lo, hi);
      modified_.push_back(j);
    }
  }

  // Solves the relaxation, adding withheld rows until none is violated.
  lp::Status solve_lp() {
    while (true) {
      lp::Status s = lp_.solve();
      if (s != lp::Status::optimal) return s;
      if (pending_.empty()) return s;
      std::vector<lp::RowSpec> add;
      std::vector<std::size_t> keep;
      for (std::size_t i : pending_) {
        const Row& r = inst_.rows[i];
        double act = 0;
        for (std::size_t k = 0; k < r.index.size(); ++k) act += r.value[k] * lp_.value(r.index[k]);
        if (r.violation(act) > 1e-9 * std::max(1.0, std::fabs(r.rhs))) {
          add.push_back(spec(r));
        } else {
          keep.push_back(i);
        }
      }
      if (add.empty()) return s;
      lazy_added_ += add.size();
      pending_ = std::move(keep);
      lp_.add_rows(add);
    }
  }

  // Most fractional binary first (ties by index); general integers only
  // once all binaries are integral.
  std::size_t choose_branch(const std::vector<double>& x) const {
    for (int pass = 0; pass < 2; ++pass) {
      std::size_t best = npos;
      double best_frac = cfg_.integrality_tol;
      for (std::size_t j = 0; j < x.size(); ++j) {
        const auto& v = inst_.variables[j];
        if (!v.integer) continue;
        const bool general = v.family == VarFamily::U;
        if (general != (pass == 1)) continue;
        double f = x[j] - std::floor(x[j]);
        double frac = std::min(f, 1 - f);
        if (frac > best_frac) {
          best_frac = frac;
          best = j;
        }
      }
      if (best != npos) return best;
    }
    return npos;
  }

  bool accept(SolutionVector cand) {
    cand.objective_value = inst_.evaluate(cand.values);
    if (!check_feasibility(inst_, cand, cfg_.feasibility_tol).empty()) return false;
    if (cand.objective_value >= incumbent_.objective_value) return false;
    incumbent_ = std::move(cand);
    return true;
  }

  // Rounds integers, re-solves the continuous part with integers fixed and
  // keeps the result if it passes the feasibility check.
  bool try_incumbent(const std::vector<double>& x) {
    SolutionVector rounded;
    rounded.values = x;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const auto& v = inst_.variables[j];
      if (v.integer) rounded.values[j] = std::round(x[j]);
      rounded.values[j] = std::clamp(rounded.values[j], v.lower, v.upper);
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (!inst_.variables[j].integer) continue;
      lp_.set_bounds(j, rounded.values[j], rounded.values[j]);
      modified_.push_back(j);
    }
    if (solve_lp() == lp::Status::optimal) {
      SolutionVector polished;
      polished.values = lp_.primal();
      for (std::size_t j = 0; j < x.size(); ++j) {
        const auto& v = inst_.variables[j];
        if (v.integer) polished.values[j] = rounded.values[j];
        polished.values[j] = std::clamp(polished.values[j], v.lower, v.upper);
        if (std::fabs(polished.values[j]) < 1e-12) polished.values[j] = 0;
      }
      if (accept(polished)) return true;
    }
    return accept(rounded);
  }

  const MifrInstance& inst_;
  SolverConfig cfg_;
  std::chrono::steady_clock::time_point start_;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
  lp::DualSimplex lp_;
  std::vector<std::size_t> pending_;
  std::vector<std::size_t> modified_;
  std::size_t lazy_added_ = 0;
  SolutionVector incumbent_;
};

}  // namespace detail

// Branch and bound over the instance, best bound first, starting from the
// all-unsatisfied incumbent. Deterministic for a given instance and config.
inline SolveResult solve(const MifrInstance& inst, const SolverConfig& cfg = {}) {
  cfg.validate();
  if (inst.num_vars() == 0) {
    return SolveResult{};
  }
  detail::BranchAndBound bb(inst, cfg);
  return bb.run();
}

// ---------------------------------------------------------------------------
// Exhaustive reference: each pair either follows one candidate path with its
// whole demand or is left unsatisfied.

struct OracleResult {
  SolutionVector solution;
  double objective = 0;
  std::vector<std::size_t> choice;  // per pair: path index, or npos for unsatisfied
  std::size_t combinations = 0;
};

inline OracleResult brute_force_oracle(const MifrInstance& inst, std::size_t max_combinations = 10'000'000) {
  const auto& net = *inst.network;
  const std::size_t np = inst.pairs.size();
  std::size_t total = 1;
  for (const auto& p : inst.pairs) {
    std::size_t options = inst.pathsets[p.pathset].paths.size() + 1;
    if (total > max_combinations / options) {
      throw OracleRefusal("instance has more than " + std::to_string(max_combinations) + " route combinations");
    }
    total *= options;
  }

  auto mode_change_terminals = [&](const CandidatePath& path) {
    std::vector<std::size_t> out;
    for (std::size_t node : path.terminals) {
      std::size_t s = net.terminal_at(node);
      if (s != npos) out.push_back(s);
    }
    return out;
  };

  // per pair, per option: cost and usage
  struct Option {
    double cost = 0;
    bool feasible_alone = true;
    std::vector<std::size_t> links;
    std::vector<std::size_t> terminals;
  };
  std::vector<std::vector<Option>> options(np);
  for (std::size_t p = 0; p < np; ++p) {
    const auto& pair = inst.pairs[p];
    const double dem = static_cast<double>(pair.containers);
    const auto& ps = inst.pathsets[pair.pathset];
    for (const auto& path : ps.paths) {
      Option o;
      o.links = path.links;
      o.terminals = mode_change_terminals(path);
      for (std::size_t l : path.links) o.cost += dem * net.unit_cost(l, pair.commodity);
      for (std::size_t s : o.terminals) o.cost += dem * net.terminals()[s].transfer_cost;
      std::vector<char> on_path(net.links().size(), 0);
      for (std::size_t l : path.links) on_path[l] = 1;
      std::vector<char> y(net.terminals().size(), 0);
      for (std::size_t s : o.terminals) y[s] = 1;
      for (const auto& other : ps.paths) {
        double lhs = 0;
        for (std::size_t l : other.links) {
          if (on_path[l]) lhs += net.links()[l].travel_time_h;
        }
        for (std::size_t node : other.nodes) {
          std::size_t s = net.terminal_at(node);
          if (s != npos && y[s]) lhs += net.terminals()[s].processing_hours;
        }
        if (lhs > pair.deadline_hours * (1 + 1e-12)) o.feasible_alone = false;
      }
      options[p].push_back(std::move(o));
    }
    Option unsat;
    unsat.cost = inst.meta.psi * dem;
    options[p].push_back(std::move(unsat));
  }

  OracleResult best;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(np, 0);
  std::vector<double> link_load(net.links().size());
  std::vector<double> term_load(net.terminals().size());
  for (std::size_t c = 0; c < total; ++c) {
    bool ok = true;
    double cost = 0;
    std::fill(link_load.begin(), link_load.end(), 0.0);
    std::fill(term_load.begin(), term_load.end(), 0.0);
    for (std::size_t p = 0; p < np && ok; ++p) {
      const auto& o = options[p][idx[p]];
      if (!o.feasible_alone) ok = false;
      cost += o.cost;
      const double dem = static_cast<double>(inst.pairs[p].containers);
      for (std::size_t l : o.links) link_load[l] += dem;
      for (std::size_t s : o.terminals) term_load[s] += dem;
    }
    for (std::size_t l = 0; l < link_load.size() && ok; ++l) {
      double cap = inst.effective_link_capacity[l];
      if (link_load[l] > cap + 1e-9 * std::max(1.0, cap)) ok = false;
    }
    for (std::size_t s = 0; s < term_load.size() && ok; ++s) {
      double cap = inst.effective_terminal_capacity[s];
      if (term_load[s] > cap + 1e-9 * std::max(1.0, cap)) ok = false;
    }
    if (ok && cost < best.objective) {
      best.objective = cost;
      best.choice = idx;
    }
    for (std::size_t p = 0; p < np; ++p) {
      if (++idx[p] < options[p].size()) break;
      idx[p] = 0;
    }
  }
  best.combinations = total;

  best.solution.values.assign(inst.num_vars(), 0.0);
  for (std::size_t p = 0; p < np; ++p) {
    std::size_t k = best.choice.empty() ? options[p].size() - 1 : best.choice[p];
    if (k + 1 == options[p].size()) {
      best.solution.values[inst.var(VarFamily::U, p)] = static_cast<double>(inst.pairs[p].containers);
      if (!best.choice.empty()) best.choice[p] = npos;
      continue;
    }
    for (std::size_t l : options[p][k].links) {
      const bool road = net.links()[l].mode == Mode::road;
      best.solution.values[inst.flow_var(p, l)] = 1.0;
      best.solution.values[inst.var(road ? VarFamily::delta : VarFamily::delta_r, p, l)] = 1.0;
    }
    for (std::size_t s : options[p][k].terminals) {
      best.solution.values[inst.var(VarFamily::F, p, s)] = 1.0;
      best.solution.values[inst.var(VarFamily::Y, p, s)] = 1.0;
    }
  }
  best.solution.objective_value = inst.evaluate(best.solution.values);
  best.objective = best.solution.objective_value;
  return best;
}

inline SolveResult brute_force_oracle(const IntermodalNetwork& net, const DemandSet& demands,
                                      const ReductionTable& reductions, const std::vector<PathSet>& pathsets,
                                      const ModelConfig& cfg = {}) {
  auto inst = build_instance(net, demands, reductions, pathsets, cfg);
  auto o = brute_force_oracle(inst);
  SolveResult r;
  r.best = o.solution;
  r.objective = o.objective;
  r.bound = o.objective;
  r.nodes_explored = o.combinations;
  return r;
}

// ---------------------------------------------------------------------------
// Routes

struct Route {
  std::string od;
  std::string commodity;
  double fraction = 0;
  std::vector<std::size_t> nodes;  // empty for the unsatisfied share
  double cost = 0;                 // dollars for this share
  double unsatisfied = 0;          // containers
};

using RouteDecomposition = std::vector<Route>;

// Decomposes each pair's link fractions into origin-destination routes,
// plus one entry for the unsatisfied containers if any.
inline RouteDecomposition extract_routes(const MifrInstance& inst, const SolutionVector& sol, double tol = 1e-9) {
  if (sol.values.size() != inst.num_vars()) throw ConfigurationError("solution does not match instance");
  if (auto v = check_feasibility(inst, sol); !v.empty()) {
    throw ConfigurationError("solution is infeasible: " + v.front().what);
  }
  const auto& net = *inst.network;
  std::vector<Route> out;
  for (std::size_t p = 0; p < inst.pairs.size(); ++p) {
    const auto& pair = inst.pairs[p];
    const double dem = static_cast<double>(pair.containers);
    std::vector<double> flow(net.links().size());
    for (std::size_t l = 0; l < net.links().size(); ++l) flow[l] = std::max(0.0, sol.values[inst.flow_var(p, l)]);
    for (std::size_t guard = 0; guard < 4 * net.links().size() + 4; ++guard) {
      std::vector<std::size_t> links;
      std::vector<std::size_t> nodes{pair.origin};
      std::vector<char> visited(net.nodes().size(), 0);
      visited[pair.origin] = 1;
      std::size_t u = pair.origin;
      bool cycle = false;
      while (u != pair.destination) {
        std::size_t pick = npos;
        for (std::size_t l : net.out_links(u)) {
          if (flow[l] <= tol) continue;
          if (pick == npos || flow[l] > flow[pick] ||
              (flow[l] == flow[pick] && net.links()[l].id < net.links()[pick].id)) {
            pick = l;
          }
        }
        if (pick == npos) break;
        links.push_back(pick);
        u = net.link_to(pick);
        if (visited[u]) {
          cycle = true;
          break;
        }
        visited[u] = 1;
        nodes.push_back(u);
      }
      if (links.empty()) break;
      if (cycle) {
        // cancel the cycle closed by the last link
        std::size_t start = 0;
        while (net.link_from(links[start]) != u) ++start;
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t k = start; k < links.size(); ++k) m = std::min(m, flow[links[k]]);
        for (std::size_t k = start; k < links.size(); ++k) flow[links[k]] -= m;
        continue;
      }
      if (u != pair.destination) {
        for (std::size_t l : links) flow[l] = 0;  // dangling flow
        continue;
      }
      double f = std::numeric_limits<double>::infinity();
      for (std::size_t l : links) f = std::min(f, flow[l]);
      for (std::size_t l : links) flow[l] -= f;
      double per_container = 0;
      for (std::size_t l : links) per_container += net.unit_cost(l, pair.commodity);
      for (std::size_t k = 1; k < links.size(); ++k) {
        if (net.links()[links[k - 1]].mode != net.links()[links[k]].mode) {
          std::size_t s = net.terminal_at(nodes[k]);
          if (s != npos) per_container += net.terminals()[s].transfer_cost;
        }
      }
      out.push_back(Route{pair.od, pair.commodity, f, nodes, f * dem * per_container, 0.0});
    }
    const double u_val = sol.values[inst.var(VarFamily::U, p)];
    if (u_val > tol) {
      out.push_back(Route{pair.od, pair.commodity, u_val / dem, {}, inst.meta.psi * u_val, u_val});
    }
  }
  return out;
}

inline void write_routes_csv(const MifrInstance& inst, const std::vector<Route>& routes,
                             const std::filesystem::path& file) {
  std::ofstream f(file, std::ios::binary);
  if (!f) throw IoError("cannot write " + file.string());
  f << "od,commodity,fraction,route_nodes,cost,unsatisfied\n";
  for (const auto& r : routes) {
    f << csv::quote(r.od) << ',' << csv::quote(r.commodity) << ',' << csv::fixed_significant(r.fraction) << ','
      << csv::quote(node_sequence(*inst.network, r.nodes)) << ',' << csv::fixed_significant(r.cost) << ','
      << csv::fixed_significant(r.unsatisfied) << '\n';
  }
}

// `variable,index,value` for every nonzero entry.
inline void write_solution_csv(const MifrInstance& inst, const SolutionVector& sol,
                               const std::filesystem::path& file) {
  std::ofstream f(file, std::ios::binary);
  if (!f) throw IoError("cannot write " + file.string());
  f << "variable,index,value\n";
  for (std::size_t j = 0; j < sol.values.size(); ++j) {
    if (sol.values[j] == 0) continue;
    f << to_string(inst.variables[j].family) << ',' << csv::quote(inst.variable_index(j)) << ','
      << csv::fixed_significant(sol.values[j]) << '\n';
  }
}

}  // namespace reliroute
