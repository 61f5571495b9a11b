#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

#include "reliroute/csv.hpp"
#include "reliroute/error.hpp"
#include "reliroute/mifr.hpp"
#include "reliroute/netmodel.hpp"
#include "reliroute/robust.hpp"
#include "reliroute/solver.hpp"
#include "reliroute/vulnerability.hpp"

namespace reliroute {

enum class DisruptionMode { robust_reduce, knockout };

inline const char* to_string(DisruptionMode m) {
  return m == DisruptionMode::robust_reduce ? "robust-reduce" : "knockout";
}

inline std::optional<DisruptionMode> disruption_mode_from_string(std::string_view s) {
  if (s == "robust-reduce") return DisruptionMode::robust_reduce;
  if (s == "knockout") return DisruptionMode::knockout;
  return std::nullopt;
}

inline std::optional<DisruptionKind> disruption_kind_from_string(std::string_view s) {
  if (s == "link" || s == "links") return DisruptionKind::link;
  if (s == "node" || s == "nodes") return DisruptionKind::node;
  if (s == "terminal" || s == "terminals") return DisruptionKind::terminal;
  return std::nullopt;
}

struct FedConfig {
  std::map<DisruptionKind, std::vector<std::size_t>> levels{
      {DisruptionKind::link, {30, 60, 100, 200}},
      {DisruptionKind::node, {5, 10, 20, 40}},
      {DisruptionKind::terminal, {15, 30, 44}},
  };
  std::vector<double> q_levels{0.05, 0.1, 0.15, 0.2};
  std::vector<double> lambda_levels{0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  DisruptionMode mode = DisruptionMode::robust_reduce;
  double ranking_alpha = 2.0;
  std::size_t jobs = 1;

  void validate() const {
    if (levels.empty()) throw ConfigurationError("no disruption kinds selected");
    for (const auto& [k, v] : levels) {
      if (v.empty()) throw ConfigurationError(std::string("empty level list for ") + to_string(k));
      for (auto n : v) {
        if (n < 1) throw ConfigurationError("element counts must be >= 1");
      }
    }
    if (q_levels.empty() || lambda_levels.empty()) throw ConfigurationError("empty q or lambda level list");
    for (double q : q_levels) {
      if (!(q > 0 && q <= 1)) throw ConfigurationError("q levels must lie in (0, 1]");
    }
    for (double l : lambda_levels) {
      if (!(l >= 0 && l <= 1)) throw ConfigurationError("lambda levels must lie in [0, 1]");
    }
    if (jobs < 1) throw ConfigurationError("jobs must be >= 1");
  }
};

// Level file: `kind = n1, n2, ...` for link/node/terminal plus `q` and
// `lambda` lists and an optional `mode`.
inline FedConfig read_fed_levels(const KeyValues& kv, FedConfig base = {}) {
  auto list = [&](const std::string& key) -> std::optional<std::vector<double>> {
    auto t = kv.text(key);
    if (!t) return std::nullopt;
    std::vector<double> out;
    for (const auto& item : csv::split_line(*t)) {
      auto v = csv::try_parse_double(item);
      if (!v) throw ConfigurationError("level list '" + key + "': bad value '" + item + "'");
      out.push_back(*v);
    }
    return out;
  };
  for (auto kind : {DisruptionKind::link, DisruptionKind::node, DisruptionKind::terminal}) {
    std::string key = std::string(to_string(kind)) + "s";
    if (auto v = list(key)) {
      std::vector<std::size_t> n;
      for (double x : *v) {
        if (x < 1 || x != std::floor(x)) throw ConfigurationError("level list '" + key + "' needs positive integers");
        n.push_back(static_cast<std::size_t>(x));
      }
      base.levels[kind] = n;
    }
  }
  if (auto v = list("q")) base.q_levels = *v;
  if (auto v = list("lambda")) base.lambda_levels = *v;
  if (auto m = kv.text("mode")) {
    auto mode = disruption_mode_from_string(*m);
    if (!mode) throw ConfigurationError("mode must be robust-reduce or knockout");
    base.mode = *mode;
  }
  base.validate();
  return base;
}

struct FedInstanceSpec {
  DisruptionKind kind = DisruptionKind::link;
  std::size_t n_elements = 0;
  double q = 1;
  double lambda = 0;
};

// Full factorial design in (kind, n, q, lambda) order.
inline std::vector<FedInstanceSpec> fed_design(const FedConfig& cfg) {
  cfg.validate();
  std::vector<FedInstanceSpec> out;
  for (const auto& [kind, ns] : cfg.levels) {
    for (auto n : ns) {
      for (double q : cfg.q_levels) {
        for (double l : cfg.lambda_levels) out.push_back({kind, n, q, l});
      }
    }
  }
  return out;
}

struct FedRow {
  DisruptionKind kind = DisruptionKind::link;
  std::size_t n_elements = 0;
  double q = 1;
  double lambda = 0;
  double objective = 0;
  std::string status;
  double unsatisfied = 0;
  double wall_time_s = 0;
  std::size_t n_disrupted = 0;  // elements actually disrupted (n capped at the available count)
  double rail_flow = 0;         // sum of rail fractions over all pairs
};

struct FedResult {
  std::vector<FedRow> rows;
  std::map<DisruptionKind, std::vector<std::string>> ranking;  // disrupted-element order per kind
};

inline bool fed_row_less(const FedRow& a, const FedRow& b) {
  return std::tie(a.kind, a.n_elements, a.q, a.lambda) < std::tie(b.kind, b.n_elements, b.q, b.lambda);
}

// Reductions for one design point: the top-n ranked elements of the kind get
// (lambda, q), or zero capacity in knockout mode. A disrupted node passes the
// pair to every incident link.
inline ReductionTable disruption_reductions(const IntermodalNetwork& net, DisruptionKind kind,
                                            const std::vector<std::string>& elements, double lambda, double q,
                                            DisruptionMode mode) {
  std::vector<ElementRef> targets;
  for (const auto& id : elements) {
    switch (kind) {
      case DisruptionKind::link: {
        auto l = net.find_link(id);
        if (!l) throw ReferenceError("unknown link '" + id + "'");
        targets.push_back(element_of_link(net, *l));
        break;
      }
      case DisruptionKind::node: {
        auto n = net.find_node(id);
        if (!n) throw ReferenceError("unknown node '" + id + "'");
        for (std::size_t l : net.out_links(*n)) targets.push_back(element_of_link(net, l));
        for (std::size_t l : net.in_links(*n)) targets.push_back(element_of_link(net, l));
        break;
      }
      case DisruptionKind::terminal:
        if (!net.find_terminal(id)) throw ReferenceError("unknown terminal '" + id + "'");
        targets.push_back({ElementType::terminal, id});
        break;
    }
  }
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  if (mode == DisruptionMode::knockout) {
    auto red = deterministic_reductions(net);
    for (const auto& t : targets) red.knock_out(t);
    return red;
  }
  std::vector<UncertaintySpec> specs;
  for (const auto& t : targets) specs.push_back({t, lambda, q});
  return reduction_table(net, specs);
}

inline double total_unsatisfied(const MifrInstance& inst, const SolutionVector& sol) {
  double s = 0;
  for (std::size_t p = 0; p < inst.pairs.size(); ++p) s += sol.values[inst.var(VarFamily::U, p)];
  return s;
}

inline double total_rail_flow(const MifrInstance& inst, const SolutionVector& sol) {
  double s = 0;
  for (std::size_t p = 0; p < inst.pairs.size(); ++p) {
    for (std::size_t l : inst.rail_links) s += sol.values[inst.var(VarFamily::Xr, p, l)];
  }
  return s;
}

// Runs every design point; elements are chosen from the importance ranking
// of a deterministic baseline. Results are sorted by (kind, n, q, lambda).
inline FedResult run_fed(const IntermodalNetwork& net, const DemandSet& demands, const FedConfig& cfg,
                         const SolverConfig& solver = {}, const ModelConfig& model = {}) {
  cfg.validate();
  auto design = fed_design(cfg);
  auto paths = build_pathsets(net, demands, model.cutoff_factor, model.max_paths);
  ModelConfig fixed = model;
  if (!fixed.psi) fixed.psi = default_psi(net, demands);

  FedResult result;
  {
    auto base_inst = build_instance(net, demands, deterministic_reductions(net), paths, fixed);
    auto base = solve(base_inst, solver);
    auto baseline = make_baseline(base_inst, base.best);
    baseline.max_deadline = std::max(baseline.max_deadline, demands.max_deadline());
    DisruptionScenario scen;
    scen.travel_time_multiplier = cfg.ranking_alpha;
    auto report = importance_report(baseline, scen);
    for (const auto& [kind, ns] : cfg.levels) {
      (void)ns;
      for (const auto& e : rank_elements(report, kind)) result.ranking[kind].push_back(e.id);
    }
  }

  result.rows.resize(design.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= design.size()) return;
      try {
        const auto& spec = design[i];
        const auto& ranked = result.ranking.at(spec.kind);
        std::size_t n = std::min(spec.n_elements, ranked.size());
        std::vector<std::string> chosen(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n));
        auto red = disruption_reductions(net, spec.kind, chosen, spec.lambda, spec.q, cfg.mode);
        auto inst = build_instance(net, demands, red, paths, fixed);
        auto res = solve(inst, solver);
        FedRow row;
        row.kind = spec.kind;
        row.n_elements = spec.n_elements;
        row.q = spec.q;
        row.lambda = spec.lambda;
        row.objective = res.objective;
        row.status = to_string(res.status);
        row.unsatisfied = total_unsatisfied(inst, res.best);
        row.wall_time_s = res.wall_time_s;
        row.n_disrupted = n;
        row.rail_flow = total_rail_flow(inst, res.best);
        result.rows[i] = row;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = design.size();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < cfg.jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  std::sort(result.rows.begin(), result.rows.end(), fed_row_less);
  return result;
}

struct TrendViolation {
  FedRow earlier;
  FedRow later;
  std::string rule;  // "lambda" or "q"
};

// Objective must not fall as lambda grows (fixed kind, n, q) and must not
// rise as q grows (fixed kind, n, lambda > 0).
inline std::vector<TrendViolation> check_trends(const std::vector<FedRow>& rows, double rel_tol = 1e-6) {
  std::vector<TrendViolation> out;
  auto worse = [&](double lo, double hi) { return hi < lo - rel_tol * std::max(1.0, std::fabs(lo)); };
  std::map<std::tuple<DisruptionKind, std::size_t, double>, std::vector<const FedRow*>> by_q, by_lambda;
  for (const auto& r : rows) {
    by_q[{r.kind, r.n_elements, r.q}].push_back(&r);
    if (r.lambda > 0) by_lambda[{r.kind, r.n_elements, r.lambda}].push_back(&r);
  }
  for (auto& [key, series] : by_q) {
    std::sort(series.begin(), series.end(), [](auto* a, auto* b) { return a->lambda < b->lambda; });
    for (std::size_t k = 1; k < series.size(); ++k) {
      if (worse(series[k - 1]->objective, series[k]->objective)) out.push_back({*series[k - 1], *series[k], "lambda"});
    }
  }
  for (auto& [key, series] : by_lambda) {
    std::sort(series.begin(), series.end(), [](auto* a, auto* b) { return a->q < b->q; });
    for (std::size_t k = 1; k < series.size(); ++k) {
      if (worse(series[k]->objective, series[k - 1]->objective)) out.push_back({*series[k - 1], *series[k], "q"});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output

inline void write_fed_results(const std::vector<FedRow>& rows, const std::filesystem::path& file,
                              bool include_timing = true) {
  std::ofstream f(file, std::ios::binary);
  if (!f) throw IoError("cannot write " + file.string());
  f << "kind,n_elements,q,lambda,objective,status,unsatisfied,wall_time_s\n";
  for (const auto& r : rows) {
    f << to_string(r.kind) << ',' << r.n_elements << ',' << csv::exact(r.q) << ',' << csv::exact(r.lambda) << ','
      << csv::fixed_significant(r.objective) << ',' << r.status << ',' << csv::fixed_significant(r.unsatisfied)
      << ',' << (include_timing ? csv::fixed_significant(r.wall_time_s, 6) : std::string("0")) << '\n';
  }
}

inline std::vector<FedRow> read_fed_results(const std::filesystem::path& file) {
  auto t = csv::Table::read(file);
  t.require({"kind", "n_elements", "q", "lambda", "objective", "status", "unsatisfied", "wall_time_s"});
  std::vector<FedRow> out;
  for (const auto& row : t.rows()) {
    const std::string where = t.where(row);
    FedRow r;
    auto kind = disruption_kind_from_string(t.get(row, "kind"));
    if (!kind) throw SchemaError(where + ": unknown kind");
    r.kind = *kind;
    r.n_elements = static_cast<std::size_t>(csv::parse_integer(t.get(row, "n_elements"), where));
    r.q = csv::parse_double(t.get(row, "q"), where);
    r.lambda = csv::parse_double(t.get(row, "lambda"), where);
    r.objective = csv::parse_double(t.get(row, "objective"), where);
    r.status = t.get(row, "status");
    r.unsatisfied = csv::parse_double(t.get(row, "unsatisfied"), where);
    r.wall_time_s = csv::parse_double(t.get(row, "wall_time_s"), where);
    out.push_back(std::move(r));
  }
  return out;
}

namespace detail {

inline std::string svg_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

}  // namespace detail

// Objective against lambda, one polyline per q.
inline std::string render_chart(const std::string& title, const std::map<double, std::vector<std::pair<double, double>>>& series) {
  const double W = 800, H = 500, left = 90, right = 150, top = 40, bottom = 60;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& [q, pts] : series) {
    for (const auto& [x, y] : pts) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!(xmax > xmin)) xmax = xmin + 1;
  if (!(ymax > ymin)) {
    ymax = ymin + std::max(1.0, std::fabs(ymin) * 0.05);
    ymin -= std::max(1.0, std::fabs(ymin) * 0.05);
  }
  const double pw = W - left - right, ph = H - top - bottom;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + ph - (y - ymin) / (ymax - ymin) * ph; };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"};

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" viewBox=\"0 0 800 500\">\n";
  o << "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
  o << "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
    << detail::svg_escape(title) << "</text>\n";
  o << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
    << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    double xv = xmin + (xmax - xmin) * k / 5.0;
    double yv = ymin + (ymax - ymin) * k / 5.0;
    o << "<text x=\"" << detail::svg_num(sx(xv)) << "\" y=\"" << top + ph + 18
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << detail::svg_num(xv) << "</text>\n";
    o << "<text x=\"" << left - 6 << "\" y=\"" << detail::svg_num(sy(yv) + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << csv::fixed_significant(yv, 6)
      << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">capacity uncertainty (λ)</text>\n";
  o << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\""
    << " transform=\"rotate(-90 18 " << top + ph / 2 << ")\">objective ($)</text>\n";
  std::size_t c = 0;
  for (const auto& [q, pts] : series) {
    const char* color = colors[c % (sizeof colors / sizeof *colors)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (k) o << ' ';
      o << detail::svg_num(sx(pts[k].first)) << ',' << detail::svg_num(sy(pts[k].second));
    }
    o << "\"/>\n";
    for (const auto& [x, y] : pts) {
      o << "<circle cx=\"" << detail::svg_num(sx(x)) << "\" cy=\"" << detail::svg_num(sy(y)) << "\" r=\"3\" fill=\""
        << color << "\"/>\n";
    }
    double ly = top + 20 + 20.0 * static_cast<double>(c);
    o << "<line x1=\"" << W - right + 15 << "\" y1=\"" << ly << "\" x2=\"" << W - right + 40 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << W - right + 46 << "\" y=\"" << ly + 4
      << "\" font-family=\"sans-serif\" font-size=\"12\">q = " << csv::exact(q) << "</text>\n";
    ++c;
  }
  o << "</svg>\n";
  return o.str();
}

// fed_results.csv plus fed_<kind>_<n>.svg per (kind, n). Returns the files
// written.
inline std::vector<std::filesystem::path> emit_results(const std::vector<FedRow>& rows,
                                                       const std::filesystem::path& out_dir,
                                                       bool include_timing = true) {
  if (rows.empty()) throw ConfigurationError("no FED results to emit");
  std::filesystem::create_directories(out_dir);
  std::vector<FedRow> sorted = rows;
  std::sort(sorted.begin(), sorted.end(), fed_row_less);
  std::vector<std::filesystem::path> files{out_dir / "fed_results.csv"};
  write_fed_results(sorted, files.front(), include_timing);
  std::map<std::pair<DisruptionKind, std::size_t>, std::map<double, std::vector<std::pair<double, double>>>> charts;
  for (const auto& r : sorted) charts[{r.kind, r.n_elements}][r.q].emplace_back(r.lambda, r.objective);
  for (const auto& [key, series] : charts) {
    const auto& [kind, n] = key;
    std::string name = "fed_" + std::string(to_string(kind)) + "_" + std::to_string(n) + ".svg";
    auto path = out_dir / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << render_chart(std::to_string(n) + " " + to_string(kind) + " disruptions", series);
    files.push_back(path);
  }
  return files;
}

// ---------------------------------------------------------------------------
// Monte Carlo check of the capacity buffer

struct McConfig {
  std::string distribution = "uniform";  // uniform, two-point or triangular
  std::size_t samples = 10'000;
  std::uint64_t seed = 1;
  double support = 1.0;  // noise is scaled to [-support, support]

  void validate() const {
    if (distribution != "uniform" && distribution != "two-point" && distribution != "triangular") {
      throw ConfigurationError("distribution must be uniform, two-point or triangular");
    }
    if (samples < 1) throw ConfigurationError("samples must be >= 1");
    if (!(support > 0 && support <= 1)) {
      throw ConfigurationError("noise support must lie within [-1, 1]");
    }
  }
};

struct McRow {
  ElementRef element;
  double q = 1;
  double lambda = 0;
  double nominal_capacity = 0;
  double flow = 0;
  std::size_t samples = 0;
  std::size_t violations = 0;
  double empirical_rate = 0;
  double p_value = 1;  // P(X >= violations) for X ~ Binomial(samples, q)
  std::string verdict;
};

// Symmetric noise on [-1, 1] from raw 64-bit draws.
class SymmetricNoise {
 public:
  SymmetricNoise(const McConfig& cfg) : kind_(cfg.distribution), support_(cfg.support), rng_(cfg.seed) {}

  double operator()() {
    double v;
    if (kind_ == "uniform") {
      v = 2 * unit() - 1;
    } else if (kind_ == "two-point") {
      v = (rng_() >> 63) ? 1.0 : -1.0;
    } else {
      v = unit() + unit() - 1;
    }
    return support_ * v;
  }

 private:
  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  std::string kind_;
  double support_;
  std::mt19937_64 rng_;
};

// One-sided binomial tail P(X >= v) for X ~ Binomial(n, q).
inline double binomial_upper_tail(std::size_t n, std::size_t v, double q) {
  if (v == 0) return 1.0;
  if (q >= 1) return 1.0;
  boost::math::binomial_distribution<double> dist(static_cast<double>(n), q);
  return boost::math::cdf(boost::math::complement(dist, static_cast<double>(v - 1)));
}

// Samples realized capacities Q(1 + lambda xi) for every capacitated element
// with lambda > 0 or positive flow and counts samples in which the assigned
// flow exceeds them. A row fails only when its violation count is
// significant against rate q at the 1% level.
inline std::vector<McRow> mc_validate(const MifrInstance& inst, const SolutionVector& best,
                                      const ReductionTable& reductions, const McConfig& mc) {
  mc.validate();
  if (best.values.size() != inst.num_vars()) throw ConfigurationError("solution does not match instance");
  const auto& net = *inst.network;
  std::vector<McRow> out;
  SymmetricNoise noise(mc);
  auto run = [&](const CapacityReduction& r, double flow) {
    McRow row;
    row.element = r.element;
    row.q = r.q;
    row.lambda = r.lambda;
    row.nominal_capacity = r.nominal_capacity;
    row.flow = flow;
    row.samples = mc.samples;
    const double tol = 1e-9 * std::max(1.0, r.nominal_capacity);
    for (std::size_t k = 0; k < mc.samples; ++k) {
      double realized = r.nominal_capacity * (1 + r.lambda * noise());
      if (flow > realized + tol) ++row.violations;
    }
    row.empirical_rate = static_cast<double>(row.violations) / static_cast<double>(row.samples);
    row.p_value = binomial_upper_tail(row.samples, row.violations, row.q);
    row.verdict = row.p_value < 0.01 ? "fail" : "pass";
    out.push_back(std::move(row));
  };
  for (std::size_t l = 0; l < net.links().size(); ++l) {
    double flow = 0;
    for (std::size_t p = 0; p < inst.pairs.size(); ++p) {
      flow += static_cast<double>(inst.pairs[p].containers) * best.values[inst.flow_var(p, l)];
    }
    const auto& r = reductions.link[l];
    if (r.lambda > 0 || flow > 0) run(r, flow);
  }
  for (std::size_t s = 0; s < net.terminals().size(); ++s) {
    double flow = 0;
    for (std::size_t p = 0; p < inst.pairs.size(); ++p) {
      flow += static_cast<double>(inst.pairs[p].containers) * best.values[inst.var(VarFamily::F, p, s)];
    }
    const auto& r = reductions.terminal[s];
    if (r.lambda > 0 || flow > 0) run(r, flow);
  }
  return out;
}

inline void write_mc_report(const std::vector<McRow>& rows, const std::filesystem::path& file) {
  std::ofstream f(file, std::ios::binary);
  if (!f) throw IoError("cannot write " + file.string());
  f << "element_type,element_id,q,lambda,samples,violations,empirical_rate,verdict\n";
  for (const auto& r : rows) {
    f << to_string(r.element.type) << ',' << csv::quote(r.element.id) << ',' << csv::exact(r.q) << ','
      << csv::exact(r.lambda) << ',' << r.samples << ',' << r.violations << ',' << csv::exact(r.empirical_rate)
      << ',' << r.verdict << '\n';
  }
}

// ---------------------------------------------------------------------------
// Synthetic networks

struct SyntheticOptions {
  std::size_t n_highway = 40;
  std::size_t n_rail = 15;
  std::size_t n_terminals = 6;
  std::size_t n_ods = 5;
  std::size_t n_commodity_rows = 9;
  std::uint64_t seed = 1;
};

struct SyntheticInstance {
  IntermodalNetwork network;
  DemandSet demands;
};

namespace detail {

class SeededDraws {
 public:
  explicit SeededDraws(std::uint64_t seed) : rng_(seed) {}
  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * unit(); }
  long long integer(long long a, long long b) {
    return a + static_cast<long long>(std::floor(unit() * static_cast<double>(b - a + 1)));
  }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(std::floor(unit() * static_cast<double>(n))); }

 private:
  std::mt19937_64 rng_;
};

inline std::string padded(const char* prefix, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%02zu", prefix, k);
  return buf;
}

}  // namespace detail

// Jittered highway grid (some edges dropped, connectivity kept), terminals
// tied to their two nearest highway nodes by drayage links, and a rail
// spanning tree over junctions and terminals plus a few chords. Lengths are
// 1.2 x straight-line distance in miles.
inline SyntheticInstance generate_synthetic_network(const SyntheticOptions& opt) {
  if (opt.n_highway < 2) throw ConfigurationError("need at least 2 highway nodes");
  if ((opt.n_rail > 0 || opt.n_terminals > 0) && opt.n_terminals < 2) {
    throw ConfigurationError("a rail layer needs at least 2 terminals");
  }
  if (opt.n_ods < 1 || opt.n_ods > opt.n_highway * (opt.n_highway - 1) / 2) {
    throw ConfigurationError("n_ods must lie in [1, number of highway pairs]");
  }
  if (opt.n_commodity_rows < opt.n_ods) throw ConfigurationError("need at least one commodity row per OD");
  static const char* commodity_names[] = {"general", "grain",  "coal",    "chemicals", "machinery",
                                          "food",    "timber", "steel",   "paper",     "textiles",
                                          "autos",   "retail", "plastics", "minerals", "fuel"};
  const std::size_t names = sizeof commodity_names / sizeof *commodity_names;
  const std::size_t per_od = (opt.n_commodity_rows + opt.n_ods - 1) / opt.n_ods;
  if (per_od > names) throw ConfigurationError("too many commodity rows per OD");

  detail::SeededDraws rng(opt.seed);
  RateConfig rates;
  const double spacing = 100.0;
  std::size_t cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(opt.n_highway) * 1.6)));
  cols = std::max<std::size_t>(cols, 2);
  struct Pt {
    double x, y;
  };
  std::vector<NodeRecord> nodes;
  std::vector<Pt> pos;
  for (std::size_t k = 0; k < opt.n_highway; ++k) {
    double x = static_cast<double>(k % cols) * spacing + rng.uniform(-25, 25);
    double y = static_cast<double>(k / cols) * spacing + rng.uniform(-25, 25);
    nodes.push_back({detail::padded("H", k + 1), NodeKind::highway, std::nullopt, std::nullopt});
    pos.push_back({x, y});
  }
  const double width = static_cast<double>(cols - 1) * spacing;
  const double height = static_cast<double>((opt.n_highway - 1) / cols) * spacing;
  for (std::size_t k = 0; k < opt.n_terminals; ++k) {
    nodes.push_back({detail::padded("S", k + 1), NodeKind::terminal, std::nullopt, std::nullopt});
    pos.push_back({rng.uniform(0, width), rng.uniform(0, std::max(height, spacing))});
  }
  for (std::size_t k = 0; k < opt.n_rail; ++k) {
    nodes.push_back({detail::padded("R", k + 1), NodeKind::rail, std::nullopt, std::nullopt});
    pos.push_back({rng.uniform(0, width), rng.uniform(0, std::max(height, spacing))});
  }
  auto dist = [&](std::size_t a, std::size_t b) {
    return std::hypot(pos[a].x - pos[b].x, pos[a].y - pos[b].y);
  };
  auto miles = [&](std::size_t a, std::size_t b) { return std::round(dist(a, b) * 1.2 * 10) / 10; };

  // highway grid edges, dropping some while the grid stays connected
  std::vector<std::pair<std::size_t, std::size_t>> grid;
  for (std::size_t k = 0; k < opt.n_highway; ++k) {
    if (k % cols + 1 < cols && k + 1 < opt.n_highway) grid.emplace_back(k, k + 1);
    if (k + cols < opt.n_highway) grid.emplace_back(k, k + cols);
  }
  auto connected = [&](const std::vector<char>& keep) {
    std::vector<std::size_t> parent(opt.n_highway);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t v) {
      return parent[v] == v ? v : parent[v] = find(parent[v]);
    };
    std::size_t comps = opt.n_highway;
    for (std::size_t e = 0; e < grid.size(); ++e) {
      if (!keep[e]) continue;
      auto a = find(grid[e].first), b = find(grid[e].second);
      if (a != b) {
        parent[a] = b;
        --comps;
      }
    }
    return comps == 1;
  };
  std::vector<char> keep(grid.size(), 1);
  for (std::size_t e = 0; e < grid.size(); ++e) {
    if (rng.unit() < 0.15) {
      keep[e] = 0;
      if (!connected(keep)) keep[e] = 1;
    }
  }

  std::vector<LinkRecord> links;
  auto add_pair = [&](const std::string& id, std::size_t a, std::size_t b, Mode mode, double cap) {
    double len = std::max(miles(a, b), 1.0);
    links.push_back(make_link(id, nodes[a].id, nodes[b].id, mode, len, cap, rates, std::nullopt));
    links.push_back(make_link(reverse_link_id(id), nodes[b].id, nodes[a].id, mode, len, cap, rates, std::nullopt));
  };
  for (std::size_t e = 0; e < grid.size(); ++e) {
    if (!keep[e]) continue;
    auto [a, b] = grid[e];
    add_pair("HW_" + nodes[a].id + "_" + nodes[b].id, a, b, Mode::road,
             static_cast<double>(rng.integer(300, 600)));
  }
  // drayage: each terminal to its two nearest highway nodes
  for (std::size_t k = 0; k < opt.n_terminals; ++k) {
    std::size_t s = opt.n_highway + k;
    std::vector<std::size_t> order(opt.n_highway);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      double da = dist(s, a), db = dist(s, b);
      return da != db ? da < db : a < b;
    });
    for (std::size_t j = 0; j < 2 && j < order.size(); ++j) {
      add_pair("DR_" + nodes[s].id + "_" + nodes[order[j]].id, s, order[j], Mode::road,
               static_cast<double>(rng.integer(300, 600)));
    }
  }
  // rail: spanning tree over terminals and junctions, plus chords
  std::vector<std::size_t> rail_nodes;
  for (std::size_t k = 0; k < opt.n_terminals + opt.n_rail; ++k) rail_nodes.push_back(opt.n_highway + k);
  if (rail_nodes.size() >= 2) {
    std::vector<char> in_tree(rail_nodes.size(), 0);
    std::vector<double> best(rail_nodes.size(), std::numeric_limits<double>::infinity());
    std::vector<std::size_t> via(rail_nodes.size(), npos);
    std::set<std::pair<std::size_t, std::size_t>> used;
    best[0] = 0;
    for (std::size_t it = 0; it < rail_nodes.size(); ++it) {
      std::size_t u = npos;
      for (std::size_t k = 0; k < rail_nodes.size(); ++k) {
        if (!in_tree[k] && (u == npos || best[k] < best[u])) u = k;
      }
      in_tree[u] = 1;
      if (via[u] != npos) {
        std::size_t a = rail_nodes[std::min(u, via[u])], b = rail_nodes[std::max(u, via[u])];
        used.insert({a, b});
        add_pair("RL_" + nodes[a].id + "_" + nodes[b].id, a, b, Mode::rail,
                 static_cast<double>(rng.integer(100, 200)));
      }
      for (std::size_t k = 0; k < rail_nodes.size(); ++k) {
        if (in_tree[k]) continue;
        double dk = dist(rail_nodes[u], rail_nodes[k]);
        if (dk < best[k]) {
          best[k] = dk;
          via[k] = u;
        }
      }
    }
    std::vector<std::tuple<double, std::size_t, std::size_t>> chords;
    for (std::size_t i = 0; i < rail_nodes.size(); ++i) {
      for (std::size_t j = i + 1; j < rail_nodes.size(); ++j) {
        if (!used.count({rail_nodes[i], rail_nodes[j]})) {
          chords.emplace_back(dist(rail_nodes[i], rail_nodes[j]), rail_nodes[i], rail_nodes[j]);
        }
      }
    }
    std::sort(chords.begin(), chords.end());
    for (std::size_t c = 0; c < 3 && c < chords.size(); ++c) {
      auto [d, a, b] = chords[c];
      (void)d;
      add_pair("RL_" + nodes[a].id + "_" + nodes[b].id, a, b, Mode::rail,
               static_cast<double>(rng.integer(100, 200)));
    }
  }
  std::vector<TerminalRecord> terminals;
  for (std::size_t k = 0; k < opt.n_terminals; ++k) {
    terminals.push_back({nodes[opt.n_highway + k].id, static_cast<double>(rng.integer(80, 160)),
                         rates.default_transfer_cost_usd, 0.0});
  }

  // far-apart highway OD pairs
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  double far = 0;
  for (std::size_t a = 0; a < opt.n_highway; ++a) {
    for (std::size_t b = a + 1; b < opt.n_highway; ++b) far = std::max(far, dist(a, b));
  }
  for (std::size_t a = 0; a < opt.n_highway; ++a) {
    for (std::size_t b = 0; b < opt.n_highway; ++b) {
      if (a != b) pairs.emplace_back(dist(a, b), a, b);
    }
  }
  std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
  for (const auto& p : pairs) {
    if (std::get<0>(p) >= 0.6 * far) candidates.push_back(p);
  }
  if (candidates.size() < opt.n_ods) candidates = pairs;
  for (std::size_t k = candidates.size(); k > 1; --k) std::swap(candidates[k - 1], candidates[rng.index(k)]);

  DemandSet demands;
  for (std::size_t k = 0; k < opt.n_ods; ++k) {
    auto [d, a, b] = candidates[k];
    (void)d;
    demands.ods.push_back({"OD" + std::to_string(k + 1), nodes[a].id, nodes[b].id});
  }
  for (std::size_t r = 0; r < opt.n_commodity_rows; ++r) {
    CommodityDemand cd;
    cd.od = demands.ods[r % opt.n_ods].id;
    cd.commodity = commodity_names[r / opt.n_ods];
    cd.containers = rng.integer(5, 40);
    cd.deadline_hours = rates.default_deadline_hours;
    demands.demands.push_back(cd);
  }

  SyntheticInstance out{IntermodalNetwork(std::move(nodes), std::move(links), std::move(terminals)),
                        std::move(demands)};
  for (const auto& d : validate_network(out.network)) {
    throw TopologyError("generated network failed validation at '" + d.element + "': " + d.message);
  }
  return out;
}

}  // namespace reliroute
