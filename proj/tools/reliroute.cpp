// reliroute: intermodal routing under capacity uncertainty.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "reliroute/reliroute.hpp"

namespace fs = std::filesystem;
using namespace reliroute;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kLimit = 2;

struct Globals {
  std::string out = "out";
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::string config;
};

struct NetworkArgs {
  std::string nodes, links, terminals, demands, commodity_costs;
  std::string synthetic;  // "H,R,S"
  std::size_t ods = 5;
  std::size_t rows = 9;

  void add(CLI::App* app) {
    app->add_option("--nodes", nodes, "nodes.csv")->check(CLI::ExistingFile);
    app->add_option("--links", links, "links.csv")->check(CLI::ExistingFile);
    app->add_option("--terminals", terminals, "terminals.csv")->check(CLI::ExistingFile);
    app->add_option("--demands", demands, "demands.csv")->check(CLI::ExistingFile);
    app->add_option("--commodity-costs", commodity_costs, "per-commodity unit costs")->check(CLI::ExistingFile);
    app->add_option("--synthetic", synthetic, "generate a network instead: highway,rail,terminal node counts");
    app->add_option("--ods", ods, "synthetic OD pairs")->capture_default_str();
    app->add_option("--rows", rows, "synthetic demand rows")->capture_default_str();
  }
};

struct Loaded {
  IntermodalNetwork net;
  DemandSet demands;
};

KeyValues load_config(const Globals& g) {
  return g.config.empty() ? KeyValues{} : KeyValues::read(g.config);
}

std::vector<std::size_t> parse_counts(const std::string& text, const std::string& what) {
  std::vector<std::size_t> out;
  for (const auto& item : csv::split_line(text)) {
    auto v = csv::parse_integer(item, what);
    if (v < 0) throw ConfigurationError(what + ": counts must be >= 0");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : csv::split_line(text)) out.push_back(csv::parse_double(item, what));
  return out;
}

Loaded load_inputs(const NetworkArgs& a, const Globals& g, const KeyValues& kv, RunManifest& m) {
  if (!a.synthetic.empty()) {
    auto n = parse_counts(a.synthetic, "--synthetic");
    if (n.size() != 3) throw ConfigurationError("--synthetic expects highway,rail,terminal counts");
    SyntheticOptions opt;
    opt.n_highway = n[0];
    opt.n_rail = n[1];
    opt.n_terminals = n[2];
    opt.n_ods = a.ods;
    opt.n_commodity_rows = a.rows;
    opt.seed = g.seed;
    auto s = generate_synthetic_network(opt);
    m.config["synthetic"] = a.synthetic;
    m.config["synthetic_ods"] = std::to_string(a.ods);
    m.config["synthetic_rows"] = std::to_string(a.rows);
    return {std::move(s.network), std::move(s.demands)};
  }
  if (a.nodes.empty() || a.links.empty() || a.terminals.empty() || a.demands.empty()) {
    throw ConfigurationError("need --nodes, --links, --terminals and --demands (or --synthetic)");
  }
  auto rates = RateConfig::from(kv);
  CommodityCostTable costs;
  if (!a.commodity_costs.empty()) {
    costs = load_commodity_costs(a.commodity_costs);
    m.inputs["commodity_costs"] = a.commodity_costs;
  }
  auto net = load_network(a.nodes, a.links, a.terminals, rates, costs);
  auto demands = load_demands(a.demands, net, rates.default_deadline_hours);
  m.inputs["nodes"] = a.nodes;
  m.inputs["links"] = a.links;
  m.inputs["terminals"] = a.terminals;
  m.inputs["demands"] = a.demands;
  bool fatal = false;
  for (const auto& d : validate_network(net)) {
    std::cerr << d.category << ": " << d.element << ": " << d.message << '\n';
    fatal = true;
  }
  if (fatal) throw SchemaError("network failed validation");
  return {std::move(net), std::move(demands)};
}

void snapshot(RunManifest& m, const Globals& g, const KeyValues& kv) {
  for (const auto& [k, v] : kv.values()) m.config[k] = v;
  m.config["jobs"] = std::to_string(g.jobs);
  m.seed = g.seed;
  if (!g.config.empty()) m.inputs["config"] = g.config;
}

void warn_unused(const KeyValues& kv) {
  for (const auto& k : kv.unused()) std::cerr << "warning: config key '" << k << "' is not used\n";
}

// ---------------------------------------------------------------------------

int cmd_solve(const Globals& g, const NetworkArgs& a, const std::string& scenario, RunManifest& m) {
  auto kv = load_config(g);
  auto in = load_inputs(a, g, kv, m);
  auto model = ModelConfig::from(kv);
  auto solver = SolverConfig::from(kv);
  warn_unused(kv);
  ReductionTable red = deterministic_reductions(in.net);
  if (!scenario.empty()) {
    red = reduction_table(in.net, load_scenario(scenario));
    m.inputs["scenario"] = scenario;
  }
  auto paths = build_pathsets(in.net, in.demands, model.cutoff_factor, model.max_paths);
  auto inst = build_instance(in.net, in.demands, red, paths, model);
  auto res = solve(inst, solver);
  fs::path out(g.out);
  fs::create_directories(out);
  write_solution_csv(inst, res.best, out / "solution.csv");
  write_routes_csv(inst, extract_routes(inst, res.best), out / "routes.csv");
  snapshot(m, g, kv);
  m.write(out);
  std::cout << "objective " << csv::human(res.objective) << '\n'
            << "status " << to_string(res.status) << '\n'
            << "nodes " << res.nodes_explored << '\n';
  return res.status == SolveStatus::optimal ? kOk : kLimit;
}

struct FedArgs {
  std::string levels;
  std::string kinds;
  std::string lambda;
  std::string q;
  std::string mode;
  bool no_timing = false;
};

int cmd_fed(const Globals& g, const NetworkArgs& a, const FedArgs& f, RunManifest& m) {
  auto kv = load_config(g);
  auto in = load_inputs(a, g, kv, m);
  auto model = ModelConfig::from(kv);
  auto solver = SolverConfig::from(kv);
  if (!kv.has("optimality_gap")) solver.optimality_gap = 1e-9;
  warn_unused(kv);
  FedConfig cfg;
  if (!f.levels.empty()) {
    cfg = read_fed_levels(KeyValues::read(f.levels));
    m.inputs["levels"] = f.levels;
  }
  if (!f.kinds.empty()) {
    std::map<DisruptionKind, std::vector<std::size_t>> keep;
    for (const auto& k : csv::split_line(f.kinds)) {
      auto kind = disruption_kind_from_string(k);
      if (!kind) throw ConfigurationError("--kinds: unknown kind '" + k + "'");
      keep[*kind] = cfg.levels.at(*kind);
    }
    cfg.levels = keep;
  }
  if (!f.lambda.empty()) cfg.lambda_levels = parse_numbers(f.lambda, "--lambda");
  if (!f.q.empty()) cfg.q_levels = parse_numbers(f.q, "--q");
  if (!f.mode.empty()) {
    auto mode = disruption_mode_from_string(f.mode);
    if (!mode) throw ConfigurationError("--mode must be robust-reduce or knockout");
    cfg.mode = *mode;
  }
  cfg.jobs = g.jobs;
  cfg.validate();
  auto result = run_fed(in.net, in.demands, cfg, solver, model);
  fs::path out(g.out);
  emit_results(result.rows, out, !f.no_timing);
  snapshot(m, g, kv);
  m.config["mode"] = to_string(cfg.mode);
  m.write(out);
  std::size_t limited = 0;
  for (const auto& r : result.rows) limited += r.status != "optimal";
  auto trends = check_trends(result.rows);
  std::cout << "instances " << result.rows.size() << '\n'
            << "trend_violations " << trends.size() << '\n'
            << "limit_terminated " << limited << '\n';
  return limited ? kLimit : kOk;
}

struct ValidateArgs {
  std::string scenario;
  std::string distribution = "uniform";
  std::size_t samples = 10'000;
  std::string lambda = "0.05,0.1,0.15,0.2,0.25,0.3";
  std::string q = "0.05,0.1,0.15,0.2";
};

int cmd_validate(const Globals& g, const NetworkArgs& a, const ValidateArgs& v, RunManifest& m) {
  auto kv = load_config(g);
  auto in = load_inputs(a, g, kv, m);
  auto model = ModelConfig::from(kv);
  auto solver = SolverConfig::from(kv);
  warn_unused(kv);
  McConfig mc;
  mc.distribution = v.distribution;
  mc.samples = v.samples;
  mc.seed = g.seed;
  mc.validate();
  if (!model.psi) model.psi = default_psi(in.net, in.demands);
  auto paths = build_pathsets(in.net, in.demands, model.cutoff_factor, model.max_paths);

  std::vector<ReductionTable> tables;
  if (!v.scenario.empty()) {
    tables.push_back(reduction_table(in.net, load_scenario(v.scenario)));
    m.inputs["scenario"] = v.scenario;
  } else {
    for (double q : parse_numbers(v.q, "--q")) {
      for (double l : parse_numbers(v.lambda, "--lambda")) {
        std::vector<UncertaintySpec> specs;
        for (std::size_t i = 0; i < in.net.links().size(); ++i) specs.push_back({element_of_link(in.net, i), l, q});
        for (const auto& t : in.net.terminals()) specs.push_back({{ElementType::terminal, t.node_id}, l, q});
        tables.push_back(reduction_table(in.net, specs));
      }
    }
  }
  std::vector<McRow> rows;
  bool limited = false;
  for (const auto& red : tables) {
    auto inst = build_instance(in.net, in.demands, red, paths, model);
    auto res = solve(inst, solver);
    limited |= res.status != SolveStatus::optimal;
    auto part = mc_validate(inst, res.best, red, mc);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  fs::path out(g.out);
  fs::create_directories(out);
  write_mc_report(rows, out / "mc_report.csv");
  snapshot(m, g, kv);
  m.config["distribution"] = mc.distribution;
  m.config["samples"] = std::to_string(mc.samples);
  m.write(out);
  std::size_t fails = 0;
  for (const auto& r : rows) fails += r.verdict != "pass";
  std::cout << "rows " << rows.size() << '\n' << "fail " << fails << '\n';
  return limited ? kLimit : kOk;
}

struct ImportanceArgs {
  double alpha = 2.0;
  double dummy_time = 0;
};

int cmd_importance(const Globals& g, const NetworkArgs& a, const ImportanceArgs& ia, RunManifest& m) {
  auto kv = load_config(g);
  auto in = load_inputs(a, g, kv, m);
  auto model = ModelConfig::from(kv);
  auto solver = SolverConfig::from(kv);
  warn_unused(kv);
  auto baseline = deterministic_baseline(in.net, in.demands, model, solver);
  DisruptionScenario s;
  s.travel_time_multiplier = ia.alpha;
  s.dummy_link_time = ia.dummy_time;
  auto report = importance_report(baseline, s);
  auto verdicts = verify_ordering(report);
  fs::path out(g.out);
  fs::create_directories(out);
  write_importance_csv(report, out / "importance.csv");
  {
    std::ofstream f(out / "ordering.csv", std::ios::binary);
    if (!f) throw IoError("cannot write ordering.csv");
    f << "relation,greater,lesser,greater_score,lesser_score,verdict\n";
    for (const auto& v : verdicts) {
      f << v.relation << ',' << csv::quote(v.greater) << ',' << csv::quote(v.lesser) << ','
        << csv::fixed_significant(v.greater_score) << ',' << csv::fixed_significant(v.lesser_score) << ','
        << v.verdict << '\n';
    }
  }
  snapshot(m, g, kv);
  m.config["alpha"] = csv::exact(ia.alpha);
  m.write(out);
  std::size_t pass = 0, fail = 0, premise = 0;
  for (const auto& v : verdicts) {
    if (v.verdict == "pass") {
      ++pass;
    } else if (v.verdict == "fail") {
      ++fail;
    } else {
      ++premise;
    }
  }
  std::cout << "pass " << pass << '\n' << "fail " << fail << '\n' << "premise-not-met " << premise << '\n';
  return kOk;
}

int cmd_paths(const Globals& g, const NetworkArgs& a, RunManifest& m) {
  auto kv = load_config(g);
  auto in = load_inputs(a, g, kv, m);
  auto model = ModelConfig::from(kv);
  warn_unused(kv);
  std::vector<PathSet> sets;
  for (const auto& od : in.demands.ods) sets.push_back(enumerate_candidate_paths(in.net, od, model.cutoff_factor, model.max_paths));
  fs::path out(g.out);
  fs::create_directories(out);
  write_paths_csv(in.net, sets, out / "paths.csv");
  snapshot(m, g, kv);
  m.write(out);
  for (const auto& s : sets) std::cout << s.od << ' ' << s.paths.size() << " paths, shortest " << csv::human(s.min_length) << " mi\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intermodal routing under capacity uncertainty.\n\n"
               "Exit codes: 0 solved to optimality, 1 input or configuration error,\n"
               "2 a solve stopped at a time or node limit.\n"
               "Every run writes manifest.json (command, input SHA-256 digests, config,\n"
               "version, seed, UTC timestamps) into the --out directory."};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "seed for synthetic networks and sampling")->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker threads for experiments")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--config", g.config, "key = value configuration file")->check(CLI::ExistingFile);

  NetworkArgs net_solve, net_fed, net_validate, net_importance, net_paths;
  std::string scenario;
  auto* solve_cmd = app.add_subcommand("solve", "solve one instance; writes solution.csv and routes.csv");
  net_solve.add(solve_cmd);
  solve_cmd->add_option("--scenario", scenario, "uncertainty CSV: element_type,element_id,lambda,q")
      ->check(CLI::ExistingFile);

  FedArgs fed;
  auto* fed_cmd = app.add_subcommand("fed", "run the factorial experiment; writes fed_results.csv and charts");
  net_fed.add(fed_cmd);
  fed_cmd->add_option("--levels", fed.levels, "level file (links, nodes, terminals, q, lambda, mode)")
      ->check(CLI::ExistingFile);
  fed_cmd->add_option("--kinds", fed.kinds, "subset of links,nodes,terminals");
  fed_cmd->add_option("--lambda", fed.lambda, "comma-separated lambda levels");
  fed_cmd->add_option("--q", fed.q, "comma-separated q levels");
  fed_cmd->add_option("--mode", fed.mode, "robust-reduce or knockout");
  fed_cmd->add_flag("--no-timing", fed.no_timing, "omit wall_time_s values");

  ValidateArgs val;
  auto* val_cmd = app.add_subcommand("validate", "Monte Carlo check of the capacity buffer; writes mc_report.csv");
  net_validate.add(val_cmd);
  val_cmd->add_option("--scenario", val.scenario, "uncertainty CSV instead of the uniform grid")
      ->check(CLI::ExistingFile);
  val_cmd->add_option("--distribution", val.distribution, "uniform, two-point or triangular")->capture_default_str();
  val_cmd->add_option("--samples", val.samples, "samples per element")->capture_default_str();
  val_cmd->add_option("--lambda", val.lambda, "lambda grid")->capture_default_str();
  val_cmd->add_option("--q", val.q, "q grid")->capture_default_str();

  ImportanceArgs imp;
  auto* imp_cmd = app.add_subcommand("importance", "element importance scores; writes importance.csv and ordering.csv");
  net_importance.add(imp_cmd);
  imp_cmd->add_option("--alpha", imp.alpha, "travel time multiplier of the event")->capture_default_str();
  imp_cmd->add_option("--dummy-time", imp.dummy_time, "dummy link hours (0: 10 x largest deadline)")
      ->capture_default_str();

  auto* paths_cmd = app.add_subcommand("paths", "candidate paths per OD; writes paths.csv");
  net_paths.add(paths_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  RunManifest m;
  for (int i = 0; i < argc; ++i) m.argv.emplace_back(argv[i]);
  try {
    if (*solve_cmd) {
      m.command = "solve";
      return cmd_solve(g, net_solve, scenario, m);
    }
    if (*fed_cmd) {
      m.command = "fed";
      return cmd_fed(g, net_fed, fed, m);
    }
    if (*val_cmd) {
      m.command = "validate";
      return cmd_validate(g, net_validate, val, m);
    }
    if (*imp_cmd) {
      m.command = "importance";
      return cmd_importance(g, net_importance, imp, m);
    }
    m.command = "paths";
    return cmd_paths(g, net_paths, m);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
}
