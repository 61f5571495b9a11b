#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace reliroute;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)), {});
}

std::size_t occurrences(const std::string& s, const std::string& what) {
  std::size_t n = 0;
  for (auto p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
  return n;
}

FedConfig small_design() {
  FedConfig cfg;
  cfg.levels = {{DisruptionKind::link, {2, 6}}, {DisruptionKind::node, {1, 3}}, {DisruptionKind::terminal, {1, 2}}};
  cfg.q_levels = {0.05, 0.2};
  cfg.lambda_levels = {0, 0.15, 0.3};
  return cfg;
}

SolverConfig tight() {
  SolverConfig s;
  s.optimality_gap = 1e-9;
  return s;
}

}  // namespace

TEST(FedDesign, DefaultCensus) {
  auto d = fed_design(FedConfig{});
  std::map<DisruptionKind, std::size_t> n;
  for (const auto& s : d) ++n[s.kind];
  EXPECT_EQ(n[DisruptionKind::link], 112u);
  EXPECT_EQ(n[DisruptionKind::node], 112u);
  EXPECT_EQ(n[DisruptionKind::terminal], 84u);
  EXPECT_EQ(d.size(), 308u);
}

TEST(FedDesign, LevelFileOverrides) {
  std::istringstream in("links = 1, 2\nq = 0.1\nlambda = 0, 0.2\nmode = knockout\n");
  auto cfg = read_fed_levels(KeyValues::parse(in, "levels"));
  EXPECT_EQ(cfg.levels[DisruptionKind::link], (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(cfg.levels[DisruptionKind::node].size(), 4u);
  EXPECT_EQ(cfg.mode, DisruptionMode::knockout);
  EXPECT_EQ(fed_design(cfg).size(), 2u * 2 + 4u * 2 + 3u * 2);
  std::istringstream bad("links = 1.5\n");
  EXPECT_THROW(read_fed_levels(KeyValues::parse(bad, "levels")), ConfigurationError);
  std::istringstream badq("q = 0\n");
  EXPECT_THROW(read_fed_levels(KeyValues::parse(badq, "levels")), ConfigurationError);
}

TEST(CheckTrends, DetectsBothRules) {
  std::vector<FedRow> rows;
  auto row = [](double q, double l, double obj) {
    FedRow r;
    r.kind = DisruptionKind::link;
    r.n_elements = 1;
    r.q = q;
    r.lambda = l;
    r.objective = obj;
    return r;
  };
  rows = {row(0.05, 0, 10), row(0.05, 0.1, 12), row(0.2, 0, 10), row(0.2, 0.1, 11)};
  EXPECT_TRUE(check_trends(rows).empty());
  rows[1].objective = 9;  // falls with lambda
  auto v = check_trends(rows);
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v.front().rule, "lambda");
  rows[1].objective = 12;
  rows[3].objective = 13;  // rises with q
  v = check_trends(rows);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v.front().rule, "q");
}

TEST(RunFed, SmallSyntheticTrendsAndFlatZeroLambda) {
  auto s = generate_synthetic_network({12, 4, 3, 2, 3, 1});
  auto cfg = small_design();
  auto res = run_fed(s.network, s.demands, cfg, tight());
  ASSERT_EQ(res.rows.size(), fed_design(cfg).size());
  EXPECT_TRUE(check_trends(res.rows).empty());
  auto base = solve(build_instance(s.network, s.demands, deterministic_reductions(s.network),
                                   build_pathsets(s.network, s.demands)),
                    tight());
  for (const auto& r : res.rows) {
    EXPECT_EQ(r.status, "optimal");
    EXPECT_LE(r.n_disrupted, r.n_elements);
    if (r.lambda == 0) {
      EXPECT_NEAR(r.objective, base.objective, 1e-6 * base.objective);
    }
  }
  EXPECT_EQ(res.ranking.at(DisruptionKind::terminal).size(), 3u);
}

TEST(RunFed, KnockoutOfAllTerminalsRemovesRail) {
  auto s = generate_synthetic_network({12, 4, 3, 2, 3, 1});
  FedConfig cfg;
  cfg.levels = {{DisruptionKind::terminal, {3}}};
  cfg.q_levels = {0.1};
  cfg.lambda_levels = {0};
  cfg.mode = DisruptionMode::knockout;
  auto res = run_fed(s.network, s.demands, cfg, tight());
  ASSERT_EQ(res.rows.size(), 1u);
  EXPECT_EQ(res.rows[0].rail_flow, 0.0);
  EXPECT_EQ(res.rows[0].n_disrupted, 3u);
}

TEST(RunFed, JobsDoNotChangeResults) {
  auto s = generate_synthetic_network({10, 3, 2, 2, 2, 4});
  FedConfig cfg;
  cfg.levels = {{DisruptionKind::link, {3}}};
  cfg.q_levels = {0.05, 0.2};
  cfg.lambda_levels = {0, 0.3};
  auto one = run_fed(s.network, s.demands, cfg, tight());
  cfg.jobs = 3;
  auto three = run_fed(s.network, s.demands, cfg, tight());
  ASSERT_EQ(one.rows.size(), three.rows.size());
  for (std::size_t k = 0; k < one.rows.size(); ++k) EXPECT_EQ(one.rows[k].objective, three.rows[k].objective);
}

TEST(DisruptionReductions, NodePassesToIncidentLinks) {
  auto net = fixtures::load_fixture6();
  auto red = disruption_reductions(net, DisruptionKind::node, {"H1"}, 0.2, 0.1, DisruptionMode::robust_reduce);
  for (std::size_t l = 0; l < net.links().size(); ++l) {
    const auto& L = net.links()[l];
    bool incident = L.from == "H1" || L.to == "H1";
    EXPECT_EQ(red.link[l].lambda, incident ? 0.2 : 0.0) << L.id;
  }
  auto ko = disruption_reductions(net, DisruptionKind::terminal, {"S1"}, 0, 0.1, DisruptionMode::knockout);
  EXPECT_EQ(ko.terminal[*net.find_terminal("S1")].effective_capacity, 0.0);
  EXPECT_THROW(disruption_reductions(net, DisruptionKind::link, {"zz"}, 0.1, 0.1, DisruptionMode::robust_reduce),
               ReferenceError);
}

TEST(EmitResults, CsvAndCharts) {
  std::vector<FedRow> rows;
  for (const auto& s : fed_design(FedConfig{})) {
    FedRow r;
    r.kind = s.kind;
    r.n_elements = s.n_elements;
    r.q = s.q;
    r.lambda = s.lambda;
    r.objective = 1000 + 100 * s.lambda / s.q;
    r.status = "optimal";
    rows.push_back(r);
  }
  std::reverse(rows.begin(), rows.end());
  auto dir = fixtures::scratch("emit");
  auto files = emit_results(rows, dir, false);
  EXPECT_EQ(files.size(), 1u + 4 + 4 + 3);
  auto svg = slurp(dir / "fed_link_30.svg");
  EXPECT_EQ(occurrences(svg, "<polyline"), 4u);
  EXPECT_EQ(occurrences(svg, "<circle"), 28u);
  EXPECT_NE(svg.find("q = 0.05"), std::string::npos);
  auto back = read_fed_results(dir / "fed_results.csv");
  ASSERT_EQ(back.size(), rows.size());
  std::sort(rows.begin(), rows.end(), fed_row_less);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(back[k].kind, rows[k].kind);
    EXPECT_EQ(back[k].lambda, rows[k].lambda);
    EXPECT_NEAR(back[k].objective, rows[k].objective, 1e-9 * rows[k].objective);
    EXPECT_EQ(back[k].wall_time_s, 0.0);
  }
  EXPECT_THROW(emit_results({}, dir), ConfigurationError);
}

TEST(BinomialTail, HandValues) {
  EXPECT_EQ(binomial_upper_tail(10, 0, 0.1), 1.0);
  EXPECT_NEAR(binomial_upper_tail(2, 2, 0.5), 0.25, 1e-15);
  EXPECT_NEAR(binomial_upper_tail(3, 1, 0.5), 0.875, 1e-15);
}

TEST(SymmetricNoise, RangeAndMean) {
  for (const char* d : {"uniform", "two-point", "triangular"}) {
    McConfig cfg;
    cfg.distribution = d;
    SymmetricNoise n(cfg);
    double sum = 0;
    for (int k = 0; k < 20000; ++k) {
      double v = n();
      ASSERT_GE(v, -1.0);
      ASSERT_LE(v, 1.0);
      sum += v;
    }
    EXPECT_NEAR(sum / 20000, 0.0, 0.03) << d;
  }
  McConfig bad;
  bad.distribution = "normal";
  EXPECT_THROW(bad.validate(), ConfigurationError);
}

TEST(McValidate, RobustSolutionPasses) {
  auto s = generate_synthetic_network({12, 4, 3, 2, 3, 1});
  for (double lambda : {0.0, 0.1, 0.3}) {
    std::vector<UncertaintySpec> specs;
    for (std::size_t l = 0; l < s.network.links().size(); ++l) specs.push_back({element_of_link(s.network, l), lambda, 0.05});
    for (const auto& t : s.network.terminals()) specs.push_back({{ElementType::terminal, t.node_id}, lambda, 0.05});
    auto red = reduction_table(s.network, specs);
    auto inst = build_instance(s.network, s.demands, red, build_pathsets(s.network, s.demands));
    auto res = solve(inst, tight());
    for (const char* d : {"uniform", "two-point", "triangular"}) {
      McConfig mc;
      mc.distribution = d;
      auto rows = mc_validate(inst, res.best, red, mc);
      ASSERT_FALSE(rows.empty());
      for (const auto& r : rows) {
        EXPECT_EQ(r.verdict, "pass") << d;
        if (lambda == 0) {
          EXPECT_EQ(r.violations, 0u);
        }
      }
    }
  }
}

TEST(McValidate, OverloadedElementFails) {
  auto net = fixtures::parallel_roads({100}, 10);
  auto d = fixtures::one_demand("A", "B", 10);
  std::vector<UncertaintySpec> specs;
  for (std::size_t l = 0; l < net.links().size(); ++l) specs.push_back({element_of_link(net, l), 0.3, 0.05});
  auto red = reduction_table(net, specs);
  auto inst = build_instance(net, d, red, build_pathsets(net, d));
  // full nominal load ignores the buffer: half of all two-point draws fall short
  SolutionVector sol;
  sol.values.assign(inst.num_vars(), 0.0);
  for (std::size_t l = 0; l < net.links().size(); ++l) sol.values[inst.flow_var(0, l)] = 1.0;
  McConfig mc;
  mc.distribution = "two-point";
  auto rows = mc_validate(inst, sol, red, mc);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.verdict, "fail");
    EXPECT_NEAR(r.empirical_rate, 0.5, 0.03);
  }
  auto dir = fixtures::scratch("mc");
  write_mc_report(rows, dir / "mc_report.csv");
  auto t = csv::Table::read(dir / "mc_report.csv");
  t.require({"element_type", "element_id", "q", "lambda", "samples", "violations", "empirical_rate", "verdict"});
  EXPECT_EQ(t.rows().size(), 2u);
}

TEST(Synthetic, DeterministicAndValid) {
  auto a = generate_synthetic_network({8, 4, 2, 2, 3, 1});
  auto b = generate_synthetic_network({8, 4, 2, 2, 3, 1});
  auto dir = fixtures::scratch("synthetic");
  write_network(a.network, dir / "a");
  write_network(b.network, dir / "b");
  for (const char* f : {"nodes.csv", "links.csv", "terminals.csv"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  EXPECT_EQ(a.demands.demands.size(), 3u);
  EXPECT_TRUE(validate_network(a.network).empty());
  auto c = generate_synthetic_network({8, 4, 2, 2, 3, 2});
  write_network(c.network, dir / "c");
  EXPECT_NE(slurp(dir / "a" / "links.csv"), slurp(dir / "c" / "links.csv"));
}

TEST(Synthetic, DeskScaleSeedSevenSolves) {
  auto s = generate_synthetic_network({40, 15, 6, 5, 9, 7});
  for (const auto& od : s.demands.ods) EXPECT_NO_THROW(shortest_path_length(s.network, od));
  auto res = solve(build_instance(s.network, s.demands, deterministic_reductions(s.network),
                                  build_pathsets(s.network, s.demands)));
  EXPECT_EQ(res.status, SolveStatus::optimal);
  EXPECT_LT(res.wall_time_s, 60.0);
}

TEST(Synthetic, RoadOnlyAndRejections) {
  auto s = generate_synthetic_network({9, 0, 0, 2, 2, 3});
  EXPECT_TRUE(s.network.terminals().empty());
  for (const auto& l : s.network.links()) EXPECT_EQ(l.mode, Mode::road);
  auto res = solve(build_instance(s.network, s.demands, deterministic_reductions(s.network),
                                  build_pathsets(s.network, s.demands)));
  EXPECT_EQ(res.status, SolveStatus::optimal);
  EXPECT_THROW(generate_synthetic_network({1, 0, 0, 1, 1, 1}), ConfigurationError);
  EXPECT_THROW(generate_synthetic_network({8, 2, 1, 1, 1, 1}), ConfigurationError);
  EXPECT_THROW(generate_synthetic_network({8, 2, 2, 3, 2, 1}), ConfigurationError);
}
