#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace reliroute;
using fixtures::node;

namespace {

// Uniform unit weights on every link of a small star: C has two outgoing
// links to L and R, L has one to R; I is isolated.
ImportanceBaseline star_baseline() {
  RateConfig r;
  auto net = std::make_shared<const IntermodalNetwork>(
      std::vector<NodeRecord>{node("C", NodeKind::highway), node("L", NodeKind::highway), node("R", NodeKind::highway),
                              node("I", NodeKind::highway)},
      std::vector<LinkRecord>{make_link("C_L", "C", "L", Mode::road, 10, 9, r),
                              make_link("C_R", "C", "R", Mode::road, 30, 9, r),
                              make_link("L_R", "L", "R", Mode::road, 20, 9, r),
                              make_link("R_C", "R", "C", Mode::road, 20, 9, r)},
      std::vector<TerminalRecord>{});
  ImportanceBaseline b;
  b.network = net;
  b.link_weight = {5, 7, 3, 0};
  b.max_deadline = 168;
  return b;
}

ImportanceBaseline fixture_baseline() {
  auto net = fixtures::load_fixture6();
  return deterministic_baseline(net, fixtures::load_fixture6_demands(net, "demands_importance.csv"));
}

std::size_t count(const std::vector<OrderingVerdict>& v, const std::string& rel, const std::string& verdict) {
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [&](const OrderingVerdict& x) {
    return (rel.empty() || x.relation == rel) && x.verdict == verdict;
  }));
}

}  // namespace

TEST(LinkImportance, Cases) {
  auto b = star_baseline();
  DisruptionScenario s;
  s.kind = DisruptionKind::link;
  s.elements = {"C_L"};
  EXPECT_DOUBLE_EQ(link_importance(b, s, "C_L"), 1.0);  // (2t - t) / t
  EXPECT_DOUBLE_EQ(link_importance(b, s, "C_R"), 0.0);  // unaffected
  s.elements = {"R_C"};
  EXPECT_DOUBLE_EQ(link_importance(b, s, "R_C"), 0.0);  // no baseline flow
  s.travel_time_multiplier = 3.0;
  s.elements = {"C_R"};
  EXPECT_DOUBLE_EQ(link_importance(b, s, "C_R"), 2.0);
  EXPECT_THROW(link_importance(b, s, "nope"), ReferenceError);
  s.travel_time_multiplier = 1.0;
  EXPECT_THROW(link_importance(b, s, "C_R"), ConfigurationError);
}

TEST(NodeImportance, SumsOutgoingLinks) {
  auto b = star_baseline();
  DisruptionScenario s;
  s.kind = DisruptionKind::node;
  EXPECT_DOUBLE_EQ(node_importance(b, s, "C"), 2.0);
  EXPECT_DOUBLE_EQ(node_importance(b, s, "L"), 1.0);
  EXPECT_DOUBLE_EQ(node_importance(b, s, "I"), 0.0);
  s.travel_time_multiplier = 1.5;
  EXPECT_DOUBLE_EQ(node_importance(b, s, "C"), 2 * 0.5);
}

TEST(TerminalImportance, DummyTerm) {
  auto b = fixture_baseline();
  DisruptionScenario s;
  s.kind = DisruptionKind::terminal;
  double node_like = node_importance(b, s, "S1");
  // default dummy time 10 x 168 h against a 1 h baseline
  EXPECT_NEAR(terminal_importance(b, s, "S1"), node_like + (1680.0 - 1.0) / 1.0, 1e-9);
  EXPECT_GT(terminal_importance(b, s, "S1"), node_importance(b, s, "O"));
  s.dummy_link_time = 1.0;
  EXPECT_NEAR(terminal_importance(b, s, "S1"), node_like, 1e-12);

  auto net = fixtures::load_fixture6();
  auto road_only = deterministic_baseline(net, fixtures::one_demand("O", "H1", 10));
  DisruptionScenario t;
  EXPECT_EQ(terminal_importance(road_only, t, "S2"), 0.0);
  EXPECT_THROW(terminal_importance(road_only, t, "O"), ReferenceError);
}

TEST(VerifyOrdering, FixtureHasNoCounterexample) {
  auto b = fixture_baseline();
  DisruptionScenario s;
  auto report = importance_report(b, s);
  auto v = verify_ordering(report);
  EXPECT_EQ(count(v, "", "fail"), 0u);
  EXPECT_GE(count(v, "node>link", "pass"), 2u);
  EXPECT_GE(count(v, "terminal>node", "pass"), 2u);
  EXPECT_GE(count(v, "terminal>link", "pass"), 2u);
  for (const auto& n : report.nodes) {
    double sum = 0;
    for (double c : n.component_scores) sum += c;
    EXPECT_NEAR(n.score, sum, 1e-12);
  }
}

TEST(VerifyOrdering, DegreeOneNodeFailsPremise) {
  auto b = star_baseline();
  DisruptionScenario s;
  auto report = importance_report(b, s);
  auto v = verify_ordering(report);
  for (const auto& x : v) {
    if (x.relation != "node>link") continue;
    if (x.greater == "L") {
      EXPECT_EQ(x.verdict, "premise-not-met");
    } else if (x.greater == "C") {
      EXPECT_EQ(x.verdict, "pass");
    }
  }
}

TEST(VerifyOrdering, NonUniformMultiplierFailsPremise) {
  auto b = star_baseline();
  DisruptionScenario s;
  s.link_multiplier["C_L"] = 5.0;
  auto v = verify_ordering(importance_report(b, s));
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(count(v, "", "premise-not-met"), v.size());
}

TEST(VerifyOrdering, SyntheticNetworkHasNoCounterexample) {
  auto s = generate_synthetic_network({40, 15, 6, 5, 9, 1});
  auto b = deterministic_baseline(s.network, s.demands);
  for (double alpha : {1.5, 2.0, 4.0}) {
    DisruptionScenario sc;
    sc.travel_time_multiplier = alpha;
    auto report = importance_report(b, sc);
    auto v = verify_ordering(report);
    EXPECT_EQ(count(v, "", "fail"), 0u);
    EXPECT_GT(count(v, "node>link", "pass"), 0u);
    EXPECT_GT(count(v, "terminal>node", "pass"), 0u);
    // node score equals the sum of its outgoing link scores
    std::map<std::string, double> link_score;
    for (const auto& l : report.links) link_score[l.id] = l.score;
    for (const auto& n : report.nodes) {
      double sum = 0;
      for (const auto& id : n.outgoing) sum += link_score.at(id);
      EXPECT_NEAR(n.score, sum, 1e-12) << n.id;
    }
  }
}

ElementScore scored(const std::string& id, double score) {
  ElementScore e;
  e.id = id;
  e.score = score;
  return e;
}

TEST(RankElements, OrderAndTies) {
  auto r = rank_elements(std::vector<ElementScore>{scored("b", 1.0), scored("a", 2.0)});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].id, "a");
  auto t = rank_elements(std::vector<ElementScore>{scored("b", 1.0), scored("a", 1.0)});
  EXPECT_EQ(t[0].id, "a");
  EXPECT_TRUE(rank_elements(std::vector<ElementScore>{}).empty());
}

TEST(ImportanceCsv, RanksWithinType) {
  auto report = importance_report(fixture_baseline(), DisruptionScenario{});
  auto dir = fixtures::scratch("importance");
  write_importance_csv(report, dir / "importance.csv");
  auto t = csv::Table::read(dir / "importance.csv");
  t.require({"element_type", "element_id", "score", "rank", "premise_ok"});
  std::map<std::string, long long> last;
  for (const auto& row : t.rows()) {
    auto rank = csv::parse_integer(t.get(row, "rank"), "rank");
    EXPECT_EQ(rank, last[t.get(row, "element_type")] + 1);
    last[t.get(row, "element_type")] = rank;
  }
  EXPECT_EQ(last["terminal"], 2);
}
