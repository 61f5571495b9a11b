#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "fixtures.hpp"

using namespace reliroute;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

double theta_oracle(double q_cap, double lambda, double q) {
  Big v = boost::multiprecision::sqrt(Big(-2) * boost::multiprecision::log(Big(q))) * Big(q_cap) * Big(lambda);
  return v.convert_to<double>();
}

}  // namespace

TEST(CapacityReduction, MatchesExtendedPrecision) {
  EXPECT_NEAR(capacity_reduction(100, 0.1, 0.05), theta_oracle(100, 0.1, 0.05), 1e-12);
  EXPECT_NEAR(capacity_reduction(100, 0.1, 0.05), 24.4775, 1e-3);
  EXPECT_NEAR(capacity_reduction(100, 0.3, 0.2), 53.8237, 1e-3);
  for (double q : {0.01, 0.05, 0.1, 0.15, 0.2, 0.5, 0.9}) {
    for (double l : {0.05, 0.1, 0.3, 1.0}) {
      for (double cap : {1.0, 80.0, 600.0}) {
        double want = theta_oracle(cap, l, q);
        EXPECT_NEAR(capacity_reduction(cap, l, q), want, 1e-12 * std::max(1.0, want));
      }
    }
  }
}

TEST(CapacityReduction, ZeroCases) {
  EXPECT_EQ(capacity_reduction(100, 0, 0.1), 0.0);
  EXPECT_EQ(capacity_reduction(250, 0.2, 1), 0.0);
  EXPECT_EQ(effective_capacity(0, 0.3, 0.05), 0.0);
}

TEST(CapacityReduction, DomainErrors) {
  EXPECT_THROW(capacity_reduction(100, -0.1, 0.1), DomainError);
  EXPECT_THROW(capacity_reduction(100, 1.1, 0.1), DomainError);
  EXPECT_THROW(capacity_reduction(100, 0.1, 0), DomainError);
  EXPECT_THROW(capacity_reduction(100, 0.1, 1.5), DomainError);
  EXPECT_THROW(capacity_reduction(-1, 0.1, 0.5), DomainError);
}

TEST(EffectiveCapacity, SubtractsAndClamps) {
  EXPECT_NEAR(effective_capacity(100, 0.1, 0.05), 100 - theta_oracle(100, 0.1, 0.05), 1e-12);
  EXPECT_NEAR(capacity_reduction(100, 0.5, 0.05), 122.39, 1e-2);
  EXPECT_EQ(effective_capacity(100, 0.5, 0.05), 0.0);
}

TEST(ReductionTable, EmptySpecsAreDeterministic) {
  auto net = fixtures::load_fixture6();
  auto t = deterministic_reductions(net);
  ASSERT_EQ(t.link.size(), net.links().size());
  ASSERT_EQ(t.terminal.size(), net.terminals().size());
  for (const auto& r : t.all()) {
    EXPECT_EQ(r.theta, 0.0);
    EXPECT_EQ(r.effective_capacity, r.nominal_capacity);
  }
}

TEST(ReductionTable, TerminalSpecIsLocal) {
  auto net = fixtures::load_fixture6();
  auto t = reduction_table(net, {{{ElementType::terminal, "S1"}, 0.2, 0.1}});
  for (const auto& r : t.link) EXPECT_EQ(r.theta, 0.0);
  EXPECT_GT(t.terminal[*net.find_terminal("S1")].theta, 0.0);
  EXPECT_EQ(t.terminal[*net.find_terminal("S2")].theta, 0.0);
}

TEST(ReductionTable, ThetaLinearInCapacity) {
  RateConfig r;
  using fixtures::node;
  IntermodalNetwork net({node("A", NodeKind::highway), node("B", NodeKind::highway)},
                        {make_link("l50", "A", "B", Mode::road, 1, 50, r), make_link("l100", "A", "B", Mode::road, 1, 100, r),
                         make_link("l200", "A", "B", Mode::road, 1, 200, r)},
                        {});
  std::vector<UncertaintySpec> specs;
  for (const auto& l : net.links()) specs.push_back({{ElementType::road_link, l.id}, 0.3, 0.05});
  auto t = reduction_table(net, specs);
  EXPECT_NEAR(t.link[1].theta / t.link[0].theta, 2.0, 1e-12);
  EXPECT_NEAR(t.link[2].theta / t.link[0].theta, 4.0, 1e-12);
}

TEST(ReductionTable, RejectsUnknownAndDuplicateElements) {
  auto net = fixtures::load_fixture6();
  EXPECT_THROW(reduction_table(net, {{{ElementType::terminal, "nope"}, 0.1, 0.1}}), ReferenceError);
  EXPECT_THROW(reduction_table(net, {{{ElementType::rail_link, "L_O_H1"}, 0.1, 0.1}}), ReferenceError);
  UncertaintySpec s{{ElementType::terminal, "S1"}, 0.1, 0.1};
  EXPECT_THROW(reduction_table(net, {s, s}), ConfigurationError);
}

TEST(ReductionTable, KnockOut) {
  auto net = fixtures::load_fixture6();
  auto t = deterministic_reductions(net);
  t.knock_out({ElementType::terminal, "S2"});
  EXPECT_EQ(t.terminal[*net.find_terminal("S2")].effective_capacity, 0.0);
  EXPECT_THROW(t.knock_out({ElementType::terminal, "X"}), ReferenceError);
}

TEST(Scenario, LoadsAndValidates) {
  auto specs = load_scenario(fixtures::data_dir() / "fixture6" / "scenario_terminals_out.csv");
  ASSERT_EQ(specs.size(), 2u);
  EXPECT_EQ(specs[0].element.type, ElementType::terminal);
  auto dir = fixtures::scratch("scenario");
  fixtures::write_file(dir / "s.csv", "element_type,element_id,lambda,q\nterminal,S1,1.5,0.1\n");
  EXPECT_THROW(load_scenario(dir / "s.csv"), DomainError);
  fixtures::write_file(dir / "s.csv", "element_type,element_id,lambda,q\nbridge,S1,0.5,0.1\n");
  EXPECT_THROW(load_scenario(dir / "s.csv"), SchemaError);
}
