#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>

#include "fixtures.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string output;  // stdout and stderr
};

Run run(const std::string& args) {
  std::string cmd = std::string(RELIROUTE_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string fixture_args(const std::string& demands = "demands.csv") {
  auto d = fixtures::data_dir() / "fixture6";
  return "--nodes " + (d / "nodes.csv").string() + " --links " + (d / "links.csv").string() + " --terminals " +
         (d / "terminals.csv").string() + " --demands " + (d / demands).string();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)), {});
}

std::size_t lines(const fs::path& p) {
  auto s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST(Cli, SolveFixture) {
  auto out = fixtures::scratch("cli_solve");
  auto r = run("--out " + out.string() + " solve " + fixture_args());
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("objective 4734.0"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("status optimal"), std::string::npos);
  EXPECT_EQ(slurp(out / "routes.csv"),
            "od,commodity,fraction,route_nodes,cost,unsatisfied\nOD1,general,1,O>S1>R1>S2>D,4734,0\n");
  EXPECT_TRUE(fs::exists(out / "solution.csv"));
  auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest["command"], "solve");
  EXPECT_EQ(manifest["inputs"]["nodes"]["sha256"].get<std::string>().size(), 64u);
  EXPECT_TRUE(manifest.contains("tool_version"));
  EXPECT_TRUE(manifest.contains("started_utc"));
  EXPECT_TRUE(manifest.contains("finished_utc"));
}

TEST(Cli, SolveScenarioFallsBackToRoad) {
  auto out = fixtures::scratch("cli_scenario");
  auto r = run("--out " + out.string() + " solve " + fixture_args() + " --scenario " +
               (fixtures::data_dir() / "fixture6" / "scenario_terminals_out.csv").string());
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("objective 8684.0"), std::string::npos) << r.output;
  EXPECT_NE(slurp(out / "routes.csv").find("O>H1>D"), std::string::npos);
}

TEST(Cli, InputErrorsExitOne) {
  auto out = fixtures::scratch("cli_errors");
  auto r = run("--out " + out.string() + " solve --nodes /nonexistent.csv");
  EXPECT_EQ(r.code, 1);
  r = run("--out " + out.string() + " solve");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("--nodes"), std::string::npos);
  r = run("bogus");
  EXPECT_EQ(r.code, 1);

  auto d = out / "net";
  fs::create_directories(d);
  fixtures::write_file(d / "nodes.csv", "node_id,kind\nA,H\nB,H\nC,H\n");
  fixtures::write_file(d / "links.csv", "link_id,from,to,mode,length_miles,capacity\nab,A,B,road,10,5\n");
  fixtures::write_file(d / "terminals.csv", "node_id,capacity,transfer_cost_usd,processing_hours\n");
  fixtures::write_file(d / "demands.csv", "od_id,origin,destination,commodity,containers,deadline_hours\nOD1,A,C,general,1,168\n");
  r = run("--out " + out.string() + " paths --nodes " + (d / "nodes.csv").string() + " --links " +
          (d / "links.csv").string() + " --terminals " + (d / "terminals.csv").string() + " --demands " +
          (d / "demands.csv").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("unreachable"), std::string::npos) << r.output;
}

TEST(Cli, PathsFixture) {
  auto out = fixtures::scratch("cli_paths");
  auto r = run("--out " + out.string() + " paths " + fixture_args());
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(lines(out / "paths.csv"), 3u);
}

TEST(Cli, FedLinksOnSynthetic) {
  auto out = fixtures::scratch("cli_fed");
  auto r = run("--out " + out.string() + " --jobs 2 fed --synthetic 12,4,3 --ods 2 --rows 3 --kinds links "
               "--no-timing");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("instances 112"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("trend_violations 0"), std::string::npos) << r.output;
  EXPECT_EQ(lines(out / "fed_results.csv"), 113u);
  for (int n : {30, 60, 100, 200}) EXPECT_TRUE(fs::exists(out / ("fed_link_" + std::to_string(n) + ".svg")));
  auto first = slurp(out / "fed_results.csv");

  auto again = fixtures::scratch("cli_fed_again");
  r = run("--out " + again.string() + " fed --synthetic 12,4,3 --ods 2 --rows 3 --kinds links --no-timing");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(slurp(again / "fed_results.csv"), first);
  EXPECT_EQ(slurp(again / "fed_link_60.svg"), slurp(out / "fed_link_60.svg"));
}

TEST(Cli, FedZeroLambdaIsFlat) {
  auto out = fixtures::scratch("cli_fed_flat");
  auto r = run("--out " + out.string() + " fed " + fixture_args() + " --kinds terminals --lambda 0 --no-timing");
  EXPECT_EQ(r.code, 0) << r.output;
  auto rows = reliroute::read_fed_results(out / "fed_results.csv");
  ASSERT_EQ(rows.size(), 12u);
  for (const auto& row : rows) EXPECT_DOUBLE_EQ(row.objective, 4734.0);
}

TEST(Cli, ValidateFixturePasses) {
  auto out = fixtures::scratch("cli_validate");
  auto r = run("--out " + out.string() + " validate " + fixture_args() + " --samples 2000");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("fail 0"), std::string::npos) << r.output;
  auto t = reliroute::csv::Table::read(out / "mc_report.csv");
  EXPECT_GT(t.rows().size(), 24u);
}

TEST(Cli, ImportanceFixtureNoFail) {
  auto out = fixtures::scratch("cli_importance");
  auto r = run("--out " + out.string() + " importance " + fixture_args("demands_importance.csv"));
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("fail 0"), std::string::npos) << r.output;
  EXPECT_TRUE(fs::exists(out / "importance.csv"));
  EXPECT_TRUE(fs::exists(out / "ordering.csv"));
}

TEST(Cli, OutputsAreByteIdentical) {
  auto a = fixtures::scratch("cli_same_a");
  auto b = fixtures::scratch("cli_same_b");
  for (const auto& dir : {a, b}) {
    ASSERT_EQ(run("--out " + dir.string() + " solve " + fixture_args()).code, 0);
    ASSERT_EQ(run("--out " + dir.string() + " validate " + fixture_args() + " --samples 500 --q 0.1 --lambda 0.2").code,
              0);
  }
  for (const char* f : {"solution.csv", "routes.csv", "mc_report.csv"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}
