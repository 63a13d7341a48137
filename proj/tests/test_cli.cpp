#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "opmx/gallery.hpp"
#include "opmx/suite.hpp"

using namespace opmx;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch() {
  const fs::path d = fs::temp_directory_path() / ("opmx_cli_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

fs::path write(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

CliRun cli(const std::string& args, const std::string& env = "") {
  const fs::path out = scratch() / "stdout.txt", err = scratch() / "stderr.txt";
  const std::string cmd = env + " " + OPMX_CLI_PATH + " " + args + " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Cli, AllCasesMatchInProcess) {
  SuiteConfig cfg;
  cfg.cases = {"all"};
  std::ostringstream out, err;
  EXPECT_EQ(run_suite(cfg, out, err), 0) << err.str();
  std::set<std::string> cases;
  std::istringstream in(out.str());
  for (std::string line; std::getline(in, line);) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j["match"].get<bool>()) << line;
    EXPECT_EQ(j["truncation"], 64);
    cases.insert(j["case"].get<std::string>());
  }
  EXPECT_EQ(cases.size(), 7u);
}

TEST(Cli, ExitZero) {
  const CliRun r = cli("--case case_IV --truncation 8,16");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out), 8u);
}

TEST(Cli, ExitOneOnTamperedExpectations) {
  const fs::path expect = write("tampered.json", R"({"case_IV": {"strict_gap": "fail"}})");
  const CliRun r = cli("--case case_IV --expect " + expect.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("\"match\":false"), std::string::npos);

  nlohmann::json def = export_case(build_case("case_IV"));
  def["expected"]["pairing"] = "fail";
  const CliRun d = cli("--define " + write("tampered_def.json", def.dump()).string());
  EXPECT_EQ(d.code, 1);
}

TEST(Cli, DefinitionReplayMatches) {
  const fs::path def = write("case_II.json", export_case(build_case("case_II")).dump());
  const CliRun r = cli("--define " + def.string() + " --truncation 16");
  EXPECT_EQ(r.code, 0) << r.err << r.out;
  EXPECT_NE(r.out.find("adjoint_denseness[0]"), std::string::npos);
}

TEST(Cli, ExitTwoOnInvalidInput) {
  const fs::path bad = write("malformed.json", R"({"kind":"matrix","grid":[["zero",{"diag":{"num":[1,"oops"]}}]]})");
  const CliRun r = cli("--define " + bad.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("grid[0][1].diag.num[1]"), std::string::npos) << r.err;

  EXPECT_EQ(cli("--define " + write("syntax.json", "{\"grid\": [").string()).code, 2);
  EXPECT_EQ(cli("--define " + (scratch() / "absent.json").string()).code, 2);
  EXPECT_EQ(cli("--case no_such_case").code, 2);
  EXPECT_EQ(cli("--case case_IV --truncation 0").code, 2);
  EXPECT_EQ(cli("--case case_IV --tol -1").code, 2);
  EXPECT_EQ(cli("--case case_IV --format yaml").code, 2);
  EXPECT_EQ(cli("--case case_IV --expect " + write("e.json", R"({"case_IV": {"nope": "pass"}})").string()).code, 2);
  EXPECT_EQ(cli("--case case_IV", "OPMX_SEED=abc").code, 2);
}

TEST(Cli, DeterministicReports) {
  const CliRun a = cli("--case case_II t1591 --truncation 16 --seed 9");
  const CliRun b = cli("--case case_II t1591 --truncation 16 --seed 9");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const CliRun c = cli("--case case_II t1591 --truncation 16 --seed 10");
  EXPECT_NE(a.out, c.out);
}

TEST(Cli, SeedEnvironmentOverridesDefaultOnly) {
  const CliRun base = cli("--case case_II --truncation 8 --seed 9");
  const CliRun env = cli("--case case_II --truncation 8", "OPMX_SEED=9");
  const CliRun flag_wins = cli("--case case_II --truncation 8 --seed 9", "OPMX_SEED=10");
  const CliRun plain = cli("--case case_II --truncation 8");
  EXPECT_EQ(base.out, env.out);
  EXPECT_EQ(base.out, flag_wins.out);
  EXPECT_NE(base.out, plain.out);
}

TEST(Cli, TextFormat) {
  const CliRun r = cli("--case t1591 --truncation 8 --format text");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("t1591 N=8 strict_gap: pass (expected pass) ok"), std::string::npos) << r.out;
}
