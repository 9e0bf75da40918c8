#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "optspan/io.hpp"

using namespace optspan;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const std::string& capture = "") {
  std::string cmd = std::string(OPTSPAN_CLI) + " " + args;
  cmd += capture.empty() ? " > /dev/null 2>&1" : " > " + capture + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("optspan_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const std::string kData = OPTSPAN_DATA_DIR;
const std::string kDemo = kData + "/demo_market.json";
const std::string kTied = kData + "/tied_market.json";
const std::string kPricing = kData + "/demo_pricing.json";

}  // namespace

TEST_SUITE("io") {

TEST_CASE("format_double round-trips") {
  for (double x : {0.1, 1.0 / 3, 5.0 / 3, 1e-300, 123456789.125, -2.5}) {
    CHECK(std::stod(io::format_double(x)) == x);
  }
  CHECK(io::format_double(0.5) == "0.5");
}

TEST_CASE("market and pricing JSON") {
  const auto m = io::market_from_json(io::json::parse(R"({"probs":[0.5,0.5],"underlying":[0,2]})"));
  CHECK(m.size() == 2);
  try {
    io::market_from_json(io::json::parse(R"({"probs":[0.5,0.5],"underlyin":[0,2]})"));
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("'underlying'") != std::string::npos);
  }
  try {
    io::market_from_json(io::json::parse(R"({"probs":[0.5,"x"],"underlying":[0,2]})"));
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("'probs'") != std::string::npos);
  }
  const auto pi = io::pricing_from_json(io::json::parse(R"({"bond":1,"calls":[{"k":0,"price":1}]})"));
  CHECK(pi.call_curve().size() == 1);
  CHECK_THROWS_AS(io::pricing_from_json(io::json::parse(R"({"bond":1,"calls":[{"k":0}]})")), Error);
}

TEST_CASE("claim mini-language") {
  const FiniteMarket m(Eigen::VectorXd::Constant(3, 1.0 / 3), Eigen::Vector3d(0, 1, 2));
  CHECK(io::parse_claim("square", m) == Eigen::Vector3d(0, 1, 4));
  CHECK(io::parse_claim("identity", m) == m.underlying());
  CHECK(io::parse_claim("one", m) == m.one());
  CHECK(io::parse_claim("\xF0\x9D\x9F\x99", m) == m.one());
  CHECK(io::parse_claim("abs-dev:1", m) == Eigen::Vector3d(1, 0, 1));
  CHECK(io::parse_claim("indicator:0.5", m) == Eigen::Vector3d(0, 1, 1));
  CHECK(io::parse_claim("[1, 2,3]", m) == Eigen::Vector3d(1, 2, 3));
  CHECK(io::parse_claim("4,5,6", m) == Eigen::Vector3d(4, 5, 6));
  CHECK_THROWS_AS(io::parse_claim("cube", m), Error);
  CHECK_THROWS_AS(io::parse_claim("1,2", m), Error);
  CHECK_THROWS_AS(io::parse_claim("abs-dev:x", m), Error);
}

TEST_CASE("portfolio JSON round-trip") {
  const OptionPortfolio p(1.5, {{0, -1}, {2.25, 3}});
  CHECK(io::portfolio_from_json(io::portfolio_to_json(p)) == p);
}

TEST_CASE("convergence CSV layout") {
  const FiniteMarket m(Eigen::VectorXd::Constant(3, 1.0 / 3), Eigen::Vector3d(0, 1, 2));
  const auto report = convergence_report({m.underlying() * 0.5, m.underlying()}, m.underlying(), m,
                                         {NormSpec::lp(2)}, PairingBank::unit_only(m));
  const std::string csv = io::convergence_csv(report);
  std::istringstream in(csv);
  std::string header, row1, row2;
  std::getline(in, header);
  std::getline(in, row1);
  std::getline(in, row2);
  CHECK(header == "n,sup_err,L2_err,pairing_max_err,abs_pairing_max_err,converged_flags");
  CHECK(row1.rfind("1,1,", 0) == 0);
  CHECK(row2 == "2,0,0,0,0,sup=1;L2=1;pairing=1");
}

TEST_CASE("cli: replicate") {
  const auto dir = scratch("replicate");
  CHECK(run("replicate --market " + kDemo + " --target square --out-dir " + dir.string()) == 0);
  const std::string csv = slurp(dir / "convergence.csv");
  CHECK(csv.find("n,sup_err") == 0);
  CHECK(csv.find("\n2,0,") != std::string::npos);
  const auto port = io::json::parse(slurp(dir / "portfolio.json"));
  CHECK(port["replicable"] == true);
  CHECK(port["meta"]["seed"] == 0);
  CHECK(port["meta"].contains("version"));

  const auto one = scratch("replicate_one");
  CHECK(run("replicate --market " + kDemo + " --target one --out-dir " + one.string()) == 0);
  const std::string one_csv = slurp(one / "convergence.csv");
  CHECK(std::count(one_csv.begin(), one_csv.end(), '\n') == 2);

  const auto tied = scratch("replicate_tied");
  CHECK(run("replicate --market " + kTied + " --target 0,1,2,2 --out-dir " + tied.string()) == 2);
  const auto proj = io::json::parse(slurp(tied / "portfolio.json"));
  CHECK(proj["replicable"] == false);
  CHECK(proj["projection"][1] == 1.5);

  const auto bad = scratch("bad");
  std::ofstream(bad / "m.json") << R"({"probs":[1],"underlyin":[1]})";
  CHECK(run("replicate --market " + (bad / "m.json").string() + " --target one --out-dir " + bad.string(),
            (bad / "log.txt").string()) == 1);
  CHECK(slurp(bad / "log.txt").find("'underlying'") != std::string::npos);
  CHECK(run("replicate --market /nonexistent.json --target one") == 1);

  const auto js = scratch("replicate_json");
  CHECK(run("replicate --market " + kDemo + " --target identity --format json --out-dir " + js.string()) == 0);
  CHECK(io::json::parse(slurp(js / "convergence.json"))["converged"]["all"] == true);
}

TEST_CASE("cli: price") {
  const auto dir = scratch("price");
  const auto out = (dir / "out.json").string();
  CHECK(run("price --market " + kDemo + " --pricing " + kPricing + " --target square", out) == 0);
  const auto j = io::json::parse(slurp(out));
  CHECK(j["unique"] == true);
  CHECK(j["p_min"].get<double>() == doctest::Approx(5.0 / 3).epsilon(1e-9));

  CHECK(run("price --market " + kTied + " --pricing " + kPricing + " --target 0,1,2,2", out) == 3);
  CHECK(io::json::parse(slurp(out))["gap"].get<double>() > 1e-6);

  std::ofstream(dir / "neg.json") << R"({"bond":1,"calls":[{"k":0,"price":1},{"k":1,"price":-0.1}]})";
  CHECK(run("price --market " + kDemo + " --pricing " + (dir / "neg.json").string() + " --target square", out) ==
        4);
  CHECK(io::json::parse(slurp(out))["nfl"].contains("certificate"));
}

TEST_CASE("cli: verify") {
  const auto dir = scratch("verify");
  const auto out = (dir / "out.json").string();
  CHECK(run("verify --market " + kDemo + " --lemma green-jarrow --trials 100", out) == 0);
  CHECK(io::json::parse(slurp(out))["passed"] == true);
  CHECK(run("verify --market " + kDemo + " --lemma z-identity --strikes=-1,0,0.5,1,2", out) == 0);
  CHECK(io::json::parse(slurp(out))["witnesses"].size() == 5);
  CHECK(run("verify --market " + kDemo + " --lemma o-closed") == 0);
  CHECK(run("verify --market " + kDemo + " --lemma o-closed --mutate", out) == 5);
  CHECK(io::json::parse(slurp(out)).contains("counterexample"));
  CHECK(run("verify --market " + kTied + " --lemma mode-agreement --trials 20") == 0);

  CHECK(run("verify --market " + kDemo + " --lemma nope", out) == 1);
  CHECK(slurp(out).find("green-jarrow") != std::string::npos);

  // Same seed, same bytes.
  const auto a = (dir / "a.json").string();
  const auto b = (dir / "b.json").string();
  run("verify --market " + kTied + " --lemma o-closed --mutate --seed 9", a);
  run("verify --market " + kTied + " --lemma o-closed --mutate --seed 9", b);
  CHECK(slurp(a) == slurp(b));
}

}  // TEST_SUITE
