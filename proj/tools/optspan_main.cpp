// optspan: replication, pricing and lemma-harness experiments on finite markets.
//
// Exit codes: 0 ok; 1 usage, file or parse error; 2 replicate target not
// written on f; 3 price not determined by arbitrage; 4 free lunch; 5 a
// verified property failed.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "optspan/io.hpp"

namespace fs = std::filesystem;
using namespace optspan;
using io::json;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kNotMeasurable = 2;
constexpr int kNotUnique = 3;
constexpr int kFreeLunch = 4;
constexpr int kPropertyFailed = 5;

const std::vector<std::string> kLemmas = {"o-closed", "green-jarrow", "z-identity", "mode-agreement"};

struct Options {
  std::string market;
  std::string pricing;
  std::string target;
  std::string norms = "L1,L2,Linf";
  std::string bank = "default";
  std::string out_dir = ".";
  std::string format = "csv";
  std::string price_format = "json";
  std::string lemma;
  std::string strikes = "-1,0,0.5,1,2";
  std::uint64_t seed = 0;
  std::size_t trials = 100;
  int n_max = 48;
  bool mutate = false;
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write '" + path.string() + "'");
  out << text;
}

int run_replicate(const Options& o) {
  const FiniteMarket market = io::load_market(o.market);
  const Claim target = io::parse_claim(o.target, market);
  const auto norms = io::parse_norms(o.norms);
  const PairingBank bank = io::parse_bank(o.bank, market, o.seed);
  const CompletionEntry entry = completion_demo(market, {target}, norms, bank, o.n_max).front();

  fs::create_directories(o.out_dir);
  const fs::path dir(o.out_dir);
  if (o.format == "json") {
    json conv = io::convergence_to_json(entry.report);
    conv["meta"] = io::report_meta(o.seed);
    write_file(dir / "convergence.json", conv.dump(2) + "\n");
  } else {
    write_file(dir / "convergence.csv", io::convergence_csv(entry.report));
  }

  json port = {{"meta", io::report_meta(o.seed)},
               {"target", o.target},
               {"replicable", entry.replicable},
               {"projection", io::vector_to_json(entry.projection)},
               {"portfolio", io::portfolio_to_json(entry.portfolio)}};
  if (entry.witness) port["witness_states"] = {entry.witness->first, entry.witness->second};
  write_file(dir / "portfolio.json", port.dump(2) + "\n");

  const auto& last = entry.report.rows.back();
  std::cout << "target " << o.target << ": " << entry.report.rows.size() << " ladder steps, final sup_err "
            << io::format_double(last.sup_error) << (entry.replicable ? "" : " (projection replicated)")
            << "\n";
  if (!entry.replicable) {
    std::cerr << "target is not written on f: states " << entry.witness->first << " and "
              << entry.witness->second << " share f but differ in payoff\n";
    return kNotMeasurable;
  }
  return kOk;
}

int run_price(const Options& o) {
  const FiniteMarket market = io::load_market(o.market);
  const PricingFunctional pi = io::load_pricing(o.pricing);
  const Claim claim = io::parse_claim(o.target, market);

  json out = {{"meta", io::report_meta(o.seed)}, {"claim", o.target}};
  NflResult nfl;
  try {
    nfl = no_free_lunch(pi, market);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InconsistentPrices) throw;
    out["no_free_lunch"] = false;
    out["inconsistent"] = e.what();
    std::cout << out.dump(2) << "\n";
    return kFreeLunch;
  }
  out["nfl"] = io::nfl_to_json(nfl);
  if (!nfl.no_free_lunch) {
    out["no_free_lunch"] = false;
    std::cout << out.dump(2) << "\n";
    return kFreeLunch;
  }

  const PriceBounds bounds = price_bounds(claim, pi, market);
  if (o.price_format == "csv") {
    std::cout << "p_min,p_max,gap,unique\n"
              << io::format_double(bounds.p_min) << ',' << io::format_double(bounds.p_max) << ','
              << io::format_double(bounds.gap()) << ',' << bounds.unique << "\n";
  } else {
    const json b = io::price_bounds_to_json(bounds);
    for (auto it = b.begin(); it != b.end(); ++it) out[it.key()] = it.value();
    std::cout << out.dump(2) << "\n";
  }
  return bounds.unique ? kOk : kNotUnique;
}

int run_verify(const Options& o) {
  bool known = false;
  for (const auto& l : kLemmas) known = known || l == o.lemma;
  if (!known) {
    std::cerr << "unknown lemma '" << o.lemma << "'; valid names:";
    for (const auto& l : kLemmas) std::cerr << ' ' << l;
    std::cerr << "\n";
    return kFailure;
  }

  const FiniteMarket market = io::load_market(o.market);
  VerificationReport report;
  if (o.lemma == "o-closed") {
    report = verify_order_closed_iff_sequential(SublatticeSpec::of_underlying(market),
                                                {o.trials, o.seed, o.mutate});
  } else if (o.lemma == "green-jarrow") {
    report = verify_green_jarrow(SublatticeSpec::of_underlying(market), o.trials, o.seed);
  } else if (o.lemma == "z-identity") {
    const auto strikes = io::parse_doubles(o.strikes);
    const auto residuals = z_identity_residuals(market, strikes);
    report.lemma = o.lemma;
    report.trials = strikes.size();
    report.passed = z_identity_check(market, strikes);
    for (std::size_t i = 0; i < strikes.size(); ++i) {
      report.witnesses.push_back("k=" + io::format_double(strikes[i]) +
                                 " residual=" + io::format_double(residuals[i]));
    }
    if (!report.passed) {
      Counterexample ce;
      ce.description = "z-identity residual above tolerance";
      ce.values = residuals;
      report.counterexample = std::move(ce);
    }
  } else {
    report = verify_mode_agreement(market, io::parse_norms(o.norms),
                                   io::parse_bank(o.bank, market, o.seed), o.trials, o.seed);
  }

  json out = io::verification_to_json(report);
  out["meta"] = io::report_meta(o.seed);
  std::cout << out.dump(2) << "\n";
  return report.passed ? kOk : kPropertyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Option-span replication and arbitrage pricing on finite markets"};
  app.set_version_flag("--version", std::string(OPTSPAN_VERSION));
  app.require_subcommand(1);
  Options o;

  auto* rep = app.add_subcommand("replicate", "Ladder convergence and exact replication of a target");
  rep->add_option("--market", o.market, "Market JSON")->required();
  rep->add_option("--target", o.target, "Claim spec: square, identity, one, abs-dev:c, indicator:r, or a vector")
      ->required();
  rep->add_option("--n-max", o.n_max, "Longest ladder")->check(CLI::PositiveNumber)->capture_default_str();
  rep->add_option("--norms", o.norms, "Comma-separated norms")->capture_default_str();
  rep->add_option("--bank", o.bank, "Pairing bank: default, one, random:STRICT:SPARSE")->capture_default_str();
  rep->add_option("--seed", o.seed)->capture_default_str();
  rep->add_option("--out-dir", o.out_dir)->capture_default_str();
  rep->add_option("--format", o.format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  auto* price = app.add_subcommand("price", "Arbitrage bounds for a claim given bond and call prices");
  price->add_option("--market", o.market, "Market JSON")->required();
  price->add_option("--pricing", o.pricing, "Pricing JSON")->required();
  price->add_option("--target", o.target, "Claim spec")->required();
  price->add_option("--seed", o.seed)->capture_default_str();
  price->add_option("--format", o.price_format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  auto* verify = app.add_subcommand("verify", "Randomized lemma harnesses");
  verify->add_option("--market", o.market, "Market JSON")->required();
  verify->add_option("--lemma", o.lemma, "o-closed, green-jarrow, z-identity, mode-agreement")->required();
  verify->add_option("--seed", o.seed)->capture_default_str();
  verify->add_option("--trials", o.trials)->capture_default_str();
  verify->add_option("--strikes", o.strikes, "Strikes for z-identity")->capture_default_str();
  verify->add_option("--norms", o.norms)->capture_default_str();
  verify->add_option("--bank", o.bank)->capture_default_str();
  verify->add_flag("--mutate", o.mutate, "Inject a fault (self-test)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kFailure;
  }
  try {
    if (rep->parsed()) return run_replicate(o);
    if (price->parsed()) return run_price(o);
    return run_verify(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
