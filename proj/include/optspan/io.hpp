#pragma once

// JSON and CSV surfaces for the command-line tool.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "optspan/lattice.hpp"
#include "optspan/pricing.hpp"
#include "optspan/replication.hpp"

namespace optspan::io {

using json = nlohmann::ordered_json;

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

/// {"probs": [...], "underlying": [...], "labels": [...]?}
FiniteMarket market_from_json(const json& j);
FiniteMarket load_market(const std::string& path);

/// {"bond": B, "calls": [{"k": ..., "price": ...}, ...]}
PricingFunctional pricing_from_json(const json& j);
PricingFunctional load_pricing(const std::string& path);

json read_json_file(const std::string& path);

/// Claim mini-language: "square", "identity", "one" (or "𝟙"), "abs-dev:c",
/// "indicator:r", or a raw vector "0,1,4" / "[0,1,4]".
Claim parse_claim(const std::string& spec, const FiniteMarket& market);

/// Comma-separated norm names, e.g. "L1,L2,Linf,Orlicz:exp".
std::vector<NormSpec> parse_norms(const std::string& text);

/// "default" (unit + 8 strict + 4 sparse), "one", or "random:STRICT:SPARSE".
PairingBank parse_bank(const std::string& spec, const FiniteMarket& market, std::uint64_t seed);

/// Strike list "-1,0,0.5".
std::vector<double> parse_doubles(const std::string& text);

json portfolio_to_json(const OptionPortfolio& port);
OptionPortfolio portfolio_from_json(const json& j);

json vector_to_json(const Eigen::VectorXd& v);

json convergence_to_json(const ConvergenceReport& report);
/// Columns: n, sup_err, <norm>_err..., pairing_max_err, abs_pairing_max_err, converged_flags.
std::string convergence_csv(const ConvergenceReport& report);

json price_bounds_to_json(const PriceBounds& bounds);
json nfl_to_json(const NflResult& result);
json verification_to_json(const VerificationReport& report);

/// Seed, tolerances and tool version, embedded in every report.
json report_meta(std::uint64_t seed);

}  // namespace optspan::io
