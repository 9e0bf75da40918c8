#include "optspan/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace optspan::io {

namespace {

[[noreturn]] void parse_fail(const std::string& msg) { throw Error(ErrorCode::ParseError, msg); }

const json& field(const json& j, const std::string& name, const std::string& where) {
  if (!j.is_object()) parse_fail(where + " must be a JSON object");
  auto it = j.find(name);
  if (it == j.end()) parse_fail("missing field '" + name + "' in " + where);
  return *it;
}

double number_field(const json& j, const std::string& name, const std::string& where) {
  const json& v = field(j, name, where);
  if (!v.is_number()) parse_fail("field '" + name + "' in " + where + " must be a number");
  return v.get<double>();
}

Eigen::VectorXd number_array(const json& j, const std::string& name, const std::string& where) {
  const json& v = field(j, name, where);
  if (!v.is_array()) parse_fail("field '" + name + "' in " + where + " must be an array");
  Eigen::VectorXd out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) {
      parse_fail("field '" + name + "' in " + where + " has a non-numeric entry at index " +
                 std::to_string(i));
    }
    out[static_cast<Index>(i)] = v[i].get<double>();
  }
  return out;
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    parse_fail("cannot parse " + what + " '" + text + "'");
  }
  if (used != text.size()) parse_fail("trailing characters in " + what + " '" + text + "'");
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  return out;
}

json flags_json(const std::vector<bool>& flags) {
  json out = json::array();
  for (bool b : flags) out.push_back(b);
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) return std::to_string(x);
  return std::string(buf, end);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    parse_fail("'" + path + "' is not valid JSON: " + e.what());
  }
}

FiniteMarket market_from_json(const json& j) {
  const Eigen::VectorXd probs = number_array(j, "probs", "market");
  const Eigen::VectorXd f = number_array(j, "underlying", "market");
  std::vector<std::string> labels;
  if (auto it = j.find("labels"); it != j.end()) {
    if (!it->is_array()) parse_fail("field 'labels' in market must be an array of strings");
    for (const auto& l : *it) {
      if (!l.is_string()) parse_fail("field 'labels' in market must be an array of strings");
      labels.push_back(l.get<std::string>());
    }
  }
  return FiniteMarket(probs, f, labels);
}

FiniteMarket load_market(const std::string& path) { return market_from_json(read_json_file(path)); }

PricingFunctional pricing_from_json(const json& j) {
  const double bond = number_field(j, "bond", "pricing");
  const json& calls = field(j, "calls", "pricing");
  if (!calls.is_array()) parse_fail("field 'calls' in pricing must be an array");
  std::vector<CallQuote> quotes;
  for (std::size_t i = 0; i < calls.size(); ++i) {
    const std::string where = "pricing.calls[" + std::to_string(i) + "]";
    quotes.push_back({number_field(calls[i], "k", where), number_field(calls[i], "price", where)});
  }
  return PricingFunctional(bond, std::move(quotes));
}

PricingFunctional load_pricing(const std::string& path) {
  return pricing_from_json(read_json_file(path));
}

Claim parse_claim(const std::string& spec, const FiniteMarket& market) {
  const Claim& f = market.underlying();
  if (spec == "square") return f.array().square().matrix();
  if (spec == "identity") return f;
  if (spec == "one" || spec == "\xF0\x9D\x9F\x99") return market.one();
  if (spec.rfind("abs-dev:", 0) == 0) {
    const double c = parse_number(spec.substr(8), "abs-dev center");
    return (f.array() - c).abs().matrix();
  }
  if (spec.rfind("indicator:", 0) == 0) {
    const double r = parse_number(spec.substr(10), "indicator threshold");
    return (f.array() > r).cast<double>().matrix();
  }
  std::string body = spec;
  if (!body.empty() && body.front() == '[') {
    if (body.back() != ']') parse_fail("unterminated claim vector '" + spec + "'");
    body = body.substr(1, body.size() - 2);
  }
  const std::vector<double> values = parse_doubles(body);
  if (values.empty()) parse_fail("unknown claim '" + spec + "'");
  require(static_cast<Index>(values.size()) == market.size(), ErrorCode::DimensionMismatch,
          "claim vector has " + std::to_string(values.size()) + " entries, market has " +
              std::to_string(market.size()) + " states");
  return Eigen::Map<const Eigen::VectorXd>(values.data(), market.size());
}

std::vector<NormSpec> parse_norms(const std::string& text) {
  std::vector<NormSpec> out;
  for (const auto& name : split(text, ',')) {
    if (!name.empty()) out.push_back(NormSpec::parse(name));
  }
  return out;
}

PairingBank parse_bank(const std::string& spec, const FiniteMarket& market, std::uint64_t seed) {
  if (spec == "default") return PairingBank::random(market, seed);
  if (spec == "one") return PairingBank::unit_only(market);
  const auto parts = split(spec, ':');
  if (parts.size() == 3 && parts[0] == "random") {
    const double strict = parse_number(parts[1], "strict density count");
    const double sparse = parse_number(parts[2], "sparse density count");
    if (strict < 0 || sparse < 0 || strict != std::floor(strict) || sparse != std::floor(sparse)) {
      parse_fail("density counts in '" + spec + "' must be nonnegative integers");
    }
    return PairingBank::random(market, seed, static_cast<std::size_t>(strict),
                               static_cast<std::size_t>(sparse));
  }
  parse_fail("unknown bank '" + spec + "' (expected default, one, random:STRICT:SPARSE)");
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) continue;
    out.push_back(parse_number(item, "number"));
  }
  return out;
}

json portfolio_to_json(const OptionPortfolio& port) {
  json legs = json::array();
  for (const auto& leg : port.legs()) legs.push_back({{"strike", leg.strike}, {"weight", leg.weight}});
  return {{"cash", port.cash()}, {"legs", legs}};
}

OptionPortfolio portfolio_from_json(const json& j) {
  const double cash = number_field(j, "cash", "portfolio");
  const json& legs = field(j, "legs", "portfolio");
  if (!legs.is_array()) parse_fail("field 'legs' in portfolio must be an array");
  std::vector<CallLeg> out;
  for (std::size_t i = 0; i < legs.size(); ++i) {
    const std::string where = "portfolio.legs[" + std::to_string(i) + "]";
    out.push_back({number_field(legs[i], "strike", where), number_field(legs[i], "weight", where)});
  }
  return OptionPortfolio(cash, std::move(out));
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json convergence_to_json(const ConvergenceReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    json r = {{"n", row.n}, {"sup_err", row.sup_error}};
    for (std::size_t k = 0; k < report.norm_names.size(); ++k) {
      r[report.norm_names[k] + "_err"] = row.norm_errors[k];
    }
    r["pairing_max_err"] = row.pairing_max_error();
    r["abs_pairing_max_err"] = row.abs_pairing_max_error();
    rows.push_back(std::move(r));
  }
  json norms = json::object();
  for (std::size_t k = 0; k < report.norm_names.size(); ++k) {
    norms[report.norm_names[k]] = static_cast<bool>(report.norm_converged[k]);
  }
  return {{"tolerance", report.options.tolerance},
          {"absolute_pairing", report.options.absolute_pairing},
          {"strict_densities", flags_json(report.strict_densities)},
          {"converged", {{"sup", report.sup_converged}, {"norms", norms},
                         {"pairing", report.pairing_converged}, {"all", report.all_converged()}}},
          {"rows", rows}};
}

std::string convergence_csv(const ConvergenceReport& report) {
  std::ostringstream out;
  out << "n,sup_err";
  for (const auto& name : report.norm_names) out << ',' << name << "_err";
  out << ",pairing_max_err,abs_pairing_max_err,converged_flags\n";
  const double tol = report.options.tolerance;
  for (const auto& row : report.rows) {
    out << row.n << ',' << format_double(row.sup_error);
    for (double e : row.norm_errors) out << ',' << format_double(e);
    out << ',' << format_double(row.pairing_max_error()) << ','
        << format_double(row.abs_pairing_max_error()) << ",sup=" << (row.sup_error < tol);
    for (std::size_t k = 0; k < report.norm_names.size(); ++k) {
      out << ';' << report.norm_names[k] << '=' << (row.norm_errors[k] < tol);
    }
    out << ";pairing=" << report.row_pairing_converged(row) << '\n';
  }
  return out.str();
}

json price_bounds_to_json(const PriceBounds& b) {
  json statuses = json::array();
  for (auto s : b.statuses) statuses.push_back(lp::to_string(s));
  return {{"p_min", b.p_min},
          {"p_max", b.p_max},
          {"gap", b.gap()},
          {"unique", b.unique},
          {"p_min_strict", b.p_min_strict},
          {"p_max_strict", b.p_max_strict},
          {"delta", b.delta},
          {"lower_density", vector_to_json(b.lower_certificate.weights())},
          {"upper_density", vector_to_json(b.upper_certificate.weights())},
          {"lp_status", statuses}};
}

json nfl_to_json(const NflResult& r) {
  json out = {{"no_free_lunch", r.no_free_lunch},
              {"lambda", r.lambda},
              {"min_density", r.min_density},
              {"separation_status", lp::to_string(r.separation_status)},
              {"certificate_status", lp::to_string(r.certificate_status)}};
  if (r.witness) out["witness"] = vector_to_json(r.witness->weights());
  if (r.certificate) {
    const auto& c = *r.certificate;
    out["certificate"] = {{"portfolio", portfolio_to_json(c.portfolio)},
                          {"portfolio_price", c.portfolio_price},
                          {"payoff", vector_to_json(c.payoff)},
                          {"dominated", vector_to_json(c.dominated)},
                          {"element", vector_to_json(c.element)}};
  }
  return out;
}

json verification_to_json(const VerificationReport& report) {
  json out = {{"lemma", report.lemma}, {"trials", report.trials}, {"passed", report.passed}};
  if (report.counterexample) {
    const auto& c = *report.counterexample;
    out["counterexample"] = {{"description", c.description},
                             {"trial", c.trial},
                             {"states", c.states},
                             {"values", c.values}};
  }
  out["witnesses"] = report.witnesses;
  return out;
}

json report_meta(std::uint64_t seed) {
  return {{"version", OPTSPAN_VERSION},
          {"seed", seed},
          {"tolerances",
           {{"value_equality", tol::value_equality},
            {"probability_sum", tol::probability_sum},
            {"convergence", ConvergenceOptions{}.tolerance},
            {"uniqueness", pricing_tol::uniqueness},
            {"strict_positivity", pricing_tol::strict_positivity},
            {"reconcile", pricing_tol::reconcile},
            {"lp_pivot", lp::Tolerances{}.pivot},
            {"lp_feasibility", lp::Tolerances{}.feasibility}}}};
}

}  // namespace optspan::io
