#include "optspan/topology.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace optspan {

namespace {

double parse_real(const std::string& text, const std::string& context) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  require(ec == std::errc() && ptr == last && !text.empty(), ErrorCode::ParseError,
          "cannot read a number from '" + text + "' in " + context);
  return value;
}

std::string format_real(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

double YoungFunction::operator()(double t) const {
  switch (kind) {
    case Kind::Power: return std::pow(t, p);
    case Kind::Exp: return std::expm1(t);
    case Kind::XLog: return t * std::log1p(t);
  }
  return 0.0;
}

std::string YoungFunction::name() const {
  switch (kind) {
    case Kind::Power: return "pow:" + format_real(p);
    case Kind::Exp: return "exp";
    case Kind::XLog: return "xlog";
  }
  return "";
}

YoungFunction YoungFunction::power(double p) {
  require(std::isfinite(p) && p >= 1.0, ErrorCode::InvalidArgument,
          "power Young function needs p >= 1");
  return {Kind::Power, p};
}

NormSpec NormSpec::lp(double p) {
  require(std::isfinite(p) && p >= 1.0, ErrorCode::InvalidArgument, "Lp norm needs p >= 1");
  return {Kind::Lp, p, {}};
}

NormSpec NormSpec::parse(const std::string& text) {
  if (text == "Linf") return linf();
  if (text.rfind("Lp:", 0) == 0) return lp(parse_real(text.substr(3), "norm '" + text + "'"));
  if (text == "Orlicz:exp") return orlicz(YoungFunction::exp_minus_one());
  if (text == "Orlicz:xlog") return orlicz(YoungFunction::x_log1p());
  if (text.rfind("Orlicz:pow:", 0) == 0) {
    return orlicz(YoungFunction::power(parse_real(text.substr(11), "norm '" + text + "'")));
  }
  if (text.size() > 1 && text[0] == 'L') return lp(parse_real(text.substr(1), "norm '" + text + "'"));
  throw Error(ErrorCode::ParseError,
              "unknown norm '" + text + "' (expected L1, L2, Lp:<p>, Linf, Orlicz:exp, "
              "Orlicz:xlog or Orlicz:pow:<p>)");
}

std::string NormSpec::name() const {
  switch (kind) {
    case Kind::Lp:
      if (p == std::floor(p) && p < 1e6) return "L" + format_real(p);
      return "Lp:" + format_real(p);
    case Kind::Linf: return "Linf";
    case Kind::Orlicz: return "Orlicz:" + young.name();
  }
  return "";
}

double luxemburg_norm(ClaimRef claim, const Eigen::VectorXd& probs, const YoungFunction& phi) {
  require(claim.size() == probs.size(), ErrorCode::DimensionMismatch, "claim dimension");
  const Eigen::VectorXd a = claim.cwiseAbs();
  const double amax = a.size() ? a.maxCoeff() : 0.0;
  if (amax == 0.0) return 0.0;

  auto modular = [&](double lambda) {
    double total = 0.0;
    for (Index i = 0; i < a.size(); ++i) total += probs[i] * phi(a[i] / lambda);
    return total;
  };

  double hi = amax;
  while (modular(hi) > 1.0) hi *= 2.0;
  double lo = hi;
  while (modular(lo) <= 1.0) lo *= 0.5;
  // modular(lo) > 1 >= modular(hi)
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (modular(mid) <= 1.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double norm(ClaimRef claim, const FiniteMarket& market, const NormSpec& spec) {
  require(claim.size() == market.size(), ErrorCode::DimensionMismatch, "claim dimension");
  const auto& p = market.probs();
  switch (spec.kind) {
    case NormSpec::Kind::Lp: {
      if (spec.p == 1.0) return p.dot(claim.cwiseAbs());
      if (spec.p == 2.0) return std::sqrt(p.dot(claim.cwiseAbs2()));
      double total = 0.0;
      for (Index i = 0; i < claim.size(); ++i) total += p[i] * std::pow(std::abs(claim[i]), spec.p);
      return std::pow(total, 1.0 / spec.p);
    }
    case NormSpec::Kind::Linf:
      // Every atom carries positive mass, so the essential sup is the max.
      return claim.size() ? claim.cwiseAbs().maxCoeff() : 0.0;
    case NormSpec::Kind::Orlicz: return luxemburg_norm(claim, p, spec.young);
  }
  return 0.0;
}

StatePriceDensity::StatePriceDensity(Eigen::VectorXd weights) : weights_(std::move(weights)) {
  require(weights_.size() >= 1, ErrorCode::InvalidArgument, "empty density");
  for (Index i = 0; i < weights_.size(); ++i) {
    require(std::isfinite(weights_[i]) && weights_[i] >= 0.0, ErrorCode::InvalidArgument,
            "density weights must be finite and nonnegative");
  }
  strict_ = weights_.minCoeff() > 0.0;
}

double pair(ClaimRef claim, const StatePriceDensity& density, const FiniteMarket& market) {
  require(claim.size() == market.size() && density.size() == market.size(),
          ErrorCode::DimensionMismatch, "pairing dimensions differ");
  return (claim.array() * density.weights().array() * market.probs().array()).sum();
}

PairingBank::PairingBank(std::vector<StatePriceDensity> densities)
    : densities_(std::move(densities)) {
  const bool has_strict = std::any_of(densities_.begin(), densities_.end(),
                                      [](const auto& d) { return d.strict(); });
  require(has_strict, ErrorCode::InvalidArgument,
          "a pairing bank needs at least one strictly positive density");
  for (const auto& d : densities_) {
    require(d.size() == densities_.front().size(), ErrorCode::DimensionMismatch,
            "bank densities differ in dimension");
  }
}

PairingBank PairingBank::unit_only(const FiniteMarket& market) {
  return PairingBank({StatePriceDensity::unit(market.size())});
}

PairingBank PairingBank::random(const FiniteMarket& market, std::uint64_t seed,
                                std::size_t strict_count, std::size_t sparse_count) {
  const Index n = market.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  std::bernoulli_distribution keep(0.5);

  auto normalized = [&](Eigen::VectorXd w) {
    return StatePriceDensity(w / market.probs().dot(w));
  };

  std::vector<StatePriceDensity> out;
  out.push_back(StatePriceDensity::unit(n));
  for (std::size_t k = 0; k < strict_count; ++k) {
    Eigen::VectorXd w(n);
    for (Index i = 0; i < n; ++i) w[i] = weight(rng);
    out.push_back(normalized(w));
  }
  for (std::size_t k = 0; k < sparse_count; ++k) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (Index i = 0; i < n; ++i) {
      if (keep(rng)) w[i] = weight(rng);
    }
    if (w.maxCoeff() == 0.0) w[static_cast<Index>(rng() % static_cast<std::uint64_t>(n))] = 1.0;
    out.push_back(normalized(w));
  }
  return PairingBank(std::move(out));
}

double ConvergenceRow::pairing_max_error() const {
  return pairing_errors.empty() ? 0.0 : *std::max_element(pairing_errors.begin(), pairing_errors.end());
}

double ConvergenceRow::abs_pairing_max_error() const {
  return abs_pairing_errors.empty()
             ? 0.0
             : *std::max_element(abs_pairing_errors.begin(), abs_pairing_errors.end());
}

bool ConvergenceReport::row_pairing_converged(const ConvergenceRow& row) const {
  for (std::size_t d = 0; d < strict_densities.size(); ++d) {
    if (!strict_densities[d]) continue;
    if (!(row.pairing_errors[d] < options.tolerance)) return false;
    if (options.absolute_pairing && !(row.abs_pairing_errors[d] < options.tolerance)) return false;
  }
  return true;
}

bool ConvergenceReport::all_converged() const {
  return sup_converged && pairing_converged &&
         std::all_of(norm_converged.begin(), norm_converged.end(), [](bool b) { return b; });
}

ConvergenceReport convergence_report(const std::vector<Claim>& sequence, ClaimRef target,
                                     const FiniteMarket& market, const std::vector<NormSpec>& norms,
                                     const PairingBank& bank, ConvergenceOptions options) {
  require(!sequence.empty(), ErrorCode::EmptySequence, "convergence report needs a sequence");
  require(target.size() == market.size(), ErrorCode::DimensionMismatch, "target dimension");

  ConvergenceReport report;
  report.options = options;
  for (const auto& spec : norms) report.norm_names.push_back(spec.name());
  for (const auto& d : bank.densities()) {
    require(d.size() == market.size(), ErrorCode::DimensionMismatch, "bank density dimension");
    report.strict_densities.push_back(d.strict());
  }

  for (std::size_t k = 0; k < sequence.size(); ++k) {
    require(sequence[k].size() == market.size(), ErrorCode::DimensionMismatch,
            "sequence element " + std::to_string(k) + " has the wrong dimension");
    const Claim diff = sequence[k] - target;
    const Claim abs_diff = diff.cwiseAbs();

    ConvergenceRow row;
    row.n = k + 1;
    row.sup_error = abs_diff.size() ? abs_diff.maxCoeff() : 0.0;
    for (const auto& spec : norms) row.norm_errors.push_back(norm(diff, market, spec));
    for (const auto& d : bank.densities()) {
      row.pairing_errors.push_back(std::abs(pair(diff, d, market)));
      if (options.absolute_pairing) row.abs_pairing_errors.push_back(pair(abs_diff, d, market));
    }
    report.rows.push_back(std::move(row));
  }

  const ConvergenceRow& last = report.rows.back();
  report.sup_converged = last.sup_error < options.tolerance;
  for (double e : last.norm_errors) report.norm_converged.push_back(e < options.tolerance);
  report.pairing_converged = report.row_pairing_converged(last);
  return report;
}

}  // namespace optspan
