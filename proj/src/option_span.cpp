#include "optspan/option_span.hpp"

#include <algorithm>
#include <cmath>

#include "optspan/replication.hpp"

namespace optspan {

OptionPortfolio::OptionPortfolio(double cash, std::vector<CallLeg> legs) : cash_(cash) {
  require(std::isfinite(cash), ErrorCode::InvalidArgument, "cash position must be finite");
  for (const auto& leg : legs) {
    require(std::isfinite(leg.strike) && std::isfinite(leg.weight), ErrorCode::InvalidArgument,
            "call legs need finite strikes and weights");
  }
  std::stable_sort(legs.begin(), legs.end(),
                   [](const CallLeg& a, const CallLeg& b) { return a.strike < b.strike; });
  for (const auto& leg : legs) {
    if (!legs_.empty() && legs_.back().strike == leg.strike) {
      legs_.back().weight += leg.weight;
    } else {
      legs_.push_back(leg);
    }
  }
  std::erase_if(legs_, [](const CallLeg& leg) { return leg.weight == 0.0; });
}

OptionPortfolio operator+(const OptionPortfolio& a, const OptionPortfolio& b) {
  std::vector<CallLeg> legs = a.legs_;
  legs.insert(legs.end(), b.legs_.begin(), b.legs_.end());
  return OptionPortfolio(a.cash_ + b.cash_, std::move(legs));
}

OptionPortfolio operator*(double scale, const OptionPortfolio& a) {
  std::vector<CallLeg> legs = a.legs_;
  for (auto& leg : legs) leg.weight *= scale;
  return OptionPortfolio(scale * a.cash_, std::move(legs));
}

OptionPortfolio operator-(const OptionPortfolio& a, const OptionPortfolio& b) {
  return a + (-1.0) * b;
}

namespace {

// Knuth's TwoSum: a + b == s + err exactly.
double two_sum(double a, double b, double& err) {
  const double s = a + b;
  const double bb = s - a;
  err = (a - (s - bb)) + (b - bb);
  return s;
}

}  // namespace

// Accumulates in double-double so that long ladders of large offsetting legs
// come out correctly rounded rather than carrying n * ulp(f) of noise.
Claim payoff(const OptionPortfolio& port, ClaimRef underlying) {
  Claim out(underlying.size());
  for (Index i = 0; i < underlying.size(); ++i) {
    const double f = underlying[i];
    double hi = port.cash();
    double lo = 0.0;
    for (const auto& leg : port.legs()) {
      if (!(f > leg.strike)) continue;
      double d_err = 0.0;
      const double d = two_sum(f, -leg.strike, d_err);
      const double prod = leg.weight * d;
      const double prod_err = std::fma(leg.weight, d, -prod);
      double s_err = 0.0;
      hi = two_sum(hi, prod, s_err);
      lo += s_err + prod_err + leg.weight * d_err;
    }
    out[i] = hi + lo;
  }
  return out;
}

Claim payoff(const OptionPortfolio& port, const FiniteMarket& market) {
  return payoff(port, market.underlying());
}

OptionPortfolio put(double strike) {
  return OptionPortfolio(strike, {{0.0, -1.0}, {strike, 1.0}});
}

MembershipResult is_in_span(ClaimRef claim, const FiniteMarket& market) {
  require(claim.size() == market.size(), ErrorCode::DimensionMismatch, "claim dimension");
  const Partition part = sigma_of_underlying(market);

  MembershipResult result;
  for (const auto& cell : part.cells) {
    Index lo = cell.front();
    Index hi = cell.front();
    for (Index s : cell) {
      if (claim[s] < claim[lo]) lo = s;
      if (claim[s] > claim[hi]) hi = s;
    }
    if (!values_equal(claim[lo], claim[hi])) {
      result.witness = std::minmax(lo, hi);
      return result;
    }
  }
  result.member = true;
  result.portfolio = exact_replicate(claim, market);
  return result;
}

std::vector<double> z_identity_residuals(const FiniteMarket& market,
                                         const std::vector<double>& strikes) {
  const Claim& f = market.underlying();
  const Claim b = f.array() + 1.0;
  const Claim& s = f;

  std::vector<double> residuals;
  residuals.reserve(strikes.size());
  for (double k : strikes) {
    require(std::isfinite(k), ErrorCode::InvalidArgument, "strikes must be finite");
    const Claim lhs = (s - k * b).cwiseMax(0.0);
    Claim rhs = Claim::Zero(f.size());
    if (k < 1.0) rhs = (1.0 - k) * payoff(OptionPortfolio::call(k / (1.0 - k)), market);
    residuals.push_back((lhs - rhs).cwiseAbs().maxCoeff());
  }
  return residuals;
}

bool z_identity_check(const FiniteMarket& market, const std::vector<double>& strikes) {
  const auto residuals = z_identity_residuals(market, strikes);
  const double scale = std::max(1.0, market.underlying().maxCoeff() + 1.0);
  return std::all_of(residuals.begin(), residuals.end(),
                     [&](double r) { return r <= 1e-12 * scale; });
}

}  // namespace optspan
