#pragma once

// Linear pricing on the option space M = Span{1, (f - k)^+ : k in K}: the
// positivity check, no-free-lunch certification by finite Kreps-Yan
// separation, consistent price bounds for arbitrary claims, and the
// arbitrage-determined extension to claims written on f.
//
// Densities are normalized so that <1, y> = 1; the functional is then
// pi(x) = bond * <x, y>, i.e. lambda = bond price. Internally the programs
// are posed over risk-neutral weights q_i = y_i p_i.

#include <optional>
#include <string>
#include <vector>

#include "optspan/lp.hpp"
#include "optspan/option_span.hpp"
#include "optspan/topology.hpp"

namespace optspan {

struct CallQuote {
  double strike = 0.0;
  double price = 0.0;
};

class PricingFunctional {
 public:
  /// Strikes must be finite and strictly increasing; prices finite.
  PricingFunctional(double bond_price, std::vector<CallQuote> call_curve);

  /// Bond and call prices generated by a density: bond * <payoff, y>.
  static PricingFunctional from_density(const FiniteMarket& market, const StatePriceDensity& density,
                                        double bond_price, const std::vector<double>& strikes);

  double bond_price() const { return bond_; }
  const std::vector<CallQuote>& call_curve() const { return calls_; }
  std::vector<double> strikes() const;

  /// Columns: 1, then (f - k)^+ for each strike.
  Eigen::MatrixXd payoff_matrix(const FiniteMarket& market) const;
  Eigen::VectorXd price_vector() const;

  /// Price of a portfolio whose strikes all belong to K (cash priced by the bond).
  double price(const OptionPortfolio& port) const;
  /// Price of a coefficient vector over (1, calls...).
  double price(const Eigen::VectorXd& coefficients) const;
  OptionPortfolio portfolio(const Eigen::VectorXd& coefficients) const;

 private:
  double bond_;
  std::vector<CallQuote> calls_;
};

/// Throws InconsistentPrices when payoff dependencies among {1, calls at K}
/// contradict the quoted prices (pi would not be a function on M).
void reconcile(const PricingFunctional& pi, const FiniteMarket& market);

/// Columns span M0 = ker pi (as payoff vectors), from a rank-revealing
/// elimination of the payoff matrix.
Eigen::MatrixXd zero_price_basis(const PricingFunctional& pi, const FiniteMarket& market);

struct PositivityResult {
  bool positive = false;
  /// x in M with nonnegative payoff and negative price.
  std::optional<OptionPortfolio> violation;
  /// Nonnegative density with pi(x) = <x, y> on M (Farkas certificate).
  std::optional<Eigen::VectorXd> density;
  lp::Status status = lp::Status::Optimal;
};

PositivityResult check_positivity(const PricingFunctional& pi, const FiniteMarket& market);

/// Element of C = M0 - X+ lying in X+ \ {0}: element = payoff(portfolio) - dominated.
struct FreeLunchCertificate {
  OptionPortfolio portfolio;
  double portfolio_price = 0.0;
  Claim payoff;
  Claim dominated;
  Claim element;
};

struct NflResult {
  bool no_free_lunch = false;
  std::optional<StatePriceDensity> witness;
  double lambda = 0.0;
  /// Largest attainable min_i y_i among consistent densities.
  double min_density = 0.0;
  std::optional<FreeLunchCertificate> certificate;
  lp::Status separation_status = lp::Status::Optimal;
  lp::Status certificate_status = lp::Status::Optimal;
};

NflResult no_free_lunch(const PricingFunctional& pi, const FiniteMarket& market);

struct PriceBounds {
  /// Bounds over the closed set of consistent densities (y >= 0).
  double p_min = 0.0;
  double p_max = 0.0;
  /// Bounds over densities with y >= delta.
  double p_min_strict = 0.0;
  double p_max_strict = 0.0;
  double delta = 0.0;
  StatePriceDensity lower_certificate{Eigen::VectorXd::Ones(1)};
  StatePriceDensity upper_certificate{Eigen::VectorXd::Ones(1)};
  bool unique = false;
  std::vector<lp::Status> statuses;

  double gap() const { return p_max - p_min; }
};

PriceBounds price_bounds(ClaimRef claim, const PricingFunctional& pi, const FiniteMarket& market);

/// The unique consistent price of a sigma(f)-measurable claim.
double extend_by_arbitrage(ClaimRef claim, const PricingFunctional& pi, const FiniteMarket& market);

namespace pricing_tol {
inline constexpr double uniqueness = 1e-8;
inline constexpr double strict_positivity = 1e-9;
inline constexpr double reconcile = 1e-9;
inline constexpr double default_delta = 1e-7;
}  // namespace pricing_tol

}  // namespace optspan
