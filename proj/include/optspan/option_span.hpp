#pragma once

// The option space O_f = Span{1, (f - k)^+ : k real}: static portfolios of a
// riskless position and calls on the underlying.

#include <optional>
#include <utility>
#include <vector>

#include "optspan/market.hpp"

namespace optspan {

struct CallLeg {
  double strike = 0.0;
  double weight = 0.0;

  friend bool operator==(const CallLeg&, const CallLeg&) = default;
};

/// cash * 1 + sum_j weight_j (f - strike_j)^+.
///
/// Legs are kept in canonical form: sorted by strike, duplicate strikes merged
/// by summing weights, zero-weight legs dropped.
class OptionPortfolio {
 public:
  OptionPortfolio() = default;
  explicit OptionPortfolio(double cash, std::vector<CallLeg> legs = {});

  double cash() const { return cash_; }
  const std::vector<CallLeg>& legs() const { return legs_; }

  static OptionPortfolio call(double strike, double weight = 1.0) {
    return OptionPortfolio(0.0, {{strike, weight}});
  }
  /// The underlying itself, the strike-0 call (f >= 0).
  static OptionPortfolio underlying() { return call(0.0, 1.0); }

  friend OptionPortfolio operator+(const OptionPortfolio& a, const OptionPortfolio& b);
  friend OptionPortfolio operator-(const OptionPortfolio& a, const OptionPortfolio& b);
  friend OptionPortfolio operator*(double scale, const OptionPortfolio& a);
  friend bool operator==(const OptionPortfolio&, const OptionPortfolio&) = default;

 private:
  double cash_ = 0.0;
  std::vector<CallLeg> legs_;
};

Claim payoff(const OptionPortfolio& port, const FiniteMarket& market);
Claim payoff(const OptionPortfolio& port, ClaimRef underlying);

/// (k - f)^+ written through parity: (f - k)^+ - f + k 1.
OptionPortfolio put(double strike);

struct MembershipResult {
  bool member = false;
  /// Exact replicating portfolio when member.
  std::optional<OptionPortfolio> portfolio;
  /// Two states of one sigma(f) cell on which the claim differs, when not.
  std::optional<std::pair<Index, Index>> witness;
};

MembershipResult is_in_span(ClaimRef claim, const FiniteMarket& market);

/// Largest deviation between (s - k b)^+ and its option-space form for each
/// strike, where b = f + 1 and s = f.
std::vector<double> z_identity_residuals(const FiniteMarket& market, const std::vector<double>& strikes);
bool z_identity_check(const FiniteMarket& market, const std::vector<double>& strikes);

}  // namespace optspan
