#pragma once

// Finite-model harness for order-closed sublattices containing 1: closure
// partitions, the sequential characterization of order closedness, and the
// constructive identification Y = L0(sigma(Y)).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "optspan/market.hpp"

namespace optspan {

class SublatticeSpec {
 public:
  /// Throws MissingOne unless some generator is identically 1.
  SublatticeSpec(const FiniteMarket& market, std::vector<Claim> generators);

  /// {1, f} for the market's underlying.
  static SublatticeSpec of_underlying(const FiniteMarket& market);

  const FiniteMarket& market() const { return market_; }
  const std::vector<Claim>& generators() const { return generators_; }

 private:
  FiniteMarket market_;
  std::vector<Claim> generators_;
};

struct Counterexample {
  std::string description;
  std::size_t trial = 0;
  std::vector<Index> states;
  std::vector<double> values;
};

struct VerificationReport {
  std::string lemma;
  std::size_t trials = 0;
  bool passed = true;
  std::optional<Counterexample> counterexample;
  std::vector<std::string> witnesses;
};

/// The order-closed sublattice generated by the spec is exactly the set of
/// claims constant on these cells.
Partition sublattice_closure_partition(const SublatticeSpec& spec);

/// min(n (g - r)^+, 1) evaluated pointwise.
Claim threshold_indicator(ClaimRef g, double r, std::int64_t n);

/// Cell indicator built from the generators: for each generator, the level
/// indicator chi{g > r_prev} - chi{g > r} from saturated thresholds; then the
/// pointwise min over generators.
struct CellIndicator {
  std::size_t cell = 0;
  Claim indicator;
  std::int64_t sharpness = 1;
  std::string expression;
};

std::vector<CellIndicator> construct_cell_indicators(const SublatticeSpec& spec);

/// Membership in the closure via least squares on the constructed indicators.
bool closure_contains(const SublatticeSpec& spec, ClaimRef claim);
bool closure_contains(const std::vector<CellIndicator>& indicators, ClaimRef claim);

struct OrderClosedOptions {
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  /// Perturb one coordinate of a computed supremum in a multi-state cell.
  bool inject_fault = false;
};

VerificationReport verify_order_closed_iff_sequential(const SublatticeSpec& spec,
                                                      OrderClosedOptions options);

VerificationReport verify_green_jarrow(const SublatticeSpec& spec, std::size_t trials = 100,
                                       std::uint64_t seed = 0);

}  // namespace optspan
