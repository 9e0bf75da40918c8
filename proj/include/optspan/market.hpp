#pragma once

// Finite atomic probability spaces, claims on them, and the partitions that
// stand in for sub-sigma-algebras.

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

#include "optspan/error.hpp"

namespace optspan {

using Index = Eigen::Index;

/// A state-indexed payoff vector.
using Claim = Eigen::VectorXd;
using ClaimRef = Eigen::Ref<const Eigen::VectorXd>;

namespace tol {
/// Relative width under which two payoffs count as the same level.
inline constexpr double value_equality = 1e-9;
inline constexpr double probability_sum = 1e-12;
}  // namespace tol

/// |a-b| <= 1e-9 * max(1, |a|, |b|)
bool values_equal(double a, double b);

/// Validated market: strictly positive probabilities summing to one and a
/// nonnegative underlying payoff f. Immutable after construction.
class FiniteMarket {
 public:
  FiniteMarket(Eigen::VectorXd probs, Eigen::VectorXd underlying,
               std::vector<std::string> labels = {});

  Index size() const { return probs_.size(); }
  const Eigen::VectorXd& probs() const { return probs_; }
  const Eigen::VectorXd& underlying() const { return underlying_; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// The riskless claim.
  Claim one() const { return Claim::Ones(size()); }

  double min_prob() const { return probs_.minCoeff(); }
  double expectation(ClaimRef claim) const;

 private:
  Eigen::VectorXd probs_;
  Eigen::VectorXd underlying_;
  std::vector<std::string> labels_;
};

FiniteMarket build_market(const Eigen::VectorXd& probs, const Eigen::VectorXd& underlying,
                          std::vector<std::string> labels = {});

/// Disjoint cover of the states. Cells are ordered by their smallest state
/// index and list their states in ascending order.
struct Partition {
  std::vector<std::vector<Index>> cells;
  std::vector<Index> cell_of;

  std::size_t num_cells() const { return cells.size(); }
  Index num_states() const { return static_cast<Index>(cell_of.size()); }

  static Partition from_cells(std::vector<std::vector<Index>> cells, Index num_states);
  static Partition trivial(Index num_states);
  static Partition discrete(Index num_states);

  friend bool operator==(const Partition&, const Partition&) = default;
};

/// Groups of state indices sharing a value, ordered by increasing value.
std::vector<std::vector<Index>> level_groups(ClaimRef values);

/// Joint level-set partition of the generators (the finite shadow of sigma(Y)).
Partition sigma_of(const FiniteMarket& market, const std::vector<Claim>& generators);

/// sigma(f) for the market's own underlying.
Partition sigma_of_underlying(const FiniteMarket& market);

bool is_measurable(ClaimRef claim, const Partition& part);

Claim conditional_expectation(ClaimRef claim, const Partition& part, const FiniteMarket& market);

}  // namespace optspan
