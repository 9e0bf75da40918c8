#pragma once

// Convergence gauges on a finite market: pointwise (sup), lattice norms
// (Lp, L-infinity, Orlicz/Luxemburg) and pairings against a bank of
// state-price densities.

#include <cstdint>
#include <string>
#include <vector>

#include "optspan/market.hpp"

namespace optspan {

/// Young function generating an Orlicz space.
struct YoungFunction {
  enum class Kind { Power, Exp, XLog };  // t^p, e^t - 1, t log(1 + t)
  Kind kind = Kind::Power;
  double p = 2.0;

  double operator()(double t) const;
  std::string name() const;

  static YoungFunction power(double p);
  static YoungFunction exp_minus_one() { return {Kind::Exp, 0.0}; }
  static YoungFunction x_log1p() { return {Kind::XLog, 0.0}; }
};

struct NormSpec {
  enum class Kind { Lp, Linf, Orlicz };
  Kind kind = Kind::Lp;
  double p = 2.0;
  YoungFunction young{};

  static NormSpec lp(double p);
  static NormSpec linf() { return {Kind::Linf, 0.0, {}}; }
  static NormSpec orlicz(YoungFunction young) { return {Kind::Orlicz, 0.0, young}; }

  /// "L1", "L2", "Lp:2.5", "Linf", "Orlicz:exp", "Orlicz:pow:3", "Orlicz:xlog".
  static NormSpec parse(const std::string& text);
  std::string name() const;
};

double norm(ClaimRef claim, const FiniteMarket& market, const NormSpec& spec);

/// Luxemburg gauge inf{lambda > 0 : sum p_i phi(|x_i| / lambda) <= 1}, by
/// bisection to 1e-12 relative bracket width.
double luxemburg_norm(ClaimRef claim, const Eigen::VectorXd& probs, const YoungFunction& phi);

/// Density y with respect to P; prices x via <x, y> = sum x_i y_i p_i.
class StatePriceDensity {
 public:
  explicit StatePriceDensity(Eigen::VectorXd weights);

  const Eigen::VectorXd& weights() const { return weights_; }
  bool strict() const { return strict_; }
  Index size() const { return weights_.size(); }

  static StatePriceDensity unit(Index n) { return StatePriceDensity(Eigen::VectorXd::Ones(n)); }

 private:
  Eigen::VectorXd weights_;
  bool strict_;
};

double pair(ClaimRef claim, const StatePriceDensity& density, const FiniteMarket& market);

/// Finite family of test densities; at least one is strictly positive.
class PairingBank {
 public:
  explicit PairingBank(std::vector<StatePriceDensity> densities);

  const std::vector<StatePriceDensity>& densities() const { return densities_; }
  std::size_t size() const { return densities_.size(); }

  /// The unit density, `strict_count` random strictly positive densities and
  /// `sparse_count` random densities with zero entries, each normalized to
  /// <1, y> = 1.
  static PairingBank random(const FiniteMarket& market, std::uint64_t seed,
                            std::size_t strict_count = 8, std::size_t sparse_count = 4);
  static PairingBank unit_only(const FiniteMarket& market);

 private:
  std::vector<StatePriceDensity> densities_;
};

struct ConvergenceRow {
  std::size_t n = 0;
  double sup_error = 0.0;
  std::vector<double> norm_errors;        // one per requested NormSpec
  std::vector<double> pairing_errors;     // |<g_n - g, y>| per bank density
  std::vector<double> abs_pairing_errors; // |<|g_n - g|, y>| per bank density

  double pairing_max_error() const;
  double abs_pairing_max_error() const;
};

struct ConvergenceOptions {
  double tolerance = 1e-8;
  bool absolute_pairing = true;
};

struct ConvergenceReport {
  std::vector<std::string> norm_names;
  std::vector<bool> strict_densities;
  std::vector<ConvergenceRow> rows;
  ConvergenceOptions options;

  bool sup_converged = false;
  std::vector<bool> norm_converged;
  /// Every strictly positive bank density sees a vanishing pairing error
  /// (and a vanishing absolute pairing error when that option is on).
  bool pairing_converged = false;

  bool all_converged() const;
  bool row_pairing_converged(const ConvergenceRow& row) const;
};

ConvergenceReport convergence_report(const std::vector<Claim>& sequence, ClaimRef target,
                                     const FiniteMarket& market, const std::vector<NormSpec>& norms,
                                     const PairingBank& bank, ConvergenceOptions options = {});

}  // namespace optspan
