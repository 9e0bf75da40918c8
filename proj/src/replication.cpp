#include "optspan/replication.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace optspan {

namespace {

struct Levels {
  std::vector<std::vector<Index>> groups;  // states per distinct f-value, ascending
  std::vector<double> low;                 // smallest f in each group
  std::vector<double> high;                // largest f in each group
};

Levels levels_of(const FiniteMarket& market) {
  const Claim& f = market.underlying();
  Levels lv;
  lv.groups = level_groups(f);
  for (const auto& g : lv.groups) {
    double lo = f[g.front()];
    double hi = lo;
    for (Index s : g) {
      lo = std::min(lo, f[s]);
      hi = std::max(hi, f[s]);
    }
    lv.low.push_back(lo);
    lv.high.push_back(hi);
  }
  return lv;
}

// Target value on each f-level; throws unless the target is constant there.
std::vector<double> level_values(ClaimRef target, const FiniteMarket& market, const Levels& lv) {
  require(target.size() == market.size(), ErrorCode::DimensionMismatch, "target dimension");
  std::vector<double> h;
  h.reserve(lv.groups.size());
  for (const auto& g : lv.groups) {
    double lo = target[g.front()];
    double hi = lo;
    for (Index s : g) {
      lo = std::min(lo, target[s]);
      hi = std::max(hi, target[s]);
    }
    require(values_equal(lo, hi), ErrorCode::NotMeasurable,
            "target varies on a level set of the underlying");
    h.push_back(target[g.front()]);
  }
  return h;
}

double sup_distance(ClaimRef a, ClaimRef b) {
  return a.size() ? (a - b).cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace

OptionPortfolio indicator_ladder(double r, std::int64_t n) {
  require(n >= 1, ErrorCode::InvalidN, "indicator ladder needs n >= 1");
  require(std::isfinite(r), ErrorCode::InvalidArgument, "threshold must be finite");
  const double w = static_cast<double>(n);
  return OptionPortfolio(0.0, {{r, w}, {r + 1.0 / w, -w}});
}

std::optional<double> indicator_gap(const FiniteMarket& market, double r) {
  std::optional<double> gap;
  for (double v : market.underlying()) {
    if (v > r && (!gap || v - r < *gap)) gap = v - r;
  }
  return gap;
}

std::optional<double> level_gap(const FiniteMarket& market) {
  const Levels lv = levels_of(market);
  std::optional<double> gap;
  for (std::size_t j = 0; j + 1 < lv.groups.size(); ++j) {
    const double d = lv.low[j + 1] - lv.high[j];
    if (!gap || d < *gap) gap = d;
  }
  return gap;
}

OptionPortfolio simple_ladder(ClaimRef target, const FiniteMarket& market, int n) {
  require(n >= 1, ErrorCode::InvalidN, "ladder index must be >= 1");
  const Levels lv = levels_of(market);
  const std::vector<double> h = level_values(target, market, lv);

  const double scale = std::max(1.0, target.size() ? target.cwiseAbs().maxCoeff() : 0.0);
  for (double v : h) {
    require(v >= -1e-12 * scale, ErrorCode::NegativeTarget,
            "simple_ladder needs a nonnegative target; split it into positive and negative parts");
  }
  const double top = std::max(0.0, *std::max_element(h.begin(), h.end()));
  if (top == 0.0) return OptionPortfolio{};

  // Dyadic floor on the grid top * 2^-n. Scaling by powers of two is exact,
  // so levels are nondecreasing in n.
  std::vector<double> a;
  a.reserve(h.size());
  for (double v : h) {
    const double u = std::max(0.0, v) / top;
    a.push_back(top * std::ldexp(std::floor(std::ldexp(u, n)), -n));
  }

  std::int64_t sharpness = n;
  if (const auto gap = level_gap(market)) {
    sharpness = std::max<std::int64_t>(n, static_cast<std::int64_t>(std::ceil(2.0 / *gap)));
  }

  OptionPortfolio port(a.front());
  for (std::size_t j = 0; j + 1 < a.size(); ++j) {
    const double step = a[j + 1] - a[j];
    if (step != 0.0) port = port + step * indicator_ladder(lv.high[j], sharpness);
  }
  return port;
}

OptionPortfolio signed_ladder(ClaimRef target, const FiniteMarket& market, int n) {
  const Claim positive = target.cwiseMax(0.0);
  const Claim negative = (-target).cwiseMax(0.0);
  return simple_ladder(positive, market, n) - simple_ladder(negative, market, n);
}

std::vector<Claim> ladder_sequence(ClaimRef target, const FiniteMarket& market, int n_max) {
  require(n_max >= 1, ErrorCode::InvalidN, "n_max must be >= 1");
  const double exact = 1e-14 * std::max(1.0, target.size() ? target.cwiseAbs().maxCoeff() : 0.0);
  std::vector<Claim> out;
  for (int n = 1; n <= n_max; ++n) {
    out.push_back(payoff(signed_ladder(target, market, n), market));
    if (sup_distance(out.back(), target) <= exact) break;
  }
  return out;
}

OptionPortfolio exact_replicate(ClaimRef target, const FiniteMarket& market) {
  const Levels lv = levels_of(market);
  const std::vector<double> h = level_values(target, market, lv);
  const std::size_t m = h.size();

  std::vector<CallLeg> legs;
  double previous_slope = 0.0;
  for (std::size_t j = 0; j + 1 < m; ++j) {
    const double slope = (h[j + 1] - h[j]) / (lv.low[j + 1] - lv.low[j]);
    legs.push_back({lv.low[j], slope - previous_slope});
    previous_slope = slope;
  }
  return OptionPortfolio(h.front(), std::move(legs));
}

std::vector<CompletionEntry> completion_demo(const FiniteMarket& market,
                                             const std::vector<Claim>& targets,
                                             const std::vector<NormSpec>& norms,
                                             const PairingBank& bank, int n_max,
                                             ConvergenceOptions options) {
  const Partition part = sigma_of_underlying(market);
  std::vector<CompletionEntry> out;
  out.reserve(targets.size());
  for (const Claim& target : targets) {
    require(target.size() == market.size(), ErrorCode::DimensionMismatch, "target dimension");
    const MembershipResult membership = is_in_span(target, market);

    CompletionEntry entry;
    entry.replicable = membership.member;
    entry.witness = membership.witness;
    entry.projection = membership.member ? target : conditional_expectation(target, part, market);
    entry.portfolio = exact_replicate(entry.projection, market);
    entry.report = convergence_report(ladder_sequence(entry.projection, market, n_max), target,
                                      market, norms, bank, options);
    out.push_back(std::move(entry));
  }
  return out;
}

VerificationReport verify_mode_agreement(const FiniteMarket& market, const std::vector<NormSpec>& norms,
                                         const PairingBank& bank, std::size_t trials,
                                         std::uint64_t seed) {
  const Partition part = sigma_of_underlying(market);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-2.0, 2.0);

  VerificationReport report;
  report.lemma = "mode-agreement";
  report.trials = trials;
  std::size_t members = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Claim claim(market.size());
    if (t % 2 == 0) {
      std::vector<double> level(part.num_cells());
      for (double& v : level) v = unit(rng);
      for (Index i = 0; i < market.size(); ++i) {
        claim[i] = level[static_cast<std::size_t>(part.cell_of[static_cast<std::size_t>(i)])];
      }
    } else {
      for (Index i = 0; i < market.size(); ++i) claim[i] = unit(rng);
    }

    const auto entry = completion_demo(market, {claim}, norms, bank).front();
    const bool measurable = is_measurable(claim, part);
    const bool sup = entry.report.sup_converged;
    const bool pairing = entry.report.pairing_converged;
    members += measurable;
    if (measurable != sup || measurable != pairing) {
      Counterexample ce;
      ce.description = "verdicts disagree: measurable=" + std::to_string(measurable) +
                       " sup=" + std::to_string(sup) + " pairing=" + std::to_string(pairing);
      ce.trial = t;
      for (Index i = 0; i < market.size(); ++i) {
        ce.states.push_back(i);
        ce.values.push_back(claim[i]);
      }
      report.passed = false;
      report.counterexample = std::move(ce);
      return report;
    }
  }
  report.witnesses.push_back(std::to_string(members) + " of " + std::to_string(trials) +
                             " claims written on f; all three verdicts agree");
  return report;
}

}  // namespace optspan
