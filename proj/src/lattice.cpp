#include "optspan/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace optspan {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string cell_string(const std::vector<Index>& cell) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < cell.size(); ++i) os << (i ? "," : "") << cell[i];
  os << '}';
  return os.str();
}

Claim cell_indicator(const Partition& part, std::size_t c) {
  Claim chi = Claim::Zero(part.num_states());
  for (Index s : part.cells[c]) chi[s] = 1.0;
  return chi;
}

// Smallest n with min(n (g - r)^+, 1) exactly equal to the indicator of {g > r}.
std::int64_t saturation_index(ClaimRef g, double r) {
  double gap = 0.0;
  for (double v : g) {
    if (v > r && (gap == 0.0 || v - r < gap)) gap = v - r;
  }
  if (gap == 0.0) return 1;
  auto n = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(1.0 / gap)));
  while (static_cast<double>(n) * gap < 1.0) ++n;
  return n;
}

struct GeneratorLevels {
  std::vector<std::vector<Index>> groups;
  std::vector<double> thresholds;  // largest value in each group
  std::vector<std::size_t> group_of;
};

GeneratorLevels levels(ClaimRef g) {
  GeneratorLevels lv;
  lv.groups = level_groups(g);
  lv.group_of.resize(static_cast<std::size_t>(g.size()));
  for (std::size_t j = 0; j < lv.groups.size(); ++j) {
    double hi = g[lv.groups[j].front()];
    for (Index s : lv.groups[j]) {
      hi = std::max(hi, g[s]);
      lv.group_of[static_cast<std::size_t>(s)] = j;
    }
    lv.thresholds.push_back(hi);
  }
  return lv;
}

Claim random_cell_constant(const Partition& part, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Claim out(part.num_states());
  for (const auto& cell : part.cells) {
    const double v = dist(rng);
    for (Index s : cell) out[s] = v;
  }
  return out;
}

bool nondecreasing(ClaimRef before, ClaimRef after) {
  return (after.array() >= before.array()).all();
}

// First cell on which `claim` is not constant, if any.
std::optional<std::size_t> violated_cell(ClaimRef claim, const Partition& part) {
  for (std::size_t c = 0; c < part.cells.size(); ++c) {
    const auto& cell = part.cells[c];
    for (Index s : cell) {
      if (!values_equal(claim[s], claim[cell.front()])) return c;
    }
  }
  return std::nullopt;
}

Counterexample make_counterexample(std::string description, std::size_t trial,
                                   const std::vector<Index>& states, ClaimRef claim) {
  Counterexample ce;
  ce.description = std::move(description);
  ce.trial = trial;
  ce.states = states;
  for (Index s : states) ce.values.push_back(claim[s]);
  return ce;
}

}  // namespace

SublatticeSpec::SublatticeSpec(const FiniteMarket& market, std::vector<Claim> generators)
    : market_(market), generators_(std::move(generators)) {
  bool has_one = false;
  for (const Claim& g : generators_) {
    require(g.size() == market_.size(), ErrorCode::DimensionMismatch, "generator dimension");
    has_one = has_one || (g.array() == 1.0).all();
  }
  require(has_one, ErrorCode::MissingOne, "the constant claim 1 must be among the generators");
}

SublatticeSpec SublatticeSpec::of_underlying(const FiniteMarket& market) {
  return SublatticeSpec(market, {market.one(), market.underlying()});
}

Partition sublattice_closure_partition(const SublatticeSpec& spec) {
  return sigma_of(spec.market(), spec.generators());
}

Claim threshold_indicator(ClaimRef g, double r, std::int64_t n) {
  const double scale = static_cast<double>(n);
  return (scale * (g.array() - r).max(0.0)).min(1.0).matrix();
}

std::vector<CellIndicator> construct_cell_indicators(const SublatticeSpec& spec) {
  const Partition part = sublattice_closure_partition(spec);
  const Index n_states = spec.market().size();

  std::vector<GeneratorLevels> lv;
  for (const Claim& g : spec.generators()) lv.push_back(levels(g));

  std::vector<CellIndicator> out;
  for (std::size_t c = 0; c < part.cells.size(); ++c) {
    const Index rep = part.cells[c].front();
    CellIndicator ci;
    ci.cell = c;
    ci.indicator = Claim::Ones(n_states);
    std::ostringstream expr;
    expr << "cell " << c << ' ' << cell_string(part.cells[c]) << ": 1";

    for (std::size_t k = 0; k < spec.generators().size(); ++k) {
      const Claim& g = spec.generators()[k];
      const GeneratorLevels& L = lv[k];
      if (L.groups.size() < 2) continue;  // constant generators carry no information
      const std::size_t j = L.group_of[static_cast<std::size_t>(rep)];

      // chi{g = level j} = chi{g > r_{j-1}} - chi{g > r_j}, with chi{g > r_{-1}} = 1.
      Claim upper = Claim::Ones(n_states);
      Claim lower = Claim::Zero(n_states);
      expr << " ^ [";
      if (j > 0) {
        const double r = L.thresholds[j - 1];
        const std::int64_t n = saturation_index(g, r);
        ci.sharpness = std::max(ci.sharpness, n);
        upper = threshold_indicator(g, r, n);
        expr << "(" << n << "(g" << k << "-" << fmt(r) << ")^+ ^ 1)";
      } else {
        expr << "1";
      }
      if (j + 1 < L.groups.size()) {
        const double r = L.thresholds[j];
        const std::int64_t n = saturation_index(g, r);
        ci.sharpness = std::max(ci.sharpness, n);
        lower = threshold_indicator(g, r, n);
        expr << " - (" << n << "(g" << k << "-" << fmt(r) << ")^+ ^ 1)";
      }
      expr << "]";
      ci.indicator = ci.indicator.cwiseMin(upper - lower);
    }
    ci.expression = expr.str();
    out.push_back(std::move(ci));
  }
  return out;
}

bool closure_contains(const std::vector<CellIndicator>& indicators, ClaimRef claim) {
  require(!indicators.empty(), ErrorCode::InvalidArgument, "no cell indicators");
  Eigen::MatrixXd basis(claim.size(), static_cast<Index>(indicators.size()));
  for (std::size_t c = 0; c < indicators.size(); ++c) {
    require(indicators[c].indicator.size() == claim.size(), ErrorCode::DimensionMismatch,
            "claim dimension");
    basis.col(static_cast<Index>(c)) = indicators[c].indicator;
  }
  const Eigen::VectorXd coeffs = basis.colPivHouseholderQr().solve(claim);
  const double residual = (basis * coeffs - claim).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, claim.cwiseAbs().maxCoeff());
  return residual <= tol::value_equality * scale;
}

bool closure_contains(const SublatticeSpec& spec, ClaimRef claim) {
  return closure_contains(construct_cell_indicators(spec), claim);
}

VerificationReport verify_order_closed_iff_sequential(const SublatticeSpec& spec,
                                                      OrderClosedOptions options) {
  VerificationReport report;
  report.lemma = "o-closed";
  report.trials = options.trials;
  const Partition part = sublattice_closure_partition(spec);
  const Index n_states = spec.market().size();
  std::mt19937_64 rng(options.seed);

  // Mutations go to the largest cell so that they break cell-constancy when possible.
  std::size_t largest = 0;
  for (std::size_t c = 0; c < part.cells.size(); ++c) {
    if (part.cells[c].size() > part.cells[largest].size()) largest = c;
  }
  const Index mutated_state = part.cells[largest].back();

  auto fail = [&](Counterexample ce) {
    report.passed = false;
    report.counterexample = std::move(ce);
    return report;
  };
  auto check_in_closure = [&](ClaimRef claim, std::size_t trial, const std::string& what)
      -> std::optional<Counterexample> {
    if (auto c = violated_cell(claim, part)) {
      return make_counterexample(what + " is not constant on cell " + std::to_string(*c), trial,
                                 part.cells[*c], claim);
    }
    return std::nullopt;
  };

  for (std::size_t t = 0; t < options.trials; ++t) {
    // Running maxima of closure elements: increasing, eventually constant.
    {
      Claim z = random_cell_constant(part, rng, -5.0, 5.0);
      for (int k = 1; k < 8; ++k) {
        const Claim next = z.cwiseMax(random_cell_constant(part, rng, -5.0, 5.0));
        if (!nondecreasing(z, next)) {
          return fail(make_counterexample("running maximum decreased", t, {}, next));
        }
        z = next;
        if (auto ce = check_in_closure(z, t, "running maximum")) return fail(*ce);
      }
    }

    // Geometric increasing sequence x - d 2^-k with known supremum x.
    {
      const Claim x = random_cell_constant(part, rng, -5.0, 5.0);
      const Claim d = random_cell_constant(part, rng, 0.1, 2.0);
      Claim sup = Claim::Constant(n_states, -std::numeric_limits<double>::infinity());
      Claim previous = sup;
      for (int k = 1; k <= 80; ++k) {
        const Claim y = x - std::ldexp(1.0, -k) * d;
        if (!nondecreasing(previous, y)) {
          return fail(make_counterexample("sequence is not increasing", t, {}, y));
        }
        sup = sup.cwiseMax(y);
        previous = y;
      }
      if (options.inject_fault && t == 0) sup[mutated_state] += 0.5;

      if (auto ce = check_in_closure(sup, t, "supremum of an increasing sequence")) return fail(*ce);
      for (Index s = 0; s < n_states; ++s) {
        if (!values_equal(sup[s], x[s])) {
          const auto& cell = part.cells[static_cast<std::size_t>(part.cell_of[static_cast<std::size_t>(s)])];
          return fail(make_counterexample("supremum differs from the limit at state " +
                                              std::to_string(s),
                                          t, cell, sup));
        }
      }
    }

    // Indicator ladders n (g - r)^+ ^ 1 increasing to chi{g > r}.
    {
      std::vector<std::size_t> informative;
      for (std::size_t k = 0; k < spec.generators().size(); ++k) {
        if (level_groups(spec.generators()[k]).size() > 1) informative.push_back(k);
      }
      if (!informative.empty()) {
        const Claim& g = spec.generators()[informative[rng() % informative.size()]];
        const GeneratorLevels L = levels(g);
        const double r = L.thresholds[rng() % (L.thresholds.size() - 1)];
        const std::int64_t n_sat = saturation_index(g, r);
        Claim previous = Claim::Zero(n_states);
        for (std::int64_t n = 1;; n = n < 64 ? n + 1 : std::min(n_sat, 2 * n)) {
          const Claim y = threshold_indicator(g, r, n);
          if (!nondecreasing(previous, y)) {
            return fail(make_counterexample("indicator ladder decreased", t, {}, y));
          }
          if (auto ce = check_in_closure(y, t, "indicator ladder term")) return fail(*ce);
          previous = y;
          if (n >= n_sat) break;
        }
        const Claim chi = (g.array() > r).cast<double>().matrix();
        if (previous != chi) {
          return fail(make_counterexample("saturated ladder differs from the indicator", t, {},
                                          previous));
        }
      }
    }

    // Order-convergent oscillating sequence; limit recovered as limsup/liminf.
    {
      const Claim x = random_cell_constant(part, rng, -5.0, 5.0);
      std::vector<Claim> ys;
      for (int k = 1; k <= 60; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        ys.push_back(x + sign * std::ldexp(1.0, -k) * random_cell_constant(part, rng, -1.0, 1.0));
      }
      Claim limsup = Claim::Constant(n_states, std::numeric_limits<double>::infinity());
      Claim liminf = -limsup;
      for (std::size_t n = 0; n < ys.size(); ++n) {
        Claim tail_max = ys[n];
        Claim tail_min = ys[n];
        for (std::size_t m = n; m < ys.size(); ++m) {
          tail_max = tail_max.cwiseMax(ys[m]);
          tail_min = tail_min.cwiseMin(ys[m]);
        }
        limsup = limsup.cwiseMin(tail_max);
        liminf = liminf.cwiseMax(tail_min);
      }
      if (auto ce = check_in_closure(limsup, t, "order limit")) return fail(*ce);
      if (auto ce = check_in_closure(liminf, t, "order limit")) return fail(*ce);
      if ((limsup - liminf).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff())) {
        return fail(make_counterexample("limsup and liminf disagree", t, {}, limsup - liminf));
      }
    }
  }

  report.witnesses.push_back("closure partition has " + std::to_string(part.num_cells()) +
                             " cells over " + std::to_string(n_states) + " states");
  report.witnesses.push_back(
      "per trial: running maxima, geometric increasing sequence, saturating indicator ladder, "
      "oscillating order-convergent sequence");
  return report;
}

VerificationReport verify_green_jarrow(const SublatticeSpec& spec, std::size_t trials,
                                       std::uint64_t seed) {
  VerificationReport report;
  report.lemma = "green-jarrow";
  report.trials = trials;
  const Partition part = sublattice_closure_partition(spec);
  const Index n_states = spec.market().size();

  auto fail = [&](Counterexample ce) {
    report.passed = false;
    report.counterexample = std::move(ce);
    return report;
  };

  for (std::size_t k = 0; k < spec.generators().size(); ++k) {
    if (auto c = violated_cell(spec.generators()[k], part)) {
      return fail(make_counterexample("generator " + std::to_string(k) + " is not measurable", 0,
                                      part.cells[*c], spec.generators()[k]));
    }
  }

  // Every cell indicator is reached by lattice expressions in the generators.
  const std::vector<CellIndicator> indicators = construct_cell_indicators(spec);
  Claim cover = Claim::Zero(n_states);
  for (const auto& ci : indicators) {
    if (ci.indicator != cell_indicator(part, ci.cell)) {
      return fail(make_counterexample("constructed indicator differs from chi of cell " +
                                          std::to_string(ci.cell),
                                      0, part.cells[ci.cell], ci.indicator));
    }
    cover += ci.indicator;
    report.witnesses.push_back(ci.expression + "  (n = " + std::to_string(ci.sharpness) + ")");
  }
  if (cover != Claim::Ones(n_states)) {
    return fail(make_counterexample("cell indicators do not sum to 1", 0, {}, cover));
  }

  // Claims constant on cells are combinations of the indicators; others are not reached.
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> pick(0, n_states - 1);
  for (std::size_t t = 0; t < trials; ++t) {
    const Claim claim = random_cell_constant(part, rng, -5.0, 5.0);
    Claim rebuilt = Claim::Zero(n_states);
    for (const auto& ci : indicators) rebuilt += claim[part.cells[ci.cell].front()] * ci.indicator;
    if ((rebuilt - claim).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, claim.cwiseAbs().maxCoeff())) {
      return fail(make_counterexample("simple combination does not rebuild a measurable claim", t,
                                      {}, rebuilt));
    }
    if (!closure_contains(indicators, claim)) {
      return fail(make_counterexample("measurable claim not reached by the closure", t, {}, claim));
    }

    Claim bumped = claim;
    const Index s = pick(rng);
    bumped[s] += 1.0;
    const bool measurable = is_measurable(bumped, part);
    if (closure_contains(indicators, bumped) != measurable) {
      return fail(make_counterexample("closure membership disagrees with measurability", t, {s},
                                      bumped));
    }
  }
  return report;
}

}  // namespace optspan
