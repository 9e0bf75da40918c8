// Acceptance suite: one pass/fail line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "optspan/lattice.hpp"
#include "optspan/pricing.hpp"
#include "optspan/replication.hpp"
#include "support/generators.hpp"

using namespace optspan;
using optspan::testing::Gen;

namespace {

std::uint64_t g_seed_offset = 0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first failure with its trial number; later failures only count.
class Tally {
 public:
  void check(bool ok, int trial, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (first_.empty()) first_ = "trial " + std::to_string(trial) + ": " + what;
  }
  Outcome done(const std::string& summary) const {
    if (failures_ == 0) return {true, summary + " (" + std::to_string(checks_) + " checks)"};
    return {false, std::to_string(failures_) + "/" + std::to_string(checks_) + " checks failed; first " + first_};
  }

 private:
  long checks_ = 0;
  long failures_ = 0;
  std::string first_;
};

std::string num(double x) {
  std::ostringstream s;
  s.precision(3);
  s << x;
  return s.str();
}

double sup_err(const Claim& a, const Claim& b) { return (a - b).cwiseAbs().maxCoeff(); }

std::vector<double> level_strikes(const FiniteMarket& m) {
  std::vector<double> k;
  for (const auto& g : level_groups(m.underlying())) k.push_back(m.underlying()[g.front()]);
  k.pop_back();
  if (k.empty()) k.push_back(m.underlying().maxCoeff());
  return k;
}

Outcome exact_spanning() {
  Gen gen(1001 + g_seed_offset);
  Tally t;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const FiniteMarket m = gen.market(64);
    for (int k = 0; k < 5; ++k) {
      const Claim g = gen.measurable_claim(m, -10, 10);
      const double err = sup_err(payoff(exact_replicate(g, m), m), g);
      worst = std::max(worst, err);
      t.check(err <= 1e-10, trial, "replication error " + num(err));
    }
  }
  return t.done("max error " + num(worst));
}

Outcome ladder_saturation() {
  Gen gen(1002 + g_seed_offset);
  Tally t;
  for (int trial = 0; trial < 100; ++trial) {
    const FiniteMarket m = gen.market(40);
    const Claim& f = m.underlying();
    const double r = gen.uniform(-0.5, f.maxCoeff() + 0.5);
    const auto gap = indicator_gap(m, r);
    const Claim chi = (f.array() > r).cast<double>().matrix();
    const std::int64_t n_sat = gap ? static_cast<std::int64_t>(std::floor(1.0 / *gap)) + 1 : 1;
    Claim prev = Claim::Zero(m.size());
    for (std::int64_t n = 1; n <= n_sat + 25; ++n) {
      const Claim cur = payoff(indicator_ladder(r, n), m);
      // Nondecreasing up to the rounding of n (f - r) - n (f - r - 1/n).
      t.check((cur - prev).minCoeff() >= -1e-12, trial, "ladder decreased at n=" + std::to_string(n));
      const Claim spread = (double(n) * (f.array() - r).max(0.0)).min(1.0).matrix();
      t.check(sup_err(cur, spread) <= 1e-12, trial, "call-spread/min identity at n=" + std::to_string(n));
      if (!gap || double(n) * *gap > 1.0) {
        t.check(sup_err(cur, chi) <= 1e-12, trial, "not saturated at n=" + std::to_string(n));
      }
      prev = cur;
    }
  }
  return t.done("monotone, saturated past 1/gap");
}

Outcome equivalence_triad() {
  Gen gen(1003 + g_seed_offset);
  Tally t;
  const std::vector<NormSpec> norms = {NormSpec::lp(1), NormSpec::lp(2), NormSpec::linf()};
  int members = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const FiniteMarket m = gen.market(16);
    const PairingBank bank = PairingBank::random(m, static_cast<std::uint64_t>(trial));
    const Claim g = trial % 2 ? gen.claim(m.size()) : gen.measurable_claim(m);
    const auto entry = completion_demo(m, {g}, norms, bank).front();
    const bool measurable = is_measurable(g, sigma_of_underlying(m));
    members += measurable;
    t.check(measurable == entry.report.sup_converged && measurable == entry.report.pairing_converged, trial,
            "measurable=" + std::to_string(measurable) + " sup=" + std::to_string(entry.report.sup_converged) +
                " pairing=" + std::to_string(entry.report.pairing_converged));
  }
  return t.done(std::to_string(members) + " measurable, " + std::to_string(200 - members) + " not");
}

Outcome completion() {
  Gen gen(1004 + g_seed_offset);
  Tally t;
  for (int trial = 0; trial < 50; ++trial) {
    const FiniteMarket m = gen.market(32, false);
    const Claim g = gen.claim(m.size());
    const auto res = is_in_span(g, m);
    t.check(res.member && res.portfolio && sup_err(payoff(*res.portfolio, m), g) <= 1e-10, trial,
            "injective market claim not replicated");
  }
  for (int trial = 0; trial < 50; ++trial) {
    const FiniteMarket m = gen.market_with_tie(32);
    const Partition part = sigma_of_underlying(m);
    Claim g = gen.measurable_claim(m);
    for (const auto& cell : part.cells) {
      if (cell.size() >= 2) {
        g[cell.back()] += gen.uniform(0.5, 2.0);
        break;
      }
    }
    const auto res = is_in_span(g, m);
    bool valid = !res.member && res.witness.has_value();
    if (valid) {
      const auto [i, j] = *res.witness;
      valid = values_equal(m.underlying()[i], m.underlying()[j]) && !values_equal(g[i], g[j]);
    }
    t.check(valid, trial, "tied-cell claim not rejected with a valid two-state certificate");
  }
  return t.done("50 injective replicated, 50 tied rejected");
}

Outcome green_jarrow() {
  Gen gen(1005 + g_seed_offset);
  Tally t;
  long grid_claims = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = gen.integer(1, 10);
    const FiniteMarket m(gen.probs(n), gen.tied_underlying(n, 4));
    std::vector<Claim> gens = {m.one(), m.underlying()};
    const int extra = gen.integer(0, 2);
    for (int k = 0; k < extra; ++k) gens.push_back(gen.tied_underlying(n, 3));
    const SublatticeSpec spec(m, gens);
    const Partition part = sublattice_closure_partition(spec);
    const auto ind = construct_cell_indicators(spec);
    t.check(ind.size() == part.num_cells(), trial, "indicator count");
    for (const auto& ci : ind) {
      Claim chi = Claim::Zero(n);
      for (Index s : part.cells[ci.cell]) chi[s] = 1.0;
      t.check(ci.indicator == chi, trial, "indicator differs from the cell characteristic function");
    }
    if (n <= 6) {
      for (unsigned mask = 0; mask < (1u << n); ++mask) {
        Claim g(n);
        for (Index s = 0; s < n; ++s) g[s] = (mask >> s) & 1u ? 1.0 : -1.0;
        t.check(closure_contains(ind, g) == is_measurable(g, part), trial, "membership disagrees on a grid claim");
        ++grid_claims;
      }
    }
  }
  return t.done(std::to_string(grid_claims) + " grid claims");
}

Outcome kreps_yan() {
  Gen gen(1006 + g_seed_offset);
  Tally t;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const FiniteMarket m = gen.market(16);
    const StatePriceDensity y = gen.strict_density(m);
    const double bond = gen.uniform(0.5, 1.2);
    std::vector<double> strikes = level_strikes(m);
    if (gen.coin()) {
      // Off-level strikes, including one past the top of f.
      strikes.clear();
      const int count = gen.integer(1, 5);
      for (int k = 0; k < count; ++k) strikes.push_back(gen.uniform(-0.5, m.underlying().maxCoeff() + 1.0));
      std::sort(strikes.begin(), strikes.end());
      strikes.erase(std::unique(strikes.begin(), strikes.end()), strikes.end());
    }
    const auto pi = PricingFunctional::from_density(m, y, bond, strikes);
    const NflResult res = no_free_lunch(pi, m);
    if (!res.no_free_lunch || !res.witness) {
      t.check(false, trial, "no NFL witness for consistent prices");
      continue;
    }
    double err = std::abs(res.lambda * pair(m.one(), *res.witness, m) - bond);
    for (const auto& c : pi.call_curve()) {
      err = std::max(err, std::abs(res.lambda * pair((m.underlying().array() - c.strike).max(0.0).matrix(),
                                                     *res.witness, m) - c.price));
    }
    worst = std::max(worst, err);
    t.check(err < 1e-8, trial, "witness repricing error " + num(err));
    t.check(res.witness->weights().minCoeff() > 0.0, trial, "witness not strictly positive");
    for (int k = 0; k < 3; ++k) {
      const Claim g = gen.claim(m.size());
      const PriceBounds b = price_bounds(g, pi, m);
      const double truth = bond * pair(g, y, m);
      t.check(truth >= b.p_min - 1e-8 && truth <= b.p_max + 1e-8, trial, "true price outside bounds");
    }
  }
  return t.done("max repricing error " + num(worst));
}

Outcome free_lunch_detection() {
  Gen gen(1007 + g_seed_offset);
  Tally t;
  int convexity = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = gen.integer(4, 14);
    const FiniteMarket m(gen.probs(n), gen.injective_underlying(n));
    const auto strikes = level_strikes(m);
    const auto base = PricingFunctional::from_density(m, gen.strict_density(m), 1.0, strikes);
    auto calls = base.call_curve();
    const double bump = gen.uniform(0.01, 0.5);
    if (trial % 2 == 0 && calls.size() >= 3) {
      // Lift an interior call above the chord of its neighbours.
      const std::size_t j = static_cast<std::size_t>(gen.integer(1, int(calls.size()) - 2));
      const double w = (calls[j + 1].strike - calls[j].strike) / (calls[j + 1].strike - calls[j - 1].strike);
      calls[j].price = w * calls[j - 1].price + (1 - w) * calls[j + 1].price + bump;
      ++convexity;
    } else {
      // Price a higher strike above a lower one.
      const std::size_t j = static_cast<std::size_t>(gen.integer(1, int(calls.size()) - 1));
      calls[j].price = calls[j - 1].price + bump;
    }
    const PricingFunctional pi(1.0, calls);
    const NflResult res = no_free_lunch(pi, m);
    if (res.no_free_lunch || !res.certificate) {
      t.check(false, trial, "violation not detected");
      continue;
    }
    const auto& c = *res.certificate;
    const double scale = std::max(1.0, pi.price_vector().cwiseAbs().maxCoeff());
    t.check(c.element.minCoeff() >= -1e-12, trial, "element has a negative entry");
    t.check(c.element.maxCoeff() > 1e-9, trial, "element is zero");
    t.check(std::abs(pi.price(c.portfolio)) <= 1e-9 * scale, trial, "portfolio price is not zero");
    t.check(sup_err(payoff(c.portfolio, m), c.payoff) <= 1e-9, trial, "payoff mismatch");
    t.check(c.dominated.minCoeff() >= -1e-9, trial, "dominated part is not nonnegative");
    t.check(sup_err(c.payoff - c.dominated, c.element) <= 1e-12, trial, "element != payoff - dominated");
  }
  return t.done(std::to_string(convexity) + " convexity, " + std::to_string(100 - convexity) + " monotonicity");
}

Outcome uniqueness_dichotomy() {
  Gen gen(1008 + g_seed_offset);
  Tally t;
  double worst_unique = 0.0;
  double smallest_gap = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    const FiniteMarket m = gen.market(16);
    const auto pi = PricingFunctional::from_density(m, gen.strict_density(m), gen.uniform(0.5, 1.2), level_strikes(m));
    for (int k = 0; k < 3; ++k) {
      const PriceBounds b = price_bounds(gen.measurable_claim(m), pi, m);
      worst_unique = std::max(worst_unique, b.gap());
      t.check(b.gap() < 1e-8, trial, "measurable claim gap " + num(b.gap()));
    }
  }
  for (int trial = 0; trial < 100; ++trial) {
    const FiniteMarket m = gen.market_with_tie(16);
    const auto pi = PricingFunctional::from_density(m, gen.strict_density(m), gen.uniform(0.5, 1.2), level_strikes(m));
    const Partition part = sigma_of_underlying(m);
    Claim g = gen.measurable_claim(m);
    for (const auto& cell : part.cells) {
      if (cell.size() >= 2) {
        g[cell.front()] += gen.uniform(0.5, 2.0);
        break;
      }
    }
    const PriceBounds b = price_bounds(g, pi, m);
    smallest_gap = std::min(smallest_gap, b.gap());
    t.check(b.gap() > 1e-6 && !b.unique, trial, "tied-cell claim gap " + num(b.gap()));
  }
  const FiniteMarket demo(Eigen::VectorXd::Constant(3, 1.0 / 3), Eigen::Vector3d(0, 1, 2));
  const auto pi = PricingFunctional::from_density(demo, StatePriceDensity::unit(3), 1.0, {0, 1});
  const double sq = extend_by_arbitrage(Eigen::Vector3d(0, 1, 4), pi, demo);
  t.check(std::abs(sq - 5.0 / 3) <= 1e-9, 0, "f^2 priced at " + num(sq));
  return t.done("max unique gap " + num(worst_unique) + ", min tied gap " + num(smallest_gap) +
                ", f^2 -> " + num(sq));
}

// Visits every q on the simplex grid {q_i = a_i / steps, sum a_i = steps}.
void for_each_grid_point(Index n, int steps, const std::function<void(const Eigen::VectorXd&)>& fn) {
  std::vector<int> a(static_cast<std::size_t>(n), 0);
  std::function<void(Index, int)> rec = [&](Index i, int left) {
    if (i == n - 1) {
      a[static_cast<std::size_t>(i)] = left;
      Eigen::VectorXd q(n);
      for (Index k = 0; k < n; ++k) q[k] = double(a[static_cast<std::size_t>(k)]) / steps;
      fn(q);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      a[static_cast<std::size_t>(i)] = v;
      rec(i + 1, left - v);
    }
  };
  rec(0, steps);
}

Outcome lp_oracle() {
  Gen gen(1009 + g_seed_offset);
  Tally t;
  const int steps = 20;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = gen.integer(2, 6);
    Eigen::VectorXd f(n);
    for (Index i = 0; i < n; ++i) f[i] = gen.integer(0, 3);
    const FiniteMarket m(gen.probs(n), f);

    // A strictly positive grid point generates the prices.
    std::vector<int> a(static_cast<std::size_t>(n), 1);
    for (int left = steps - int(n); left > 0; --left) ++a[static_cast<std::size_t>(gen.integer(0, int(n) - 1))];
    Eigen::VectorXd qstar(n);
    for (Index i = 0; i < n; ++i) qstar[i] = double(a[static_cast<std::size_t>(i)]) / steps;
    const double bond = gen.uniform(0.5, 1.2);
    const auto pi = PricingFunctional::from_density(m, StatePriceDensity(qstar.cwiseQuotient(m.probs())), bond,
                                                    level_strikes(m));
    const Eigen::MatrixXd p = pi.payoff_matrix(m);
    const Eigen::VectorXd target = pi.price_vector() / bond;
    const Claim g = gen.claim(n);

    double grid_min = std::numeric_limits<double>::infinity();
    double grid_max = -grid_min;
    for_each_grid_point(n, steps, [&](const Eigen::VectorXd& q) {
      if ((p.transpose() * q - target).cwiseAbs().maxCoeff() > 1e-6) return;
      grid_min = std::min(grid_min, bond * g.dot(q));
      grid_max = std::max(grid_max, bond * g.dot(q));
    });
    const PriceBounds b = price_bounds(g, pi, m);
    const double resolution = bond * (g.maxCoeff() - g.minCoeff()) / steps;
    t.check(b.p_min <= grid_min + 1e-9 && b.p_max >= grid_max - 1e-9, trial, "bounds do not bracket the grid");
    t.check(grid_min - b.p_min <= resolution && b.p_max - grid_max <= resolution, trial,
            "bounds farther than one grid step from the grid extrema");
    worst = std::max({worst, grid_min - b.p_min, b.p_max - grid_max});
  }
  return t.done("max distance to grid extrema " + num(worst));
}

Outcome norm_module() {
  Gen gen(1010 + g_seed_offset);
  Tally t;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const FiniteMarket m = gen.market(32);
    const Claim x = gen.claim(m.size());
    for (double p : {1.0, 2.0, 3.0}) {
      double s = 0.0;
      for (Index i = 0; i < x.size(); ++i) s += m.probs()[i] * std::pow(std::abs(x[i]), p);
      const double direct = std::pow(s, 1.0 / p);
      const double lux = luxemburg_norm(x, m.probs(), YoungFunction::power(p));
      const double err = std::abs(lux - direct) / std::max(1.0, direct);
      worst = std::max(worst, err);
      t.check(err <= 1e-9, trial, "Luxemburg vs L" + num(p) + " error " + num(err));
    }
  }
  const std::vector<NormSpec> specs = {NormSpec::lp(1), NormSpec::lp(2), NormSpec::lp(3), NormSpec::linf(),
                                       NormSpec::orlicz(YoungFunction::exp_minus_one()),
                                       NormSpec::orlicz(YoungFunction::x_log1p())};
  for (int trial = 0; trial < 200; ++trial) {
    const FiniteMarket m = gen.market(32);
    const Claim z = gen.claim(m.size());
    Claim x(m.size());
    for (Index i = 0; i < m.size(); ++i) x[i] = gen.uniform(-1, 1) * std::abs(z[i]);
    for (const auto& s : specs) {
      t.check(norm(x, m, s) <= norm(z, m, s) * (1 + 1e-11), trial, s.name() + " not monotone");
    }
  }
  return t.done("max Luxemburg/Lp relative error " + num(worst));
}

}  // namespace

// Optional argument: offset added to every criterion's seed (default 0).
int main(int argc, char** argv) {
  if (argc > 1) g_seed_offset = std::stoull(argv[1]);
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"exact spanning", exact_spanning},
      {"indicator ladder saturation", ladder_saturation},
      {"equivalence triad", equivalence_triad},
      {"completion", completion},
      {"green-jarrow harness", green_jarrow},
      {"kreps-yan separation", kreps_yan},
      {"free-lunch detection", free_lunch_detection},
      {"uniqueness dichotomy", uniqueness_dichotomy},
      {"lp oracle", lp_oracle},
      {"norm module", norm_module},
  };

  int failed = 0;
  int index = 0;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& c : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !out.pass;
    std::printf("[%s] %2d %-28s %6.2fs  %s\n", out.pass ? "PASS" : "FAIL", index, c.name, secs, out.detail.c_str());
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d/%d criteria passed in %.2fs (seed offset %llu)\n", index - failed, index, total,
              static_cast<unsigned long long>(g_seed_offset));
  return failed == 0 ? 0 : 1;
}
