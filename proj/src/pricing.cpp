#include "optspan/pricing.hpp"

#include <algorithm>
#include <cmath>

namespace optspan {

namespace {

using Program = lp::LinearProgram<double>;

double free_bound() { return Program::free(); }

double price_scale(const PricingFunctional& pi) {
  return std::max(1.0, pi.price_vector().cwiseAbs().maxCoeff());
}

// Programs over risk-neutral weights q with P' q = pi / bond and q >= floor.
Program consistent_weights_program(const Eigen::MatrixXd& payoffs, const PricingFunctional& pi,
                                   const Eigen::VectorXd& floor) {
  Program lp;
  lp.equalities = payoffs.transpose();
  lp.rhs = pi.price_vector() / pi.bond_price();
  lp.lower_bounds = floor;
  lp.objective = Eigen::VectorXd::Zero(payoffs.rows());
  return lp;
}

struct Bound {
  double value = 0.0;
  Eigen::VectorXd weights;
  lp::Status status = lp::Status::Infeasible;
};

Bound extreme_price(ClaimRef claim, const Eigen::MatrixXd& payoffs, const PricingFunctional& pi,
                    const Eigen::VectorXd& floor, lp::Sense sense) {
  Program lp = consistent_weights_program(payoffs, pi, floor);
  lp.sense = sense;
  lp.objective = pi.bond_price() * claim;
  const auto res = lp::solve(lp);
  Bound b;
  b.status = res.status;
  if (res.optimal()) {
    b.value = res.value;
    b.weights = res.primal;
  }
  return b;
}

}  // namespace

PricingFunctional::PricingFunctional(double bond_price, std::vector<CallQuote> call_curve)
    : bond_(bond_price), calls_(std::move(call_curve)) {
  require(std::isfinite(bond_), ErrorCode::InvalidArgument, "bond price must be finite");
  require(!calls_.empty(), ErrorCode::InvalidArgument, "the call curve needs at least one strike");
  for (std::size_t j = 0; j < calls_.size(); ++j) {
    require(std::isfinite(calls_[j].strike) && std::isfinite(calls_[j].price),
            ErrorCode::InvalidArgument, "call strikes and prices must be finite");
    require(j == 0 || calls_[j].strike > calls_[j - 1].strike, ErrorCode::InvalidArgument,
            "call strikes must be strictly increasing");
  }
}

PricingFunctional PricingFunctional::from_density(const FiniteMarket& market,
                                                  const StatePriceDensity& density,
                                                  double bond_price,
                                                  const std::vector<double>& strikes) {
  require(density.size() == market.size(), ErrorCode::DimensionMismatch, "density dimension");
  const double mass = pair(market.one(), density, market);
  require(mass > 0.0, ErrorCode::InvalidArgument, "density has zero mass");
  std::vector<CallQuote> calls;
  for (double k : strikes) {
    const double price =
        bond_price * pair(payoff(OptionPortfolio::call(k), market), density, market) / mass;
    calls.push_back({k, price});
  }
  return PricingFunctional(bond_price, std::move(calls));
}

std::vector<double> PricingFunctional::strikes() const {
  std::vector<double> out;
  for (const auto& c : calls_) out.push_back(c.strike);
  return out;
}

Eigen::MatrixXd PricingFunctional::payoff_matrix(const FiniteMarket& market) const {
  const Claim& f = market.underlying();
  Eigen::MatrixXd p(market.size(), static_cast<Index>(calls_.size()) + 1);
  p.col(0).setOnes();
  for (std::size_t j = 0; j < calls_.size(); ++j) {
    p.col(static_cast<Index>(j) + 1) = (f.array() - calls_[j].strike).max(0.0).matrix();
  }
  return p;
}

Eigen::VectorXd PricingFunctional::price_vector() const {
  Eigen::VectorXd v(static_cast<Index>(calls_.size()) + 1);
  v[0] = bond_;
  for (std::size_t j = 0; j < calls_.size(); ++j) v[static_cast<Index>(j) + 1] = calls_[j].price;
  return v;
}

double PricingFunctional::price(const Eigen::VectorXd& coefficients) const {
  require(coefficients.size() == static_cast<Index>(calls_.size()) + 1,
          ErrorCode::DimensionMismatch, "coefficient vector length");
  return price_vector().dot(coefficients);
}

double PricingFunctional::price(const OptionPortfolio& port) const {
  double total = port.cash() * bond_;
  for (const auto& leg : port.legs()) {
    auto it = std::find_if(calls_.begin(), calls_.end(),
                           [&](const CallQuote& q) { return q.strike == leg.strike; });
    require(it != calls_.end(), ErrorCode::InvalidArgument,
            "no quoted call at strike " + std::to_string(leg.strike));
    total += leg.weight * it->price;
  }
  return total;
}

OptionPortfolio PricingFunctional::portfolio(const Eigen::VectorXd& coefficients) const {
  require(coefficients.size() == static_cast<Index>(calls_.size()) + 1,
          ErrorCode::DimensionMismatch, "coefficient vector length");
  std::vector<CallLeg> legs;
  for (std::size_t j = 0; j < calls_.size(); ++j) {
    legs.push_back({calls_[j].strike, coefficients[static_cast<Index>(j) + 1]});
  }
  return OptionPortfolio(coefficients[0], std::move(legs));
}

void reconcile(const PricingFunctional& pi, const FiniteMarket& market) {
  const Eigen::MatrixXd p = pi.payoff_matrix(market);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(p);
  lu.setThreshold(1e-10);
  if (lu.rank() == p.cols()) return;
  const Eigen::MatrixXd kernel = lu.kernel();
  const Eigen::VectorXd prices = pi.price_vector();
  for (Index c = 0; c < kernel.cols(); ++c) {
    const Eigen::VectorXd theta = kernel.col(c);
    const double mismatch = std::abs(prices.dot(theta));
    require(mismatch <= pricing_tol::reconcile * price_scale(pi) * theta.lpNorm<1>(),
            ErrorCode::InconsistentPrices,
            "quoted prices contradict a linear dependency among the payoffs of 1 and the "
            "calls (mismatch " + std::to_string(mismatch) + ")");
  }
}

Eigen::MatrixXd zero_price_basis(const PricingFunctional& pi, const FiniteMarket& market) {
  const Eigen::MatrixXd p = pi.payoff_matrix(market);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(p);
  qr.setThreshold(1e-10);
  const Index rank = qr.rank();
  const auto perm = qr.colsPermutation().indices();

  Eigen::MatrixXd independent(p.rows(), rank);
  Eigen::RowVectorXd prices(rank);
  const Eigen::VectorXd all_prices = pi.price_vector();
  for (Index j = 0; j < rank; ++j) {
    independent.col(j) = p.col(perm[j]);
    prices[j] = all_prices[perm[j]];
  }
  if (prices.cwiseAbs().maxCoeff() == 0.0) return independent;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(prices);
  const Eigen::MatrixXd kernel = lu.kernel();
  if (rank == 1) return Eigen::MatrixXd(p.rows(), 0);
  return independent * kernel;
}

PositivityResult check_positivity(const PricingFunctional& pi, const FiniteMarket& market) {
  const Eigen::MatrixXd p = pi.payoff_matrix(market);
  const Index n = p.rows();
  const Index k = p.cols();

  // minimize pi . theta  s.t.  P theta - s = 0, sum s + t = 1, s, t >= 0.
  Program lp;
  lp.sense = lp::Sense::Minimize;
  lp.objective = Eigen::VectorXd::Zero(k + n + 1);
  lp.objective.head(k) = pi.price_vector();
  lp.equalities = Eigen::MatrixXd::Zero(n + 1, k + n + 1);
  lp.equalities.topLeftCorner(n, k) = p;
  lp.equalities.block(0, k, n, n) = -Eigen::MatrixXd::Identity(n, n);
  lp.equalities.row(n).tail(n + 1).setOnes();
  lp.rhs = Eigen::VectorXd::Zero(n + 1);
  lp.rhs[n] = 1.0;
  lp.lower_bounds = Eigen::VectorXd::Zero(k + n + 1);
  lp.lower_bounds.head(k).setConstant(free_bound());

  const auto res = lp::solve(lp);
  PositivityResult out;
  out.status = res.status;
  if (res.status == lp::Status::Unbounded) {
    out.violation = pi.portfolio(res.certificate.head(k));
    return out;
  }
  if (res.optimal() && res.value < -1e-10 * price_scale(pi)) {
    out.violation = pi.portfolio(res.primal.head(k));
    return out;
  }
  out.positive = true;

  // Farkas dual: q >= 0 with P' q = pi.
  Program dual;
  dual.equalities = p.transpose();
  dual.rhs = pi.price_vector();
  dual.lower_bounds = Eigen::VectorXd::Zero(n);
  dual.objective = Eigen::VectorXd::Zero(n);
  const auto dres = lp::solve(dual);
  if (dres.optimal()) out.density = dres.primal.cwiseQuotient(market.probs());
  return out;
}

NflResult no_free_lunch(const PricingFunctional& pi, const FiniteMarket& market) {
  reconcile(pi, market);
  const Eigen::VectorXd prices = pi.price_vector();
  require(prices.cwiseAbs().maxCoeff() > 0.0, ErrorCode::DegeneratePi,
          "the pricing functional vanishes on the whole option space");

  const Eigen::MatrixXd p = pi.payoff_matrix(market);
  const Index n = p.rows();
  const Index k = p.cols();
  NflResult out;

  // Largest zero-price nonnegative payoff, normalized to total mass <= 1:
  // maximize sum s  s.t.  P theta - s = 0, pi . theta = 0, sum s + t = 1.
  {
    Program lp;
    lp.sense = lp::Sense::Maximize;
    lp.objective = Eigen::VectorXd::Zero(k + n + 1);
    lp.objective.segment(k, n).setOnes();
    lp.equalities = Eigen::MatrixXd::Zero(n + 2, k + n + 1);
    lp.equalities.topLeftCorner(n, k) = p;
    lp.equalities.block(0, k, n, n) = -Eigen::MatrixXd::Identity(n, n);
    lp.equalities.row(n).head(k) = prices.transpose();
    lp.equalities.row(n + 1).tail(n + 1).setOnes();
    lp.rhs = Eigen::VectorXd::Zero(n + 2);
    lp.rhs[n + 1] = 1.0;
    lp.lower_bounds = Eigen::VectorXd::Zero(k + n + 1);
    lp.lower_bounds.head(k).setConstant(free_bound());

    const auto res = lp::solve(lp);
    out.certificate_status = res.status;
    if (res.optimal() && res.value > 0.5) {
      FreeLunchCertificate cert;
      const Eigen::VectorXd theta = res.primal.head(k);
      cert.portfolio = pi.portfolio(theta);
      cert.portfolio_price = prices.dot(theta);
      cert.payoff = p * theta;
      cert.element = res.primal.segment(k, n);
      cert.dominated = cert.payoff - cert.element;
      out.certificate = std::move(cert);
      return out;
    }
  }

  require(pi.bond_price() > 0.0, ErrorCode::NotPositive,
          "bond price is negative, so the functional is not positive on the option space");

  // Kreps-Yan separation: maximize eps  s.t.  P' q = pi / bond,  q - eps p - s = 0,  s >= 0.
  Program lp;
  lp.sense = lp::Sense::Maximize;
  lp.objective = Eigen::VectorXd::Zero(2 * n + 1);
  lp.objective[n] = 1.0;
  lp.equalities = Eigen::MatrixXd::Zero(k + n, 2 * n + 1);
  lp.equalities.topLeftCorner(k, n) = p.transpose();
  lp.equalities.bottomLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  lp.equalities.block(k, n, n, 1) = -market.probs();
  lp.equalities.bottomRightCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  lp.rhs = Eigen::VectorXd::Zero(k + n);
  lp.rhs.head(k) = prices / pi.bond_price();
  lp.lower_bounds = Eigen::VectorXd::Zero(2 * n + 1);
  lp.lower_bounds.head(n + 1).setConstant(free_bound());

  const auto res = lp::solve(lp);
  out.separation_status = res.status;
  if (!res.optimal()) return out;
  out.min_density = res.primal[n];
  if (out.min_density <= pricing_tol::strict_positivity) return out;

  out.no_free_lunch = true;
  out.lambda = pi.bond_price();
  out.witness = StatePriceDensity(res.primal.head(n).cwiseQuotient(market.probs()));
  return out;
}

namespace {

struct BoundsAndWitness {
  PriceBounds bounds;
  NflResult nfl;
};

BoundsAndWitness compute_bounds(ClaimRef claim, const PricingFunctional& pi,
                                const FiniteMarket& market) {
  require(claim.size() == market.size(), ErrorCode::DimensionMismatch, "claim dimension");
  BoundsAndWitness out;
  out.nfl = no_free_lunch(pi, market);
  require(out.nfl.no_free_lunch, ErrorCode::FreeLunchPresent,
          "the quoted prices admit a free lunch; no consistent price exists");

  const Eigen::MatrixXd p = pi.payoff_matrix(market);
  const Eigen::VectorXd& probs = market.probs();
  PriceBounds& b = out.bounds;
  b.delta = std::min(pricing_tol::default_delta / market.min_prob(), 0.5 * out.nfl.min_density);

  const Eigen::VectorXd closed_floor = Eigen::VectorXd::Zero(market.size());
  const Eigen::VectorXd strict_floor = b.delta * probs;
  const Bound lo = extreme_price(claim, p, pi, closed_floor, lp::Sense::Minimize);
  const Bound hi = extreme_price(claim, p, pi, closed_floor, lp::Sense::Maximize);
  const Bound lo_s = extreme_price(claim, p, pi, strict_floor, lp::Sense::Minimize);
  const Bound hi_s = extreme_price(claim, p, pi, strict_floor, lp::Sense::Maximize);
  b.statuses = {lo.status, hi.status, lo_s.status, hi_s.status};
  for (auto s : b.statuses) {
    require(s == lp::Status::Optimal, ErrorCode::InvalidArgument,
            std::string("price bound program ended ") + lp::to_string(s));
  }
  b.p_min = lo.value;
  b.p_max = hi.value;
  b.p_min_strict = lo_s.value;
  b.p_max_strict = hi_s.value;
  b.lower_certificate = StatePriceDensity(lo_s.weights.cwiseQuotient(probs));
  b.upper_certificate = StatePriceDensity(hi_s.weights.cwiseQuotient(probs));
  b.unique = b.p_max - b.p_min < pricing_tol::uniqueness * std::max(1.0, std::abs(b.p_max));
  return out;
}

}  // namespace

PriceBounds price_bounds(ClaimRef claim, const PricingFunctional& pi, const FiniteMarket& market) {
  return compute_bounds(claim, pi, market).bounds;
}

double extend_by_arbitrage(ClaimRef claim, const PricingFunctional& pi, const FiniteMarket& market) {
  require(claim.size() == market.size(), ErrorCode::DimensionMismatch, "claim dimension");
  require(is_measurable(claim, sigma_of_underlying(market)), ErrorCode::NotMeasurable,
          "the claim is not written on the underlying");
  const BoundsAndWitness bw = compute_bounds(claim, pi, market);
  require(bw.bounds.unique, ErrorCode::NotDeterminedByArbitrage,
          "consistent prices span [" + std::to_string(bw.bounds.p_min) + ", " +
              std::to_string(bw.bounds.p_max) + "]; the strikes do not separate the levels of f");
  return bw.nfl.lambda * pair(claim, *bw.nfl.witness, market);
}

}  // namespace optspan
