#include "optspan/market.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace optspan {

bool values_equal(double a, double b) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= tol::value_equality * scale;
}

FiniteMarket::FiniteMarket(Eigen::VectorXd probs, Eigen::VectorXd underlying,
                           std::vector<std::string> labels)
    : probs_(std::move(probs)), underlying_(std::move(underlying)), labels_(std::move(labels)) {
  require(probs_.size() >= 1, ErrorCode::DimensionMismatch, "market needs at least one state");
  require(probs_.size() == underlying_.size(), ErrorCode::DimensionMismatch,
          "probs has " + std::to_string(probs_.size()) + " entries, underlying has " +
              std::to_string(underlying_.size()));
  for (Index i = 0; i < probs_.size(); ++i) {
    require(std::isfinite(probs_[i]) && probs_[i] > 0.0, ErrorCode::NonPositiveProbability,
            "probability of state " + std::to_string(i) + " is not strictly positive");
    require(std::isfinite(underlying_[i]), ErrorCode::InvalidArgument,
            "underlying payoff at state " + std::to_string(i) + " is not finite");
    require(underlying_[i] >= 0.0, ErrorCode::NegativeUnderlying,
            "underlying payoff at state " + std::to_string(i) + " is negative");
  }
  const double total = probs_.sum();
  require(std::abs(total - 1.0) <= tol::probability_sum, ErrorCode::NonPositiveProbability,
          "probabilities sum to " + std::to_string(total) + ", not 1");
  probs_ /= total;

  if (labels_.empty()) {
    labels_.reserve(static_cast<std::size_t>(probs_.size()));
    for (Index i = 0; i < probs_.size(); ++i) labels_.push_back("s" + std::to_string(i));
  }
  require(static_cast<Index>(labels_.size()) == probs_.size(), ErrorCode::DimensionMismatch,
          "labels length does not match the number of states");
}

double FiniteMarket::expectation(ClaimRef claim) const {
  require(claim.size() == size(), ErrorCode::DimensionMismatch, "claim dimension");
  return probs_.dot(claim);
}

FiniteMarket build_market(const Eigen::VectorXd& probs, const Eigen::VectorXd& underlying,
                          std::vector<std::string> labels) {
  return FiniteMarket(probs, underlying, std::move(labels));
}

Partition Partition::from_cells(std::vector<std::vector<Index>> cells, Index num_states) {
  Partition part;
  for (auto& cell : cells) {
    require(!cell.empty(), ErrorCode::InvalidArgument, "empty partition cell");
    std::sort(cell.begin(), cell.end());
  }
  std::sort(cells.begin(), cells.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  part.cell_of.assign(static_cast<std::size_t>(num_states), -1);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (Index s : cells[c]) {
      require(s >= 0 && s < num_states, ErrorCode::DimensionMismatch, "state index out of range");
      require(part.cell_of[static_cast<std::size_t>(s)] < 0, ErrorCode::InvalidArgument,
              "partition cells overlap");
      part.cell_of[static_cast<std::size_t>(s)] = static_cast<Index>(c);
    }
  }
  for (Index owner : part.cell_of) {
    require(owner >= 0, ErrorCode::InvalidArgument, "partition does not cover every state");
  }
  part.cells = std::move(cells);
  return part;
}

Partition Partition::trivial(Index num_states) {
  std::vector<Index> all(static_cast<std::size_t>(num_states));
  std::iota(all.begin(), all.end(), Index{0});
  return from_cells({std::move(all)}, num_states);
}

Partition Partition::discrete(Index num_states) {
  std::vector<std::vector<Index>> cells;
  for (Index i = 0; i < num_states; ++i) cells.push_back({i});
  return from_cells(std::move(cells), num_states);
}

std::vector<std::vector<Index>> level_groups(ClaimRef values) {
  std::vector<Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return values[a] < values[b]; });

  std::vector<std::vector<Index>> groups;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || !values_equal(values[order[k - 1]], values[order[k]])) groups.emplace_back();
    groups.back().push_back(order[k]);
  }
  for (auto& g : groups) std::sort(g.begin(), g.end());
  return groups;
}

Partition sigma_of(const FiniteMarket& market, const std::vector<Claim>& generators) {
  const Index n = market.size();
  // Each state gets the tuple of level-group ids, one per generator.
  std::vector<std::vector<std::size_t>> keys(static_cast<std::size_t>(n));
  for (const Claim& g : generators) {
    require(g.size() == n, ErrorCode::DimensionMismatch, "generator dimension");
    const auto groups = level_groups(g);
    for (std::size_t id = 0; id < groups.size(); ++id) {
      for (Index s : groups[id]) keys[static_cast<std::size_t>(s)].push_back(id);
    }
  }
  std::map<std::vector<std::size_t>, std::vector<Index>> by_key;
  for (Index s = 0; s < n; ++s) by_key[keys[static_cast<std::size_t>(s)]].push_back(s);

  std::vector<std::vector<Index>> cells;
  cells.reserve(by_key.size());
  for (auto& [key, states] : by_key) cells.push_back(std::move(states));
  return Partition::from_cells(std::move(cells), n);
}

Partition sigma_of_underlying(const FiniteMarket& market) {
  return sigma_of(market, {market.underlying()});
}

bool is_measurable(ClaimRef claim, const Partition& part) {
  require(claim.size() == part.num_states(), ErrorCode::DimensionMismatch, "claim dimension");
  for (const auto& cell : part.cells) {
    double lo = claim[cell.front()];
    double hi = lo;
    for (Index s : cell) {
      lo = std::min(lo, claim[s]);
      hi = std::max(hi, claim[s]);
    }
    if (!values_equal(lo, hi)) return false;
  }
  return true;
}

Claim conditional_expectation(ClaimRef claim, const Partition& part, const FiniteMarket& market) {
  require(claim.size() == market.size() && part.num_states() == market.size(),
          ErrorCode::DimensionMismatch, "claim, partition and market dimensions differ");
  Claim out(claim.size());
  const auto& p = market.probs();
  for (const auto& cell : part.cells) {
    double mass = 0.0;
    double weighted = 0.0;
    bool constant = true;
    for (Index s : cell) {
      mass += p[s];
      weighted += p[s] * claim[s];
      constant = constant && claim[s] == claim[cell.front()];
    }
    // Exactly constant cells are returned bit-for-bit.
    const double avg = constant ? claim[cell.front()] : weighted / mass;
    for (Index s : cell) out[s] = avg;
  }
  return out;
}

}  // namespace optspan
