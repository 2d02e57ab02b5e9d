#include "rrc/reward_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rrc/error.hpp"

namespace rrc {

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Generalized golden ratio: the unique positive root of x^(k+1) = x + 1.
double harmonious_number(std::size_t k) {
  double x = 2.0;
  for (int it = 0; it < 64; ++it) x = std::pow(1.0 + x, 1.0 / static_cast<double>(k + 1));
  return x;
}

}  // namespace

RewardWeights::RewardWeights(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorCode::invalid_argument, "reward weights must be non-empty");
  if (std::abs(norm(values_) - 1.0) > 1e-9) {
    throw Error(ErrorCode::invalid_argument, "reward weights must have unit norm");
  }
}

RewardWeights RewardWeights::normalized(std::vector<double> values) {
  const double n = norm(values);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::invalid_argument, "cannot normalize a zero or non-finite vector");
  }
  for (double& x : values) x /= n;
  return RewardWeights(std::move(values));
}

HypothesisGrid::HypothesisGrid(std::vector<RewardWeights> thetas) : thetas_(std::move(thetas)) {
  if (thetas_.empty()) return;
  dim_ = thetas_.front().dim();
  for (const auto& t : thetas_) {
    if (t.dim() != dim_) throw Error(ErrorCode::dimension_mismatch, "hypotheses differ in dimension");
  }
  // Sort-and-sweep duplicate check on the first coordinate.
  std::vector<std::size_t> order(thetas_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return thetas_[a][0] < thetas_[b][0]; });
  for (std::size_t a = 0; a < order.size(); ++a) {
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      if (thetas_[order[b]][0] - thetas_[order[a]][0] > 1e-12) break;
      if (squared_distance(thetas_[order[a]].values(), thetas_[order[b]].values()) <= 1e-24) {
        throw Error(ErrorCode::invalid_argument, "duplicate hypotheses in grid");
      }
    }
  }
}

nlohmann::json HypothesisGrid::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : thetas_) out.push_back(std::vector<double>(t.values().begin(), t.values().end()));
  return out;
}

HypothesisGrid HypothesisGrid::from_json(const nlohmann::json& j) {
  std::vector<RewardWeights> thetas;
  for (const auto& row : j) thetas.push_back(RewardWeights::normalized(row.get<std::vector<double>>()));
  return HypothesisGrid(std::move(thetas));
}

Belief::Belief(GridPtr grid, std::vector<double> probs) : grid_(std::move(grid)), probs_(std::move(probs)) {
  if (!grid_) throw Error(ErrorCode::invalid_argument, "belief requires a hypothesis grid");
  if (probs_.size() != grid_->size()) {
    throw Error(ErrorCode::dimension_mismatch, "belief length does not match grid size");
  }
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw Error(ErrorCode::invalid_argument, "belief entries must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::invalid_argument, "belief must sum to 1");
}

Belief Belief::from_log_weights(GridPtr grid, std::span<const double> log_weights) {
  double top = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) top = std::max(top, lw);
  if (!std::isfinite(top)) {
    throw Error(ErrorCode::degenerate_evidence, "posterior mass vanished for every hypothesis");
  }
  std::vector<double> probs(log_weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    probs[i] = std::exp(log_weights[i] - top);
    total += probs[i];
  }
  for (double& p : probs) p /= total;
  return Belief(std::move(grid), std::move(probs));
}

std::size_t Belief::map_index() const {
  return static_cast<std::size_t>(std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

HypothesisGrid sphere_discretization(std::size_t d, std::size_t n_points, bool octant_only) {
  if (d < 2) throw Error(ErrorCode::invalid_argument, "sphere discretization needs d >= 2");
  if (n_points < 1) throw Error(ErrorCode::invalid_argument, "sphere discretization needs n >= 1");
  const double n = static_cast<double>(n_points);
  std::vector<RewardWeights> out;
  out.reserve(n_points);

  if (d == 2) {
    // Full circle: angles 2*pi*i/n. Quarter arc: midpoints of n equal sub-arcs.
    for (std::size_t i = 0; i < n_points; ++i) {
      const double a = octant_only ? (static_cast<double>(i) + 0.5) / n * (std::numbers::pi / 2)
                                   : static_cast<double>(i) / n * (2 * std::numbers::pi);
      out.push_back(RewardWeights::normalized({std::cos(a), std::sin(a)}));
    }
    return HypothesisGrid(std::move(out));
  }

  if (d == 3) {
    // Equal-area map: z uniform, azimuth from the golden-ratio sequence.
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    for (std::size_t i = 0; i < n_points; ++i) {
      const double fi = static_cast<double>(i);
      const double z = octant_only ? 1.0 - (fi + 0.5) / n : 1.0 - (2.0 * fi + 1.0) / n;
      const double frac = fi * golden - std::floor(fi * golden);
      const double phi = frac * (octant_only ? std::numbers::pi / 2 : 2 * std::numbers::pi);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      std::vector<double> v{r * std::cos(phi), r * std::sin(phi), z};
      if (octant_only) {
        for (double& x : v) x = std::max(0.0, x);
      }
      out.push_back(RewardWeights::normalized(std::move(v)));
    }
    return HypothesisGrid(std::move(out));
  }

  // d >= 4: Kronecker sequence in [0,1)^(2k) pushed through Box-Muller.
  const std::size_t pairs = (d + 1) / 2;
  const double g = harmonious_number(2 * pairs);
  std::vector<double> alpha(2 * pairs);
  for (std::size_t k = 0; k < alpha.size(); ++k) alpha[k] = std::pow(1.0 / g, static_cast<double>(k + 1));
  for (std::size_t i = 0; i < n_points; ++i) {
    std::vector<double> v;
    v.reserve(2 * pairs);
    for (std::size_t p = 0; p < pairs; ++p) {
      auto coord = [&](std::size_t k) {
        const double x = 0.5 + alpha[k] * static_cast<double>(i + 1);
        return x - std::floor(x);
      };
      const double u1 = std::max(coord(2 * p), 1e-300);
      const double u2 = coord(2 * p + 1);
      const double rad = std::sqrt(-2.0 * std::log(u1));
      v.push_back(rad * std::cos(2 * std::numbers::pi * u2));
      v.push_back(rad * std::sin(2 * std::numbers::pi * u2));
    }
    v.resize(d);
    if (octant_only) {
      for (double& x : v) x = std::abs(x);
    }
    out.push_back(RewardWeights::normalized(std::move(v)));
  }
  return HypothesisGrid(std::move(out));
}

Belief uniform_prior(const GridPtr& grid) {
  if (!grid || grid->size() == 0) throw Error(ErrorCode::empty_grid, "uniform prior over an empty grid");
  const double m = static_cast<double>(grid->size());
  return Belief(grid, std::vector<double>(grid->size(), 1.0 / m));
}

Belief uniform_over(const GridPtr& grid, const FeasibleSet& fs) {
  const std::size_t v = fs.mask.count();
  if (v == 0) throw Error(ErrorCode::empty_grid, "uniform belief over an empty feasible set");
  std::vector<double> probs(grid->size(), 0.0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (fs.contains(i)) probs[i] = 1.0 / static_cast<double>(v);
  }
  return Belief(grid, std::move(probs));
}

double kl_divergence(const Belief& p, const Belief& q) {
  if (p.size() != q.size()) throw Error(ErrorCode::dimension_mismatch, "beliefs over different grids");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) {
      throw Error(ErrorCode::divergence_undefined,
                  "q has zero mass where p is positive (index " + std::to_string(i) + ")");
    }
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(0.0, kl);
}

double entropy(const Belief& b) {
  double h = 0.0;
  for (double p : b.probs()) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::max(0.0, h);
}

std::size_t feasible_volume(const FeasibleSet& f) { return f.mask.count(); }

double feasible_diameter(const FeasibleSet& f, const HypothesisGrid& grid) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.contains(i)) idx.push_back(i);
  }
  double best = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      best = std::max(best, squared_distance(grid[idx[a]].values(), grid[idx[b]].values()));
    }
  }
  return std::sqrt(best);
}

}  // namespace rrc
