#include "ppm/exact.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <unordered_map>

namespace ppm {

namespace {

struct ResolvedAction {
  GreedyOption option = GreedyOption::A;
  double q = 1.0;
  double p = 1.0;
};

// Greedy choices depend only on (r, model, search), so one cache serves every
// tree built for the same channel.
class ChoiceCache {
 public:
  ChoiceCache(const ClickModel& model, const ScalarSearchConfig& search) : model_(model), search_(search) {}

  const ResolvedAction& operator()(double r) {
    auto [it, inserted] = cache_.try_emplace(r);
    if (inserted) {
      const GreedyAction action = greedy_choice(r, model_, search_);
      it->second = {action.option, model_.q(action.beta), model_.p(action.beta)};
    }
    return it->second;
  }

 private:
  const ClickModel& model_;
  const ScalarSearchConfig& search_;
  std::unordered_map<double, ResolvedAction> cache_;
};

class GreedyTree {
 public:
  GreedyTree(int m, const ClickModel& model, std::function<ResolvedAction(double)> choose, const ExactOptions& options)
      : m_(m), model_(model), choose_(std::move(choose)), options_(options) {}

  GreedyTreeResult run(double beta_in) {
    if (m_ < 1) throw DomainError("PPM order must be at least 1");
    if (m_ > options_.cap)
      throw CapacityError("exact greedy tree limited to M <= " + std::to_string(options_.cap) +
                          " (2^M leaves); use the Monte Carlo backend");
    if (!std::isfinite(beta_in)) throw DomainError("initial displacement must be finite");
    result_ = {};
    if (options_.track_mass) {
      result_.depth_mass.assign(static_cast<std::size_t>(m_) + 1, 0.0);
      result_.depth_mass[0] = 1.0;
    }
    const double q = model_.q(beta_in);
    const double p = model_.p(beta_in);
    const double w = 1.0 / m_;
    descend(2, {p * w, q * w, 0.0});
    descend(2, {(1.0 - p) * w, (1.0 - q) * w, 0.0});
    return result_;
  }

 private:
  void descend(int slot, const TreeWeights& w) {
    if (w.est == 0.0 && w.future == 0.0 && w.wrong == 0.0) return;
    if (options_.track_mass) {
      const int remaining = m_ - slot + 1;
      result_.depth_mass[static_cast<std::size_t>(slot - 1)] += w.est + w.wrong + remaining * w.future;
    }
    if (slot > m_) {
      result_.p_correct += w.est;
      result_.p_error += w.wrong;
      ++result_.leaves;
      return;
    }
    const ResolvedAction a = choose_(clamp_ratio(w.future / w.est));
    const double qbar = 1.0 - a.q;
    const double pbar = 1.0 - a.p;
    if (a.option == GreedyOption::A) {
      descend(slot + 1, {w.est * a.q, w.future * a.q, w.wrong * a.q + w.future * a.p});
      descend(slot + 1, {w.future * pbar, w.future * qbar, (w.wrong + w.est) * qbar});
    } else {
      descend(slot + 1, {w.future * a.p, w.future * a.q, (w.wrong + w.est) * a.q});
      descend(slot + 1, {w.est * qbar, w.future * qbar, w.wrong * qbar + w.future * pbar});
    }
  }

  int m_;
  const ClickModel& model_;
  std::function<ResolvedAction(double)> choose_;
  ExactOptions options_;
  GreedyTreeResult result_;
};

GreedyTreeResult run_exact_tree(int m, double beta_in, const ClickModel& model, ChoiceCache& cache,
                                const ExactOptions& options) {
  GreedyTree tree(m, model, [&cache](double r) { return cache(r); }, options);
  return tree.run(beta_in);
}

// weight * u_k(max(s, branch / weight)); a branch that cannot occur contributes nothing.
double weighted_excess(const DpValueFunction& vf, int k, double weight, double s, double branch) {
  if (weight <= 0.0) return 0.0;
  return weight * vf.excess_at(k, std::max(s, branch / weight));
}

}  // namespace

double greedy_exact_error(int m, double beta_in, const ClickModel& model, const ScalarSearchConfig& search) {
  ChoiceCache cache(model, search);
  return run_exact_tree(m, beta_in, model, cache, {}).p_error;
}

GreedyTreeResult greedy_exact_tree(int m, double beta_in, const ClickModel& model, const ScalarSearchConfig& search,
                                   const ExactOptions& options) {
  ChoiceCache cache(model, search);
  return run_exact_tree(m, beta_in, model, cache, options);
}

GreedyTreeResult greedy_table_tree(int m, double beta_in, const PolicyTable& table, const ClickModel& model,
                                   const ExactOptions& options) {
  GreedyTree tree(
      m, model,
      [&](double r) {
        const GreedyAction& action = lookup(table, r);
        return ResolvedAction{action.option, model.q(action.beta), model.p(action.beta)};
      },
      options);
  return tree.run(beta_in);
}

GreedyOptimum greedy_exact_optimized(int m, const ClickModel& model, const ScalarSearchConfig& search,
                                     int candidates) {
  if (m < 1) throw DomainError("PPM order must be at least 1");
  if (m > kExactTreeCap) throw CapacityError("exact greedy tree limited to M <= 20; use the Monte Carlo backend");
  if (m == 1) return {0.0, 0.0};

  ChoiceCache cache(model, search);
  const auto error_at = [&](double beta_in) { return run_exact_tree(m, beta_in, model, cache, {}).p_error; };

  const std::vector<double> grid = beta_in_candidates(model, search, candidates);
  std::vector<double> errors(grid.size());
  GreedyOptimum best{INFINITY, 0.0};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    errors[i] = error_at(grid[i]);
    if (errors[i] < best.p_error) best = {errors[i], grid[i]};
  }

  // The error is multi-modal in beta_in, so refine around the few best local minima.
  std::vector<std::size_t> minima;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const bool left = i == 0 || errors[i] <= errors[i - 1];
    const bool right = i + 1 == grid.size() || errors[i] <= errors[i + 1];
    if (left && right) minima.push_back(i);
  }
  std::stable_sort(minima.begin(), minima.end(), [&](std::size_t a, std::size_t b) { return errors[a] < errors[b]; });
  if (minima.size() > kBetaInRefinements) minima.resize(kBetaInRefinements);
  for (std::size_t i : minima) {
    const double a = grid[i == 0 ? 0 : i - 1];
    const double b = grid[std::min(i + 1, grid.size() - 1)];
    if (!(b > a)) continue;
    const ScalarOptimum refined = golden_section_max([&](double x) { return -error_at(x); }, a, b, search.tolerance);
    if (-refined.value < best.p_error) best = {-refined.value, refined.x};
  }
  return best;
}

double DpValueFunction::excess_at(int k, double s) const {
  const auto& row = excess[static_cast<std::size_t>(k)];
  if (!(s > s_grid.front())) return row.front();
  if (s >= s_grid.back()) return row.back();
  const double lmin = std::log(s_grid.front());
  const double step = (std::log(s_grid.back()) - lmin) / static_cast<double>(s_grid.size() - 1);
  const double t = (std::log(s) - lmin) / step;
  const std::size_t i = std::min(static_cast<std::size_t>(t), s_grid.size() - 2);
  const double frac = t - static_cast<double>(i);
  return row[i] + frac * (row[i + 1] - row[i]);
}

double DpValueFunction::value(int k, double s) const { return s + excess_at(k, s); }

GridConfig default_dp_grid() { return {kRatioMin, kRatioMax, kDefaultDpPoints}; }

DpValueFunction solve_value_function(int m, const ClickModel& model, const GridConfig& grid,
                                     const ScalarSearchConfig& search) {
  if (m < 1) throw DomainError("PPM order must be at least 1");
  grid.validate();
  if (grid.count < 512) throw DomainError("value-function grid needs at least 512 points");

  DpValueFunction vf;
  vf.s_grid = log_space(grid.r_min, grid.r_max, grid.count);
  vf.excess.assign(static_cast<std::size_t>(m) + 1, std::vector<double>(vf.s_grid.size(), 0.0));

  for (int k = 1; k <= m; ++k) {
    auto& row = vf.excess[static_cast<std::size_t>(k)];
    ScalarSearchConfig local = search;
    local.extra_points.push_back(0.0);
    for (std::size_t i = 0; i < vf.s_grid.size(); ++i) {
      const double s = vf.s_grid[i];
      const auto objective = [&](double beta) {
        const double q = model.q(beta);
        const double p = model.p(beta);
        const double qbar = 1.0 - q;
        const double pbar = 1.0 - p;
        return std::max(q * s, p) + weighted_excess(vf, k - 1, q, s, p) + std::max(qbar * s, pbar) +
               weighted_excess(vf, k - 1, qbar, s, pbar);
      };
      // The previous optimum stays feasible and its value only grows with s.
      const ScalarOptimum best = maximize(objective, local);
      local.extra_points.back() = best.x;
      row[i] = std::max(0.0, best.value - s);
    }
    for (std::size_t i = 0; i + 1 < vf.s_grid.size(); ++i) {
      const double here = vf.s_grid[i] + row[i];
      const double next = vf.s_grid[i + 1] + row[i + 1];
      if (next < here - 1e-9 * std::max(1.0, here))
        throw NumericalDiagnostic("value function not monotone in s at k=" + std::to_string(k) +
                                  "; refine the grid");
    }
  }
  return vf;
}

double optimal_adaptive_error(int m, const ClickModel& model, const GridConfig& grid, const ScalarSearchConfig& search) {
  const DpValueFunction vf = solve_value_function(m, model, grid, search);
  if (m == 1) return 0.0;
  // Start from s = 0: the first slot is always adopted.
  const auto gain = [&](double beta) {
    const double q = model.q(beta);
    const double p = model.p(beta);
    return weighted_excess(vf, m - 1, q, 0.0, p) + weighted_excess(vf, m - 1, 1.0 - q, 0.0, 1.0 - p);
  };
  const double best = maximize(gain, search).value;
  return std::clamp((m - 1 - best) / m, 0.0, static_cast<double>(m - 1) / m);
}

double brute_force_tree_error(int m, const ClickModel& model, const ScalarSearchConfig& search) {
  if (m < 1) throw DomainError("PPM order must be at least 1");
  if (m > 3) throw CapacityError("brute-force tree optimisation limited to M <= 3");
  using Weights = std::array<double, 3>;

  std::function<double(int, const Weights&)> best_value = [&](int slot, const Weights& w) -> double {
    if (slot == m) return *std::max_element(w.begin(), w.begin() + m);
    const auto objective = [&](double beta) {
      const double q = model.q(beta);
      const double p = model.p(beta);
      Weights silent{};
      Weights click{};
      for (int x = 0; x < m; ++x) {
        const double stay = (x == slot) ? p : q;
        silent[static_cast<std::size_t>(x)] = w[static_cast<std::size_t>(x)] * stay;
        click[static_cast<std::size_t>(x)] = w[static_cast<std::size_t>(x)] * (1.0 - stay);
      }
      return best_value(slot + 1, silent) + best_value(slot + 1, click);
    };
    return maximize(objective, search).value;
  };

  Weights prior{};
  for (int x = 0; x < m; ++x) prior[static_cast<std::size_t>(x)] = 1.0 / m;
  return std::clamp(1.0 - best_value(0, prior), 0.0, static_cast<double>(m - 1) / m);
}

}  // namespace ppm
