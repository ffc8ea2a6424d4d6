#pragma once

#include <stdexcept>
#include <vector>

#include "ppm/channel.hpp"
#include "ppm/greedy.hpp"
#include "ppm/scalar_search.hpp"

namespace ppm {

/// Request that exceeds what an exact backend can enumerate.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical sanity check failed (e.g. a value function lost monotonicity).
class NumericalDiagnostic : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExactTreeCap = 20;

/// Joint weights carried along one path of the greedy decision tree.
///
/// `est` is the probability that the current estimate is the pulse slot and
/// the observed outcomes occurred, `future` the same for any single unmeasured
/// slot and `wrong` the total for the measured slots that are not the estimate.
struct TreeWeights {
  double est = 0.0;
  double future = 0.0;
  double wrong = 0.0;
};

struct GreedyTreeResult {
  double p_error = 0.0;    // sum of leaf `wrong` weights
  double p_correct = 0.0;  // sum of leaf `est` weights
  std::size_t leaves = 0;
  /// Per depth, sum over nodes of est + wrong + remaining * future (debug mode only; should be 1).
  std::vector<double> depth_mass;
};

struct ExactOptions {
  int cap = kExactTreeCap;
  bool track_mass = false;
};

/// Greedy receiver error from the full decision tree, using an exact greedy choice at every node.
double greedy_exact_error(int m, double beta_in, const ClickModel& model, const ScalarSearchConfig& search);
GreedyTreeResult greedy_exact_tree(int m, double beta_in, const ClickModel& model, const ScalarSearchConfig& search,
                                   const ExactOptions& options = {});

/// Same tree, but actions come from a policy table instead of exact choices.
GreedyTreeResult greedy_table_tree(int m, double beta_in, const PolicyTable& table, const ClickModel& model,
                                   const ExactOptions& options = {});

struct GreedyOptimum {
  double p_error = 0.0;
  double beta_in = 0.0;
};

inline constexpr std::size_t kBetaInRefinements = 3;

/// Minimises greedy_exact_error over the initial displacement: the 64-point
/// candidate grid, then golden-section refinement around the best local minima.
GreedyOptimum greedy_exact_optimized(int m, const ClickModel& model, const ScalarSearchConfig& search,
                                     int candidates = 64);

/// Value function of the optimal adaptive receiver on a log-spaced grid of
/// s = (best measured-slot weight) / (unmeasured-slot weight).
///
/// Stored as excess[k][i] = v_k(s_i) - s_i, where k is the number of slots
/// still to measure; v_0(s) = s.
struct DpValueFunction {
  std::vector<double> s_grid;
  std::vector<std::vector<double>> excess;

  /// v_k(s), linear in log s between grid points, excess clamped at the ends.
  double value(int k, double s) const;
  double excess_at(int k, double s) const;
};

DpValueFunction solve_value_function(int m, const ClickModel& model, const GridConfig& grid,
                                     const ScalarSearchConfig& search);

/// Error of the numerically optimal adaptive displacement receiver by backward induction.
double optimal_adaptive_error(int m, const ClickModel& model, const GridConfig& grid, const ScalarSearchConfig& search);

inline constexpr int kDefaultDpPoints = 32768;

/// Default DP grid: kDefaultDpPoints points over [1e-16, 1e16].
GridConfig default_dp_grid();

/// Error of the best displacement decision tree for m <= 3, optimised
/// node by node over the explicit tree with the full hypothesis weight vector.
double brute_force_tree_error(int m, const ClickModel& model, const ScalarSearchConfig& search);

}  // namespace ppm
