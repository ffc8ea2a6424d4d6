#pragma once

#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "ppm/channel.hpp"
#include "ppm/scalar_search.hpp"

namespace ppm {

/// Revision ratios are kept inside the lookup-table domain.
inline constexpr double kRatioMin = 1e-16;
inline constexpr double kRatioMax = 1e16;

double clamp_ratio(double r);

/// A: keep the estimate on no-click, move it to the measured slot on click.
/// B: move on no-click, keep on click.
enum class GreedyOption { A, B };

std::string_view to_string(GreedyOption option);

struct GreedyAction {
  GreedyOption option = GreedyOption::A;
  double beta = 0.0;
  double gain = 1.0;  // max(p_A, p_B) at the chosen displacement

  bool operator==(const GreedyAction&) const = default;
};

struct GreedyState {
  int estimate = 1;
  double ratio = 1.0;
};

struct BranchMultipliers {
  double p_a = 0.0;
  double p_b = 0.0;
};

/// Expected multiplicative gain of the correct-estimate weight for options A and B.
BranchMultipliers branch_multipliers(double r, double beta, const ClickModel& model);
BranchMultipliers branch_multipliers(double r, double q_beta, double p_beta);

/// Locally optimal option and displacement for revision ratio r.
///
/// Each option is maximised over beta independently; the beta -> infinity
/// limits (p_A -> r, p_B -> 1) compete with beta pinned at the interval end.
/// Equal gains go to the smaller displacement, then to option A.
GreedyAction greedy_choice(double r, const ClickModel& model, const ScalarSearchConfig& search);

GreedyState initial_state(double beta_in, bool clicked, const ClickModel& model);

GreedyState update_state(const GreedyState& state, const GreedyAction& action, bool clicked, int slot,
                         const ClickModel& model);

/// Log-spaced sample of revision ratios.
struct GridConfig {
  double r_min = kRatioMin;
  double r_max = kRatioMax;
  int count = 1000;

  void validate() const;
};

struct PolicyTable {
  std::vector<double> ratio_grid;
  std::vector<GreedyAction> actions;
  GridConfig grid;
  std::optional<ChannelParams> params;

  std::size_t size() const { return ratio_grid.size(); }
};

PolicyTable build_policy_table(const ClickModel& model, const GridConfig& grid, const ScalarSearchConfig& search);
PolicyTable build_policy_table(const PoissonClickModel& model, const GridConfig& grid,
                               DisplacementDomain domain = DisplacementDomain::non_negative);

/// Entry nearest to r in log space. Out-of-range ratios clamp to the end
/// entries; an exact tie between two neighbours resolves to the lower index.
const GreedyAction& lookup(const PolicyTable& table, double r);
std::size_t lookup_index(const PolicyTable& table, double r);

/// CSV with a versioned header line carrying the channel parameters.
void write_policy_table(std::ostream& out, const PolicyTable& table);
PolicyTable read_policy_table(std::istream& in);

/// Candidate initial displacements: `count` evenly spaced points over the
/// search interval plus the model's special points, sorted and deduplicated.
std::vector<double> beta_in_candidates(const ClickModel& model, const ScalarSearchConfig& search, int count = 64);

/// One frame of the greedy receiver. `clicked(slot, beta)` reports the
/// detector outcome for a 1-based slot displaced by beta. Returns the final estimate.
template <typename Outcome>
int run_frame(int m, double beta_in, const PolicyTable& table, Outcome&& clicked, const ClickModel& model) {
  GreedyState state = initial_state(beta_in, clicked(1, beta_in), model);
  for (int slot = 2; slot <= m; ++slot) {
    const GreedyAction& action = lookup(table, state.ratio);
    state = update_state(state, action, clicked(slot, action.beta), slot, model);
  }
  return state.estimate;
}

}  // namespace ppm
