#pragma once

#include <optional>
#include <string_view>

#include "ppm/channel.hpp"
#include "ppm/scalar_search.hpp"

namespace ppm {

enum class BoundMethod { helstrom, dd, cpn, cpn_opt, greedy_limit };

/// How a closed-form value was evaluated.
///
/// `closed_form` is the textbook rational expression. `series` is an
/// equivalent finite sum of non-negative error terms that stays exact when
/// the closed form's denominators vanish (noiseless channels, q_beta -> 1 - q_0)
/// or when the error is small enough for the closed form to cancel.
enum class Evaluation { closed_form, series };

std::string_view to_string(BoundMethod method);
std::string_view to_string(Evaluation evaluation);

struct BoundResult {
  double p_error = 0.0;
  BoundMethod method = BoundMethod::helstrom;
  std::optional<double> beta_used;
  Evaluation evaluation = Evaluation::closed_form;
};

/// Minimal error for discriminating the noiseless PPM constellation.
double helstrom_error(int m, double n);

/// Direct detection with random tie-breaking among clicked slots.
double dd_error(int m, const ClickModel& model);
double dd_error(int m, double q0, double p0);
BoundResult dd_error_detailed(int m, double q0, double p0);
double dd_error_closed_form(int m, double q0, double p0);
double dd_error_series(int m, double q0, double p0);

/// Conditional pulse nulling with a constant displacement beta in the nulling rounds.
double cpn_error(int m, double beta, const ClickModel& model);
double cpn_error(int m, const SlotStats& stats);
BoundResult cpn_error_detailed(int m, const SlotStats& stats);
double cpn_error_closed_form(int m, const SlotStats& stats);
double cpn_error_series(int m, const SlotStats& stats);

/// CPN minimised over beta in the search interval.
BoundResult cpn_error_optimized(int m, const ClickModel& model, const ScalarSearchConfig& search);

/// Strong-pulse limit of the greedy receiver initialised with beta_in = alpha.
double greedy_strong_pulse_limit(int m, double q0, double p_alpha);
double greedy_strong_pulse_limit(int m, const ClickModel& model, double alpha);
double greedy_strong_pulse_limit(int m, const PoissonClickModel& model);

/// Direct-detection error in the limit p0 -> 0.
double dd_error_strong_pulse(int m, double q0);

}  // namespace ppm
