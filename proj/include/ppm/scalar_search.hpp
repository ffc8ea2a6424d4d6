#pragma once

#include <functional>
#include <vector>

namespace ppm {

class ClickModel;

/// Sign convention for real displacements: non-negative only, or either sign.
enum class DisplacementDomain { non_negative, signed_real };

/// Bounded one-dimensional search: a uniform grid followed by golden-section
/// refinement around the best grid point.
struct ScalarSearchConfig {
  double lower = 0.0;
  double upper = 5.0;
  int grid_points = 256;
  double tolerance = 1e-6;
  std::vector<double> extra_points;  // evaluated exactly, clipped to [lower, upper]

  /// [0, model.search_upper()] (or the symmetric interval for signed_real)
  /// plus the model's special points.
  static ScalarSearchConfig for_model(const ClickModel& model,
                                      DisplacementDomain domain = DisplacementDomain::non_negative);

  void validate() const;
};

struct ScalarOptimum {
  double x = 0.0;
  double value = 0.0;
};

/// Maximises `f` over the configured interval.
///
/// Returns the best point among everything evaluated (grid, extra points and
/// the golden-section iterates); ties keep the smallest |x|, then the smallest x.
ScalarOptimum maximize(const std::function<double(double)>& f, const ScalarSearchConfig& config);

/// Golden-section maximisation of a unimodal function on [a, b].
ScalarOptimum golden_section_max(const std::function<double(double)>& f, double a, double b,
                                 double tolerance);

/// `count` log-spaced points from lo to hi inclusive.
std::vector<double> log_space(double lo, double hi, int count);

}  // namespace ppm
