#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ppm/records.hpp"
#include "ppm/scalar_search.hpp"

namespace ppm {

enum class Backend { automatic, exact, monte_carlo };

Backend parse_backend(std::string_view name);

/// Largest M for which the automatic backend evaluates greedy exactly.
inline constexpr int kAutoExactMax = 12;

struct SweepSpec {
  std::vector<int> orders{4};
  std::vector<double> n_values;
  std::vector<double> n_b{0.0};
  std::vector<double> delta{0.0};
  /// helstrom, dd, cpn, cpn_opt, greedy, greedy_limit, dp, brute
  std::vector<std::string> methods;
  long long trials = 100000;
  std::uint64_t seed = 1;
  Backend backend = Backend::automatic;
  int threads = 1;  // 0 = hardware concurrency
  int lut_points = 1000;
  std::optional<double> beta;     // fixed CPN displacement (default: alpha)
  std::optional<double> beta_in;  // fixed greedy initial displacement (default: optimised)
  DisplacementDomain domain = DisplacementDomain::non_negative;

  void validate() const;
};

const std::vector<std::string>& known_methods();
const std::vector<std::string>& preset_names();

/// fig3a, fig3b, fig4a, fig4b, fig5.
SweepSpec preset(std::string_view name);

/// Log-spaced photon numbers; count 0 gives an empty grid, count 1 gives {lo}.
std::vector<double> photon_grid(double lo, double hi, int count);

/// Rows ordered by (M, N_b, Delta, n, method) regardless of the thread count.
std::vector<SweepRecord> run_sweep(const SweepSpec& spec);

}  // namespace ppm
