#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ppm/records.hpp"

namespace ppm {

enum class FitMode { photon_starved, strong_pulse };

FitMode parse_fit_mode(std::string_view name);
std::string_view to_string(FitMode mode);

struct FitReport {
  std::string method;
  int m = 1;
  double n_b = 0.0;
  double delta = 0.0;
  FitMode mode = FitMode::photon_starved;
  std::size_t points = 0;
  /// photon_starved: log-log slope of (M-1)/M - P_e against n; strong_pulse: plateau level.
  double value = 0.0;
  /// photon_starved: intercept of the log-log fit; strong_pulse: unused.
  double intercept = 0.0;
  /// strong_pulse: greedy strong-pulse limit at the largest n in the tail.
  std::optional<double> reference;
};

inline constexpr std::size_t kMinFitPoints = 6;

/// Records must share method, M, N_b and Delta and be ordered by strictly increasing n.
FitReport fit_photon_starved(std::span<const SweepRecord> records, double n_lo = 1e-3, double n_hi = 1e-1);
/// Plateau = median P_e over the last third of the points.
FitReport fit_strong_pulse(std::span<const SweepRecord> records);

/// Groups by (method, M, N_b, Delta) in order of first appearance and fits each group.
std::vector<FitReport> fit_records(std::span<const SweepRecord> records, FitMode mode, double n_lo = 1e-3,
                                   double n_hi = 1e-1);

std::string fit_csv_header();
std::string to_csv(const FitReport& report);

/// Error-probability ratio in decibels, 10 log10(p1 / p2).
double db_gap(double p1, double p2);

}  // namespace ppm
