#include "ppm/scalar_search.hpp"

#include <algorithm>
#include <cmath>

#include "ppm/channel.hpp"

namespace ppm {

namespace {

constexpr double kInvPhi = 0.6180339887498949;

struct Best {
  ScalarOptimum opt{0.0, -INFINITY};
  bool seen = false;

  void offer(double x, double value) {
    if (std::isnan(value)) return;
    if (!seen || value > opt.value || (value == opt.value && (std::abs(x) < std::abs(opt.x) || (std::abs(x) == std::abs(opt.x) && x < opt.x)))) {
      opt = {x, value};
      seen = true;
    }
  }
};

}  // namespace

ScalarSearchConfig ScalarSearchConfig::for_model(const ClickModel& model, DisplacementDomain domain) {
  ScalarSearchConfig config;
  config.upper = model.search_upper();
  config.lower = domain == DisplacementDomain::signed_real ? -config.upper : 0.0;
  config.extra_points = model.special_points();
  return config;
}

void ScalarSearchConfig::validate() const {
  if (!std::isfinite(lower) || !std::isfinite(upper) || upper < lower)
    throw DomainError("search interval must be finite with lower <= upper");
  if (grid_points < 2) throw DomainError("search grid needs at least 2 points");
  if (!(tolerance > 0.0)) throw DomainError("search tolerance must be positive");
}

ScalarOptimum golden_section_max(const std::function<double(double)>& f, double a, double b,
                                 double tolerance) {
  Best best;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  best.offer(c, fc);
  best.offer(d, fd);
  while (b - a > tolerance) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
      best.offer(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
      best.offer(d, fd);
    }
  }
  return best.opt;
}

ScalarOptimum maximize(const std::function<double(double)>& f, const ScalarSearchConfig& config) {
  config.validate();
  const double lo = config.lower;
  const double hi = config.upper;
  Best best;

  if (hi == lo) {
    best.offer(lo, f(lo));
    return best.opt;
  }

  const int n = config.grid_points;
  const double step = (hi - lo) / (n - 1);
  int best_index = 0;
  double best_grid = -INFINITY;
  for (int i = 0; i < n; ++i) {
    const double x = (i == n - 1) ? hi : lo + step * i;
    const double value = f(x);
    if (value > best_grid) {
      best_grid = value;
      best_index = i;
    }
    best.offer(x, value);
  }

  const double a = std::max(lo, lo + step * (best_index - 1));
  const double b = std::min(hi, lo + step * (best_index + 1));
  const ScalarOptimum refined = golden_section_max(f, a, b, config.tolerance);
  best.offer(refined.x, refined.value);

  for (double x : config.extra_points) {
    if (x >= lo && x <= hi) best.offer(x, f(x));
  }
  return best.opt;
}

std::vector<double> log_space(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) throw DomainError("log_space needs 0 < lo <= hi and count >= 1");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double llo = std::log(lo);
  const double step = (std::log(hi) - llo) / (count - 1);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = std::exp(llo + step * i);
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace ppm
