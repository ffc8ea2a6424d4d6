#include "ppm/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace ppm {

namespace {

// Below these levels the rational closed forms lose digits to cancellation
// and the series form is used instead.
constexpr double kMinDenominator = 1e-3;
constexpr double kMinClosedFormValue = 1e-6;

void require_order(int m) {
  if (m < 1) throw DomainError("PPM order must be at least 1");
}

void require_probability(double x, const char* what) {
  if (!std::isfinite(x) || x < 0.0 || x > 1.0) throw DomainError(std::string(what) + " must lie in [0, 1]");
}

// 1 - q^i without cancellation for q close to 1.
double one_minus_pow(double q, int i) {
  if (i == 0) return 0.0;
  if (q <= 0.0) return 1.0;
  return -std::expm1(i * std::log(q));
}

double clamp_error(int m, double value) {
  const double cap = static_cast<double>(m - 1) / m;
  return std::clamp(value, 0.0, cap);
}

}  // namespace

std::string_view to_string(BoundMethod method) {
  switch (method) {
    case BoundMethod::helstrom: return "helstrom";
    case BoundMethod::dd: return "dd";
    case BoundMethod::cpn: return "cpn";
    case BoundMethod::cpn_opt: return "cpn_opt";
    case BoundMethod::greedy_limit: return "greedy_limit";
  }
  return "unknown";
}

std::string_view to_string(Evaluation evaluation) {
  return evaluation == Evaluation::closed_form ? "closed_form" : "series";
}

double helstrom_error(int m, double n) {
  require_order(m);
  if (std::isnan(n) || n < 0.0) throw DomainError("photon number must be non-negative");
  if (m == 1) return 0.0;
  const double e = std::exp(-n);
  const double a = std::sqrt(1.0 + (m - 1) * e);
  const double b = std::sqrt(-std::expm1(-n));
  // a - b rewritten as (a^2 - b^2) / (a + b) = m e / (a + b) to avoid cancellation at large n.
  const double diff = m * e / (a + b);
  return static_cast<double>(m - 1) / (static_cast<double>(m) * m) * diff * diff;
}

double dd_error_closed_form(int m, double q0, double p0) {
  require_order(m);
  const double qbar = 1.0 - q0;
  const double pbar = 1.0 - p0;
  return ((m - p0 * std::pow(q0, m - 1)) * qbar - pbar * (1.0 - std::pow(q0, m))) / (m * qbar);
}

double dd_error_series(int m, double q0, double p0) {
  require_order(m);
  // Pulse slot silent: guess among the clicked empties (or all slots).
  // Pulse slot clicks alongside j empty clicks: wrong with probability j/(j+1).
  double miss_sum = 0.0;   // sum_{i<m} (1 - q0^i)
  double power_sum = 0.0;  // sum_{i<m-1} q0^i
  double power = 1.0;
  for (int i = 0; i < m; ++i) {
    miss_sum += one_minus_pow(q0, i);
    if (i < m - 1) power_sum += power;
    power *= q0;
  }
  return (miss_sum + p0 * power_sum) / m;
}

BoundResult dd_error_detailed(int m, double q0, double p0) {
  require_order(m);
  require_probability(q0, "q0");
  require_probability(p0, "p0");
  BoundResult result;
  result.method = BoundMethod::dd;
  if (m == 1) return result;
  if (1.0 - q0 >= kMinDenominator) {
    const double value = dd_error_closed_form(m, q0, p0);
    if (value >= kMinClosedFormValue) {
      result.p_error = clamp_error(m, value);
      return result;
    }
  }
  result.p_error = clamp_error(m, dd_error_series(m, q0, p0));
  result.evaluation = Evaluation::series;
  return result;
}

double dd_error(int m, double q0, double p0) { return dd_error_detailed(m, q0, p0).p_error; }

double dd_error(int m, const ClickModel& model) { return dd_error(m, model.q(0.0), model.p(0.0)); }

double cpn_error_closed_form(int m, const SlotStats& s) {
  require_order(m);
  const double q0bar = 1.0 - s.q0;
  const double p0bar = 1.0 - s.p0;
  const double qbbar = 1.0 - s.qb;
  const double pbbar = 1.0 - s.pb;
  const double numerator = (p0bar - m * q0bar) * (s.q0 - qbbar) +
                           q0bar * std::pow(qbbar, m - 1) * (pbbar * s.q0 - s.p0 * qbbar) +
                           std::pow(s.q0, m) * (s.pb * q0bar - p0bar * s.qb);
  return numerator / (m * q0bar * (qbbar - s.q0));
}

double cpn_error_series(int m, const SlotStats& s) {
  require_order(m);
  const double qbbar = 1.0 - s.qb;
  const double pbbar = 1.0 - s.pb;

  // Direct detection over the n + 1 slots following a switchover with the pulse
  // among them: error = mean_i (1 - q0^i) + p0 * mean_i q0^i, i = 0..n.
  std::vector<double> dd_tail(static_cast<std::size_t>(m), 0.0);
  {
    double miss_sum = 0.0;
    double power_sum = 0.0;
    double power = 1.0;
    for (int i = 0; i < m; ++i) {
      miss_sum += one_minus_pow(s.q0, i);
      power_sum += power;
      power *= s.q0;
      dd_tail[static_cast<std::size_t>(i)] = (miss_sum + s.p0 * power_sum) / (i + 1);
    }
  }

  double total = 0.0;
  // Early switchover at an empty slot k, pulse later: counted once per later pulse position.
  double null_click_run = 1.0;  // qbbar^(k-1)
  for (int k = 1; k < m; ++k) {
    const int later = m - k;
    total += later * null_click_run * s.qb * dd_tail[static_cast<std::size_t>(later - 1)];
    null_click_run *= qbbar;
  }
  // Nulling reaches the pulse slot x.
  null_click_run = 1.0;
  for (int x = 1; x <= m; ++x) {
    const int after = m - x;
    const double silent = s.pb * one_minus_pow(s.q0, after);
    const double clicked = pbbar * (1.0 - std::pow(qbbar, after) / m);
    total += null_click_run * (silent + clicked);
    null_click_run *= qbbar;
  }
  return total / m;
}

BoundResult cpn_error_detailed(int m, const SlotStats& stats) {
  require_order(m);
  stats.validate();
  BoundResult result;
  result.method = BoundMethod::cpn;
  if (m == 1) return result;
  const double q0bar = 1.0 - stats.q0;
  const double gap = (1.0 - stats.qb) - stats.q0;
  if (q0bar >= kMinDenominator && std::abs(gap) >= kMinDenominator) {
    const double value = cpn_error_closed_form(m, stats);
    if (value >= kMinClosedFormValue) {
      result.p_error = clamp_error(m, value);
      return result;
    }
  }
  result.p_error = clamp_error(m, cpn_error_series(m, stats));
  result.evaluation = Evaluation::series;
  return result;
}

double cpn_error(int m, const SlotStats& stats) { return cpn_error_detailed(m, stats).p_error; }

double cpn_error(int m, double beta, const ClickModel& model) {
  if (!std::isfinite(beta)) throw DomainError("CPN displacement must be finite");
  return cpn_error(m, SlotStats::from_model(model, beta));
}

BoundResult cpn_error_optimized(int m, const ClickModel& model, const ScalarSearchConfig& search) {
  require_order(m);
  BoundResult result;
  result.method = BoundMethod::cpn_opt;
  if (m == 1) {
    result.beta_used = 0.0;
    return result;
  }
  const SlotStats base = SlotStats::from_model(model, 0.0);
  const auto objective = [&](double beta) {
    SlotStats s = base;
    s.qb = model.q(beta);
    s.pb = model.p(beta);
    return -cpn_error(m, s);
  };
  const ScalarOptimum opt = maximize(objective, search);
  const BoundResult at_opt = cpn_error_detailed(m, SlotStats::from_model(model, opt.x));
  result.p_error = at_opt.p_error;
  result.evaluation = at_opt.evaluation;
  result.beta_used = opt.x;
  return result;
}

double dd_error_strong_pulse(int m, double q0) {
  require_order(m);
  require_probability(q0, "q0");
  double miss_sum = 0.0;
  for (int i = 0; i < m; ++i) miss_sum += one_minus_pow(q0, i);
  return miss_sum / m;
}

double greedy_strong_pulse_limit(int m, double q0, double p_alpha) {
  require_order(m);
  require_probability(q0, "q0");
  require_probability(p_alpha, "p_alpha");
  const double q0bar = 1.0 - q0;
  const double pabar = 1.0 - p_alpha;
  if (q0bar < 1e-12) return 0.0;
  if (q0bar >= kMinDenominator) {
    const double value = pabar * (-1.0 + m - m * q0 + std::pow(q0, m)) / (m * q0bar);
    if (value >= kMinClosedFormValue) return clamp_error(m, value);
  }
  return clamp_error(m, pabar * dd_error_strong_pulse(m, q0));
}

double greedy_strong_pulse_limit(int m, const ClickModel& model, double alpha) {
  return greedy_strong_pulse_limit(m, model.q(0.0), model.p(alpha));
}

double greedy_strong_pulse_limit(int m, const PoissonClickModel& model) {
  return greedy_strong_pulse_limit(m, model, model.params().alpha);
}

}  // namespace ppm
