#include "ppm/fit.hpp"

#include <algorithm>
#include <cmath>

#include "ppm/bounds.hpp"
#include "ppm/exact.hpp"
#include "ppm/montecarlo.hpp"

namespace ppm {

namespace {

void check_group(std::span<const SweepRecord> records) {
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& a = records[i - 1];
    const auto& b = records[i];
    if (a.method != b.method || a.m != b.m || a.n_b != b.n_b || a.delta != b.delta)
      throw ConfigError("fit input mixes receivers or channel parameters");
    if (!(b.n > a.n)) throw NumericalDiagnostic("fit input is not ordered by strictly increasing n");
  }
}

FitReport header_of(const SweepRecord& r, FitMode mode) {
  FitReport report;
  report.method = r.method;
  report.m = r.m;
  report.n_b = r.n_b;
  report.delta = r.delta;
  report.mode = mode;
  return report;
}

}  // namespace

FitMode parse_fit_mode(std::string_view name) {
  if (name == "photon_starved") return FitMode::photon_starved;
  if (name == "strong_pulse") return FitMode::strong_pulse;
  throw ConfigError("unknown fit mode '" + std::string(name) + "' (expected photon_starved or strong_pulse)");
}

std::string_view to_string(FitMode mode) {
  return mode == FitMode::photon_starved ? "photon_starved" : "strong_pulse";
}

FitReport fit_photon_starved(std::span<const SweepRecord> records, double n_lo, double n_hi) {
  check_group(records);
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : records) {
    if (r.n < n_lo || r.n > n_hi) continue;
    const double gain = (r.m - 1.0) / r.m - r.p_error;
    if (!(gain > 0.0) || !(r.n > 0.0))
      throw NumericalDiagnostic("error probability at n=" + format_number(r.n) + " is not below (M-1)/M");
    xs.push_back(std::log(r.n));
    ys.push_back(std::log(gain));
  }
  if (xs.size() < kMinFitPoints)
    throw ConfigError("photon-starved fit needs at least " + std::to_string(kMinFitPoints) + " points in [" +
                      format_number(n_lo) + ", " + format_number(n_hi) + "]");

  const double count = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= count;
  my /= count;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  FitReport report = header_of(records.front(), FitMode::photon_starved);
  report.points = xs.size();
  report.value = sxy / sxx;
  report.intercept = my - report.value * mx;
  return report;
}

FitReport fit_strong_pulse(std::span<const SweepRecord> records) {
  check_group(records);
  if (records.size() < kMinFitPoints)
    throw ConfigError("strong-pulse fit needs at least " + std::to_string(kMinFitPoints) + " points");
  const std::size_t tail = (records.size() + 2) / 3;
  std::vector<double> values;
  for (std::size_t i = records.size() - tail; i < records.size(); ++i) values.push_back(records[i].p_error);
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  const double median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);

  const SweepRecord& last = records.back();
  FitReport report = header_of(last, FitMode::strong_pulse);
  report.points = tail;
  report.value = median;
  report.reference =
      greedy_strong_pulse_limit(last.m, PoissonClickModel(ChannelParams::from_photons(last.n, last.n_b, last.delta, last.m)));
  return report;
}

std::vector<FitReport> fit_records(std::span<const SweepRecord> records, FitMode mode, double n_lo, double n_hi) {
  std::vector<std::vector<SweepRecord>> groups;
  for (const auto& r : records) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) {
      const auto& f = g.front();
      return f.method == r.method && f.m == r.m && f.n_b == r.n_b && f.delta == r.delta;
    });
    if (it == groups.end()) {
      groups.push_back({r});
    } else {
      it->push_back(r);
    }
  }
  std::vector<FitReport> reports;
  for (const auto& g : groups)
    reports.push_back(mode == FitMode::photon_starved ? fit_photon_starved(g, n_lo, n_hi) : fit_strong_pulse(g));
  return reports;
}

std::string fit_csv_header() { return "method,m,nb,delta,mode,points,value,intercept,reference"; }

std::string to_csv(const FitReport& r) {
  std::string line = r.method;
  line += ',' + std::to_string(r.m);
  line += ',' + format_number(r.n_b);
  line += ',' + format_number(r.delta);
  line += ',' + std::string(to_string(r.mode));
  line += ',' + std::to_string(r.points);
  line += ',' + format_number(r.value);
  line += ',' + (r.mode == FitMode::photon_starved ? format_number(r.intercept) : std::string());
  line += ',' + (r.reference ? format_number(*r.reference) : std::string());
  return line;
}

double db_gap(double p1, double p2) {
  if (!(p1 > 0.0 && p1 <= 1.0) || !(p2 > 0.0 && p2 <= 1.0))
    throw DomainError("dB gap needs error probabilities in (0, 1]");
  return 10.0 * std::log10(p1 / p2);
}

}  // namespace ppm
