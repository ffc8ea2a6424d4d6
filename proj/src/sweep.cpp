#include "ppm/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

#include "ppm/bounds.hpp"
#include "ppm/exact.hpp"
#include "ppm/montecarlo.hpp"

namespace ppm {

namespace {

struct Task {
  int m;
  double n;
  double n_b;
  double delta;
  std::string method;
  std::uint64_t seed;
};

SweepRecord base_record(const Task& t) {
  SweepRecord r;
  r.method = t.method;
  r.m = t.m;
  r.n = t.n;
  r.n_b = t.n_b;
  r.delta = t.delta;
  return r;
}

SweepRecord evaluate_greedy(const Task& t, const SweepSpec& spec, const ChannelParams& params,
                            const PoissonClickModel& model, const ScalarSearchConfig& search) {
  SweepRecord r = base_record(t);
  const bool exact = spec.backend == Backend::exact || (spec.backend == Backend::automatic && t.m <= kAutoExactMax);
  if (exact) {
    if (spec.beta_in) {
      r.beta = *spec.beta_in;
      r.p_error = greedy_exact_error(t.m, *spec.beta_in, model, search);
    } else {
      const GreedyOptimum best = greedy_exact_optimized(t.m, model, search);
      r.beta = best.beta_in;
      r.p_error = best.p_error;
    }
    r.evaluation = "exact";
    return r;
  }

  auto table = std::make_shared<const PolicyTable>(
      build_policy_table(model, GridConfig{kRatioMin, kRatioMax, spec.lut_points}, spec.domain));
  double beta_in = 0.0;
  if (spec.beta_in) {
    beta_in = *spec.beta_in;
  } else {
    // Selection runs on its own random stream so the reported estimate is not biased by it.
    const std::vector<double> candidates = beta_in_candidates(model, search);
    const long long selection_trials = std::max<long long>(1000, spec.trials / 20);
    beta_in = select_beta_in_mc(model, t.m, table, candidates, selection_trials, ~t.seed, 1);
  }
  SimConfig config;
  config.trials = spec.trials;
  config.master_seed = t.seed;
  config.receiver = Receiver::greedy;
  config.table = table;
  config.beta_in = beta_in;
  const SimResult sim = simulate(params, config);
  r.beta = beta_in;
  r.p_error = sim.p_error_hat;
  r.sigma = sim.sigma;
  r.trials = sim.trials;
  r.seed = t.seed;
  r.evaluation = "monte_carlo";
  return r;
}

SweepRecord evaluate(const Task& t, const SweepSpec& spec) {
  const ChannelParams params = ChannelParams::from_photons(t.n, t.n_b, t.delta, t.m);
  const PoissonClickModel model(params);
  const ScalarSearchConfig search = ScalarSearchConfig::for_model(model, spec.domain);
  SweepRecord r = base_record(t);

  if (t.method == "helstrom") {
    r.p_error = helstrom_error(t.m, t.n);
    r.evaluation = "closed_form";
  } else if (t.method == "dd") {
    const BoundResult b = dd_error_detailed(t.m, model.q(0.0), model.p(0.0));
    r.p_error = b.p_error;
    r.evaluation = std::string(to_string(b.evaluation));
  } else if (t.method == "cpn") {
    const double beta = spec.beta.value_or(params.alpha);
    const BoundResult b = cpn_error_detailed(t.m, SlotStats::from_model(model, beta));
    r.beta = beta;
    r.p_error = b.p_error;
    r.evaluation = std::string(to_string(b.evaluation));
  } else if (t.method == "cpn_opt") {
    const BoundResult b = cpn_error_optimized(t.m, model, search);
    r.beta = b.beta_used;
    r.p_error = b.p_error;
    r.evaluation = std::string(to_string(b.evaluation));
  } else if (t.method == "greedy_limit") {
    r.beta = params.alpha;
    r.p_error = greedy_strong_pulse_limit(t.m, model);
    r.evaluation = "closed_form";
  } else if (t.method == "dp") {
    r.p_error = optimal_adaptive_error(t.m, model, default_dp_grid(), search);
    r.evaluation = "dp";
  } else if (t.method == "brute") {
    r.p_error = brute_force_tree_error(t.m, model, search);
    r.evaluation = "brute";
  } else {
    return evaluate_greedy(t, spec, params, model, search);
  }
  return r;
}

}  // namespace

Backend parse_backend(std::string_view name) {
  if (name == "auto") return Backend::automatic;
  if (name == "exact") return Backend::exact;
  if (name == "mc") return Backend::monte_carlo;
  throw ConfigError("unknown backend '" + std::string(name) + "' (expected auto, exact or mc)");
}

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> methods{"helstrom", "dd",           "cpn", "cpn_opt",
                                                "greedy",   "greedy_limit", "dp",  "brute"};
  return methods;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig3a", "fig3b", "fig4a", "fig4b", "fig5"};
  return names;
}

void SweepSpec::validate() const {
  for (int m : orders)
    if (m < 1) throw ConfigError("PPM order must be at least 1");
  for (double n : n_values)
    if (!std::isfinite(n) || n < 0.0) throw ConfigError("photon numbers must be finite and non-negative");
  for (double nb : n_b)
    if (!std::isfinite(nb) || nb < 0.0) throw ConfigError("noise must be finite and non-negative");
  for (double d : delta)
    if (!(d >= 0.0 && d <= 1.0)) throw ConfigError("mode mismatch must lie in [0, 1]");
  for (const auto& method : methods)
    if (std::find(known_methods().begin(), known_methods().end(), method) == known_methods().end())
      throw ConfigError("unknown method '" + method + "'");
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (threads < 0) throw ConfigError("threads must be non-negative");
  if (lut_points < 2) throw ConfigError("policy table needs at least 2 points");
  if (beta && !std::isfinite(*beta)) throw ConfigError("beta must be finite");
  if (beta_in && !std::isfinite(*beta_in)) throw ConfigError("beta-in must be finite");
}

std::vector<double> photon_grid(double lo, double hi, int count) {
  if (count < 0) throw ConfigError("number of grid points must be non-negative");
  if (count == 0) return {};
  if (count == 1) return {lo};
  if (!(lo > 0.0) || !(hi > lo)) throw ConfigError("log grid needs 0 < n-min < n-max");
  return log_space(lo, hi, count);
}

SweepSpec preset(std::string_view name) {
  SweepSpec spec;
  if (name == "fig3a" || name == "fig3b") {
    spec.orders = {4};
    spec.n_values = photon_grid(1e-2, 10.0, 16);
    spec.n_b = {name == "fig3a" ? 0.002 : 0.2};
    spec.delta = {0.0, 0.1};
    spec.methods = {"dd", "cpn_opt", "greedy", "dp"};
  } else if (name == "fig4a") {
    spec.orders = {32};
    spec.n_values = photon_grid(1e-2, 16.0, 12);
    spec.methods = {"helstrom", "dd", "cpn_opt", "greedy"};
  } else if (name == "fig4b") {
    spec.orders = {1024};
    spec.n_values = photon_grid(1e-1, 100.0, 16);
    spec.n_b = {0.002};
    spec.delta = {0.0, 0.01, 0.1};
    spec.methods = {"dd", "cpn_opt", "greedy", "greedy_limit"};
  } else if (name == "fig5") {
    // Placeholder noise levels for the low- and high-noise links; override with --nb.
    spec.orders = {128};
    spec.n_values = photon_grid(1e-1, 10.0, 16);
    spec.n_b = {1e-4, 1e-2};
    spec.delta = {0.1};
    spec.methods = {"helstrom", "dd", "cpn_opt", "greedy"};
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected fig3a, fig3b, fig4a, fig4b or fig5)");
  }
  return spec;
}

std::vector<SweepRecord> run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<Task> tasks;
  for (int m : spec.orders)
    for (double nb : spec.n_b)
      for (double d : spec.delta)
        for (double n : spec.n_values)
          for (const auto& method : spec.methods) {
            const std::uint64_t seed = TrialRng::for_trial(spec.seed, tasks.size())();
            tasks.push_back({m, n, nb, d, method, seed});
          }

  std::vector<SweepRecord> out(tasks.size());
  int workers = spec.threads == 0 ? static_cast<int>(std::thread::hardware_concurrency()) : spec.threads;
  workers = std::clamp<int>(workers, 1, std::max<int>(1, static_cast<int>(tasks.size())));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  const auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        out[i] = evaluate(tasks[i], spec);
      } catch (...) {
        std::lock_guard lock(failure_lock);
        if (!failure) failure = std::current_exception();
        next = tasks.size();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace ppm
