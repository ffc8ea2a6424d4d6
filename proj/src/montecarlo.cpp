#include "ppm/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <thread>

namespace ppm {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct FrameSim {
  const ClickModel& model;
  int m;
  const SimConfig& config;
  double q0_click;
  double p0_click;

  bool run_trial(long long trial) const {
    TrialRng rng = TrialRng::for_trial(config.master_seed, static_cast<std::uint64_t>(trial));
    const int x = 1 + rng.index(m);
    const auto clicked = [&](int slot, double beta) {
      const double click = slot == x ? 1.0 - model.p(beta) : 1.0 - model.q(beta);
      return rng.bernoulli(click);
    };
    int y = 0;
    switch (config.receiver) {
      case Receiver::dd: {
        const auto pattern = std::make_unique<bool[]>(static_cast<std::size_t>(m));
        for (int slot = 1; slot <= m; ++slot)
          pattern[static_cast<std::size_t>(slot - 1)] = rng.bernoulli(slot == x ? p0_click : q0_click);
        y = 1 + dd_decide(std::span<const bool>(pattern.get(), static_cast<std::size_t>(m)), rng);
        break;
      }
      case Receiver::cpn:
        y = cpn_decide(m, config.beta, clicked, rng);
        break;
      case Receiver::greedy:
        y = run_frame(m, config.beta_in, *config.table, clicked, model);
        break;
    }
    return y != x;
  }
};

}  // namespace

TrialRng TrialRng::for_trial(std::uint64_t master_seed, std::uint64_t trial) {
  return TrialRng(mix64(mix64(master_seed) ^ (trial * kGamma + kGamma)));
}

TrialRng::result_type TrialRng::operator()() {
  state_ += kGamma;
  return mix64(state_);
}

double TrialRng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

int TrialRng::index(int n) {
  // Multiply-shift; bias is below n / 2^64.
  const unsigned __int128 wide = static_cast<unsigned __int128>((*this)()) * static_cast<unsigned>(n);
  return static_cast<int>(wide >> 64);
}

std::string_view to_string(Receiver receiver) {
  switch (receiver) {
    case Receiver::dd: return "dd";
    case Receiver::cpn: return "cpn";
    case Receiver::greedy: return "greedy";
  }
  return "unknown";
}

Receiver parse_receiver(std::string_view name) {
  if (name == "dd") return Receiver::dd;
  if (name == "cpn") return Receiver::cpn;
  if (name == "greedy") return Receiver::greedy;
  throw ConfigError("unknown receiver '" + std::string(name) + "' (expected dd, cpn or greedy)");
}

void SimConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (threads < 0) throw ConfigError("threads must be non-negative");
  if (receiver == Receiver::cpn && !std::isfinite(beta)) throw ConfigError("CPN displacement must be finite");
  if (receiver == Receiver::greedy) {
    if (!table) throw ConfigError("greedy simulation requires a policy table");
    if (!std::isfinite(beta_in)) throw ConfigError("initial displacement must be finite");
  }
}

int dd_decide(std::span<const bool> clicks, TrialRng& rng) {
  const int m = static_cast<int>(clicks.size());
  const int count = static_cast<int>(std::count(clicks.begin(), clicks.end(), true));
  if (count == 0) return rng.index(m);
  int pick = count == 1 ? 0 : rng.index(count);
  for (int i = 0; i < m; ++i) {
    if (clicks[static_cast<std::size_t>(i)] && pick-- == 0) return i;
  }
  return m - 1;
}

SimResult simulate(const ClickModel& model, int m, const SimConfig& config) {
  if (m < 1) throw DomainError("PPM order must be at least 1");
  config.validate();
  if (config.receiver == Receiver::greedy && config.table->params) {
    // Tables built for another channel silently give wrong displacements.
    if (const auto* poisson = dynamic_cast<const PoissonClickModel*>(&model)) {
      const ChannelParams& a = *config.table->params;
      const ChannelParams& b = poisson->params();
      if (a.alpha != b.alpha || a.n_b != b.n_b || a.delta != b.delta)
        throw ConfigError("policy table was built for different channel parameters");
    }
  }

  const FrameSim sim{model, m, config, 1.0 - model.q(0.0), 1.0 - model.p(0.0)};
  const long long trials = config.trials;
  int workers = config.threads == 0 ? static_cast<int>(std::thread::hardware_concurrency()) : config.threads;
  workers = static_cast<int>(std::clamp<long long>(workers, 1, trials));

  std::vector<long long> errors(static_cast<std::size_t>(workers), 0);
  const auto work = [&](int w) {
    const long long begin = trials * w / workers;
    const long long end = trials * (w + 1) / workers;
    long long local = 0;
    for (long long t = begin; t < end; ++t) local += sim.run_trial(t) ? 1 : 0;
    errors[static_cast<std::size_t>(w)] = local;
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  SimResult result;
  result.trials = trials;
  for (long long e : errors) result.errors += e;
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(result.errors) / n;
  result.p_error_hat = phat;
  result.sigma = std::sqrt(phat * (1.0 - phat) / n);
  if (trials > 1) {
    const double variance = (static_cast<double>(result.errors) - static_cast<double>(result.errors) * phat) / (n - 1.0);
    result.sigma_sample = std::sqrt(variance / n);
  }
  return result;
}

SimResult simulate(const ChannelParams& params, const SimConfig& config) {
  const PoissonClickModel model(params);
  return simulate(model, params.m, config);
}

double select_beta_in_mc(const ClickModel& model, int m, const std::shared_ptr<const PolicyTable>& table,
                         std::span<const double> candidates, long long trials, std::uint64_t seed, int threads) {
  if (candidates.empty()) throw ConfigError("no initial-displacement candidates");
  SimConfig config;
  config.trials = trials;
  config.master_seed = seed;
  config.receiver = Receiver::greedy;
  config.table = table;
  config.threads = threads;
  double best_beta = candidates.front();
  long long best_errors = -1;
  for (double beta_in : candidates) {
    config.beta_in = beta_in;
    const long long errors = simulate(model, m, config).errors;
    if (best_errors < 0 || errors < best_errors || (errors == best_errors && beta_in < best_beta)) {
      best_errors = errors;
      best_beta = beta_in;
    }
  }
  return best_beta;
}

}  // namespace ppm
