#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "ppm/channel.hpp"
#include "ppm/greedy.hpp"

namespace ppm {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// SplitMix64 stream. Each trial gets its own stream derived from
/// (master seed, trial index), so results do not depend on how trials are
/// distributed over threads.
class TrialRng {
 public:
  using result_type = std::uint64_t;

  explicit TrialRng(std::uint64_t state) : state_(state) {}
  static TrialRng for_trial(std::uint64_t master_seed, std::uint64_t trial);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in [0, n).
  int index(int n);
  bool bernoulli(double probability) { return uniform() < probability; }

 private:
  std::uint64_t state_;
};

enum class Receiver { dd, cpn, greedy };

std::string_view to_string(Receiver receiver);
Receiver parse_receiver(std::string_view name);

struct SimConfig {
  long long trials = 100000;
  std::uint64_t master_seed = 1;
  Receiver receiver = Receiver::dd;
  double beta = 0.0;     // CPN nulling displacement
  double beta_in = 0.0;  // greedy initial displacement
  std::shared_ptr<const PolicyTable> table;
  int threads = 1;  // 0 = hardware concurrency

  void validate() const;
};

struct SimResult {
  double p_error_hat = 0.0;
  double sigma = 0.0;         // Bernoulli standard error sqrt(p(1-p)/N)
  double sigma_sample = 0.0;  // standard error from the unbiased sample variance
  long long trials = 0;
  long long errors = 0;

  double errorbar() const { return 3.0 * sigma; }
};

SimResult simulate(const ChannelParams& params, const SimConfig& config);
SimResult simulate(const ClickModel& model, int m, const SimConfig& config);

/// 0-based index of the decision. Unique click wins; several clicks or none
/// are resolved uniformly at random among the candidates.
int dd_decide(std::span<const bool> clicks, TrialRng& rng);

/// Conditional pulse nulling on one frame. `clicked(slot, beta)` uses 1-based slots.
template <typename Outcome>
int cpn_decide(int m, double beta, Outcome&& clicked, TrialRng& rng) {
  int switchover = 0;
  for (int slot = 1; slot <= m; ++slot) {
    if (!clicked(slot, beta)) {
      switchover = slot;
      break;
    }
  }
  if (switchover == 0) return 1 + rng.index(m);
  int count = 0;
  int chosen = switchover;
  for (int slot = switchover + 1; slot <= m; ++slot) {
    if (clicked(slot, 0.0)) {
      // Reservoir sampling keeps a uniform choice among the clicked slots.
      ++count;
      if (rng.index(count) == 0) chosen = slot;
    }
  }
  return chosen;
}

/// Picks the greedy initial displacement by simulation with common random
/// numbers across candidates. Returns the best candidate.
double select_beta_in_mc(const ClickModel& model, int m, const std::shared_ptr<const PolicyTable>& table,
                         std::span<const double> candidates, long long trials, std::uint64_t seed, int threads = 1);

}  // namespace ppm
