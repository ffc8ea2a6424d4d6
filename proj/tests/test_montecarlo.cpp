#include <array>
#include <cmath>
#include <memory>

#include "doctest.h"
#include "ppm/bounds.hpp"
#include "ppm/exact.hpp"
#include "ppm/montecarlo.hpp"

using namespace ppm;

namespace {

// Raw no-click probabilities for an unshifted detector.
struct Fixed final : ClickModel {
  double q0, p0;
  Fixed(double q, double p) : q0(q), p0(p) {}
  double q(double) const override { return q0; }
  double p(double) const override { return p0; }
};

bool within(const SimResult& r, double expected, double sigmas = 3.0) {
  const double sigma = std::sqrt(expected * (1.0 - expected) / static_cast<double>(r.trials));
  return std::abs(r.p_error_hat - expected) <= sigmas * std::max(sigma, 1e-12);
}

}  // namespace

TEST_CASE("TrialRng streams are reproducible and distinct") {
  TrialRng a = TrialRng::for_trial(7, 3);
  TrialRng b = TrialRng::for_trial(7, 3);
  TrialRng c = TrialRng::for_trial(7, 4);
  TrialRng d = TrialRng::for_trial(8, 3);
  const auto first = a();
  CHECK(first == b());
  CHECK(first != c());
  CHECK(first != d());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const int k = a.index(5);
    CHECK(k >= 0);
    CHECK(k < 5);
  }
}

TEST_CASE("dd_decide") {
  TrialRng rng = TrialRng::for_trial(1, 0);
  const std::array<bool, 3> single{false, true, false};
  CHECK(dd_decide(single, rng) == 1);

  std::array<int, 3> counts{};
  const std::array<bool, 3> two{true, false, true};
  for (int i = 0; i < 20000; ++i) ++counts[static_cast<std::size_t>(dd_decide(two, rng))];
  CHECK(counts[1] == 0);
  CHECK(std::abs(counts[0] - 10000) < 400);

  std::array<int, 3> none_counts{};
  const std::array<bool, 3> none{false, false, false};
  for (int i = 0; i < 30000; ++i) ++none_counts[static_cast<std::size_t>(dd_decide(none, rng))];
  for (int n : none_counts) CHECK(std::abs(n - 10000) < 400);
}

TEST_CASE("cpn_decide") {
  TrialRng rng = TrialRng::for_trial(2, 0);
  const auto silent_first = [](int, double) { return false; };
  CHECK(cpn_decide(3, 1.0, silent_first, rng) == 1);

  // Slot 1 silent (switchover), only slot 3 clicks afterwards.
  const auto later_click = [](int slot, double) { return slot == 3; };
  CHECK(cpn_decide(4, 1.0, later_click, rng) == 3);

  // Every nulled slot clicks: uniform guess.
  std::array<int, 4> counts{};
  const auto all_click = [](int, double) { return true; };
  for (int i = 0; i < 40000; ++i) ++counts[static_cast<std::size_t>(cpn_decide(4, 1.0, all_click, rng) - 1)];
  for (int n : counts) CHECK(std::abs(n - 10000) < 400);

  // Switchover at slot 2, clicks at 3 and 5: uniform between them.
  std::array<int, 6> split{};
  const auto pattern = [](int slot, double) { return slot == 1 || slot == 3 || slot == 5; };
  for (int i = 0; i < 20000; ++i) ++split[static_cast<std::size_t>(cpn_decide(5, 1.0, pattern, rng))];
  CHECK(split[3] + split[5] == 20000);
  CHECK(std::abs(split[3] - 10000) < 400);
}

TEST_CASE("direct detection simulation matches its closed form") {
  const Fixed model(0.9, 0.5);
  SimConfig config;
  config.trials = 1000000;
  config.master_seed = 11;
  const SimResult r = simulate(model, 2, config);
  CHECK(within(r, 0.3));
  CHECK(r.sigma == doctest::Approx(std::sqrt(r.p_error_hat * (1.0 - r.p_error_hat) / 1e6)));
  CHECK(r.sigma_sample == doctest::Approx(r.sigma).epsilon(1e-5));
  CHECK(r.errorbar() == doctest::Approx(3.0 * r.sigma));
}

TEST_CASE("CPN simulation matches its closed form") {
  for (double n : {0.3, 2.0}) {
    for (double nb : {0.0, 0.05}) {
      const ChannelParams params = ChannelParams::from_photons(n, nb, 0.1, 6);
      const PoissonClickModel model(params);
      SimConfig config;
      config.trials = 200000;
      config.master_seed = 5;
      config.receiver = Receiver::cpn;
      config.beta = 0.9 * params.alpha;
      CHECK(within(simulate(params, config), cpn_error(6, config.beta, model)));
    }
  }
}

TEST_CASE("greedy simulation matches the decision tree") {
  for (double n : {0.5, 4.0}) {
    for (double nb : {0.0, 0.002}) {
      const ChannelParams params = ChannelParams::from_photons(n, nb, 0.0, 8);
      const PoissonClickModel model(params);
      auto table = std::make_shared<const PolicyTable>(build_policy_table(model, GridConfig{}));
      SimConfig config;
      config.trials = 1000000;
      config.master_seed = 99;
      config.receiver = Receiver::greedy;
      config.table = table;
      config.beta_in = 0.8 * params.alpha;
      const SimResult r = simulate(params, config);
      CHECK(within(r, greedy_table_tree(8, config.beta_in, *table, model).p_error));
      if (n == 4.0 && nb == 0.0)
        CHECK(within(r, greedy_exact_error(8, config.beta_in, model, ScalarSearchConfig::for_model(model))));
    }
  }
}

TEST_CASE("pure guessing without light") {
  const ChannelParams params{0.0, 0.0, 0.0, 5};
  const PoissonClickModel model(params);
  auto table = std::make_shared<const PolicyTable>(build_policy_table(model, GridConfig{1e-16, 1e16, 200}));
  for (Receiver receiver : {Receiver::dd, Receiver::cpn, Receiver::greedy}) {
    SimConfig config;
    config.trials = 100000;
    config.master_seed = 3;
    config.receiver = receiver;
    config.table = table;
    CHECK(within(simulate(params, config), 0.8));
  }
}

TEST_CASE("results do not depend on the number of threads") {
  const ChannelParams params = ChannelParams::from_photons(1.0, 0.01, 0.1, 16);
  auto table = std::make_shared<const PolicyTable>(build_policy_table(PoissonClickModel(params), GridConfig{}));
  for (Receiver receiver : {Receiver::dd, Receiver::cpn, Receiver::greedy}) {
    SimConfig config;
    config.trials = 20001;
    config.master_seed = 42;
    config.receiver = receiver;
    config.beta = params.alpha;
    config.beta_in = params.alpha;
    config.table = table;
    const SimResult one = simulate(params, config);
    for (int threads : {2, 3, 7}) {
      config.threads = threads;
      const SimResult many = simulate(params, config);
      CHECK(many.errors == one.errors);
      CHECK(many.p_error_hat == one.p_error_hat);
    }
  }
}

TEST_CASE("configuration errors") {
  const ChannelParams params{1.0, 0.0, 0.0, 4};
  SimConfig config;
  config.receiver = Receiver::greedy;
  CHECK_THROWS_AS(simulate(params, config), ConfigError);
  config.receiver = Receiver::dd;
  config.trials = 0;
  CHECK_THROWS_AS(simulate(params, config), ConfigError);

  config.trials = 10;
  config.receiver = Receiver::greedy;
  config.table = std::make_shared<const PolicyTable>(
      build_policy_table(PoissonClickModel(ChannelParams{2.0, 0.0, 0.0, 4}), GridConfig{1e-4, 1e4, 20}));
  CHECK_THROWS_AS(simulate(params, config), ConfigError);

  CHECK(parse_receiver("cpn") == Receiver::cpn);
  CHECK(to_string(Receiver::greedy) == "greedy");
  CHECK_THROWS_AS(parse_receiver("kennedy"), ConfigError);
}

TEST_CASE("1000-point and 10000-point tables give consistent simulations") {
  const ChannelParams params = ChannelParams::from_photons(0.5, 0.002, 0.1, 32);
  const PoissonClickModel model(params);
  SimConfig config;
  config.trials = 200000;
  config.master_seed = 17;
  config.receiver = Receiver::greedy;
  config.beta_in = 0.5 * params.alpha;
  config.table = std::make_shared<const PolicyTable>(build_policy_table(model, GridConfig{}));
  const SimResult coarse = simulate(params, config);
  config.table = std::make_shared<const PolicyTable>(build_policy_table(model, GridConfig{1e-16, 1e16, 10000}));
  config.master_seed = 18;
  const SimResult fine = simulate(params, config);
  CHECK(std::abs(coarse.p_error_hat - fine.p_error_hat) <=
        3.0 * std::hypot(coarse.sigma, fine.sigma));
}

TEST_CASE("Monte Carlo choice of the initial displacement") {
  const ChannelParams params = ChannelParams::from_photons(9.0, 0.002, 0.0, 8);
  const PoissonClickModel model(params);
  auto table = std::make_shared<const PolicyTable>(build_policy_table(model, GridConfig{}));
  const std::array<double, 3> candidates{0.0, 1.5, params.alpha};
  CHECK(select_beta_in_mc(model, 8, table, candidates, 20000, 1, 1) == params.alpha);
  CHECK_THROWS_AS(select_beta_in_mc(model, 8, table, std::span<const double>(), 10, 1, 1), ConfigError);
}
