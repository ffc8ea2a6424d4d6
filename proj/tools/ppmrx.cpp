#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ppm/bounds.hpp"
#include "ppm/exact.hpp"
#include "ppm/fit.hpp"
#include "ppm/montecarlo.hpp"
#include "ppm/records.hpp"
#include "ppm/sweep.hpp"

using namespace ppm;

namespace {

enum Exit { kOk = 0, kConfig = 2, kCapacity = 3, kNumerical = 4 };

struct Options {
  std::string config;
  int m = 4;
  std::optional<double> alpha;
  std::optional<double> n;
  double n_min = 1e-2;
  double n_max = 10.0;
  int n_points = 16;
  double nb = 0.0;
  double delta = 0.0;
  std::optional<double> beta;
  std::optional<double> beta_in;
  long long trials = 100000;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string preset;
  std::string out;
  std::string format = "csv";
  bool signed_displacement = false;

  DisplacementDomain domain() const {
    return signed_displacement ? DisplacementDomain::signed_real : DisplacementDomain::non_negative;
  }

  // stats
  std::optional<double> beta_min;
  std::optional<double> beta_max;
  int beta_points = 31;
  // optimal
  int grid_points = kDefaultDpPoints;
  bool brute = false;
  // simulate / sweep
  std::string receiver;
  std::string lut = "auto";
  int lut_points = 1000;
  std::vector<std::string> methods;
  std::string backend = "auto";
  // lut query
  double r = 1.0;
  // fit
  std::string in;
  std::string mode = "photon_starved";
  double n_lo = 1e-3;
  double n_hi = 1e-1;
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw ConfigError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::vector<double> photons(const Options& o) {
  if (o.alpha) {
    if (!std::isfinite(*o.alpha) || *o.alpha < 0.0) throw ConfigError("alpha must be finite and non-negative");
    return {*o.alpha * *o.alpha};
  }
  if (o.n) return {*o.n};
  return photon_grid(o.n_min, o.n_max, o.n_points);
}

ChannelParams channel(const Options& o, double n) {
  if (o.m < 1) throw ConfigError("m must be at least 1");
  ChannelParams params = ChannelParams::from_photons(n, o.nb, o.delta, o.m);
  try {
    params.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return params;
}

double single_photon_number(const Options& o) {
  const auto grid = photons(o);
  if (grid.size() != 1) throw ConfigError("this command needs a single operating point (--n or --alpha)");
  return grid.front();
}

void emit(const Options& o, const std::vector<SweepRecord>& records) {
  Output out(o.out);
  write_records(out.stream(), records, parse_format(o.format));
}

SweepRecord record_for(const ChannelParams& p, std::string method) {
  SweepRecord r;
  r.method = std::move(method);
  r.m = p.m;
  r.n = p.photons();
  r.n_b = p.n_b;
  r.delta = p.delta;
  return r;
}

void run_stats(const Options& o) {
  const OutputFormat format = parse_format(o.format);
  Output out(o.out);
  auto& os = out.stream();
  if (format == OutputFormat::csv) os << "n,beta,q,p\n";
  if (o.beta_points < 1) throw ConfigError("beta-points must be at least 1");
  for (double n : photons(o)) {
    const ChannelParams params = channel(o, n);
    const PoissonClickModel model(params);
    const double lo = o.beta_min.value_or(0.0);
    const double hi = o.beta_max.value_or(params.alpha + 3.0);
    for (int i = 0; i < o.beta_points; ++i) {
      const double beta = o.beta_points == 1 ? lo : lo + (hi - lo) * i / (o.beta_points - 1);
      if (format == OutputFormat::csv) {
        os << format_number(n) << ',' << format_number(beta) << ',' << format_number(model.q(beta)) << ','
           << format_number(model.p(beta)) << '\n';
      } else {
        nlohmann::ordered_json j;
        j["n"] = round_to_output(n);
        j["beta"] = round_to_output(beta);
        j["q"] = round_to_output(model.q(beta));
        j["p"] = round_to_output(model.p(beta));
        os << j.dump() << '\n';
      }
    }
  }
}

void run_bounds(const Options& o) {
  std::vector<SweepRecord> rows;
  for (double n : photons(o)) {
    const ChannelParams params = channel(o, n);
    const PoissonClickModel model(params);
    const auto search = ScalarSearchConfig::for_model(model, o.domain());

    SweepRecord h = record_for(params, "helstrom");
    h.p_error = helstrom_error(params.m, n);
    h.evaluation = "closed_form";
    rows.push_back(h);

    const BoundResult dd = dd_error_detailed(params.m, model.q(0.0), model.p(0.0));
    SweepRecord d = record_for(params, "dd");
    d.p_error = dd.p_error;
    d.evaluation = std::string(to_string(dd.evaluation));
    rows.push_back(d);

    const double beta = o.beta.value_or(params.alpha);
    const BoundResult cpn = cpn_error_detailed(params.m, SlotStats::from_model(model, beta));
    SweepRecord c = record_for(params, "cpn");
    c.beta = beta;
    c.p_error = cpn.p_error;
    c.evaluation = std::string(to_string(cpn.evaluation));
    rows.push_back(c);

    const BoundResult opt = cpn_error_optimized(params.m, model, search);
    SweepRecord co = record_for(params, "cpn_opt");
    co.beta = opt.beta_used;
    co.p_error = opt.p_error;
    co.evaluation = std::string(to_string(opt.evaluation));
    rows.push_back(co);

    SweepRecord g = record_for(params, "greedy_limit");
    g.beta = params.alpha;
    g.p_error = greedy_strong_pulse_limit(params.m, model);
    g.evaluation = "closed_form";
    rows.push_back(g);
  }
  emit(o, rows);
}

void run_exact(const Options& o) {
  std::vector<SweepRecord> rows;
  for (double n : photons(o)) {
    const ChannelParams params = channel(o, n);
    const PoissonClickModel model(params);
    const auto search = ScalarSearchConfig::for_model(model, o.domain());
    SweepRecord r = record_for(params, "exact");
    if (o.beta_in) {
      r.beta = *o.beta_in;
      r.p_error = greedy_exact_error(params.m, *o.beta_in, model, search);
    } else {
      const GreedyOptimum best = greedy_exact_optimized(params.m, model, search);
      r.beta = best.beta_in;
      r.p_error = best.p_error;
    }
    r.evaluation = "exact";
    rows.push_back(r);
  }
  emit(o, rows);
}

void run_optimal(const Options& o) {
  std::vector<SweepRecord> rows;
  for (double n : photons(o)) {
    const ChannelParams params = channel(o, n);
    const PoissonClickModel model(params);
    const auto search = ScalarSearchConfig::for_model(model, o.domain());
    SweepRecord r = record_for(params, "dp");
    r.p_error = optimal_adaptive_error(params.m, model, GridConfig{kRatioMin, kRatioMax, o.grid_points}, search);
    r.evaluation = "dp";
    rows.push_back(r);
    if (o.brute) {
      SweepRecord b = record_for(params, "brute");
      b.p_error = brute_force_tree_error(params.m, model, search);
      b.evaluation = "brute";
      rows.push_back(b);
    }
  }
  emit(o, rows);
}

std::shared_ptr<const PolicyTable> table_for(const Options& o, const PoissonClickModel& model) {
  if (o.lut == "auto")
    return std::make_shared<const PolicyTable>(
        build_policy_table(model, GridConfig{kRatioMin, kRatioMax, o.lut_points}, o.domain()));
  std::ifstream in(o.lut);
  if (!in) throw ConfigError("cannot open policy table '" + o.lut + "'");
  try {
    return std::make_shared<const PolicyTable>(read_policy_table(in));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("policy table '") + o.lut + "': " + e.what());
  }
}

void run_simulate(const Options& o) {
  const Receiver receiver = parse_receiver(o.receiver);
  std::vector<SweepRecord> rows;
  for (double n : photons(o)) {
    const ChannelParams params = channel(o, n);
    const PoissonClickModel model(params);
    SimConfig config;
    config.trials = o.trials;
    config.master_seed = o.seed;
    config.receiver = receiver;
    config.threads = o.threads;
    SweepRecord r = record_for(params, std::string(to_string(receiver)));
    if (receiver == Receiver::cpn) {
      config.beta = o.beta.value_or(params.alpha);
      r.beta = config.beta;
    } else if (receiver == Receiver::greedy) {
      config.table = table_for(o, model);
      if (o.beta_in) {
        config.beta_in = *o.beta_in;
      } else {
        const auto candidates = beta_in_candidates(model, ScalarSearchConfig::for_model(model, o.domain()));
        config.beta_in = select_beta_in_mc(model, params.m, config.table, candidates,
                                           std::max<long long>(1000, o.trials / 20), ~o.seed, o.threads);
      }
      r.beta = config.beta_in;
    }
    const SimResult sim = simulate(params, config);
    r.p_error = sim.p_error_hat;
    r.sigma = sim.sigma;
    r.trials = sim.trials;
    r.seed = o.seed;
    r.evaluation = "monte_carlo";
    rows.push_back(r);
  }
  emit(o, rows);
}

void run_sweep_command(const Options& o, const CLI::App& root, const CLI::App& sub) {
  SweepSpec spec;
  if (!o.preset.empty()) {
    spec = preset(o.preset);
  } else if (o.methods.empty()) {
    throw ConfigError("sweep needs --preset or --methods");
  }
  const auto set = [&](const char* name) { return root.count(name) > 0; };
  if (set("--m")) spec.orders = {o.m};
  if (set("--alpha") || set("--n") || set("--n-min") || set("--n-max") || set("--n-points") || o.preset.empty())
    spec.n_values = photons(o);
  if (set("--nb") || o.preset.empty()) spec.n_b = {o.nb};
  if (set("--delta") || o.preset.empty()) spec.delta = {o.delta};
  if (!o.methods.empty()) spec.methods = o.methods;
  if (o.preset.empty()) spec.orders = {o.m};
  spec.trials = o.trials;
  spec.seed = o.seed;
  spec.threads = o.threads;
  spec.backend = parse_backend(o.backend);
  spec.lut_points = o.lut_points;
  spec.beta = o.beta;
  spec.beta_in = o.beta_in;
  spec.domain = o.domain();
  (void)sub;
  emit(o, run_sweep(spec));
}

void run_lut_build(const Options& o) {
  const ChannelParams params = channel(o, single_photon_number(o));
  const PolicyTable table =
      build_policy_table(PoissonClickModel(params), GridConfig{kRatioMin, kRatioMax, o.lut_points}, o.domain());
  Output out(o.out);
  write_policy_table(out.stream(), table);
}

void run_lut_query(const Options& o) {
  if (o.lut == "auto") throw ConfigError("lut query needs --lut FILE");
  const auto table = table_for(o, PoissonClickModel(ChannelParams{0.0, 0.0, 0.0, 1}));
  const GreedyAction& action = lookup(*table, o.r);
  Output out(o.out);
  auto& os = out.stream();
  const char* option = action.option == GreedyOption::A ? "A" : "B";
  if (parse_format(o.format) == OutputFormat::csv) {
    os << "r,option,beta,gain\n"
       << format_number(o.r) << ',' << option << ',' << format_number(action.beta) << ','
       << format_number(action.gain) << '\n';
  } else {
    nlohmann::ordered_json j;
    j["r"] = round_to_output(o.r);
    j["option"] = option;
    j["beta"] = round_to_output(action.beta);
    j["gain"] = round_to_output(action.gain);
    os << j.dump() << '\n';
  }
}

void run_fit(const Options& o) {
  std::vector<SweepRecord> records;
  if (o.in.empty() || o.in == "-") {
    records = read_records_csv(std::cin);
  } else {
    std::ifstream in(o.in);
    if (!in) throw ConfigError("cannot open input file '" + o.in + "'");
    records = read_records_csv(in);
  }
  const auto reports = fit_records(records, parse_fit_mode(o.mode), o.n_lo, o.n_hi);
  Output out(o.out);
  auto& os = out.stream();
  if (parse_format(o.format) == OutputFormat::csv) {
    os << fit_csv_header() << '\n';
    for (const auto& r : reports) os << to_csv(r) << '\n';
  } else {
    for (const auto& r : reports) {
      nlohmann::ordered_json j;
      j["method"] = r.method;
      j["m"] = r.m;
      j["nb"] = round_to_output(r.n_b);
      j["delta"] = round_to_output(r.delta);
      j["mode"] = std::string(to_string(r.mode));
      j["points"] = r.points;
      j["value"] = round_to_output(r.value);
      if (r.mode == FitMode::photon_starved) j["intercept"] = round_to_output(r.intercept);
      j["reference"] = r.reference ? nlohmann::ordered_json(round_to_output(*r.reference)) : nlohmann::ordered_json(nullptr);
      os << j.dump() << '\n';
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PPM coherent-state receiver toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file (alpha or n, nb, delta, m); flags override it");
  app.allow_config_extras(false);

  Options o;
  app.add_option("--m", o.m, "PPM order");
  auto* alpha = app.add_option("--alpha", o.alpha, "pulse amplitude (single operating point)");
  app.add_option("--n", o.n, "mean photons per pulse (single operating point)")->excludes(alpha);
  app.add_option("--n-min", o.n_min, "log grid lower end")->capture_default_str();
  app.add_option("--n-max", o.n_max, "log grid upper end")->capture_default_str();
  app.add_option("--n-points", o.n_points, "log grid size")->capture_default_str();
  app.add_option("--nb", o.nb, "noise photons per slot");
  app.add_option("--delta", o.delta, "mode mismatch");
  app.add_option("--beta", o.beta, "CPN displacement (default alpha)");
  app.add_option("--beta-in", o.beta_in, "greedy initial displacement (default optimised)");
  app.add_option("--trials", o.trials, "Monte Carlo trials")->capture_default_str();
  app.add_option("--seed", o.seed, "master seed")->capture_default_str();
  app.add_option("--threads", o.threads, "worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--preset", o.preset, "sweep preset: fig3a, fig3b, fig4a, fig4b, fig5");
  app.add_option("--out", o.out, "output file (default stdout)");
  app.add_option("--format", o.format, "csv or json")->capture_default_str();
  app.add_flag("--signed-displacement", o.signed_displacement, "search displacements of either sign");

  auto* stats = app.add_subcommand("stats", "no-click probabilities q and p over a displacement grid");
  stats->add_option("--beta-min", o.beta_min, "grid start (default 0)");
  stats->add_option("--beta-max", o.beta_max, "grid end (default alpha + 3)");
  stats->add_option("--beta-points", o.beta_points, "grid size")->capture_default_str();

  auto* bounds = app.add_subcommand("bounds", "Helstrom, DD, CPN and greedy strong-pulse error formulas");
  auto* exact = app.add_subcommand("exact", "greedy receiver error from its full decision tree");
  auto* optimal = app.add_subcommand("optimal", "optimal adaptive receiver by backward induction");
  optimal->add_option("--grid-points", o.grid_points, "value-function grid size")->capture_default_str();
  optimal->add_flag("--brute", o.brute, "also run the brute-force tree optimiser (M <= 3)");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo simulation of one receiver");
  sim->add_option("--receiver", o.receiver, "dd, cpn or greedy")->required();
  sim->add_option("--lut", o.lut, "policy table file, or auto")->capture_default_str();
  sim->add_option("--lut-points", o.lut_points, "points for an auto-built table")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "parameter sweep over receivers and bounds");
  sweep->add_option("--methods", o.methods, "helstrom, dd, cpn, cpn_opt, greedy, greedy_limit, dp, brute")
      ->delimiter(',');
  sweep->add_option("--backend", o.backend, "greedy backend: auto, exact or mc")->capture_default_str();
  sweep->add_option("--lut-points", o.lut_points, "policy table size for Monte Carlo greedy")->capture_default_str();

  auto* lut = app.add_subcommand("lut", "greedy policy tables");
  lut->require_subcommand(1);
  auto* lut_build = lut->add_subcommand("build", "build a policy table for one operating point");
  lut_build->add_option("--points", o.lut_points, "table size")->capture_default_str();
  auto* lut_query = lut->add_subcommand("query", "look up the action for a revision ratio");
  lut_query->add_option("--lut", o.lut, "policy table file")->required();
  lut_query->add_option("--r", o.r, "revision ratio")->required();

  auto* fit = app.add_subcommand("fit", "scaling fits over sweep output");
  fit->add_option("--in", o.in, "sweep CSV (default stdin)");
  fit->add_option("--mode", o.mode, "photon_starved or strong_pulse")->capture_default_str();
  fit->add_option("--n-lo", o.n_lo, "photon-starved window start")->capture_default_str();
  fit->add_option("--n-hi", o.n_hi, "photon-starved window end")->capture_default_str();

  for (auto* sub : {stats, bounds, exact, optimal, sim, sweep, lut, lut_build, lut_query, fit}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*stats) run_stats(o);
    else if (*bounds) run_bounds(o);
    else if (*exact) run_exact(o);
    else if (*optimal) run_optimal(o);
    else if (*sim) run_simulate(o);
    else if (*sweep) run_sweep_command(o, app, *sweep);
    else if (*lut_build) run_lut_build(o);
    else if (*lut_query) run_lut_query(o);
    else if (*fit) run_fit(o);
  } catch (const CapacityError& e) {
    std::cerr << "ppmrx: " << e.what() << '\n';
    return kCapacity;
  } catch (const NumericalDiagnostic& e) {
    std::cerr << "ppmrx: " << e.what() << '\n';
    return kNumerical;
  } catch (const ConfigError& e) {
    std::cerr << "ppmrx: " << e.what() << '\n';
    return kConfig;
  } catch (const DomainError& e) {
    std::cerr << "ppmrx: " << e.what() << '\n';
    return kConfig;
  }
  return kOk;
}
