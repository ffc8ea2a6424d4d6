#include "ppm/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace ppm {

namespace {

constexpr std::string_view kTableMagic = "# ppm-greedy-lut v1";

bool better(double gain, double beta, const GreedyAction& current) {
  if (gain != current.gain) return gain > current.gain;
  return beta < current.beta;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& text, const char* what) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw DomainError(std::string("policy table: bad ") + what + " '" + text + "'");
  }
  if (used != text.size()) throw DomainError(std::string("policy table: bad ") + what + " '" + text + "'");
  return value;
}

}  // namespace

double clamp_ratio(double r) {
  if (std::isnan(r)) return kRatioMax;
  return std::clamp(r, kRatioMin, kRatioMax);
}

std::string_view to_string(GreedyOption option) { return option == GreedyOption::A ? "A" : "B"; }

BranchMultipliers branch_multipliers(double r, double q_beta, double p_beta) {
  return {q_beta + r * (1.0 - p_beta), r * p_beta + (1.0 - q_beta)};
}

BranchMultipliers branch_multipliers(double r, double beta, const ClickModel& model) {
  return branch_multipliers(r, model.q(beta), model.p(beta));
}

GreedyAction greedy_choice(double r, const ClickModel& model, const ScalarSearchConfig& search) {
  if (!(r > 0.0)) throw DomainError("revision ratio must be positive");
  const ScalarOptimum best_a = maximize([&](double beta) { return branch_multipliers(r, beta, model).p_a; }, search);
  const ScalarOptimum best_b = maximize([&](double beta) { return branch_multipliers(r, beta, model).p_b; }, search);

  GreedyAction choice{GreedyOption::A, best_a.x, best_a.value};
  if (better(best_b.value, best_b.x, choice)) choice = {GreedyOption::B, best_b.x, best_b.value};
  // Large-displacement limits where the slot always clicks: A always moves (gain r), B always keeps (gain 1).
  if (better(r, search.upper, choice)) choice = {GreedyOption::A, search.upper, r};
  if (better(1.0, search.upper, choice)) choice = {GreedyOption::B, search.upper, 1.0};
  return choice;
}

GreedyState initial_state(double beta_in, bool clicked, const ClickModel& model) {
  if (!std::isfinite(beta_in)) throw DomainError("initial displacement must be finite");
  const double q = model.q(beta_in);
  const double p = model.p(beta_in);
  const double ratio = clicked ? (1.0 - q) / (1.0 - p) : q / p;
  return {1, clamp_ratio(ratio)};
}

GreedyState update_state(const GreedyState& state, const GreedyAction& action, bool clicked, int slot,
                         const ClickModel& model) {
  const bool moves = (action.option == GreedyOption::A) == clicked;
  if (!moves) return state;
  const double q = model.q(action.beta);
  const double p = model.p(action.beta);
  const double ratio = clicked ? (1.0 - q) / (1.0 - p) : q / p;
  return {slot, clamp_ratio(ratio)};
}

void GridConfig::validate() const {
  if (!(r_min > 0.0) || !(r_max > r_min) || !std::isfinite(r_max)) throw DomainError("ratio grid needs 0 < r_min < r_max");
  if (count < 2) throw DomainError("ratio grid needs at least 2 points");
}

PolicyTable build_policy_table(const ClickModel& model, const GridConfig& grid, const ScalarSearchConfig& search) {
  grid.validate();
  PolicyTable table;
  table.grid = grid;
  table.ratio_grid = log_space(grid.r_min, grid.r_max, grid.count);
  table.actions.reserve(table.ratio_grid.size());
  for (double r : table.ratio_grid) table.actions.push_back(greedy_choice(r, model, search));
  return table;
}

PolicyTable build_policy_table(const PoissonClickModel& model, const GridConfig& grid, DisplacementDomain domain) {
  PolicyTable table = build_policy_table(model, grid, ScalarSearchConfig::for_model(model, domain));
  table.params = model.params();
  return table;
}

std::size_t lookup_index(const PolicyTable& table, double r) {
  const auto& g = table.ratio_grid;
  if (g.empty()) throw DomainError("empty policy table");
  if (!(r > g.front())) return 0;
  if (r >= g.back()) return g.size() - 1;
  const auto upper = std::upper_bound(g.begin(), g.end(), r);
  const std::size_t hi = static_cast<std::size_t>(upper - g.begin());
  const std::size_t lo = hi - 1;
  const double lr = std::log(r);
  const double lg_lo = std::log(g[lo]);
  const double lg_hi = std::log(g[hi]);
  const double to_lo = lr - lg_lo;
  const double to_hi = lg_hi - lr;
  // Ties are judged relative to the local spacing so a midpoint computed in
  // floating point still resolves downward.
  const double tie = 1e-9 * (lg_hi - lg_lo);
  return (to_hi < to_lo - tie) ? hi : lo;
}

const GreedyAction& lookup(const PolicyTable& table, double r) { return table.actions[lookup_index(table, r)]; }

void write_policy_table(std::ostream& out, const PolicyTable& table) {
  out << kTableMagic;
  if (table.params) {
    out << " alpha=" << format_double(table.params->alpha) << " nb=" << format_double(table.params->n_b)
        << " delta=" << format_double(table.params->delta) << " m=" << table.params->m;
  }
  out << " r_min=" << format_double(table.grid.r_min) << " r_max=" << format_double(table.grid.r_max)
      << " points=" << table.size() << '\n';
  out << "r,option,beta,gain\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    const GreedyAction& a = table.actions[i];
    out << format_double(table.ratio_grid[i]) << ',' << to_string(a.option) << ',' << format_double(a.beta) << ','
        << format_double(a.gain) << '\n';
  }
}

PolicyTable read_policy_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kTableMagic, 0) != 0)
    throw DomainError("policy table: missing '# ppm-greedy-lut v1' header");

  PolicyTable table;
  ChannelParams params;
  bool has_alpha = false;
  std::size_t points = 0;
  std::istringstream header(line.substr(kTableMagic.size()));
  std::string token;
  while (header >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw DomainError("policy table: bad header token '" + token + "'");
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "alpha") {
      params.alpha = parse_double(value, "alpha");
      has_alpha = true;
    } else if (key == "nb") {
      params.n_b = parse_double(value, "nb");
    } else if (key == "delta") {
      params.delta = parse_double(value, "delta");
    } else if (key == "m") {
      params.m = static_cast<int>(parse_double(value, "m"));
    } else if (key == "r_min") {
      table.grid.r_min = parse_double(value, "r_min");
    } else if (key == "r_max") {
      table.grid.r_max = parse_double(value, "r_max");
    } else if (key == "points") {
      points = static_cast<std::size_t>(parse_double(value, "points"));
    } else {
      throw DomainError("policy table: unknown header key '" + key + "'");
    }
  }
  if (has_alpha) {
    params.validate();
    table.params = params;
  }

  if (!std::getline(in, line) || line.rfind("r,option,beta", 0) != 0)
    throw DomainError("policy table: missing column header");

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() < 3) throw DomainError("policy table: short row '" + line + "'");
    GreedyAction action;
    if (cells[1] == "A") {
      action.option = GreedyOption::A;
    } else if (cells[1] == "B") {
      action.option = GreedyOption::B;
    } else {
      throw DomainError("policy table: bad option '" + cells[1] + "'");
    }
    action.beta = parse_double(cells[2], "beta");
    if (cells.size() > 3) action.gain = parse_double(cells[3], "gain");
    table.ratio_grid.push_back(parse_double(cells[0], "ratio"));
    table.actions.push_back(action);
  }

  if (table.size() < 2) throw DomainError("policy table: needs at least 2 rows");
  if (points != 0 && points != table.size()) throw DomainError("policy table: row count does not match header");
  if (!std::is_sorted(table.ratio_grid.begin(), table.ratio_grid.end()) ||
      std::adjacent_find(table.ratio_grid.begin(), table.ratio_grid.end()) != table.ratio_grid.end())
    throw DomainError("policy table: ratio grid must be strictly increasing");
  table.grid.count = static_cast<int>(table.size());
  return table;
}

std::vector<double> beta_in_candidates(const ClickModel& model, const ScalarSearchConfig& search, int count) {
  if (count < 2) throw DomainError("need at least 2 initial-displacement candidates");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count) + 4);
  const double step = (search.upper - search.lower) / (count - 1);
  for (int i = 0; i < count; ++i) out.push_back(i == count - 1 ? search.upper : search.lower + step * i);
  for (double x : model.special_points())
    if (x >= search.lower && x <= search.upper) out.push_back(x);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace ppm
