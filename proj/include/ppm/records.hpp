#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ppm {

/// One evaluated (receiver, parameters) point.
struct SweepRecord {
  std::string method;  // helstrom, dd, cpn, cpn_opt, greedy, greedy_limit, exact, dp, brute
  int m = 1;
  double n = 0.0;
  double n_b = 0.0;
  double delta = 0.0;
  std::optional<double> beta;  // CPN displacement or greedy initial displacement
  double p_error = 0.0;
  double sigma = 0.0;  // zero for formulas and exact evaluations
  long long trials = 0;
  std::uint64_t seed = 0;
  std::string evaluation;  // closed_form, series, exact, dp, monte_carlo, ...

  bool operator==(const SweepRecord&) const = default;
};

enum class OutputFormat { csv, json };

OutputFormat parse_format(std::string_view name);

/// Shortest decimal form of x at 9 significant digits.
std::string format_number(double x);
/// x rounded to 9 significant digits.
double round_to_output(double x);

std::string csv_header();
std::string to_csv(const SweepRecord& record);
std::string to_json(const SweepRecord& record);

/// Header (CSV only) followed by one line per record.
void write_records(std::ostream& out, std::span<const SweepRecord> records, OutputFormat format);

/// Parses CSV produced by write_records; throws ConfigError on malformed input.
std::vector<SweepRecord> read_records_csv(std::istream& in);

}  // namespace ppm
