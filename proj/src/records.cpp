#include "ppm/records.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "ppm/montecarlo.hpp"

namespace ppm {

namespace {

constexpr std::string_view kHeader = "method,m,n,nb,delta,beta,p_error,sigma,trials,seed,evaluation";
constexpr std::size_t kColumns = 11;

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_double(std::string_view field, std::size_t line_no) {
  const std::string text(field);
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size())
    throw ConfigError("line " + std::to_string(line_no) + ": bad number '" + text + "'");
  return value;
}

template <typename Int>
Int parse_int(std::string_view field, std::size_t line_no) {
  Int value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw ConfigError("line " + std::to_string(line_no) + ": bad integer '" + std::string(field) + "'");
  return value;
}

}  // namespace

OutputFormat parse_format(std::string_view name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  throw ConfigError("unknown output format '" + std::string(name) + "' (expected csv or json)");
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

double round_to_output(double x) { return std::strtod(format_number(x).c_str(), nullptr); }

std::string csv_header() { return std::string(kHeader); }

std::string to_csv(const SweepRecord& r) {
  std::string line = r.method;
  line += ',' + std::to_string(r.m);
  line += ',' + format_number(r.n);
  line += ',' + format_number(r.n_b);
  line += ',' + format_number(r.delta);
  line += ',' + (r.beta ? format_number(*r.beta) : std::string());
  line += ',' + format_number(r.p_error);
  line += ',' + format_number(r.sigma);
  line += ',' + std::to_string(r.trials);
  line += ',' + std::to_string(r.seed);
  line += ',' + r.evaluation;
  return line;
}

std::string to_json(const SweepRecord& r) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["m"] = r.m;
  j["n"] = round_to_output(r.n);
  j["nb"] = round_to_output(r.n_b);
  j["delta"] = round_to_output(r.delta);
  j["beta"] = r.beta ? nlohmann::ordered_json(round_to_output(*r.beta)) : nlohmann::ordered_json(nullptr);
  j["p_error"] = round_to_output(r.p_error);
  j["sigma"] = round_to_output(r.sigma);
  j["trials"] = r.trials;
  j["seed"] = r.seed;
  j["evaluation"] = r.evaluation;
  return j.dump();
}

void write_records(std::ostream& out, std::span<const SweepRecord> records, OutputFormat format) {
  if (format == OutputFormat::csv) {
    out << kHeader << '\n';
    for (const auto& r : records) out << to_csv(r) << '\n';
  } else {
    for (const auto& r : records) out << to_json(r) << '\n';
  }
}

std::vector<SweepRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw ConfigError("missing or unexpected CSV header");
  std::vector<SweepRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != kColumns)
      throw ConfigError("line " + std::to_string(line_no) + ": expected " + std::to_string(kColumns) + " columns");
    SweepRecord r;
    r.method = std::string(f[0]);
    r.m = parse_int<int>(f[1], line_no);
    r.n = parse_double(f[2], line_no);
    r.n_b = parse_double(f[3], line_no);
    r.delta = parse_double(f[4], line_no);
    if (!f[5].empty()) r.beta = parse_double(f[5], line_no);
    r.p_error = parse_double(f[6], line_no);
    r.sigma = parse_double(f[7], line_no);
    r.trials = parse_int<long long>(f[8], line_no);
    r.seed = parse_int<std::uint64_t>(f[9], line_no);
    r.evaluation = std::string(f[10]);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace ppm
