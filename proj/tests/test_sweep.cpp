#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "ppm/bounds.hpp"
#include "ppm/channel.hpp"
#include "ppm/exact.hpp"
#include "ppm/fit.hpp"
#include "ppm/montecarlo.hpp"
#include "ppm/records.hpp"
#include "ppm/sweep.hpp"

using namespace ppm;

namespace {

std::vector<SweepRecord> curve(const std::string& method, int m, const std::vector<double>& ns) {
  SweepSpec spec;
  spec.orders = {m};
  spec.n_values = ns;
  spec.methods = {method};
  return run_sweep(spec);
}

std::string render(const std::vector<SweepRecord>& records, OutputFormat format) {
  std::ostringstream os;
  write_records(os, records, format);
  return os.str();
}

}  // namespace

TEST_CASE("dB gap") {
  CHECK(db_gap(0.1, 0.1) == doctest::Approx(0.0));
  CHECK(db_gap(0.2, 0.1) == doctest::Approx(3.0103).epsilon(1e-5));
  CHECK(db_gap(0.01, 0.1) == doctest::Approx(-10.0));
  CHECK(db_gap(0.03, 0.07) == doctest::Approx(-db_gap(0.07, 0.03)));
  CHECK_THROWS_AS(db_gap(0.0, 0.1), DomainError);
  CHECK_THROWS_AS(db_gap(0.1, 1.5), DomainError);
}

TEST_CASE("photon-starved slopes: Helstrom one half, nulling receivers one") {
  const auto ns = photon_grid(1e-3, 1e-1, 12);
  const auto helstrom = fit_photon_starved(curve("helstrom", 4, ns));
  CHECK(helstrom.points == 12);
  CHECK(helstrom.value == doctest::Approx(0.5).epsilon(0.04));
  const auto cpn = fit_photon_starved(curve("cpn", 4, ns));
  CHECK(cpn.value == doctest::Approx(1.0).epsilon(0.05));
  // An optimised displacement interferes linearly with the pulse amplitude.
  const auto cpn_opt = fit_photon_starved(curve("cpn_opt", 4, ns));
  CHECK(cpn_opt.value < 0.7);
  const auto dd = fit_photon_starved(curve("dd", 4, ns));
  CHECK(dd.value == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("photon-starved fit window and errors") {
  const auto records = curve("dd", 4, photon_grid(1e-4, 1.0, 21));
  const auto fit = fit_photon_starved(records, 1e-3, 1e-1);
  const auto inside = std::count_if(records.begin(), records.end(), [](const auto& r) { return r.n >= 1e-3 && r.n <= 1e-1; });
  CHECK(fit.points == static_cast<std::size_t>(inside));
  CHECK(fit.points >= 9);
  CHECK_THROWS_AS(fit_photon_starved(records, 1e-3, 2e-3), ConfigError);

  auto reversed = records;
  std::reverse(reversed.begin(), reversed.end());
  CHECK_THROWS_AS(fit_photon_starved(reversed), NumericalDiagnostic);

  auto mixed = records;
  mixed[3].m = 8;
  CHECK_THROWS_AS(fit_photon_starved(mixed), ConfigError);
}

TEST_CASE("strong-pulse plateau matches the greedy limit") {
  SweepSpec spec;
  spec.orders = {16};
  spec.n_values = photon_grid(1.0, 100.0, 9);
  spec.n_b = {0.002};
  spec.delta = {0.1};
  spec.methods = {"greedy_limit"};
  const auto records = run_sweep(spec);
  const auto fit = fit_strong_pulse(records);
  CHECK(fit.points == 3);
  REQUIRE(fit.reference);
  CHECK(fit.value == doctest::Approx(*fit.reference).epsilon(0.05));
  CHECK_THROWS_AS(fit_strong_pulse(std::span(records).first(5)), ConfigError);
}

TEST_CASE("fit_records groups by receiver and channel") {
  SweepSpec spec;
  spec.orders = {4};
  spec.n_values = photon_grid(1e-3, 1e-1, 8);
  spec.n_b = {0.0, 0.01};
  spec.methods = {"dd", "cpn"};
  const auto reports = fit_records(run_sweep(spec), FitMode::photon_starved);
  REQUIRE(reports.size() == 4);
  CHECK(reports[0].method == "dd");
  CHECK(reports[1].method == "cpn");
  CHECK(reports[2].n_b == 0.01);
  for (const auto& r : reports) CHECK(r.points == 8);
}

TEST_CASE("CSV output has one header and 9 significant digits") {
  SweepRecord r;
  r.method = "cpn";
  r.m = 4;
  r.n = 1.0 / 3.0;
  r.beta = std::sqrt(2.0);
  r.p_error = 0.123456789123;
  r.evaluation = "series";
  const std::string text = render({r, r}, OutputFormat::csv);
  CHECK(text.rfind(csv_header() + "\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(to_csv(r) == "cpn,4,0.333333333,0,0,1.41421356,0.123456789,0,0,0,series");
  r.beta.reset();
  CHECK(to_csv(r) == "cpn,4,0.333333333,0,0,,0.123456789,0,0,0,series");
}

TEST_CASE("CSV round trip re-emits identical bytes") {
  SweepSpec spec;
  spec.orders = {4};
  spec.n_values = photon_grid(1e-2, 10.0, 5);
  spec.n_b = {0.002};
  spec.delta = {0.1};
  spec.methods = {"helstrom", "dd", "cpn", "cpn_opt", "greedy", "greedy_limit"};
  spec.backend = Backend::monte_carlo;
  spec.trials = 2000;
  const auto records = run_sweep(spec);
  const std::string text = render(records, OutputFormat::csv);

  std::istringstream in(text);
  const auto parsed = read_records_csv(in);
  REQUIRE(parsed.size() == records.size());
  CHECK(render(parsed, OutputFormat::csv) == text);
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    CHECK(parsed[i].method == records[i].method);
    CHECK(parsed[i].n == round_to_output(records[i].n));
    CHECK(parsed[i].p_error == round_to_output(records[i].p_error));
    CHECK(parsed[i].seed == records[i].seed);
    CHECK(parsed[i].beta.has_value() == records[i].beta.has_value());
  }
}

TEST_CASE("CSV reader rejects malformed input") {
  std::istringstream no_header("dd,4,1,0,0,,0.3,0,0,0,series\n");
  CHECK_THROWS_AS(read_records_csv(no_header), ConfigError);
  std::istringstream short_row(csv_header() + "\ndd,4,1,0\n");
  CHECK_THROWS_AS(read_records_csv(short_row), ConfigError);
  std::istringstream bad_number(csv_header() + "\ndd,4,x,0,0,,0.3,0,0,0,series\n");
  CHECK_THROWS_AS(read_records_csv(bad_number), ConfigError);
  CHECK_THROWS_AS(parse_format("xml"), ConfigError);
}

TEST_CASE("JSON lines carry the same fields") {
  SweepRecord r;
  r.method = "dd";
  r.m = 4;
  r.n = 1.0;
  r.p_error = 0.3;
  r.evaluation = "series";
  const std::string line = to_json(r);
  CHECK(line.find("\"method\":\"dd\"") != std::string::npos);
  CHECK(line.find("\"beta\":null") != std::string::npos);
  CHECK(line.find('\n') == std::string::npos);
  CHECK(render({r, r}, OutputFormat::json) == line + "\n" + line + "\n");
}

TEST_CASE("empty photon grid gives no rows") {
  CHECK(photon_grid(1e-2, 10.0, 0).empty());
  CHECK(photon_grid(0.5, 10.0, 1) == std::vector<double>{0.5});
  CHECK_THROWS_AS(photon_grid(0.0, 10.0, 4), ConfigError);
  SweepSpec spec;
  spec.methods = {"dd"};
  CHECK(run_sweep(spec).empty());
  CHECK(render({}, OutputFormat::csv) == csv_header() + "\n");
}

TEST_CASE("presets") {
  const auto fig4a = preset("fig4a");
  CHECK(fig4a.orders == std::vector<int>{32});
  CHECK(fig4a.methods == std::vector<std::string>{"helstrom", "dd", "cpn_opt", "greedy"});
  const auto fig3a = preset("fig3a");
  CHECK(std::find(fig3a.methods.begin(), fig3a.methods.end(), "dp") != fig3a.methods.end());
  CHECK(fig3a.n_b == std::vector<double>{0.002});
  CHECK(preset("fig3b").n_b == std::vector<double>{0.2});
  CHECK(preset("fig4b").orders == std::vector<int>{1024});
  CHECK(preset("fig5").orders == std::vector<int>{128});
  for (const auto& name : preset_names()) CHECK_NOTHROW(preset(name).validate());
  CHECK_THROWS_AS(preset("fig9"), ConfigError);
}

TEST_CASE("sweep validation") {
  SweepSpec spec;
  spec.n_values = {1.0};
  spec.methods = {"magic"};
  CHECK_THROWS_AS(run_sweep(spec), ConfigError);
  spec.methods = {"greedy"};
  spec.orders = {1024};
  spec.backend = Backend::exact;
  CHECK_THROWS_AS(run_sweep(spec), CapacityError);
  spec.orders = {0};
  CHECK_THROWS_AS(run_sweep(spec), ConfigError);
  CHECK_THROWS_AS(parse_backend("gpu"), ConfigError);
}

TEST_CASE("sweep rows are ordered and independent of the thread count") {
  SweepSpec spec;
  spec.orders = {16};
  spec.n_values = photon_grid(0.1, 10.0, 4);
  spec.n_b = {0.002};
  spec.delta = {0.0, 0.1};
  spec.methods = {"dd", "greedy"};
  spec.backend = Backend::monte_carlo;
  spec.trials = 3000;
  spec.seed = 11;
  spec.threads = 1;
  const auto serial = run_sweep(spec);
  spec.threads = 4;
  const auto parallel = run_sweep(spec);
  CHECK(serial == parallel);
  REQUIRE(serial.size() == 16);
  CHECK(serial[0].method == "dd");
  CHECK(serial[1].method == "greedy");
  CHECK(serial[1].evaluation == "monte_carlo");
  CHECK(serial[1].trials == 3000);
  CHECK(serial[8].delta == 0.1);
  CHECK(serial[1].seed != serial[3].seed);
}

TEST_CASE("automatic backend is exact for small M") {
  SweepSpec spec;
  spec.orders = {4};
  spec.n_values = {1.0};
  spec.methods = {"greedy"};
  const auto rows = run_sweep(spec);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].evaluation == "exact");
  CHECK(rows[0].sigma == 0.0);
  const PoissonClickModel model(ChannelParams::from_photons(1.0, 0.0, 0.0, 4));
  CHECK(rows[0].p_error == doctest::Approx(greedy_exact_optimized(4, model, ScalarSearchConfig::for_model(model)).p_error));
  CHECK(rows[0].p_error < dd_error(4, model));
}
