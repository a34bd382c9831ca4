#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "bornopp/bornopp.hpp"
#include "bornopp/harness.hpp"

using namespace bornopp;
using namespace bornopp::harness;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

ScanResult synthetic(const std::vector<double>& eps, const std::function<double(double)>& err) {
  ScanResult r;
  r.config = suites::prop5("p");
  r.config.epsilons = eps;
  for (double e : eps) {
    ScanPoint p;
    p.epsilon = e;
    p.t = 0.0;
    p.error = err(e);
    p.ok = true;
    r.points.push_back(p);
  }
  finalize(r, {0.0});
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("bornopp_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("slope fit through the scan assembly", "[harness][fit]") {
  const std::vector<double> ladder = {0.2, 0.1, 0.05, 0.025};
  ScanResult lin = synthetic(ladder, [](double e) { return 3.0 * e; });
  REQUIRE(lin.fits.size() == 1);
  CHECK(lin.fits[0].fit.reported);
  CHECK(std::abs(lin.fits[0].fit.slope - 1.0) <= 1e-10);
  CHECK(lin.passed);

  ScanResult flat = synthetic(ladder, [](double) { return 0.7; });
  CHECK(flat.fits[0].fit.reported);
  CHECK(std::abs(flat.fits[0].fit.slope) <= 1e-12);
  CHECK_FALSE(flat.passed);  // prop5 "p" asks for slope >= 0.75

  // the preasymptotic point is dropped and flagged
  ScanResult pre = synthetic(ladder, [](double e) { return e == 0.2 ? 5.0 : e; });
  CHECK(pre.fits[0].fit.dropped_largest);
  CHECK(pre.fits[0].fit.slope == Approx(1.0).margin(1e-10));
}

TEST_CASE("config validation", "[harness][config]") {
  ExperimentConfig good = suites::thm4();

  SECTION("built-in config is valid") { CHECK_NOTHROW(validate(good)); }

  SECTION("epsilon ladder") {
    ExperimentConfig c = good;
    c.epsilons = {0.2, 0.1};
    CHECK_THROWS_WITH(validate(c), Catch::Matchers::ContainsSubstring("at least 3"));
    c.epsilons = {0.2, 0.1, 0.1};
    CHECK_THROWS_WITH(validate(c), Catch::Matchers::ContainsSubstring("strictly decreasing"));
    c.epsilons = {1.5, 0.1, 0.05};
    CHECK_THROWS_WITH(validate(c), Catch::Matchers::ContainsSubstring("(0, 1)"));
  }

  SECTION("Gamma outside Lambda - delta") {
    ExperimentConfig c = good;
    c.gamma = {{0.5, 1.9, 0.0, 1.0}};
    CHECK_THROWS_WITH(validate(c), Catch::Matchers::ContainsSubstring("Lambda - delta"));
  }

  SECTION("time beyond the hitting window quotes T_+") {
    ExperimentConfig c = suites::prop3();
    c.hitting.horizon = 3.0;  // T_+ ~ 1.53 is found well inside; keeps the test quick
    c.times = {5.0};
    try {
      validate(c);
      FAIL("expected a precondition_error");
    } catch (const precondition_error& e) {
      const std::string m = e.what();
      CHECK_THAT(m, Catch::Matchers::ContainsSubstring("T_+ = 1.52"));
      CHECK_THAT(m, Catch::Matchers::ContainsSubstring("logged_times"));
    }
    c.times = {};
    c.logged_times = {5.0};  // logged points are exempt
    CHECK_NOTHROW(validate(c));
  }

  SECTION("unknown names") {
    json j = to_json(good);
    j["bogus"] = 1;
    CHECK_THROWS_AS(config_from_json(j), precondition_error);
    j = to_json(good);
    j["experiment"] = "theorem9";
    CHECK_THROWS_WITH(config_from_json(j), Catch::Matchers::ContainsSubstring("available"));
    j = to_json(good);
    j["schema_version"] = 7;
    CHECK_THROWS_AS(config_from_json(j), precondition_error);
    CHECK_THROWS_AS(symbol_from_name("p3"), precondition_error);
  }

  SECTION("json round trip") {
    for (const auto& c : all_builtin_configs()) CHECK(to_json(config_from_json(to_json(c))) == to_json(c));
  }
}

TEST_CASE("per-point failures do not abort the scan", "[harness][scan]") {
  ExperimentConfig c = suites::example("coherent");
  c.grid = {-8.0, 8.0, 128};
  c.epsilons = {0.2, 0.1, 0.01};  // 0.01 has no momentum clearance on this grid
  c.times = {0.0};
  c.assertions = {};
  ScanResult r = eps_scan(c);
  REQUIRE(r.points.size() == 3);
  CHECK(r.points[0].ok);
  CHECK(r.points[1].ok);
  CHECK_FALSE(r.points[2].ok);
  CHECK_THAT(r.points[2].message, Catch::Matchers::ContainsSubstring("clearance"));
}

TEST_CASE("reports", "[harness][report]") {
  SECTION("empty result gives a header-only CSV") {
    ScanResult r;
    r.config = suites::prop5("q");
    CHECK(csv_text(r) == "epsilon,t,error,slope_so_far\n");
  }

  SECTION("JSON round trip, NaN included") {
    ScanResult r = eps_scan(suites::prop5("p"));
    ScanPoint bad;
    bad.epsilon = 0.01;
    bad.t = 0.0;
    bad.message = "synthetic failure";
    r.points.push_back(bad);
    r.hitting = HittingTimes{-1.0, 2.5, false, true, 42};
    ScanResult back = scan_result_from_json(json::parse(json_text(to_json(r))));
    CHECK(same_report(r, back));
    CHECK(json_text(to_json(back)) == json_text(to_json(r)));
  }

  SECTION("points are sorted by epsilon descending then t") {
    ExperimentConfig c = suites::example("sharp_momentum");
    c.grid = {-8.0, 8.0, 256};
    c.times = {0.5, 0.0};
    c.assertions = {};
    ScanResult r = eps_scan(c);
    for (std::size_t i = 1; i < r.points.size(); ++i) {
      const auto &a = r.points[i - 1], &b = r.points[i];
      CHECK((a.epsilon > b.epsilon || (a.epsilon == b.epsilon && a.t < b.t)));
    }
    const std::string csv = csv_text(r);
    CHECK(csv.rfind("epsilon,t,error,slope_so_far\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + static_cast<long>(r.points.size()));
  }

  SECTION("same config twice gives byte-identical files") {
    const fs::path a = scratch("a"), b = scratch("b");
    ExperimentConfig c = suites::prop5("windowed_p2:1.0");
    write_outputs(eps_scan(c), a);
    write_outputs(eps_scan(c), b);
    CHECK(slurp(a / "prop5_windowed_p2.json") == slurp(b / "prop5_windowed_p2.json"));
    CHECK(slurp(a / "prop5_windowed_p2.csv") == slurp(b / "prop5_windowed_p2.csv"));
    CHECK(slurp(a / "prop5_windowed_p2.json").find("seconds") == std::string::npos);
  }

  SECTION("report format names") {
    CHECK(report_format_from_string("csv") == ReportFormat::csv);
    CHECK_THROWS_AS(report_format_from_string("xml"), precondition_error);
  }
}

TEST_CASE("suites", "[harness][suite]") {
  try {
    run_suite("nope");
    FAIL("expected an error");
  } catch (const precondition_error& e) {
    CHECK_THAT(std::string(e.what()), Catch::Matchers::ContainsSubstring("identities, semiclassics, thm1"));
  }
  SuiteReport r = run_suite("semiclassics");
  CHECK(r.passed);
  CHECK(r.criteria.size() == 4);
}

TEST_CASE("configs directory matches the built-in suite configs", "[harness][config]") {
  const fs::path dir = fs::path(BORNOPP_SOURCE_DIR) / "configs";
  for (const auto& c : all_builtin_configs()) {
    const fs::path p = dir / (c.name + ".json");
    INFO(p.string());
    REQUIRE(fs::exists(p));
    CHECK(to_json(load_config(p.string())) == to_json(c));
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    INFO(entry.path().string());
    CHECK_NOTHROW(validate(load_config(entry.path().string())));
  }
}
