#include "oracles.hpp"

#include "snlevy/errors.hpp"
#include "snlevy/verify.hpp"

#include <catch_amalgamated.hpp>

#include <set>

using namespace snlevy;

TEST_CASE("criteria table", "[verify]") {
  const auto all = verify::criteria();
  REQUIRE(all.size() == 13);
  std::set<int> ids;
  for (const auto& c : all) {
    ids.insert(c.id);
    CHECK(c.replicates_full >= c.replicates_quick);
    CHECK(c.range_lo <= c.range_hi);
  }
  CHECK(ids.size() == 13);
  CHECK(*ids.begin() == 1);
  CHECK(*ids.rbegin() == 13);
  CHECK(verify::criterion(7).tolerance == 0.10);
  CHECK_THROWS_AS(verify::criterion(99), ArgumentError);
}

TEST_CASE("deterministic checks pass on both reference models", "[verify]") {
  const LevyModel models[] = {oracle::b1(), oracle::j1()};
  for (const auto& r : {verify::check_roots(models), verify::check_scale_oracle(models),
                        verify::check_tilt(models), verify::check_scale_difference(models)}) {
    INFO(verify::format_line(r));
    CHECK(r.passed);
    CHECK(!r.skipped);
  }
}

TEST_CASE("branching rates used by the suite", "[verify]") {
  CHECK(verify::critical_beta(oracle::b1()) == Catch::Approx(0.5).epsilon(1e-12));
  CHECK(verify::subcritical_beta(oracle::b1()) == Catch::Approx(0.45).epsilon(1e-12));
}

TEST_CASE("report line format", "[verify]") {
  verify::CheckResult r;
  r.id = 7;
  r.name = "tail-exponent";
  r.passed = true;
  r.measured = 1.9;
  r.predicted = 1.92;
  r.tolerance = 0.1;
  r.detail = "ok";
  const auto line = verify::format_line(r);
  CHECK(line.rfind("[PASS]  7 tail-exponent", 0) == 0);
  CHECK(line.find("measured=1.9") != std::string::npos);
  r.skipped = true;
  CHECK(verify::format_line(r).rfind("[SKIP]", 0) == 0);
  r.skipped = false;
  r.passed = false;
  CHECK(verify::format_line(r).rfind("[FAIL]", 0) == 0);
}

TEST_CASE("suite refuses models that drift upward", "[verify]") {
  CHECK_THROWS_AS(verify::run_verification(LevyModel(1.0, 1.0), {}), RegimeError);
}

TEST_CASE("determinism check", "[verify]") {
  verify::Options opt;
  const auto r = verify::check_determinism(oracle::j1(), opt);
  INFO(r.detail);
  CHECK(r.passed);
}
