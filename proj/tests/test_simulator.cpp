#include <cmath>

#include "adviser/simulator.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace adviser;

namespace {

GroundTruth flat_truth(std::size_t n, double p) {
  GroundTruth t;
  for (std::size_t i = 0; i < n; ++i) {
    t.ids.push_back("T" + std::to_string(i));
    t.none.push_back(p);
    t.by_kind.push_back({p, p, p, p});
  }
  return t;
}

AllocationProblem callable(std::size_t n) {
  AllocationProblem p;
  for (std::size_t i = 0; i < n; ++i) {
    ProblemBeneficiary b;
    b.id = "T" + std::to_string(i);
    b.p_none = 0.3;
    b.p = {0.4, 0.5, 0.6, 1.0};
    b.allowed = {true, true, true, true};
    b.drive_block = 0;
    p.beneficiaries.push_back(b);
  }
  p.budget = 1e6;
  p.caps.calls = static_cast<int>(n);
  return p;
}

}  // namespace

TEST_CASE("synthetic population") {
  PopulationParams params;
  params.n = 1;
  const auto one = synth_population(params, 3);
  REQUIRE(one.registry.size() == 1);
  CHECK(one.registry[0].features.size() == FeatureSchema::default_schema().size());
  Beneficiary b = to_beneficiary(one.registry[0], std::nullopt);
  CHECK_NOTHROW(validate_beneficiary(b, VaccineSchedule::default_schedule()));

  params.n = 300;
  const auto a = synth_population(params, 9);
  const auto again = synth_population(params, 9);
  CHECK(a.registry == again.registry);
  CHECK(a.truth.none == again.truth.none);
  CHECK(synth_population(params, 10).registry != a.registry);

  for (std::size_t i = 0; i < a.truth.size(); ++i) {
    CHECK(a.truth.by_kind[i][3] == 1.0);
    CHECK(a.truth.none[i] >= 0.0);
    CHECK(a.truth.none[i] <= 1.0);
    for (double p : a.truth.by_kind[i]) {
      CHECK(p >= a.truth.none[i] - 1e-15);
      CHECK(p <= 1.0);
    }
    // Everyone has a dose due in the planning period.
    const auto ben = to_beneficiary(a.registry[i], std::nullopt);
    CHECK_FALSE(next_due_doses(ben, VaccineSchedule::default_schedule(), params.period).empty());
  }

  params.low_income_share = 1.2;
  CHECK_THROWS_AS(synth_population(params, 1), ValidationError);
  params.low_income_share = 0.46;
  params.n = 0;
  CHECK_THROWS_AS(synth_population(params, 1), ValidationError);
}

TEST_CASE("low-income share at n = 10000") {
  PopulationParams params;
  params.n = 10000;
  const auto w = synth_population(params, 2024);
  std::size_t low = 0;
  for (const auto& r : w.registry) low += r.features[0] < params.low_income_threshold ? 1 : 0;
  const double share = static_cast<double>(low) / 10000.0;
  MESSAGE("low-income share " << share);
  CHECK(share >= 0.44);
  CHECK(share <= 0.48);
}

TEST_CASE("training data follows the truth") {
  PopulationParams params;
  const auto data = synth_training_data(params, 5000, 4);
  CHECK(data.size() == 5);
  std::size_t total = 0;
  for (const auto& [arm, rows] : data) total += rows.size();
  CHECK(total == 5000);
  for (const auto& e : data.at("vaccine_drive")) CHECK(e.outcome);
  const auto models = train_model_set(data, 1e-3, FeatureSchema::default_schema(), "x");
  // Calls help the unaware: need falls as prior completion rises.
  FeatureVector low{20.0, 28.0, 2.0, 0.1, 30.0}, high{20.0, 28.0, 2.0, 0.9, 30.0};
  CHECK(need_score(models, low, InterventionKind::kPhoneCall) >
        need_score(models, high, InterventionKind::kPhoneCall));
}

TEST_CASE("baseline policy") {
  auto p = callable(6);
  auto plan = baseline_policy(p);
  CHECK(plan.assignments.size() == 6);
  for (const auto& a : plan.assignments) CHECK(a.kind == InterventionKind::kPhoneCall);
  CHECK(validate_plan(plan, p).valid);

  p.budget = 3 * p.costs.phone_call;
  plan = baseline_policy(p);
  REQUIRE(plan.assignments.size() == 3);
  CHECK(plan.assignments[0].beneficiary_id == "T0");
  CHECK(plan.assignments[2].beneficiary_id == "T2");
  CHECK(validate_plan(plan, p).valid);

  p.budget = 1e6;
  p.caps.calls = 2;
  p.beneficiaries[0].allowed[0] = false;
  plan = baseline_policy(p);
  REQUIRE(plan.assignments.size() == 2);
  CHECK(plan.assignments[0].beneficiary_id == "T1");
  CHECK(validate_plan(plan, p).valid);
}

TEST_CASE("exact solves never trail the baseline") {
  for (std::uint64_t seed = 1; seed <= 80; ++seed) {
    const auto p = fixtures::make_allocation_problem(seed, {});
    const auto base = baseline_policy(p);
    REQUIRE(validate_plan(base, p).valid);
    CHECK(branch_and_bound(p).objective >= base.objective - 1e-12);
  }
}

TEST_CASE("evaluation") {
  const auto p = callable(50);
  const auto plan = baseline_policy(p);
  SUBCASE("degenerate truths") {
    for (double v : {0.0, 1.0}) {
      const auto r = evaluate({{"A", plan, p.budget}, {"B", Plan{}, 0.0}}, flat_truth(50, v), 20, 1);
      for (const auto& pol : r.policies) {
        CHECK(pol.rate == v);
        CHECK(pol.ci_low == v);
        CHECK(pol.ci_high == v);
      }
    }
  }
  SUBCASE("rates track the truth") {
    GroundTruth t;
    for (const auto& b : p.beneficiaries) {
      t.ids.push_back(b.id);
      t.none.push_back(b.p_none);
      t.by_kind.push_back(b.p);
    }
    const auto r = evaluate({{"calls", plan, p.budget}, {"nothing", Plan{}, 0.0}}, t, 4000, 5);
    CHECK(r.policies[0].expected_rate == doctest::Approx(0.4));
    CHECK(r.policies[1].expected_rate == doctest::Approx(0.3));
    CHECK(std::abs(r.policies[0].rate - 0.4) < 0.005);
    CHECK(std::abs(r.policies[1].rate - 0.3) < 0.005);
    CHECK(r.policies[0].kinds.at("phone_call") == 50);

    // Same seed, any thread count: same report.
    const auto again = evaluate({{"calls", plan, p.budget}, {"nothing", Plan{}, 0.0}}, t, 4000, 5, 3);
    CHECK(to_json(again) == to_json(r));

    // Four times the replications halve the interval.
    const auto small = evaluate({{"calls", plan, p.budget}}, t, 1000, 8);
    const auto big = evaluate({{"calls", plan, p.budget}}, t, 4000, 8);
    const double ratio = (small.policies[0].ci_high - small.policies[0].ci_low) /
                         (big.policies[0].ci_high - big.policies[0].ci_low);
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.2));

    const auto table = summary_table(r, "Mar 2024");
    CHECK(table.find("calls") != std::string::npos);
    CHECK(table.find("40.") != std::string::npos);
  }
  CHECK_THROWS_AS(evaluate({}, flat_truth(3, 0.5), 0, 1), ValidationError);
  Plan stranger;
  stranger.assignments.push_back({"nobody", InterventionKind::kPhoneCall, std::nullopt, std::nullopt});
  CHECK_THROWS_AS(evaluate({{"x", stranger, 0.0}}, flat_truth(3, 0.5), 1, 1), ValidationError);
}
