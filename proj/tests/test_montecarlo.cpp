#include <gtest/gtest.h>

#include <random>

#include "gorisk/montecarlo.hpp"
#include "gorisk/parser.hpp"
#include "gorisk/propagation.hpp"
#include "support/fixtures.hpp"
#include "support/random_models.hpp"
#include "support/reference_values.hpp"

using namespace gorisk;
using namespace gorisk::literals;
namespace ref = gorisk::testkit::ref;

namespace {

GoalModel model_of(const char* text) { return parse(text).value(); }

// Stream that forces every coin to one outcome.
struct FixedStream {
  bool value;
  bool flip(std::size_t, double p) const { return p >= 1.0 || (p > 0.0 && value); }
};

bool all_within(const SimulationResult& sim, const std::map<NodeId, double>& reference) {
  auto deviations = compare_to_reference(sim, reference);
  bool ok = !deviations.empty();
  for (const auto& d : deviations) {
    if (!d.within) {
      ADD_FAILURE() << d.id << ": empirical " << d.empirical << " reference " << d.reference
                    << " radius " << d.radius;
      ok = false;
    }
  }
  return ok;
}

std::map<NodeId, double> analytic(const GoalModel& m) {
  auto r = propagate(m);
  std::map<NodeId, double> out(r.obstacle_probabilities.begin(), r.obstacle_probabilities.end());
  out.insert(r.goal_eps.begin(), r.goal_eps.end());
  return out;
}

}  // namespace

TEST(CoinStream, DeterministicAndUniform) {
  CoinStream a(42, 7), b(42, 7), c(43, 7);
  EXPECT_EQ(a.uniform(3), b.uniform(3));
  EXPECT_NE(a.uniform(3), c.uniform(3));
  EXPECT_NE(a.uniform(3), a.uniform(4));
  double sum = 0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    double u = CoinStream(1, static_cast<std::uint64_t>(k)).uniform(0);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4 * std::sqrt(1.0 / 12.0 / n));
}

TEST(SampleWorld, DegenerateCoins) {
  auto m = model_of(R"(model "m"
goal G { }
obstacle P { refine and { A, B } }
obstacle A { probability: 1 }
obstacle B { probability: 1 }
obstacle Z { probability: 0 }
obstructs P -> G
)");
  for (std::uint64_t k = 0; k < 50; ++k) {
    auto w = sample_world(m, CoinStream(9, k));
    EXPECT_TRUE(w.obstacle_occurs.at("P"_id));
    EXPECT_FALSE(w.obstacle_occurs.at("Z"_id));
    EXPECT_FALSE(w.goal_satisfied.at("G"_id));
  }
}

TEST(SampleWorld, FollowsCoins) {
  auto m = model_of(R"(model "m"
goal G { }
obstacle P { refine or { A @0.5, B } }
obstacle A { probability: 0.5 }
obstacle B { probability: 0.5 }
obstructs P -> G conditional 0.5
)");
  auto yes = sample_world(m, FixedStream{true});
  EXPECT_TRUE(yes.obstacle_occurs.at("P"_id));
  EXPECT_FALSE(yes.goal_satisfied.at("G"_id));
  auto no = sample_world(m, FixedStream{false});
  EXPECT_FALSE(no.obstacle_occurs.at("A"_id));
  EXPECT_FALSE(no.obstacle_occurs.at("P"_id));
  EXPECT_TRUE(no.goal_satisfied.at("G"_id));
}

TEST(BruteForce, SmallModels) {
  auto single = model_of(R"(model "m" obstacle A { probability: 0.37 })");
  EXPECT_NEAR(brute_force_exact(single).at("A"_id), 0.37, 1e-15);

  auto and_model = model_of(R"(model "m"
obstacle P { refine and conditional 0.95 { A, B } }
obstacle A { probability: 0.2 }
obstacle B { probability: 0.1 })");
  EXPECT_NEAR(brute_force_exact(and_model).at("P"_id), 0.019, 1e-15);

  auto or_model = model_of(R"(model "m"
obstacle P { refine or { A, B } }
obstacle A { probability: 0.5 }
obstacle B { probability: 0.5 })");
  EXPECT_NEAR(brute_force_exact(or_model).at("P"_id), 0.75, 1e-15);
}

TEST(BruteForce, DdpSecuritySubtree) {
  auto m = model_of(R"(model "security"
goal Security { refine and { DataConfidentiality, DataLocationSecurity } }
goal DataConfidentiality { }
goal DataLocationSecurity { }
obstacle DataDisclosure { refine or { CodeDisruption @0.99, SessionHijacking @0.99 } }
obstacle CodeDisruption { refine or { CodeAlteration @0.99, CodeControl @0.99 } }
obstacle CodeAlteration { probability: 0.01 }
obstacle CodeControl { probability: 0.02 }
obstacle SessionHijacking { probability: 0.03 }
obstacle InsecureDataLocation { probability: 0.001 }
obstructs DataDisclosure -> DataConfidentiality
obstructs InsecureDataLocation -> DataLocationSecurity
)");
  auto exact = brute_force_exact(m);
  EXPECT_NEAR(exact.at("CodeDisruption"_id), ref::ddp::CodeDisruption, 1e-12);
  EXPECT_NEAR(exact.at("DataDisclosure"_id), ref::ddp::DataDisclosure, 1e-12);
  EXPECT_NEAR(exact.at("Security"_id), ref::ddp::Security, 1e-12);
}

TEST(BruteForce, AgreesWithPropagateOnFixtures) {
  for (const char* name : {"s3", "ddp"}) {
    auto m = testkit::load_fixture(name);
    ASSERT_LE(stochastic_coin_count(m), kDefaultCoinBudget) << name;
    auto exact = brute_force_exact(m);
    for (const auto& [id, v] : analytic(m)) EXPECT_NEAR(exact.at(id), v, 1e-12) << name << " " << id;
  }
}

TEST(BruteForce, BudgetEnforced) {
  std::string text = "model \"m\"\nobstacle P { refine or { ";
  for (int i = 0; i < 25; ++i) text += (i ? ", L" : "L") + std::to_string(i);
  text += " } }\n";
  for (int i = 0; i < 25; ++i) text += "obstacle L" + std::to_string(i) + " { probability: 0.5 }\n";
  auto m = parse(text).value();
  EXPECT_EQ(stochastic_coin_count(m), 25u);
  EXPECT_THROW(brute_force_exact(m), CoinBudgetExceeded);
  EXPECT_NO_THROW(brute_force_exact(m, 25));
}

TEST(BruteForce, DeterministicCoinsAreFree) {
  auto m = model_of(R"(model "m"
obstacle P { refine or { A, B @0 } }
obstacle A { probability: 1 }
obstacle B { probability: 0.4 })");
  EXPECT_EQ(stochastic_coin_count(m), 1u);
  EXPECT_EQ(brute_force_exact(m).at("P"_id), 1.0);
}

TEST(BruteForce, SharedLeafWitnessDiffersFromAnalytic) {
  auto m = testkit::shared_leaf_witness();
  EXPECT_NEAR(brute_force_exact(m).at("G"_id), 0.5, 1e-15);
  EXPECT_NEAR(propagate(m).goal_eps.at("G"_id), 0.25, 1e-15);
  auto sim = estimate(m, 100000, 3);
  EXPECT_TRUE(all_within(sim, brute_force_exact(m)));
  EXPECT_GT(std::abs(sim.empirical_goal_freq.at("G"_id) - 0.25),
            sim.confidence_radius.at("G"_id));
}

TEST(Estimate, SingleSampleIsBinary) {
  auto m = testkit::load_fixture("s3");
  auto sim = estimate(m, 1, 5);
  for (const auto& [id, f] : sim.empirical_obstacle_freq) EXPECT_TRUE(f == 0.0 || f == 1.0) << id;
  for (const auto& [id, f] : sim.empirical_goal_freq) EXPECT_TRUE(f == 0.0 || f == 1.0) << id;
  EXPECT_THROW(estimate(m, 0, 5), std::invalid_argument);
}

TEST(Estimate, OrOfFairCoinsConverges) {
  auto m = model_of(R"(model "m"
obstacle P { refine or { A, B } }
obstacle A { probability: 0.5 }
obstacle B { probability: 0.5 })");
  auto sim = estimate(m, 200000, 11);
  EXPECT_NEAR(sim.empirical_obstacle_freq.at("P"_id), 0.75, sim.confidence_radius.at("P"_id));
}

TEST(Estimate, IndependentOfWorkerCount) {
  auto m = testkit::load_fixture("ddp");
  auto one = estimate(m, 20000, 42, 1);
  for (unsigned w : {2u, 3u, 8u}) EXPECT_EQ(estimate(m, 20000, 42, w), one) << w;
  EXPECT_EQ(estimate(m, 7, 42, 16), estimate(m, 7, 42, 1));
}

TEST(Estimate, SeedDeterminism) {
  auto m = testkit::load_fixture("s3");
  EXPECT_EQ(estimate(m, 5000, 99), estimate(m, 5000, 99));
  EXPECT_NE(estimate(m, 5000, 99), estimate(m, 5000, 100));
}

TEST(Estimate, FixturesMatchAnalytic) {
  for (const char* name : {"s3", "ddp"}) {
    auto m = testkit::load_fixture(name);
    auto sim = estimate(m, 200000, 42);
    EXPECT_TRUE(all_within(sim, analytic(m))) << name;
    EXPECT_EQ(sim.samples, 200000u);
  }
}

TEST(Estimate, FixturesAcrossSeeds) {
  // z = 4 gives roughly a 6e-5 false-alarm rate per node; 20 seeds over both
  // fixtures should essentially never trip.
  int failures = 0;
  for (const char* name : {"s3", "ddp"}) {
    auto m = testkit::load_fixture(name);
    auto exact = brute_force_exact(m);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      auto deviations = compare_to_reference(estimate(m, 50000, seed), exact);
      for (const auto& d : deviations) failures += d.within ? 0 : 1;
    }
  }
  EXPECT_LE(failures, 1);
}

TEST(Estimate, RandomModelsAgreeWithExact) {
  std::mt19937_64 rng(2024);
  testkit::RandomModelOptions options;
  options.max_coins = 14;
  options.allow_sharing = true;
  for (int i = 0; i < 10; ++i) {
    auto m = testkit::random_model(rng, options);
    auto sim = estimate(m, 40000, static_cast<std::uint64_t>(i));
    EXPECT_TRUE(all_within(sim, brute_force_exact(m))) << serialize(m);
  }
}
