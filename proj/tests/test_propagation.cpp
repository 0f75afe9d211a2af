#include <gtest/gtest.h>

#include <vector>

#include "gorisk/parser.hpp"
#include "gorisk/propagation.hpp"
#include "support/fixtures.hpp"
#include "support/reference_values.hpp"

using namespace gorisk;
using namespace gorisk::literals;
namespace ref = gorisk::testkit::ref;

namespace {
constexpr double kTight = 1e-12;

double and_p(std::vector<double> ps, double c) { return and_obstacle_probability(ps, c); }
double or_p(std::vector<CausalInput> cs) { return or_obstacle_probability(cs); }
}  // namespace

TEST(AndObstacle, JointConditional) {
  EXPECT_NEAR(and_p({0.2, 0.1}, 0.95), 0.019, kTight);
  EXPECT_EQ(and_p({1.0, 1.0}, 1.0), 1.0);
  EXPECT_EQ(and_p({0.5, 0.0}, 1.0), 0.0);
  EXPECT_THROW(and_p({}, 1.0), std::invalid_argument);
}

TEST(OrObstacle, CausalConditionals) {
  EXPECT_NEAR(or_p({{0.01, 0.99}, {0.001, 0.98}}), 0.010870298, kTight);
  EXPECT_NEAR(or_p({{0.02, 0.99}, {0.001, 0.98}, {0.01, 1.0}}), 0.03055299004, kTight);
  EXPECT_NEAR(or_p({{0.5, 0.99}, {0.3, 0.98}}), 0.64347, kTight);
  for (double p : {0.0, 0.3, 0.77, 1.0}) EXPECT_NEAR(or_p({{p, 1.0}}), p, kTight);
  EXPECT_THROW(or_p({}), std::invalid_argument);
}

TEST(LeafGoal, ObstructionProduct) {
  std::vector<CausalInput> certain{{1.0, 1.0}};
  EXPECT_EQ(leaf_goal_eps(certain), 0.0);
  EXPECT_EQ(leaf_goal_eps(std::vector<CausalInput>{}), 1.0);
  std::vector<CausalInput> latency{{0.17875, 1.0}};
  EXPECT_NEAR(leaf_goal_eps(latency), 0.82125, kTight);
}

TEST(GoalRefinement, AndOr) {
  std::vector<CausalInput> a{{1.0, 1.0}, {0.9, 1.0}};
  EXPECT_NEAR(goal_eps_from_children(RefinementKind::And, a), 0.9, kTight);
  std::vector<CausalInput> b{{0.96, 1.0}, {0.98, 1.0}};
  EXPECT_NEAR(goal_eps_from_children(RefinementKind::And, b), 0.9408, kTight);
  std::vector<CausalInput> c{{0.5, 1.0}, {0.5, 1.0}};
  EXPECT_NEAR(goal_eps_from_children(RefinementKind::Or, c), 0.75, kTight);
  EXPECT_NEAR(goal_eps_from_children(RefinementKind::And, b, 0.5), 0.4704, kTight);
  EXPECT_THROW(goal_eps_from_children(RefinementKind::And, std::vector<CausalInput>{}),
               std::invalid_argument);
}

TEST(Severity, Signed) {
  EXPECT_NEAR(severity(0.95, 0.11), 0.84, kTight);
  EXPECT_NEAR(severity(0.95, 0.36), 0.59, kTight);
  EXPECT_NEAR(severity(0.90, 0.95), -0.05, kTight);
}

TEST(Propagate, S3Fixture) {
  auto r = propagate(testkit::load_fixture("s3"));
  const auto& p = r.obstacle_probabilities;
  EXPECT_NEAR(p.at("PerfVariabilityS3"_id), ref::s3::PerfVariabilityS3, kTight);
  EXPECT_NEAR(p.at("ExtraManagementEffort"_id), ref::s3::ExtraManagementEffort, kTight);
  EXPECT_NEAR(p.at("S3DataCentreOutage"_id), ref::s3::S3DataCentreOutage, kTight);
  EXPECT_NEAR(p.at("S3Outage"_id), ref::s3::S3Outage, kTight);
  const auto& eps = r.goal_eps;
  EXPECT_NEAR(eps.at("ReducedDataUploadingTime"_id), ref::s3::ReducedDataUploadingTime, kTight);
  EXPECT_NEAR(eps.at("ImprovedResponseTime"_id), ref::s3::ImprovedResponseTime, kTight);
  EXPECT_NEAR(eps.at("ImprovedAvailability"_id), ref::s3::ImprovedAvailability, kTight);
  EXPECT_NEAR(eps.at("ReducedItCost"_id), ref::s3::ReducedItCost, kTight);
  EXPECT_NEAR(eps.at("ImprovedConsistency"_id), ref::s3::ImprovedConsistency, kTight);
  EXPECT_EQ(eps.at("ReducedQueryProcessingTime"_id), 1.0);
  EXPECT_TRUE(r.violated.at("ImprovedResponseTime"_id));
  EXPECT_FALSE(r.violated.at("ReducedDataUploadingTime"_id));
  EXPECT_NEAR(r.goal_sv.at("ImprovedResponseTime"_id), 0.95 - ref::s3::ImprovedResponseTime, kTight);
  EXPECT_EQ(r.leaf_obstacles.size(), 12u);
}

TEST(Propagate, DdpFixture) {
  auto r = propagate(testkit::load_fixture("ddp"));
  const auto& p = r.obstacle_probabilities;
  EXPECT_NEAR(p.at("DataStorageIncompatibility"_id), ref::ddp::DataStorageIncompatibility, kTight);
  EXPECT_NEAR(p.at("DdpCloudIncompatibility"_id), ref::ddp::DdpCloudIncompatibility, kTight);
  EXPECT_NEAR(p.at("AzureMiddlewareLatency"_id), ref::ddp::AzureMiddlewareLatency, kTight);
  EXPECT_NEAR(p.at("NetworkLatency"_id), ref::ddp::NetworkLatency, kTight);
  EXPECT_NEAR(p.at("CodeDisruption"_id), ref::ddp::CodeDisruption, kTight);
  EXPECT_NEAR(p.at("DataDisclosure"_id), ref::ddp::DataDisclosure, kTight);
  const auto& eps = r.goal_eps;
  EXPECT_NEAR(eps.at("Integrity"_id), ref::ddp::Integrity, kTight);
  EXPECT_NEAR(r.goal_sv.at("Integrity"_id), ref::ddp::IntegritySv, kTight);
  EXPECT_NEAR(eps.at("Testability"_id), ref::ddp::Testability, kTight);
  EXPECT_NEAR(eps.at("Performance"_id), ref::ddp::Performance, kTight);
  EXPECT_EQ(eps.at("Portability"_id), 0.0);
  EXPECT_NEAR(r.goal_sv.at("Portability"_id), 0.95, kTight);
  EXPECT_NEAR(eps.at("DataConfidentiality"_id), ref::ddp::DataConfidentiality, kTight);
  EXPECT_NEAR(eps.at("DataLocationSecurity"_id), ref::ddp::DataLocationSecurity, kTight);
  EXPECT_NEAR(eps.at("Security"_id), ref::ddp::Security, kTight);
  for (const auto& [id, v] : r.violated) EXPECT_TRUE(v) << id;
}

TEST(Propagate, ZeroLeavesSatisfyEverything) {
  auto parts = testkit::load_fixture("ddp").parts();
  for (auto& o : parts.obstacles)
    if (o.probability) o.probability = 0.0;
  auto r = propagate(build_model(parts).value());
  for (const auto& [id, eps] : r.goal_eps) {
    EXPECT_EQ(eps, 1.0) << id;
    EXPECT_LE(r.goal_sv.at(id), 0.0);
    EXPECT_FALSE(r.violated.at(id));
  }
}

TEST(Propagate, NoObstructionsMeansFullSatisfaction) {
  auto m = parse(R"(model "m"
goal G { rds: 0.5 refine or { A, B } }
goal A { } goal B { }
obstacle O { probability: 0.9 })").value();
  auto r = propagate(m);
  for (const auto& [id, eps] : r.goal_eps) EXPECT_EQ(eps, 1.0) << id;
  EXPECT_NEAR(r.goal_sv.at("G"_id), -0.5, kTight);
}

TEST(Propagate, ReportCoversEveryNode) {
  auto m = testkit::load_fixture("s3");
  auto r = propagate(m);
  EXPECT_EQ(r.model, "s3-migration");
  EXPECT_EQ(r.obstacle_probabilities.size(), m.obstacles().size());
  EXPECT_EQ(r.goal_eps.size(), m.goals().size());
  for (const auto& [id, eps] : r.goal_eps)
    EXPECT_EQ(r.goal_sv.at(id), r.goal_rds.at(id) - eps);
}

TEST(Propagate, SharedLeafUsesIndependenceFormula) {
  auto r = propagate(testkit::shared_leaf_witness());
  EXPECT_NEAR(r.goal_eps.at("G"_id), 0.25, kTight);
}
