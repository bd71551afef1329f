#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "gainpath/errors.h"
#include "gainpath/stability.h"
#include "support/random_specs.h"

namespace gainpath {
namespace {

TEST(Simulate, ConvergesAndRecordsStates) {
  const GainOperator op(testing::two_node_linear());
  const auto traj = simulate(op, OperatorKind::Gamma(), PlusVector::Ones(2), 500, 1e-14);
  EXPECT_TRUE(traj.converged);
  ASSERT_TRUE(traj.limit.has_value());
  EXPECT_LT(traj.limit->sup_norm(), 1e-13);
  EXPECT_EQ(traj.states.front(), PlusVector::Ones(2));
  EXPECT_EQ(traj.states[2], PlusVector({0.25, 0.25}));
}

TEST(Simulate, OverflowGuard) {
  NetworkSpec spec = NetworkSpec::Isolated(2);
  spec.connect(0, 1, ScalarFn::Linear(3)).connect(1, 0, ScalarFn::Linear(3));
  const auto traj = simulate(GainOperator(spec), OperatorKind::Gamma(), PlusVector::Ones(2));
  EXPECT_TRUE(traj.overflowed);
  EXPECT_FALSE(traj.converged);
}

TEST(Qhat, TwoNodeLimit) {
  const GainOperator op(testing::two_node_linear());
  EXPECT_EQ(compute_qhat(op, PlusVector::Ones(2)), PlusVector({2.0, 1.0}));
  const auto bad_phi = ScalarFn::Linear(1.5);
  EXPECT_THROW(compute_qhat(op, PlusVector::Ones(2), kDefaultKmax, kDefaultTol, &bad_phi),
               ConsistencyError);
}

TEST(PointOfDecay, Verdicts) {
  const GainOperator op(testing::two_node_linear());
  EXPECT_EQ(check_point_of_decay(op, {2.0, 1.0}).verdict, Verdict::kExactPass);
  const auto cert = check_point_of_decay(op, {1.0, 1.0});
  EXPECT_EQ(cert.verdict, Verdict::kFalsified);
  EXPECT_TRUE(replay_witness(op, cert));
  EXPECT_THROW(check_point_of_decay(op, PlusVector::Zeros(2)), DomainError);
}

// Power iteration against Eigen's dense eigensolver.
TEST(Uges, SpectralRadiusMatchesEigensolver) {
  std::mt19937_64 rng(51);
  for (int c = 0; c < 25; ++c) {
    const std::size_t n = testing::uniform_index(rng, 2, 12);
    const double target = testing::uniform(rng, 0.2, 1.4);
    Eigen::MatrixXd a;
    const auto spec = testing::random_linear_sum(rng, n, target, 0.5, &a);
    const GainOperator op(spec);
    const auto cert = certify_uges_linear(op);
    const double oracle = testing::eigen_spectral_radius(a);
    ASSERT_TRUE(cert.estimate.scalar.has_value());
    if (oracle == 0.0) continue;
    EXPECT_NEAR(*cert.estimate.scalar, oracle, 1e-6 * std::max(1.0, oracle)) << "case " << c;
    if (oracle < 0.99) {
      EXPECT_EQ(cert.verdict, Verdict::kExactPass) << "case " << c;
      // ||Gamma^k(1)|| <= M rate^k.
      PlusVector s = PlusVector::Ones(n);
      for (int k = 1; k <= 30; ++k) {
        s = op.gamma(s);
        EXPECT_LE(s.sup_norm(), *cert.estimate.m * std::pow(*cert.estimate.rate, k) + 1e-12);
      }
    } else if (oracle > 1.01) {
      EXPECT_EQ(cert.verdict, Verdict::kFalsified) << "case " << c;
      EXPECT_TRUE(replay_witness(op, cert)) << "case " << c;
    }
  }
}

TEST(Uges, TwoNodeRadius) {
  const auto cert = certify_uges_linear(GainOperator(testing::two_node_linear()));
  EXPECT_NEAR(*cert.estimate.scalar, 0.5, 1e-9);
  EXPECT_EQ(cert.verdict, Verdict::kExactPass);
  EXPECT_THROW(certify_uges_linear(GainOperator(testing::two_node_power())),
               WrongClassError);
}

TEST(Homogeneous, FiniteWitness) {
  const auto ok = certify_homogeneous(GainOperator(testing::two_node_linear()), 10);
  EXPECT_EQ(ok.verdict, Verdict::kExactPass);
  ASSERT_TRUE(ok.estimate.index.has_value());
  EXPECT_EQ(*ok.estimate.index, 2);
  const auto bad =
      certify_homogeneous(GainOperator(testing::two_node_identity(MafSpec::Sum())), 10);
  EXPECT_NE(bad.verdict, Verdict::kExactPass);
}

TEST(Sgc, IdentityMaxTypeFalsifiedWithOnes) {
  const GainOperator op(testing::two_node_identity(MafSpec::Max()));
  const auto cert = check_sgc_sample(op, 200, 1);
  ASSERT_EQ(cert.verdict, Verdict::kFalsified);
  ASSERT_TRUE(cert.witness && cert.witness->s);
  EXPECT_EQ(*cert.witness->s, PlusVector::Ones(2));
  EXPECT_TRUE(replay_witness(op, cert));
}

TEST(Sgc, ContractiveNotFalsified) {
  const GainOperator op(testing::two_node_linear());
  EXPECT_EQ(check_sgc_sample(op, 500, 2).verdict, Verdict::kNotFalsified);
}

TEST(Ugs, EnvelopeCoversTrajectories) {
  const GainOperator op(testing::two_node_linear());
  const auto levels = log_levels(0.1, 10.0, 5);
  const auto cert = estimate_ugs_phi(op, OperatorKind::GammaHat(), levels, 8, kDefaultKmax, 3);
  EXPECT_EQ(cert.verdict, Verdict::kNotFalsified);
  ASSERT_TRUE(cert.estimate.function.has_value());
  // Sup of the Gamma-hat trajectory from t 1 is 2t.
  for (double t : levels) EXPECT_GE((*cert.estimate.function)(t), 2.0 * t * (1 - 1e-12));
}

TEST(Ugs, UnstableFalsified) {
  NetworkSpec spec = NetworkSpec::Isolated(2);
  spec.connect(0, 1, ScalarFn::Linear(1.5)).connect(1, 0, ScalarFn::Linear(1.5));
  const GainOperator op(spec);
  const auto cert = estimate_ugs_phi(op, OperatorKind::Gamma(), {1.0}, 4, 2000, 4);
  EXPECT_EQ(cert.verdict, Verdict::kFalsified);
  EXPECT_TRUE(replay_witness(op, cert));
}

TEST(OplusMbi, TwoNodeLimit) {
  const GainOperator op(testing::two_node_linear());
  const auto cert = estimate_oplus_mbi_phi(op, {1.0}, 8, kDefaultKmax, 5);
  EXPECT_EQ(cert.verdict, Verdict::kNotFalsified);
  ASSERT_TRUE(cert.estimate.function.has_value());
  EXPECT_GE((*cert.estimate.function)(1.0), 2.0 - 1e-9);
}

TEST(OplusMbi, IdentityFalsified) {
  const GainOperator op(testing::two_node_identity(MafSpec::Max()));
  const auto cert = estimate_oplus_mbi_phi(op, {1.0}, 4, kDefaultKmax, 6);
  EXPECT_EQ(cert.verdict, Verdict::kFalsified);
  EXPECT_TRUE(replay_witness(op, cert));
}

TEST(Mbi, UgesRoute) {
  const auto cert = mbi_by_uges_route(GainOperator(testing::two_node_linear()));
  EXPECT_EQ(cert.verdict, Verdict::kImpliedByTheorem);
}

TEST(MaxRobustSgc, IdentityFalsified) {
  const GainOperator op(testing::two_node_identity(MafSpec::Max()));
  const auto cert = check_max_robust_sgc(op, ScalarFn::Linear(0.5), 200, 7);
  ASSERT_EQ(cert.verdict, Verdict::kFalsified);
  EXPECT_TRUE(replay_witness(op, cert));
  EXPECT_THROW(check_max_robust_sgc(GainOperator(testing::two_node_linear()),
                                    ScalarFn::Linear(0.5), 10),
               WrongClassError);
}

TEST(MaxRobustSgc, SmallGainsNotFalsified) {
  NetworkSpec spec = NetworkSpec::Isolated(2, MafSpec::Max());
  spec.connect(0, 1, ScalarFn::Linear(0.5)).connect(1, 0, ScalarFn::Linear(0.5));
  const auto cert = check_max_robust_sgc(GainOperator(spec), ScalarFn::Linear(0.5), 500, 8);
  EXPECT_EQ(cert.verdict, Verdict::kNotFalsified);
}

TEST(DecayIndex, ChainHasDecayingNeighbor) {
  const GainOperator op(NetworkSpec::FromTemplate(testing::quarter_chain(6)));
  const auto entries = check_decay_index(op, PlusVector::Ones(6), 2, ScalarFn::Linear(0.9),
                                         Direction::kBackward);
  ASSERT_EQ(entries.size(), 6u);
  for (const auto& e : entries) {
    EXPECT_TRUE(e.applicable);
    EXPECT_TRUE(e.witness.has_value());
  }
}

// Brute-force oracle: every fixed point of Gamma_r for a 2x2 linear sum is found
// by trying the four active sets by hand.
TEST(FixedPoints, EnumerationMatchesHandSolution) {
  const GainOperator op(testing::two_node_linear());
  const auto set = enumerate_fixed_points_sumtype(op, 1.0);
  ASSERT_EQ(set.points.size(), 1u);
  EXPECT_NEAR(set.points[0][0], 2.0, 1e-12);
  EXPECT_NEAR(set.points[0][1], 1.0, 1e-12);
}

TEST(FixedPoints, EveryPointIsFixed) {
  std::mt19937_64 rng(52);
  for (int c = 0; c < 20; ++c) {
    const std::size_t n = testing::uniform_index(rng, 2, 6);
    const GainOperator op(testing::random_linear_sum(rng, n, testing::uniform(rng, 0.3, 1.5)));
    const double r = testing::uniform(rng, 0.2, 3.0);
    const auto set = enumerate_fixed_points_sumtype(op, r);
    for (const auto& p : set.points) {
      EXPECT_LE(sup_distance(op.gamma_r(r, p), p), 1e-9 * (1.0 + p.sup_norm()));
    }
  }
  NetworkSpec big = NetworkSpec::Isolated(13);
  EXPECT_THROW(enumerate_fixed_points_sumtype(GainOperator(big), 1.0), SizeError);
}

TEST(Replay, RejectsNonViolations) {
  const GainOperator op(testing::two_node_linear());
  Certificate fake;
  fake.property = Property::kSgc;
  fake.verdict = Verdict::kFalsified;
  EXPECT_FALSE(replay_witness(op, fake));
  fake.witness = Witness{};
  fake.witness->s = PlusVector::Ones(2);
  EXPECT_FALSE(replay_witness(op, fake));
}

TEST(SampleLevel, VectorsHaveRequestedNorm) {
  std::mt19937_64 rng(53);
  const auto vs = sample_level(10, 2.5, 12, rng);
  EXPECT_EQ(vs.size(), 12u);
  EXPECT_EQ(vs.front(), PlusVector::Constant(10, 2.5));
  for (const auto& v : vs) EXPECT_NEAR(v.sup_norm(), 2.5, 1e-12);
}

}  // namespace
}  // namespace gainpath
