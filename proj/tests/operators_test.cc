#include <random>

#include <gtest/gtest.h>

#include "gainpath/errors.h"
#include "gainpath/operators.h"
#include "support/random_specs.h"

namespace gainpath {
namespace {

TEST(GainOperator, TwoNodeValues) {
  const GainOperator op(testing::two_node_linear());
  EXPECT_EQ(op.gamma({1.0, 1.0}), PlusVector({2.0, 0.125}));
  EXPECT_EQ(op.gamma_hat({1.0, 1.0}), PlusVector({2.0, 1.0}));
  EXPECT_EQ(op.gamma_r(0.5, {1.0, 1.0}), PlusVector({2.0, 0.5}));
  EXPECT_EQ(op.gamma_power(PlusVector::Ones(2), 2), PlusVector({0.25, 0.25}));
  EXPECT_EQ(op.gamma_power(PlusVector::Ones(2), 0), PlusVector::Ones(2));
  const Eigen::MatrixXd m = op.matrix();
  EXPECT_EQ(m(0, 1), 2.0);
  EXPECT_EQ(m(1, 0), 0.125);
  EXPECT_EQ(m(0, 0), 0.0);
}

TEST(GainOperator, DimensionAndClassChecks) {
  const GainOperator op(testing::two_node_linear());
  EXPECT_THROW(op.gamma({1.0}), DimensionError);
  EXPECT_THROW(project_pr(-1.0, {1.0}), DomainError);
  EXPECT_THROW(GainOperator(testing::two_node_power()).matrix(), WrongClassError);
  EXPECT_THROW(op.scaled(ScalarFn::Identity(), ScalingMode::kPreInverse, {1.0, 1.0}),
               ScalingError);
}

TEST(GainOperator, ScaledModes) {
  const GainOperator op(testing::two_node_linear());
  const auto half = ScalarFn::Linear(0.5);
  EXPECT_EQ(op.scaled(half, ScalingMode::kPreInverse, {1.0, 1.0}),
            PlusVector({4.0, 0.25}));
  EXPECT_EQ(op.scaled(half, ScalingMode::kPostCompose, {1.0, 1.0}),
            PlusVector({3.0, 0.1875}));
}

// Gamma-hat identities on random specs of every MAF kind.
TEST(GainOperator, AugmentedIdentities) {
  std::mt19937_64 rng(41);
  for (int c = 0; c < 60; ++c) {
    const std::size_t n = testing::uniform_index(rng, 1, 12);
    const GainOperator op(testing::random_spec(rng, n, testing::random_maf_kind(rng),
                                               testing::GainFamily::kMixed));
    const auto s = testing::random_vector(rng, n, 0.0, 3.0);
    const double r = testing::uniform(rng, 0.0, 2.0);
    EXPECT_EQ(op.gamma_hat(s), oplus(s, op.gamma(s)));
    EXPECT_EQ(op.gamma_r(r, s), project_pr(r, op.gamma(s)));
    EXPECT_TRUE(leq(s, op.gamma_hat(s)));
    // Gamma-hat^k(s) = max_{j<=k} Gamma^j(s) under monotonicity.
    PlusVector join = s;
    PlusVector power = s;
    for (int k = 1; k <= 4; ++k) {
      power = op.gamma(power);
      join = oplus(join, power);
      EXPECT_TRUE(leq(join, op.gamma_hat_power(s, k), 1e-12)) << "k=" << k;
    }
  }
}

TEST(GainOperator, Monotone) {
  std::mt19937_64 rng(42);
  for (int c = 0; c < 60; ++c) {
    const std::size_t n = testing::uniform_index(rng, 1, 10);
    const GainOperator op(testing::random_spec(rng, n, testing::random_maf_kind(rng),
                                               testing::GainFamily::kMixed));
    const auto a = testing::random_vector(rng, n, 0.0, 3.0);
    const auto b = add(a, testing::random_vector(rng, n, 0.0, 1.0));
    EXPECT_TRUE(leq(op.gamma(a), op.gamma(b), 1e-12));
    EXPECT_TRUE(op.gamma(PlusVector::Zeros(n)).is_zero());
  }
}

TEST(GainOperator, MaxTypeAugmentedCollapse) {
  std::mt19937_64 rng(43);
  for (int c = 0; c < 40; ++c) {
    const std::size_t n = testing::uniform_index(rng, 1, 10);
    const GainOperator op(testing::random_spec(rng, n, MafSpec::Kind::kMax,
                                               testing::GainFamily::kMixed));
    ASSERT_TRUE(op.is_max_type());
    const auto s = testing::random_vector(rng, n, 0.0, 3.0);
    PlusVector join = s;
    PlusVector power = s;
    for (int k = 1; k <= 20; ++k) {
      power = op.gamma(power);
      join = oplus(join, power);
      EXPECT_EQ(op.gamma_hat_power(s, k), join) << "k=" << k;
    }
  }
}

TEST(GainOperator, FreeFunctionsMatchMembers) {
  const auto spec = testing::two_node_power();
  const GainOperator op(spec);
  const PlusVector s{0.3, 2.0};
  EXPECT_EQ(eval_gamma(spec, s), op.gamma(s));
  EXPECT_EQ(eval_gamma_hat(spec, s), op.gamma_hat(s));
  EXPECT_EQ(eval_gamma_r(spec, 0.7, s), op.gamma_r(0.7, s));
}

}  // namespace
}  // namespace gainpath
