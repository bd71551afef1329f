#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "gainpath/errors.h"
#include "gainpath/maf.h"
#include "gainpath/plus_vector.h"
#include "support/random_specs.h"

namespace gainpath {
namespace {

TEST(Maf, Kinds) {
  const std::vector<double> v{1.0, 3.0, 2.0};
  EXPECT_EQ(MafSpec::Max()(v), 3.0);
  EXPECT_EQ(MafSpec::Sum()(v), 6.0);
  EXPECT_DOUBLE_EQ(MafSpec::WeightedSum({0.5, 1.0, 0.25})(v), 4.0);
  EXPECT_DOUBLE_EQ(MafSpec::PSum(2.0)(v), std::sqrt(14.0));
  EXPECT_EQ(MafSpec::Sum()(std::vector<double>{}), 0.0);
}

TEST(Maf, RejectsBadParameters) {
  EXPECT_THROW(MafSpec::PSum(0.5), DomainError);
  EXPECT_THROW(MafSpec::WeightedSum({1.0, -1.0}), DomainError);
}

TEST(Maf, MonotoneAndPositiveDefinite) {
  std::mt19937_64 rng(21);
  for (int c = 0; c < 400; ++c) {
    const std::size_t m = testing::uniform_index(rng, 1, 6);
    const MafSpec maf = testing::random_maf(rng, testing::random_maf_kind(rng), m);
    std::vector<double> a(m);
    std::vector<double> b(m);
    for (std::size_t k = 0; k < m; ++k) {
      a[k] = testing::uniform(rng, 0.0, 5.0);
      b[k] = a[k] + testing::uniform(rng, 0.0, 2.0);
    }
    EXPECT_LE(maf(a), maf(b) + 1e-12);
    EXPECT_EQ(maf(std::vector<double>(m, 0.0)), 0.0);
  }
}

TEST(PlusVector, ConstructionValidates) {
  EXPECT_THROW(PlusVector({1.0, -0.5}), DomainError);
  EXPECT_THROW(PlusVector({std::numeric_limits<double>::quiet_NaN()}), DomainError);
  EXPECT_EQ(PlusVector::Unit(3, 1, 2.0), PlusVector({0.0, 2.0, 0.0}));
  EXPECT_TRUE(PlusVector::Zeros(4).is_zero());
}

TEST(PlusVector, LatticeOperations) {
  const PlusVector a{1.0, 4.0};
  const PlusVector b{2.0, 3.0};
  EXPECT_EQ(oplus(a, b), PlusVector({2.0, 4.0}));
  EXPECT_FALSE(leq(a, b));
  EXPECT_TRUE(leq(a, oplus(a, b)));
  EXPECT_TRUE(leq(a, b, 1.0));
  EXPECT_EQ(sup_distance(a, b), 1.0);
  EXPECT_EQ(add(a, b), PlusVector({3.0, 7.0}));
  EXPECT_EQ(a.scaled(0.5), PlusVector({0.5, 2.0}));
  EXPECT_EQ(a.sup_norm(), 4.0);
}

TEST(PlusVector, OplusIsLeastUpperBound) {
  std::mt19937_64 rng(22);
  for (int c = 0; c < 200; ++c) {
    const std::size_t n = testing::uniform_index(rng, 1, 8);
    const auto a = testing::random_vector(rng, n, 0, 3);
    const auto b = testing::random_vector(rng, n, 0, 3);
    const auto j = oplus(a, b);
    EXPECT_TRUE(leq(a, j) && leq(b, j));
    EXPECT_EQ(oplus(a, b), oplus(b, a));
    EXPECT_EQ(oplus(j, a), j);
    EXPECT_EQ(j.sup_norm(), std::max(a.sup_norm(), b.sup_norm()));
  }
}

}  // namespace
}  // namespace gainpath
