#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

#include "svgd/core.hpp"
#include "svgd/error.hpp"
#include "svgd/rng.hpp"

using namespace svgd;

TEST(Matrix, ShapeAndAccess) {
  Matrix m(2, 3, 1.5);
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  m(1, 2) = 4.0;
  EXPECT_EQ(m.row(1)[2], 4.0);
  EXPECT_TRUE(m.all_finite());
  m(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_FALSE(m.all_finite());
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1.0, 2.0}), InvalidArgument);
}

TEST(Ensemble, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(ParticleEnsemble(Matrix(0, 1)), InvalidArgument);
  EXPECT_THROW(ParticleEnsemble(Matrix(1, 0)), InvalidArgument);
  EXPECT_THROW(ParticleEnsemble(1, 1, {std::nan("")}), InvalidArgument);
  const std::vector<double> xs{1.0, 2.0, 3.0};
  const auto e = ParticleEnsemble::from_scalars(xs);
  EXPECT_EQ(e.n(), 3u);
  EXPECT_EQ(e.d(), 1u);
  EXPECT_EQ(e.particle(2)[0], 3.0);
}

TEST(Ensemble, GaussianInitMean) {
  RngStream rng(7);
  const auto e = ensemble_from_gaussian(100, 1, -10.0, 1.0, rng);
  double mean = 0.0;
  for (std::size_t i = 0; i < e.n(); ++i) mean += e.particle(i)[0];
  mean /= 100.0;
  EXPECT_LE(std::abs(mean + 10.0), 4.0 / std::sqrt(100.0));
}

TEST(Ensemble, GaussianInitGuards) {
  RngStream rng(1);
  EXPECT_THROW(ensemble_from_gaussian(1, 3, 0.0, 0.0, rng), InvalidArgument);
  EXPECT_THROW(ensemble_from_gaussian(0, 3, 0.0, 1.0, rng), InvalidArgument);
  EXPECT_THROW(ensemble_from_gaussian(2, 0, 0.0, 1.0, rng), InvalidArgument);
}

TEST(Ensemble, SameSeedSameDraws) {
  RngStream a(99), b(99);
  const std::vector<double> mean{0.0, 1.0, -1.0};
  EXPECT_EQ(ensemble_from_gaussian(50, mean, 2.0, a), ensemble_from_gaussian(50, mean, 2.0, b));
}

TEST(Vectors, DotNormDistance) {
  const std::vector<double> x{3.0, 4.0}, y{0.0, 0.0};
  EXPECT_EQ(norm(x), 5.0);
  EXPECT_EQ(dot(x, x), 25.0);
  EXPECT_EQ(squared_distance(x, y), 25.0);
}

TEST(Rng, StreamsDifferAndRepeat) {
  RngStream a(5, 0), b(5, 0), c(5, 1), d(6, 0);
  const auto va = a.next_u64();
  EXPECT_EQ(va, b.next_u64());
  EXPECT_NE(va, c.next_u64());
  EXPECT_NE(va, d.next_u64());
}

TEST(Rng, UniformRangeAndMoments) {
  RngStream rng(11);
  double sum = 0.0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / m, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / m));
}

TEST(Rng, NormalMoments) {
  RngStream rng(12);
  const int m = 200000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < m; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s1 / m, 0.0, 5.0 / std::sqrt(m));
  EXPECT_NEAR(s2 / m, 1.0, 5.0 * std::sqrt(2.0 / m));
}

TEST(Rng, GammaMean) {
  for (double shape : {0.5, 1.0, 3.0}) {
    RngStream rng(13);
    const double rate = 2.0;
    const int m = 100000;
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += rng.gamma(shape, rate);
    const double sd = std::sqrt(shape) / rate;
    EXPECT_NEAR(s / m, shape / rate, 5.0 * sd / std::sqrt(m)) << "shape " << shape;
  }
  RngStream rng(1);
  EXPECT_THROW(rng.gamma(0.0, 1.0), InvalidArgument);
}

TEST(Rng, UniformIndexCoversRange) {
  RngStream rng(3);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.uniform_index(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Rng, ShuffleIsPermutation) {
  RngStream rng(4);
  std::vector<int> v(100);
  std::iota(v.begin(), v.end(), 0);
  rng.shuffle(std::span<int>(v));
  std::set<int> seen(v.begin(), v.end());
  EXPECT_EQ(seen.size(), 100u);
  std::vector<int> sorted(100);
  std::iota(sorted.begin(), sorted.end(), 0);
  EXPECT_NE(v, sorted);
}

TEST(Rng, SplitIsIndependentOfParentState) {
  RngStream a(21);
  const auto child1 = a.split(3);
  a.next_u64();
  const auto child2 = a.split(3);
  RngStream c1 = child1, c2 = child2;
  EXPECT_EQ(c1.next_u64(), c2.next_u64());
}
