#include <gtest/gtest.h>

#include <cmath>

#include "capmod/sobolev.hpp"
#include "test_support.hpp"

using namespace capmod;
using capmod::testing::k2;
using capmod::testing::path3;
using capmod::testing::vec;

TEST(DirichletEnergy, Basics) {
  EXPECT_DOUBLE_EQ(dirichlet_energy(k2(), vec({0, 1})), 1.0);
  EXPECT_DOUBLE_EQ(dirichlet_energy(path3(), vec({3, 3, 3})), 0.0);
}

TEST(DirichletEnergy, LinearFunctionOnUnitGrid) {
  for (std::size_t n : {2u, 5u, 101u}) {
    Space g = grid_1d(0.0, 1.0, n);
    VertexFunction x(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) x[static_cast<Eigen::Index>(i)] = static_cast<double>(i) / (n - 1);
    EXPECT_NEAR(dirichlet_energy(g, x), 1.0, 1e-12);
  }
}

TEST(GradientModulus, Fixtures) {
  EXPECT_TRUE(gradient_modulus(k2(), vec({0, 1})).isApprox(vec({1, 1})));
  EXPECT_EQ(gradient_modulus(path3(), vec({2, 2, 2})), VertexFunction::Zero(3));
  VertexFunction g = gradient_modulus(path3(), vec({0, 1, 0}));
  EXPECT_DOUBLE_EQ(g[0], 1.0);
  EXPECT_DOUBLE_EQ(g[1], std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(g[2], 1.0);
}

TEST(GradientModulus, SquaresSumToTwiceEnergy) {
  Rng rng(21);
  for (int t = 0; t < 200; ++t) {
    Space s = capmod::testing::random_connected_graph(rng, 2 + rng.index(19));
    VertexFunction f = capmod::testing::random_function(rng, s.size());
    double e = dirichlet_energy(s, f);
    EXPECT_NEAR(gradient_modulus(s, f).squaredNorm(), 2.0 * e, 1e-12 * std::max(1.0, e));
  }
}

TEST(W12Norm, Fixtures) {
  EXPECT_DOUBLE_EQ(w12_norm_squared(k2(), vec({1, 1})), 2.0);
  EXPECT_DOUBLE_EQ(w12_norm_squared(k2(), vec({1, 0.5})), 1.5);
  EXPECT_DOUBLE_EQ(w12_norm_squared(k2(), vec({0, 0})), 0.0);
  EXPECT_THROW(w12_norm_squared(k2(), vec({1, 2, 3})), Error);
}

TEST(W12NormClass, HarmonicFillAtNullVertex) {
  Space p = path3(1.0, 0.0, 1.0);
  auto r = w12_norm_class(p, MClass{vec({0, 42, 1})});
  EXPECT_NEAR(r.canonical[1], 0.5, 1e-14);
  EXPECT_NEAR(r.norm_squared, 1.5, 1e-14);
}

TEST(W12NormClass, FullyChargedIsIdentity) {
  Space p = path3();
  VertexFunction f = vec({0.3, -1, 2});
  auto r = w12_norm_class(p, MClass{f});
  EXPECT_EQ(r.canonical, f);
  EXPECT_DOUBLE_EQ(r.norm_squared, w12_norm_squared(p, f));
}

TEST(W12NormClass, IsolatedMasslessVertexGetsZero) {
  SpaceDescription d;
  d.vertices = {{"a", 1.0}, {"b", 1.0}, {"z", 0.0}};
  d.edges = {{"a", "b", 1.0}};
  Space s = build_space(d);
  auto r = w12_norm_class(s, MClass{vec({1, 2, 7})});
  EXPECT_EQ(r.canonical[2], 0.0);
}

TEST(W12NormClass, LocalOptimalityAndParallelogram) {
  Rng rng(22);
  for (int t = 0; t < 100; ++t) {
    Space s = capmod::testing::random_connected_graph(rng, 3 + rng.index(10), 0.0, 2.0, 0.1, 5.0, 0.3, 0.4);
    MClass c{capmod::testing::random_function(rng, s.size())};
    auto r = w12_norm_class(s, c);
    for (std::size_t x = 0; x < s.size(); ++x) {
      if (s.mass(x) > 0.0) continue;
      for (double eps : {1e-3, -1e-3}) {
        VertexFunction p = r.canonical;
        p[static_cast<Eigen::Index>(x)] += eps;
        EXPECT_GT(w12_norm_squared(s, p), r.norm_squared);
      }
    }
    MClass d{capmod::testing::random_function(rng, s.size())};
    double sum = w12_norm_class(s, MClass{c.representative + d.representative}).norm_squared;
    double diff = w12_norm_class(s, MClass{c.representative - d.representative}).norm_squared;
    double rhs = 2.0 * r.norm_squared + 2.0 * w12_norm_class(s, d).norm_squared;
    EXPECT_NEAR(sum + diff, rhs, 1e-10 * std::max(1.0, rhs));
  }
}

TEST(Lattice, Fixtures) {
  auto r = lattice_min_max(k2(), vec({0, 1}), vec({1, 0}));
  EXPECT_EQ(r.max, vec({1, 1}));
  EXPECT_EQ(r.min, vec({0, 0}));
  EXPECT_DOUBLE_EQ(r.lattice_norms, 2.0);
  EXPECT_DOUBLE_EQ(r.input_norms, 4.0);
  EXPECT_TRUE(r.contraction_holds);

  VertexFunction f = vec({0.2, 0.7});
  auto same = lattice_min_max(k2(), f, f);
  EXPECT_DOUBLE_EQ(same.lattice_norms, same.input_norms);

  auto ordered = lattice_min_max(k2(), vec({0, 1}), vec({1, 2}));
  EXPECT_EQ(ordered.min, vec({0, 1}));
  EXPECT_DOUBLE_EQ(ordered.lattice_norms, ordered.input_norms);
}

TEST(Lattice, NormalContractionOnRandomPairs) {
  Rng rng(23);
  for (int t = 0; t < 1000; ++t) {
    Space s = capmod::testing::random_connected_graph(rng, 2 + rng.index(19));
    auto r = lattice_min_max(s, capmod::testing::random_function(rng, s.size()),
                             capmod::testing::random_function(rng, s.size()));
    EXPECT_TRUE(r.contraction_holds) << r.lattice_norms << " > " << r.input_norms;
  }
}
