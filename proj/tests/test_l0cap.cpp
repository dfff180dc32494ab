#include <gtest/gtest.h>

#include "capmod/l0cap.hpp"
#include "test_support.hpp"

using namespace capmod;
using capmod::testing::k2;
using capmod::testing::path3;
using capmod::testing::vec;

TEST(Dcap, K2Fixtures) {
  CapContext ctx(k2());
  EXPECT_NEAR(dcap(ctx, vec({1, 0}), vec({0, 0})), 0.75, 1e-12);
  EXPECT_EQ(dcap(ctx, vec({0.3, -2}), vec({0.3, -2})), 0.0);
  EXPECT_NEAR(dcap(ctx, vec({1, 0}), vec({1, 1})), 0.75, 1e-12);
}

TEST(Dcap, TruncationAndScaling) {
  CapContext ctx(k2());
  // |f-g| ∧ 1 caps the contribution at Cap(set)/2.
  EXPECT_NEAR(dcap(ctx, vec({5, 0}), vec({0, 0})), 0.75, 1e-12);
  EXPECT_NEAR(dcap(ctx, vec({0.5, 0}), vec({0, 0})), 0.375, 1e-12);
  EXPECT_NEAR(dcap(ctx, vec({1, 1}), vec({0, 0})), 1.0, 1e-12);
}

TEST(Dcap, NonConstantExhaustionTail) {
  SpaceDescription d;
  d.vertices = {{"a", 1.0}, {"b", 1.0}};
  d.edges = {{"a", "b", 1.0}};
  d.exhaustion = std::vector<std::vector<std::string>>{{"a"}, {"a", "b"}};
  CapContext ctx(build_space(d));
  // ω = (1/2, 1/2); A_1 = {a}: Cap = 1.5; A_2 = X: Cap = 2.
  const double expected = 0.5 * 1.5 / 1.5 + 0.5 * 1.5 / 2.0;
  EXPECT_NEAR(dcap(ctx, vec({1, 0}), vec({0, 0})), expected, 1e-12);
  // χ_b is invisible on A_1.
  EXPECT_NEAR(dcap(ctx, vec({0, 1}), vec({0, 0})), 0.5 * 1.5 / 2.0, 1e-12);
}

TEST(Dcap, PseudometricOnRandomTriples) {
  Rng rng(41);
  for (int g = 0; g < 10; ++g) {
    CapContext ctx(capmod::testing::random_connected_graph(rng, 3 + rng.index(6), 0.0, 2.0, 0.1, 5.0, 0.35, 0.2));
    const std::size_t n = ctx.space().size();
    for (int t = 0; t < 100; ++t) {
      VertexFunction f = capmod::testing::random_function(rng, n);
      VertexFunction h = capmod::testing::random_function(rng, n);
      VertexFunction k = capmod::testing::random_function(rng, n);
      EXPECT_NEAR(dcap(ctx, f, h), dcap(ctx, h, f), 1e-15);
      EXPECT_LE(dcap(ctx, f, k), dcap(ctx, f, h) + dcap(ctx, h, k) + 1e-12);
    }
  }
}

TEST(Dcap, ZeroExactlyOnCapClasses) {
  SpaceDescription d;
  d.vertices = {{"a", 1.0}, {"b", 0.0}, {"p", 0.0}, {"q", 0.0}};
  d.edges = {{"a", "b", 1.0}, {"p", "q", 1.0}};
  CapContext ctx(build_space(d));
  const Space& s = ctx.space();
  // p, q form a massless component: Cap-null.
  EXPECT_EQ(dcap(ctx, vec({1, 2, 3, 4}), vec({1, 2, -9, 7})), 0.0);
  EXPECT_TRUE(same_class(s, CapClass{vec({1, 2, 3, 4})}, CapClass{vec({1, 2, -9, 7})}));
  // b is massless but carries capacity.
  EXPECT_GT(dcap(ctx, vec({1, 2, 3, 4}), vec({1, 5, 3, 4})), 0.0);
  EXPECT_FALSE(same_class(s, CapClass{vec({1, 2, 3, 4})}, CapClass{vec({1, 5, 3, 4})}));
}

TEST(PrProject, Fixtures) {
  Space p = path3(1.0, 0.0, 1.0);
  MClass c = pr_project(p, CapClass{vec({0, 7, 1})});
  EXPECT_TRUE(same_class(p, c, MClass{vec({0, -3, 1})}));
  EXPECT_FALSE(same_class(p, c, MClass{vec({0, 7, 2})}));

  // Two distinct Cap-classes with one m-class.
  CapClass f{vec({0, 7, 1})}, g{vec({0, 8, 1})};
  EXPECT_FALSE(same_class(p, f, g));
  EXPECT_TRUE(same_class(p, pr_project(p, f), pr_project(p, g)));
  ASSERT_TRUE(pr_non_injectivity_witness(p).has_value());
  EXPECT_EQ(*pr_non_injectivity_witness(p), 1u);
  EXPECT_FALSE(pr_non_injectivity_witness(path3()).has_value());
}

TEST(PrProject, Linear) {
  Rng rng(42);
  Space s = capmod::testing::random_connected_graph(rng, 8, 0.0, 2.0, 0.1, 5.0, 0.35, 0.3);
  for (int t = 0; t < 50; ++t) {
    VertexFunction f = capmod::testing::random_function(rng, 8), g = capmod::testing::random_function(rng, 8);
    double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    MClass lhs = pr_project(s, CapClass{a * f + b * g});
    MClass rhs{a * pr_project(s, CapClass{f}).representative + b * pr_project(s, CapClass{g}).representative};
    EXPECT_TRUE(same_class(s, lhs, rhs, 1e-12));
  }
}

TEST(SimpleApproximate, Fixtures) {
  EXPECT_EQ(simple_approximate(CapClass{vec({0.3, 1.7})}, 1.0).representative, vec({0, 1}));
  EXPECT_EQ(simple_approximate(CapClass{vec({0.25, 0.75})}, 0.25).representative, vec({0.25, 0.75}));
  EXPECT_EQ(simple_approximate(CapClass{vec({2.1, 2.9})}, 10.0).representative, vec({0, 0}));
  EXPECT_EQ(simple_approximate(CapClass{vec({-0.5, 0.5})}, 1.0).representative, vec({-1, 0}));
  EXPECT_THROW(simple_approximate(CapClass{vec({1, 2})}, 0.0), Error);
  EXPECT_THROW(simple_approximate(CapClass{vec({1, 2})}, -1.0), Error);
}

TEST(SimpleApproximate, ErrorBelowEps) {
  Rng rng(43);
  CapContext ctx(capmod::testing::random_connected_graph(rng, 6));
  for (int t = 0; t < 100; ++t) {
    VertexFunction f = capmod::testing::random_function(rng, 6);
    double eps = rng.uniform(0.01, 0.5);
    VertexFunction q = simple_approximate(CapClass{f}, eps).representative;
    EXPECT_LT((f - q).maxCoeff(), eps + 1e-12);
    EXPECT_GE((f - q).minCoeff(), -1e-12);
    // d_Cap ≤ ε · Cap(X)/(Cap(X) ∨ 1) ≤ ε.
    EXPECT_LE(dcap(ctx, f, q), eps + 1e-12);
  }
}

TEST(CheckConvergence, Fixtures) {
  CapContext ctx(k2());
  std::vector<VertexFunction> eventually;
  for (int n = 1; n <= 6; ++n) eventually.push_back(n >= 3 ? vec({0.2, 0.4}) : vec({5, -5}));
  auto v = check_convergence(ctx, eventually, vec({0.2, 0.4}));
  EXPECT_TRUE(v.metric_converges);
  EXPECT_TRUE(v.level_converges);
  EXPECT_TRUE(v.agree);

  std::vector<VertexFunction> shrinking;
  for (int n = 1; n <= 200; ++n) shrinking.push_back(vec({1.0 / n, 0}));
  auto s = check_convergence(ctx, shrinking, vec({0, 0}));
  for (int n = 1; n <= 200; ++n) EXPECT_NEAR(s.distances[n - 1], (1.0 / n) * 1.5 / 2.0, 1e-12);
  EXPECT_TRUE(s.metric_converges);
  EXPECT_TRUE(s.level_converges);
  EXPECT_TRUE(s.agree);
}

TEST(CheckConvergence, MovingSingletonFailsConsistently) {
  CapContext ctx(grid_1d(-5.0, 5.0, 101));
  std::vector<VertexFunction> seq;
  for (std::size_t k = 30; k < 70; k += 4) {
    VertexFunction f = VertexFunction::Zero(101);
    f[static_cast<Eigen::Index>(k)] = 1.0;
    seq.push_back(f);
  }
  auto v = check_convergence(ctx, seq, VertexFunction::Zero(101));
  EXPECT_FALSE(v.metric_converges);
  EXPECT_FALSE(v.level_converges);
  EXPECT_TRUE(v.agree);
}

TEST(CheckConvergence, VerdictIndependentOfExhaustion) {
  SpaceDescription d = space_description_from_json(space_to_json(grid_1d(0.0, 1.0, 6)));
  Space constant = build_space(d);
  d.exhaustion = std::vector<std::vector<std::string>>{{"x0", "x1"}, {"x0", "x1", "x2", "x3"}, constant.ids()};
  CapContext a(constant), b(build_space(d));
  for (double scale : {1.0, 1e-3}) {
    std::vector<VertexFunction> seq;
    for (int n = 1; n <= 20; ++n) seq.push_back(VertexFunction::Constant(6, scale / n));
    auto va = check_convergence(a, seq, VertexFunction::Zero(6), {{0.5, 0.1, 0.01}, 3, 1e-3});
    auto vb = check_convergence(b, seq, VertexFunction::Zero(6), {{0.5, 0.1, 0.01}, 3, 1e-3});
    EXPECT_EQ(va.metric_converges, vb.metric_converges);
    EXPECT_EQ(va.level_converges, vb.level_converges);
  }
}

TEST(Completion, ExtractsLimitOfCauchySequence) {
  Rng rng(44);
  CapContext ctx(capmod::testing::random_connected_graph(rng, 6));
  VertexFunction target = capmod::testing::random_function(rng, 6);
  std::vector<VertexFunction> seq;
  for (int n = 1; n <= 30; ++n) seq.push_back(target + VertexFunction::Constant(6, std::pow(0.5, n)));
  auto r = complete_limit(ctx, seq);
  ASSERT_GE(r.subsequence.size(), 2u);
  for (std::size_t j = 1; j < r.subsequence.size(); ++j) {
    EXPECT_LT(r.subsequence[j - 1], r.subsequence[j]);
    EXPECT_LE(dcap(ctx, seq[r.subsequence[j - 1]], seq[r.subsequence[j]]), std::ldexp(1.0, -static_cast<int>(j)));
  }
  EXPECT_EQ(r.exceptional_capacity, 0.0);
  EXPECT_LT(r.distances.back(), 1e-6);
  EXPECT_LT(dcap(ctx, r.limit, target), 1e-6);
}

TEST(Completion, SubsequenceConvergesPointwise) {
  CapContext ctx(k2());
  // Oscillating amplitudes along a d_Cap-convergent sequence.
  std::vector<VertexFunction> seq;
  for (int n = 1; n <= 40; ++n) seq.push_back(vec({(n % 2 ? 1.0 : -1.0) / n, 0.0}));
  auto idx = fast_cauchy_subsequence(ctx, seq);
  ASSERT_GE(idx.size(), 3u);
  for (std::size_t j = 1; j < idx.size(); ++j)
    EXPECT_LE(std::abs(seq[idx[j]][0]), std::abs(seq[idx[j - 1]][0]) + 1e-15);
  EXPECT_THROW(complete_limit(ctx, {}), Error);
}
