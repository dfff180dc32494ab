#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "capmod/cap_module.hpp"
#include "test_support.hpp"

using namespace capmod;
using capmod::testing::k2;
using capmod::testing::path3;
using capmod::testing::vec;

namespace {

Space random_space(Rng& rng, double null_prob) {
  return capmod::testing::random_connected_graph(rng, 3 + rng.index(8), 0.0, 2.0, 0.1, 5.0, 0.35, null_prob);
}

}  // namespace

TEST(GradientField, Fixtures) {
  Space s = k2();
  DartField g = gradient_field(s, vec({0, 1}));
  EXPECT_EQ(g, vec({1, -1}));
  EXPECT_EQ(pointwise_norm(s, g), vec({1, 1}));
  EXPECT_EQ(gradient_field(path3(), vec({2, 2, 2})), zero_field(path3()));
  VertexFunction n = pointwise_norm(path3(), gradient_field(path3(), vec({0, 1, 0})));
  EXPECT_DOUBLE_EQ(n[0], 1.0);
  EXPECT_DOUBLE_EQ(n[1], std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(n[2], 1.0);
}

TEST(GradientField, NormMatchesGradientModulusAndIsAntisymmetric) {
  Rng rng(61);
  for (int t = 0; t < 200; ++t) {
    Space s = random_space(rng, 0.2);
    VertexFunction f = capmod::testing::random_function(rng, s.size());
    DartField g = gradient_field(s, f);
    EXPECT_LE((pointwise_norm(s, g) - gradient_modulus(s, f)).lpNorm<Eigen::Infinity>(), 1e-14);
    for (std::size_t d = 0; d < s.dart_count(); ++d)
      EXPECT_EQ(g[static_cast<Eigen::Index>(d)], -g[static_cast<Eigen::Index>(Space::reverse_dart(d))]);
  }
}

TEST(PointwiseInner, Fixtures) {
  Space s = k2();
  EXPECT_EQ(pointwise_inner(s, gradient_field(s, vec({0, 1})), gradient_field(s, vec({0, 2}))), vec({2, 2}));
  DartField v = vec({0.5, -3});
  EXPECT_EQ(pointwise_inner(s, v, v), pointwise_norm(s, v).cwiseAbs2());

  SpaceDescription d;
  d.vertices = {{"a", 1.0}, {"b", 1.0}, {"c", 1.0}};
  d.edges = {{"a", "b", 1.0}, {"a", "c", 1.0}};
  Space star = build_space(d);
  DartField ab = zero_field(star), ac = zero_field(star);
  ab[0] = 1.0;  // a→b
  ac[2] = 1.0;  // a→c
  EXPECT_EQ(pointwise_inner(star, ab, ac)[0], 0.0);
}

TEST(ModuleAxioms, RandomGraphs) {
  Rng rng(62);
  for (int t = 0; t < 20; ++t) {
    CapContext ctx(random_space(rng, t % 2 ? 0.3 : 0.0));
    const Space& s = ctx.space();
    std::vector<VertexFunction> scalars;
    std::vector<DartField> fields;
    for (int i = 0; i < 5; ++i) {
      scalars.push_back(capmod::testing::random_function(rng, s.size()));
      fields.push_back(random_field(s, rng));
    }
    scalars.push_back(indicator(capmod::testing::random_subset(rng, s.size())));
    fields.push_back(zero_field(s));
    fields.push_back(gradient_field(s, capmod::testing::random_function(rng, s.size())));
    auto r = check_module_axioms(ctx, scalars, fields);
    EXPECT_TRUE(r.pass()) << r.to_json().dump(2);
  }
}

TEST(ModuleAxioms, IndicatorActionAndZeroField) {
  Rng rng(63);
  Space s = random_space(rng, 0.0);
  DartField v = random_field(s, rng);
  Subset e = capmod::testing::random_subset(rng, s.size());
  VertexFunction lhs = pointwise_norm(s, scalar_mul(s, indicator(e), v));
  EXPECT_LE((lhs - indicator(e).cwiseProduct(pointwise_norm(s, v))).lpNorm<Eigen::Infinity>(), 1e-15);
  EXPECT_EQ(pointwise_norm(s, zero_field(s)), VertexFunction::Zero(static_cast<Eigen::Index>(s.size())));
}

TEST(Parallelogram, RandomAndGradientFields) {
  Rng rng(64);
  for (int t = 0; t < 100; ++t) {
    Space s = random_space(rng, 0.2);
    DartField v = random_field(s, rng), w = random_field(s, rng);
    EXPECT_TRUE(check_parallelogram(s, v, w).pass());
    EXPECT_TRUE(check_parallelogram(s, v, v).pass());
    VertexFunction two_v = pointwise_inner(s, 2.0 * v, 2.0 * v);
    EXPECT_LE((two_v - 4.0 * pointwise_inner(s, v, v)).lpNorm<Eigen::Infinity>(), 1e-12);
    DartField gf = gradient_field(s, capmod::testing::random_function(rng, s.size()));
    DartField gg = gradient_field(s, capmod::testing::random_function(rng, s.size()));
    EXPECT_TRUE(check_parallelogram(s, gf, gg).pass());
  }
}

TEST(Quotient, PathWithNullMidpoint) {
  Space p = path3(1.0, 0.0, 1.0);
  // Darts: 0 a→b, 1 b→a, 2 b→c, 3 c→b.
  DartField at_b = vec({0, 3, -2, 0});
  EXPECT_TRUE(same_class(p, pr_bar(p, at_b), MDartClass{zero_field(p)}));
  EXPECT_FALSE(same_class(p, pr_bar(p, vec({1, 0, 0, 0})), MDartClass{zero_field(p)}));

  Space full = path3();
  DartField v = vec({1, 2, 3, 4});
  EXPECT_EQ(pr_bar(full, v).representative, v);
}

TEST(Quotient, NormIdentityAndModuleCompatibility) {
  Rng rng(65);
  for (int t = 0; t < 500; ++t) {
    Space s = random_space(rng, 0.3);
    DartField v = random_field(s, rng);
    EXPECT_LE(pr_bar_norm_deviation(s, v), 1e-15);
    VertexFunction g = capmod::testing::random_function(rng, s.size());
    EXPECT_TRUE(same_class(s, pr_bar(s, scalar_mul(s, g, v)),
                           MDartClass{scalar_mul(s, g, pr_bar(s, v).representative)}));
    DartField w = random_field(s, rng);
    EXPECT_TRUE(same_class(s, pr_bar(s, 2.0 * v - w),
                           MDartClass{2.0 * pr_bar(s, v).representative - pr_bar(s, w).representative}, 1e-15));
  }
}

TEST(Quotient, GradientNormIdentity) {
  Rng rng(66);
  for (int t = 0; t < 100; ++t) {
    Space s = random_space(rng, 0.3);
    VertexFunction f = capmod::testing::random_function(rng, s.size());
    VertexFunction lhs = pointwise_norm(s, pr_bar(s, gradient_field(s, f)).representative);
    EXPECT_TRUE(equal_m_a_e(s, lhs, gradient_modulus(s, f), 1e-14));
  }
}

TEST(Factorization, IdentityScalingAndIndicator) {
  Rng rng(67);
  for (int t = 0; t < 20; ++t) {
    Space s = random_space(rng, 0.3);
    const auto D = static_cast<Eigen::Index>(s.dart_count());
    std::vector<DartField> tests;
    for (Eigen::Index i = 0; i < D; ++i) tests.push_back(DartField::Unit(D, i));
    for (int i = 0; i < 100; ++i) tests.push_back(random_field(s, rng));
    const Eigen::MatrixXd P = charged_dart_mask(s).asDiagonal();

    auto id = factor_through(s, P, tests, &rng);
    EXPECT_TRUE(id.report.pass());
    EXPECT_EQ(id.S, P);

    auto half = factor_through(s, 0.5 * P, tests, &rng);
    EXPECT_TRUE(half.report.pass());
    EXPECT_TRUE(half.S.isApprox(0.5 * P));

    Subset e = capmod::testing::random_subset(rng, s.size());
    auto chi = factor_through(s, pr_bar_times(s, indicator(e)), tests, &rng);
    EXPECT_TRUE(chi.report.pass());
    for (const auto& v : tests)
      EXPECT_TRUE(same_class(s, MDartClass{chi.S * pr_bar(s, v).representative},
                             pr_bar(s, scalar_mul(s, indicator(e), v)), 1e-15));
  }
}

TEST(Factorization, ContractFailures) {
  Space p = path3(1.0, 0.0, 1.0);
  std::vector<DartField> tests;
  for (Eigen::Index i = 0; i < 4; ++i) tests.push_back(DartField::Unit(4, i));
  // Norm bound broken.
  EXPECT_THROW(factor_through(p, 2.0 * Eigen::MatrixXd::Identity(4, 4), tests), Error);
  // Reads a dart based at the null vertex: moves b→a onto a→b.
  Eigen::MatrixXd leak = Eigen::MatrixXd::Zero(4, 4);
  leak(0, 1) = 1.0;
  EXPECT_THROW(factor_through(p, leak, {}), Error);
  EXPECT_THROW(factor_through(p, Eigen::MatrixXd::Identity(3, 3), tests), Error);
}

TEST(QcVectorFields, FullyChargedSpansEverything) {
  Rng rng(68);
  for (int t = 0; t < 10; ++t) {
    Space s = random_space(rng, 0.0);
    auto q = qc_vector_fields(s);
    EXPECT_EQ(q.rank, s.dart_count());
    EXPECT_EQ(std::accumulate(q.fiber_dimension.begin(), q.fiber_dimension.end(), std::size_t{0}), s.dart_count());
    DartField v = random_field(s, rng);
    EXPECT_TRUE(q.member(v));
    EXPECT_TRUE(alt_membership(s, q, v, QCReading::canonical));
    EXPECT_TRUE(alt_membership(s, q, v, QCReading::trivial));
  }
}

TEST(QcVectorFields, PathFiberDimensionsAndZeroField) {
  Space p = grid_1d(0.0, 1.0, 5);
  auto q = qc_vector_fields(p);
  EXPECT_EQ(q.fiber_dimension.front(), 1u);
  EXPECT_EQ(q.fiber_dimension[2], 2u);
  EXPECT_EQ(q.fiber_dimension.back(), 1u);
  EXPECT_TRUE(q.member(zero_field(p)));

  Space r2 = path3(1.0, 0.0, 1.0);
  auto q2 = qc_vector_fields(r2);
  EXPECT_TRUE(q2.member(zero_field(r2)));
  EXPECT_TRUE(alt_membership(r2, q2, zero_field(r2), QCReading::canonical));
  // Spanning fields are alternative members under the trivial reading.
  for (Eigen::Index c = 0; c < q2.generators.cols(); ++c)
    EXPECT_TRUE(alt_membership(r2, q2, q2.generators.col(c), QCReading::trivial));
  EXPECT_LT(q2.rank, r2.dart_count() + 1);
}

TEST(QcrField, Fixtures) {
  Space p = path3(1.0, 0.0, 1.0);
  VertexFunction f = qcr(p, MClass{vec({0, 123, 1})}).representative;
  MDartClass c = pr_bar(p, gradient_field(p, f));
  DartField rec = qcr_field(p, c);
  DartField expected = gradient_field(p, vec({0, 0.5, 1}));
  EXPECT_LE((rec - expected).lpNorm<Eigen::Infinity>(), 1e-14);
  EXPECT_TRUE(same_class(p, pr_bar(p, rec), c));
  EXPECT_EQ(qcr_field(p, MDartClass{zero_field(p)}), zero_field(p));

  Rng rng(69);
  Space full = random_space(rng, 0.0);
  DartField v = random_field(full, rng);
  EXPECT_EQ(qcr_field(full, MDartClass{v}), v);
}

TEST(QcrField, GradientsWithNullEdgesAndInjectivity) {
  Rng rng(70);
  for (int t = 0; t < 100; ++t) {
    Space s = random_space(rng, 0.4);
    VertexFunction f = qcr(s, MClass{capmod::testing::random_function(rng, s.size())}).representative;
    MDartClass c = pr_bar(s, gradient_field(s, f));
    DartField rec = qcr_field(s, c, f);
    EXPECT_LE((rec - gradient_field(s, f)).lpNorm<Eigen::Infinity>(), 1e-14);
    EXPECT_TRUE(same_class(s, pr_bar(s, rec), c));

    // pr_bar is injective on the antisymmetry-completed subspace.
    DartField a = qcr_field(s, MDartClass{random_field(s, rng)});
    DartField b = qcr_field(s, MDartClass{random_field(s, rng)});
    EXPECT_TRUE(is_canonical_field(s, a));
    EXPECT_TRUE(is_canonical_field(s, b));
    EXPECT_EQ(same_class(s, pr_bar(s, a), pr_bar(s, b)), a == b);
    EXPECT_EQ(qcr_field(s, pr_bar(s, a)), a);
  }
}

TEST(Isomorphism, PermutedDartOrderPreservesNorms) {
  Rng rng(71);
  for (int t = 0; t < 20; ++t) {
    Space s = random_space(rng, 0.2);
    std::vector<std::size_t> perm(s.edge_count());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    PermutedSpace p = permute_edges(s, perm);
    DartField v = random_field(s, rng);
    EXPECT_LE((pointwise_norm(s, v) - pointwise_norm(p.space, transport_field(p, v))).lpNorm<Eigen::Infinity>(), 1e-14);
    VertexFunction f = capmod::testing::random_function(rng, s.size());
    EXPECT_EQ(transport_field(p, gradient_field(s, f)), gradient_field(p.space, f));
  }
}

TEST(DartFieldJson, RoundTripAndErrors) {
  Space s = path3(1.0, 0.0, 1.0);
  Rng rng(91);
  const DartField v = random_field(s, rng);
  EXPECT_EQ(field_from_json(s, field_to_json(s, v)), v);
  const auto partial = nlohmann::json::parse(R"({"darts":[{"from":"b","to":"a","value":2.5}]})");
  DartField expected = zero_field(s);
  expected[1] = 2.5;
  EXPECT_EQ(field_from_json(s, partial), expected);
  EXPECT_THROW(field_from_json(s, nlohmann::json::parse(R"({"darts":[{"from":"a","to":"c","value":1}]})")), Error);
  EXPECT_THROW(field_from_json(s, nlohmann::json::parse(R"({"darts":[{"from":"a","to":"b","value":1},{"from":"a","to":"b","value":2}]})")), Error);
  EXPECT_THROW(field_from_json(s, nlohmann::json::parse(R"({"fields":[]})")), Error);
}
