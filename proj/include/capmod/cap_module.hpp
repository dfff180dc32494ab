#pragma once

// The tangent L⁰(Cap)-module of dart fields: one value per oriented edge,
// pointwise norm at the base vertex, scalar action by vertex functions at
// the base vertex, gradients as antisymmetric fields. Also the quotient to
// the m-module, the universal factorization, and quasi-continuous fields.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "capmod/l0cap.hpp"
#include "capmod/quasicontinuity.hpp"
#include "capmod/report.hpp"
#include "capmod/rng.hpp"
#include "capmod/sobolev.hpp"

namespace capmod {

// Indexed by dart: edge e owns 2e (u→v) and 2e+1 (v→u).
using DartField = Eigen::VectorXd;

inline constexpr double kModuleTol = 1e-12;

inline void require_field(const Space& space, const DartField& v, const char* where) {
  if (static_cast<std::size_t>(v.size()) != space.dart_count())
    throw Error(std::string(where) + ": dart field over a different space");
}

inline DartField zero_field(const Space& space) {
  return DartField::Zero(static_cast<Eigen::Index>(space.dart_count()));
}

// ∇̄f(x→y) = √w(x,y) (f(y) - f(x)).
inline DartField gradient_field(const Space& space, const VertexFunction& f) {
  require_function(space, f, "gradient_field");
  DartField v(static_cast<Eigen::Index>(space.dart_count()));
  for (std::size_t d = 0; d < space.dart_count(); ++d)
    v[static_cast<Eigen::Index>(d)] = std::sqrt(space.dart_weight(d)) *
                                      (f[static_cast<Eigen::Index>(space.dart_to(d))] -
                                       f[static_cast<Eigen::Index>(space.dart_from(d))]);
  return v;
}

// ⟨v, w⟩(x) = Σ over darts based at x of v·w.
inline VertexFunction pointwise_inner(const Space& space, const DartField& v, const DartField& w) {
  require_field(space, v, "pointwise_inner");
  require_field(space, w, "pointwise_inner");
  VertexFunction out = VertexFunction::Zero(static_cast<Eigen::Index>(space.size()));
  for (std::size_t d = 0; d < space.dart_count(); ++d)
    out[static_cast<Eigen::Index>(space.dart_from(d))] += v[static_cast<Eigen::Index>(d)] * w[static_cast<Eigen::Index>(d)];
  return out;
}

inline VertexFunction pointwise_norm(const Space& space, const DartField& v) {
  return pointwise_inner(space, v, v).cwiseSqrt();
}

// (f·v)(x→y) = f(x) v(x→y).
inline DartField scalar_mul(const Space& space, const VertexFunction& f, const DartField& v) {
  require_function(space, f, "scalar_mul");
  require_field(space, v, "scalar_mul");
  DartField out = v;
  for (std::size_t d = 0; d < space.dart_count(); ++d)
    out[static_cast<Eigen::Index>(d)] *= f[static_cast<Eigen::Index>(space.dart_from(d))];
  return out;
}

// Module distance Σ_k ω_k (Cap(A_k) ∨ 1)^{-1} ∫_{A_k} |v-w| ∧ 1 dCap,
// written out directly rather than through dcap.
inline double module_distance(const CapContext& ctx, const DartField& v, const DartField& w) {
  const Space& space = ctx.space();
  const VertexFunction h = pointwise_norm(space, v - w).cwiseMin(1.0);
  const auto weights = space.exhaustion_weights();
  double d = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const Subset& a = space.exhaustion()[k];
    VertexFunction hk = h;
    for (std::size_t x = 0; x < space.size(); ++x)
      if (!a[x]) hk[static_cast<Eigen::Index>(x)] = 0.0;
    d += weights[k] * integrate(ctx.cap(), hk) / std::max(ctx.cap(a), 1.0);
  }
  return d;
}

inline DartField random_field(const Space& space, Rng& rng, double lo = -1.0, double hi = 1.0) {
  DartField v(static_cast<Eigen::Index>(space.dart_count()));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

namespace detail {
inline double scale(const VertexFunction& a) { return std::max(1.0, a.lpNorm<Eigen::Infinity>()); }
inline double scale(const DartField& a, const DartField& b) {
  return std::max({1.0, a.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>()});
}
}  // namespace detail

// Pointwise module axioms on every (scalar, field) sample pair, plus the
// distance axiom against dcap of pointwise norms.
inline Report check_module_axioms(const CapContext& ctx, const std::vector<VertexFunction>& scalars,
                                  const std::vector<DartField>& fields, double tol = kModuleTol) {
  const Space& space = ctx.space();
  Report report("module_axioms", "L0(Cap)-normed module axioms");
  const Subset null = space.cap_null_vertices();
  double nonneg = 0.0, definite = 0.0, triangle = 0.0, homog = 0.0, assoc = 0.0, unit = 0.0, dist = 0.0,
         dist_triangle = 0.0;
  const VertexFunction one = VertexFunction::Ones(static_cast<Eigen::Index>(space.size()));
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const DartField& v = fields[i];
    const DartField& w = fields[(i + 1) % fields.size()];
    const DartField& u = fields[(i + 2) % fields.size()];
    const VertexFunction nv = pointwise_norm(space, v);
    nonneg = std::max(nonneg, -nv.minCoeff());
    for (std::size_t x = 0; x < space.size(); ++x) {
      if (null[x]) continue;
      double dart_max = 0.0;
      for (const auto& inc : space.incident(x)) dart_max = std::max(dart_max, std::abs(v[static_cast<Eigen::Index>(inc.out_dart)]));
      if ((nv[static_cast<Eigen::Index>(x)] == 0.0) != (dart_max == 0.0)) definite = 1.0;
    }
    const VertexFunction nw = pointwise_norm(space, w);
    triangle = std::max(triangle, (pointwise_norm(space, v + w) - nv - nw).maxCoeff() / detail::scale(nv + nw));
    unit = std::max(unit, (scalar_mul(space, one, v) - v).lpNorm<Eigen::Infinity>());
    for (std::size_t j = 0; j < scalars.size(); ++j) {
      const VertexFunction& f = scalars[j];
      const VertexFunction& g = scalars[(j + 1) % scalars.size()];
      const VertexFunction lhs = pointwise_norm(space, scalar_mul(space, f, v));
      const VertexFunction rhs = f.cwiseAbs().cwiseProduct(nv);
      homog = std::max(homog, (lhs - rhs).lpNorm<Eigen::Infinity>() / detail::scale(rhs));
      const DartField a = scalar_mul(space, f, scalar_mul(space, g, v));
      const DartField b = scalar_mul(space, f.cwiseProduct(g), v);
      assoc = std::max(assoc, (a - b).lpNorm<Eigen::Infinity>() / detail::scale(a, b));
    }
    const double dm = module_distance(ctx, v, w);
    const VertexFunction zero = VertexFunction::Zero(static_cast<Eigen::Index>(space.size()));
    dist = std::max(dist, std::abs(dm - dcap(ctx, pointwise_norm(space, v - w), zero)));
    dist_triangle = std::max(dist_triangle, dm - module_distance(ctx, v, u) - module_distance(ctx, u, w));
  }
  report.check("|v| >= 0", 0.0, nonneg, tol, nonneg <= tol);
  report.check("|v| = 0 iff v = 0 off Cap-null vertices", 0.0, definite, 0.0, definite == 0.0);
  report.check("|v+w| <= |v| + |w|", 0.0, triangle, tol, triangle <= tol);
  report.check("|f v| = |f| |v|", 0.0, homog, tol, homog <= tol);
  report.check("f (g v) = (f g) v", 0.0, assoc, tol, assoc <= tol);
  report.check("1 v = v", 0.0, unit, 0.0, unit == 0.0);
  report.check("module distance = dcap(|v-w|, 0)", 0.0, dist, tol, dist <= tol);
  report.check("module distance triangle inequality", 0.0, dist_triangle, tol, dist_triangle <= tol);
  report.data()["samples"] = {{"scalars", scalars.size()}, {"fields", fields.size()}};
  return report;
}

// |v+w|² + |v-w|² = 2|v|² + 2|w|² pointwise, and ⟨v,w⟩ as the polarization.
inline Report check_parallelogram(const Space& space, const DartField& v, const DartField& w, double tol = kModuleTol) {
  Report report("parallelogram", "Hilbert module identity");
  const VertexFunction nv = pointwise_inner(space, v, v), nw = pointwise_inner(space, w, w);
  const VertexFunction lhs = pointwise_inner(space, v + w, v + w) + pointwise_inner(space, v - w, v - w);
  const VertexFunction rhs = 2.0 * nv + 2.0 * nw;
  const double dev = (lhs - rhs).lpNorm<Eigen::Infinity>() / detail::scale(rhs);
  report.check("|v+w|^2 + |v-w|^2 = 2|v|^2 + 2|w|^2", 0.0, dev, tol, dev <= tol);
  const VertexFunction polar = 0.5 * (pointwise_inner(space, v + w, v + w) - nv - nw);
  const double pdev = (polar - pointwise_inner(space, v, w)).lpNorm<Eigen::Infinity>() / detail::scale(rhs);
  report.check("polarization = pointwise inner product", 0.0, pdev, tol, pdev <= tol);
  VertexFunction cs = pointwise_inner(space, v, w).cwiseAbs() - pointwise_norm(space, v).cwiseProduct(pointwise_norm(space, w));
  const double csdev = cs.maxCoeff() / detail::scale(rhs);
  report.check("Cauchy-Schwarz", 0.0, csdev, tol, csdev <= tol);
  return report;
}

// ---- quotient by m-a.e. equality ------------------------------------------

// A dart field modulo darts based at m-null vertices.
struct MDartClass {
  DartField representative;
};

inline bool dart_based_at_charged(const Space& space, std::size_t d) { return space.mass(space.dart_from(d)) > 0.0; }

// Diagonal of the projection that zeroes darts based at m-null vertices.
inline DartField charged_dart_mask(const Space& space) {
  DartField p(static_cast<Eigen::Index>(space.dart_count()));
  for (std::size_t d = 0; d < space.dart_count(); ++d) p[static_cast<Eigen::Index>(d)] = dart_based_at_charged(space, d) ? 1.0 : 0.0;
  return p;
}

inline MDartClass pr_bar(const Space& space, const DartField& v) {
  require_field(space, v, "pr_bar");
  return {v.cwiseProduct(charged_dart_mask(space))};
}

inline bool same_class(const Space& space, const MDartClass& a, const MDartClass& b, double tol = 0.0) {
  for (std::size_t d = 0; d < space.dart_count(); ++d)
    if (dart_based_at_charged(space, d) &&
        std::abs(a.representative[static_cast<Eigen::Index>(d)] - b.representative[static_cast<Eigen::Index>(d)]) > tol)
      return false;
  return true;
}

// Largest deviation of |pr_bar(v)| from Pr(|v|) over charged vertices.
inline double pr_bar_norm_deviation(const Space& space, const DartField& v) {
  const VertexFunction a = pointwise_norm(space, pr_bar(space, v).representative);
  const VertexFunction b = pointwise_norm(space, v);
  double dev = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x)
    if (space.mass(x) > 0.0) dev = std::max(dev, std::abs(a[static_cast<Eigen::Index>(x)] - b[static_cast<Eigen::Index>(x)]));
  return dev;
}

// ---- universal factorization ---------------------------------------------

struct Factorization {
  Eigen::MatrixXd S;  // acts on representatives; S = T P with P the charged-dart projection
  Report report{"factor_through", "universal property of the m-quotient"};
};

// Factors a linear map T (dart fields → dart fields read modulo m) through
// pr_bar. The bound |T v| ≤ Pr(|v|) is verified on the test vectors first;
// a violation, or T depending on darts at m-null vertices, is a contract
// failure.
inline Factorization factor_through(const Space& space, const Eigen::MatrixXd& T, const std::vector<DartField>& test_vectors,
                                    Rng* rng = nullptr, std::size_t linearity_samples = 20, double tol = kModuleTol) {
  const auto D = static_cast<Eigen::Index>(space.dart_count());
  if (T.rows() != D || T.cols() != D) throw Error("factor_through: T has the wrong shape");
  const DartField mask = charged_dart_mask(space);
  auto charged_max = [&](const VertexFunction& f) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < space.size(); ++x)
      if (space.mass(x) > 0.0) m = std::max(m, f[static_cast<Eigen::Index>(x)]);
    return m;
  };
  for (const auto& v : test_vectors) {
    require_field(space, v, "factor_through");
    const VertexFunction nv = pointwise_norm(space, v);
    const double excess = charged_max(pointwise_norm(space, T * v) - nv);
    if (excess > tol * detail::scale(nv)) throw Error("factor_through: bound |T v| <= Pr(|v|) violated on a test vector");
  }
  // T must vanish m-a.e. on fields supported at m-null vertices.
  const Eigen::MatrixXd leak = mask.asDiagonal() * T * (DartField::Ones(D) - mask).asDiagonal();
  if (leak.size() > 0 && leak.cwiseAbs().maxCoeff() > tol * std::max(1.0, T.cwiseAbs().maxCoeff()))
    throw Error("factor_through: T is not constant on m-classes");

  Factorization out;
  out.S = T * mask.asDiagonal();
  double commute = 0.0;
  for (const auto& v : test_vectors) {
    const DartField a = (out.S * pr_bar(space, v).representative).cwiseProduct(mask);
    const DartField b = (T * v).cwiseProduct(mask);
    commute = std::max(commute, (a - b).lpNorm<Eigen::Infinity>() / detail::scale(a, b));
  }
  out.report.check("S pr_bar = T on test vectors", 0.0, commute, tol, commute <= tol);
  double mlin = 0.0;
  if (rng != nullptr) {
    for (std::size_t s = 0; s < linearity_samples; ++s) {
      Subset e(space.size());
      for (std::size_t x = 0; x < space.size(); ++x) e[x] = rng->coin(0.5);
      const VertexFunction chi = indicator(e);
      const DartField u = random_field(space, *rng);
      const DartField a = (out.S * scalar_mul(space, chi, u)).cwiseProduct(mask);
      const DartField b = scalar_mul(space, chi, out.S * u).cwiseProduct(mask);
      mlin = std::max(mlin, (a - b).lpNorm<Eigen::Infinity>() / detail::scale(a, b));
    }
    out.report.check("S(chi_E u) = chi_E S(u)", 0.0, mlin, tol, mlin <= tol);
  }
  return out;
}

// Matrix of v ↦ pr_bar(f·v).
inline Eigen::MatrixXd pr_bar_times(const Space& space, const VertexFunction& f) {
  DartField diag = charged_dart_mask(space);
  for (std::size_t d = 0; d < space.dart_count(); ++d) diag[static_cast<Eigen::Index>(d)] *= f[static_cast<Eigen::Index>(space.dart_from(d))];
  return diag.asDiagonal();
}

// ---- quasi-continuous vector fields ----------------------------------------

enum class QCReading { trivial, canonical };

struct QCVectorFields {
  Eigen::MatrixXd generators;  // columns qcr(χ_z)·∇̄qcr(χ_y), and ∇̄qcr(χ_y)
  Eigen::MatrixXd basis;       // orthonormal basis of their span
  std::size_t rank = 0;
  std::vector<std::size_t> fiber_dimension;  // vertex degree
  std::vector<VertexFunction> potentials;    // the family qcr(χ_y)

  bool member(const DartField& v, double tol = 1e-10) const {
    const DartField r = v - basis * (basis.transpose() * v);
    return r.lpNorm<Eigen::Infinity>() <= tol * std::max(1.0, v.lpNorm<Eigen::Infinity>());
  }
};

inline QCVectorFields qc_vector_fields(const Space& space) {
  QCVectorFields q;
  const std::size_t n = space.size();
  for (std::size_t y = 0; y < n; ++y) {
    Subset s(n, false);
    s[y] = true;
    q.potentials.push_back(qcr(space, MClass{indicator(s)}).representative);
    q.fiber_dimension.push_back(space.incident(y).size());
  }
  std::vector<DartField> cols;
  for (const auto& f : q.potentials) {
    const DartField grad = gradient_field(space, f);
    cols.push_back(grad);
    for (const auto& g : q.potentials) cols.push_back(scalar_mul(space, g, grad));
  }
  const auto D = static_cast<Eigen::Index>(space.dart_count());
  q.generators.resize(D, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) q.generators.col(static_cast<Eigen::Index>(c)) = cols[c];
  if (D == 0 || cols.empty()) {
    q.basis.resize(D, 0);
    return q;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(q.generators, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double cutoff = 1e-10 * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff) ++q.rank;
  q.basis = svd.matrixU().leftCols(static_cast<Eigen::Index>(q.rank));
  return q;
}

// Alternative quasi-continuity: |v - ∇̄f| quasi-continuous for some f in the
// generating family (or f = 0). Under the trivial reading every CapClass is
// quasi-continuous; under the canonical one |v - ∇̄f| must be canonical.
inline bool alt_membership(const Space& space, const QCVectorFields& q, const DartField& v, QCReading reading) {
  if (reading == QCReading::trivial) return true;
  if (is_canonical(space, pointwise_norm(space, v))) return true;
  for (const auto& f : q.potentials)
    if (is_canonical(space, pointwise_norm(space, v - gradient_field(space, f)))) return true;
  return false;
}

// Antisymmetry-completed subspace: darts from m-null x to charged y are
// −v(y→x) and darts between m-null vertices vanish. pr_bar is injective on it.
inline bool is_canonical_field(const Space& space, const DartField& v, double tol = kModuleTol) {
  require_field(space, v, "is_canonical_field");
  for (std::size_t d = 0; d < space.dart_count(); ++d) {
    if (dart_based_at_charged(space, d)) continue;
    const std::size_t r = Space::reverse_dart(d);
    const double expected = dart_based_at_charged(space, r) ? -v[static_cast<Eigen::Index>(r)] : 0.0;
    if (std::abs(v[static_cast<Eigen::Index>(d)] - expected) > tol * std::max(1.0, std::abs(expected))) return false;
  }
  return true;
}

// Canonical representative of an m-dart class: charged darts copied;
// null→charged darts by antisymmetry; null→null darts from the gradient of
// the canonical potential when the class is a projected gradient, else 0.
inline DartField qcr_field(const Space& space, const MDartClass& c,
                           const std::optional<VertexFunction>& gradient_potential = std::nullopt) {
  require_field(space, c.representative, "qcr_field");
  DartField out = c.representative;
  std::optional<DartField> grad;
  if (gradient_potential) grad = gradient_field(space, qcr(space, MClass{*gradient_potential}).representative);
  for (std::size_t d = 0; d < space.dart_count(); ++d) {
    if (dart_based_at_charged(space, d)) continue;
    const std::size_t r = Space::reverse_dart(d);
    if (dart_based_at_charged(space, r))
      out[static_cast<Eigen::Index>(d)] = -c.representative[static_cast<Eigen::Index>(r)];
    else
      out[static_cast<Eigen::Index>(d)] = grad ? (*grad)[static_cast<Eigen::Index>(d)] : 0.0;
  }
  return out;
}

// ---- JSON ------------------------------------------------------------------

// {"darts":[{"from":id,"to":id,"value":x}]}; darts not listed are 0.
inline DartField field_from_json(const Space& space, const nlohmann::json& j) {
  detail::reject_unknown(j, {"darts"}, "dart field");
  DartField v = zero_field(space);
  std::vector<bool> seen(space.dart_count(), false);
  try {
    for (const auto& e : detail::require(j, "darts", "dart field")) {
      detail::reject_unknown(e, {"from", "to", "value"}, "dart");
      const std::size_t x = space.index_of(detail::require(e, "from", "dart").get<std::string>());
      const std::size_t y = space.index_of(detail::require(e, "to", "dart").get<std::string>());
      std::optional<std::size_t> dart;
      for (const auto& inc : space.incident(x))
        if (inc.neighbor == y) dart = inc.out_dart;
      if (!dart) throw Error("dart field: no edge " + space.id(x) + " -> " + space.id(y));
      if (seen[*dart]) throw Error("dart field: duplicate dart " + space.id(x) + " -> " + space.id(y));
      seen[*dart] = true;
      v[static_cast<Eigen::Index>(*dart)] = detail::require(e, "value", "dart").get<double>();
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(std::string("dart field: malformed JSON: ") + ex.what());
  }
  return v;
}

inline nlohmann::json field_to_json(const Space& space, const DartField& v) {
  require_field(space, v, "field_to_json");
  nlohmann::json darts = nlohmann::json::array();
  for (std::size_t d = 0; d < space.dart_count(); ++d)
    darts.push_back({{"from", space.id(space.dart_from(d))}, {"to", space.id(space.dart_to(d))},
                     {"value", v[static_cast<Eigen::Index>(d)]}});
  return {{"darts", darts}};
}

// ---- uniqueness up to isomorphism -----------------------------------------

// The same space with its edges listed in the order perm (perm[i] = old
// index of the new i-th edge), and the dart map old → new.
struct PermutedSpace {
  Space space;
  std::vector<std::size_t> dart_map;
};

inline PermutedSpace permute_edges(const Space& space, const std::vector<std::size_t>& perm) {
  if (perm.size() != space.edge_count()) throw Error("permute_edges: permutation has the wrong length");
  SpaceDescription d = space_description_from_json(space_to_json(space));
  SpaceDescription p = d;
  std::vector<std::size_t> dart_map(space.dart_count());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    p.edges[i] = d.edges.at(perm[i]);
    dart_map[2 * perm[i]] = 2 * i;
    dart_map[2 * perm[i] + 1] = 2 * i + 1;
  }
  return {build_space(p), std::move(dart_map)};
}

inline DartField transport_field(const PermutedSpace& p, const DartField& v) {
  DartField out(v.size());
  for (std::size_t d = 0; d < p.dart_map.size(); ++d) out[static_cast<Eigen::Index>(p.dart_map[d])] = v[static_cast<Eigen::Index>(d)];
  return out;
}

}  // namespace capmod
