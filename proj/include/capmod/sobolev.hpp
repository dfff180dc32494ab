#pragma once

// Discrete W^{1,2}: Dirichlet energy, pointwise gradient modulus, the
// (squared) Sobolev norm and its m-class version, lattice operations.

#include <cmath>
#include <optional>

#include "capmod/detail/dirichlet_solve.hpp"
#include "capmod/space.hpp"

namespace capmod {

inline void require_function(const Space& space, const VertexFunction& f, const char* where) {
  if (static_cast<std::size_t>(f.size()) != space.size())
    throw Error(std::string(where) + ": function has " + std::to_string(f.size()) + " values, space has " +
                std::to_string(space.size()) + " vertices");
}

// E(f) = Σ_edges w(x,y) (f(x) - f(y))².
inline double dirichlet_energy(const Space& space, const VertexFunction& f) {
  require_function(space, f, "dirichlet_energy");
  double e = 0.0;
  for (const auto& edge : space.edges()) {
    const double d = f[static_cast<Eigen::Index>(edge.u)] - f[static_cast<Eigen::Index>(edge.v)];
    e += edge.weight * d * d;
  }
  return e;
}

// |Df|(x) = sqrt(Σ_{y~x} w(x,y) (f(y) - f(x))²); Σ_x |Df|(x)² = 2 E(f).
inline VertexFunction gradient_modulus(const Space& space, const VertexFunction& f) {
  require_function(space, f, "gradient_modulus");
  VertexFunction sq = VertexFunction::Zero(f.size());
  for (const auto& edge : space.edges()) {
    const auto u = static_cast<Eigen::Index>(edge.u), v = static_cast<Eigen::Index>(edge.v);
    const double d = f[u] - f[v];
    sq[u] += edge.weight * d * d;
    sq[v] += edge.weight * d * d;
  }
  return sq.cwiseSqrt();
}

// ‖f‖² = Σ_x m(x) f(x)² + E(f).
inline double w12_norm_squared(const Space& space, const VertexFunction& f) {
  require_function(space, f, "w12_norm_squared");
  return space.mass().dot(f.cwiseProduct(f)) + dirichlet_energy(space, f);
}

inline double w12_norm(const Space& space, const VertexFunction& f) { return std::sqrt(w12_norm_squared(space, f)); }

// A function modulo m-null vertices. Values at massless vertices in the
// representative carry no meaning.
struct MClass {
  VertexFunction representative;
};

inline bool equal_m_a_e(const Space& space, const VertexFunction& a, const VertexFunction& b, double tol = 0.0) {
  for (std::size_t x = 0; x < space.size(); ++x)
    if (space.mass(x) > 0.0 &&
        std::abs(a[static_cast<Eigen::Index>(x)] - b[static_cast<Eigen::Index>(x)]) > tol)
      return false;
  return true;
}

inline bool same_class(const Space& space, const MClass& a, const MClass& b, double tol = 0.0) {
  return equal_m_a_e(space, a.representative, b.representative, tol);
}

struct ClassNorm {
  double norm_squared;
  VertexFunction canonical;
};

// Canonical representative of an m-class: values on {m > 0} kept, values on
// {m = 0} minimize the energy (harmonic there), 0 on wholly massless
// components.
inline VertexFunction canonical_representative(const Space& space, const MClass& c) {
  require_function(space, c.representative, "canonical_representative");
  Subset charged(space.size());
  for (std::size_t x = 0; x < space.size(); ++x) charged[x] = space.mass(x) > 0.0;
  return detail::minimize_energy_with_fixed(space, charged, c.representative);
}

// inf of ‖f‖² over the representatives f of the class, with the minimizer.
inline ClassNorm w12_norm_class(const Space& space, const MClass& c) {
  VertexFunction canonical = canonical_representative(space, c);
  return {w12_norm_squared(space, canonical), std::move(canonical)};
}

struct LatticeResult {
  VertexFunction min;  // f ∧ g
  VertexFunction max;  // f ∨ g
  double lattice_norms;  // ‖f∨g‖² + ‖f∧g‖²
  double input_norms;    // ‖f‖² + ‖g‖²
  bool contraction_holds;
};

inline LatticeResult lattice_min_max(const Space& space, const VertexFunction& f, const VertexFunction& g,
                                     double tol = 1e-12) {
  require_function(space, f, "lattice_min_max");
  require_function(space, g, "lattice_min_max");
  LatticeResult r{f.cwiseMin(g), f.cwiseMax(g), 0.0, 0.0, false};
  r.lattice_norms = w12_norm_squared(space, r.max) + w12_norm_squared(space, r.min);
  r.input_norms = w12_norm_squared(space, f) + w12_norm_squared(space, g);
  r.contraction_holds = r.lattice_norms <= r.input_norms + tol * std::max(1.0, r.input_norms);
  return r;
}

// Class JSON: {id: value}; massless vertices may be omitted (value 0).
inline MClass mclass_from_json(const Space& space, const nlohmann::json& j) {
  if (!j.is_object()) throw Error("m-class: expected an object id -> value");
  VertexFunction f = VertexFunction::Zero(static_cast<Eigen::Index>(space.size()));
  std::vector<bool> seen(space.size(), false);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "canonical") continue;
    const std::size_t x = space.index_of(it.key());
    f[static_cast<Eigen::Index>(x)] = it.value().get<double>();
    seen[x] = true;
  }
  for (std::size_t x = 0; x < space.size(); ++x)
    if (!seen[x] && space.mass(x) > 0.0)
      throw Error("m-class: missing value for charged vertex '" + space.id(x) + "'");
  return {f};
}

}  // namespace capmod
