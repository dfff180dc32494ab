#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "capmod/space.hpp"

namespace capmod::detail {

inline constexpr std::size_t kDirectSolveLimit = 10000;
inline constexpr double kCgRelativeResidual = 1e-12;

// Minimizes Σ_x m(x) f(x)² + Σ_edges w (f(x) - f(y))² over the values of f
// off `fixed`, with f = fixed_values on `fixed`. The free block of M + L is
// SPD except on free components that carry no mass and touch no fixed
// vertex; those get f = 0.
inline VertexFunction minimize_energy_with_fixed(const Space& space, const Subset& fixed,
                                                 const VertexFunction& fixed_values) {
  const std::size_t n = space.size();
  VertexFunction f = VertexFunction::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t x = 0; x < n; ++x)
    if (fixed[x]) f[static_cast<Eigen::Index>(x)] = fixed_values[static_cast<Eigen::Index>(x)];

  // Components of the free subgraph; drop those that are massless and
  // untethered.
  std::vector<std::size_t> comp(n, SIZE_MAX);
  std::vector<bool> keep_comp;
  std::size_t ncomp = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (fixed[s] || comp[s] != SIZE_MAX) continue;
    bool anchored = false;
    std::vector<std::size_t> stack{s};
    comp[s] = ncomp;
    while (!stack.empty()) {
      std::size_t x = stack.back();
      stack.pop_back();
      if (space.mass(x) > 0.0) anchored = true;
      for (const auto& inc : space.incident(x)) {
        if (fixed[inc.neighbor]) {
          anchored = true;
        } else if (comp[inc.neighbor] == SIZE_MAX) {
          comp[inc.neighbor] = ncomp;
          stack.push_back(inc.neighbor);
        }
      }
    }
    keep_comp.push_back(anchored);
    ++ncomp;
  }

  std::vector<Eigen::Index> local(n, -1);
  Eigen::Index m = 0;
  for (std::size_t x = 0; x < n; ++x)
    if (!fixed[x] && keep_comp[comp[x]]) local[x] = m++;
  if (m == 0) return f;

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (std::size_t x = 0; x < n; ++x) {
    const Eigen::Index i = local[x];
    if (i < 0) continue;
    double diag = space.mass(x);
    for (const auto& inc : space.incident(x)) {
      diag += inc.weight;
      const std::size_t y = inc.neighbor;
      if (fixed[y]) {
        rhs[i] += inc.weight * fixed_values[static_cast<Eigen::Index>(y)];
      } else if (local[y] >= 0) {
        trips.emplace_back(i, local[y], -inc.weight);
      }
    }
    trips.emplace_back(i, i, diag);
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trips.begin(), trips.end());

  Eigen::VectorXd sol;
  if (static_cast<std::size_t>(m) <= kDirectSolveLimit) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw Error("energy minimization: factorization failed");
    sol = ldlt.solve(rhs);
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg(A);
    cg.setTolerance(kCgRelativeResidual);
    cg.setMaxIterations(std::max<Eigen::Index>(10 * m, 1000));
    sol = cg.solve(rhs);
    if (cg.info() != Eigen::Success) throw Error("energy minimization: conjugate gradient did not converge");
  }
  for (std::size_t x = 0; x < n; ++x)
    if (local[x] >= 0) f[static_cast<Eigen::Index>(x)] = sol[local[x]];
  return f;
}

// (M + L) f evaluated at every vertex.
inline VertexFunction apply_mass_laplacian(const Space& space, const VertexFunction& f) {
  VertexFunction out = space.mass().cwiseProduct(f);
  for (const auto& e : space.edges()) {
    const auto u = static_cast<Eigen::Index>(e.u), v = static_cast<Eigen::Index>(e.v);
    const double d = e.weight * (f[u] - f[v]);
    out[u] += d;
    out[v] -= d;
  }
  return out;
}

}  // namespace capmod::detail
