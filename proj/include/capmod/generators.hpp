#pragma once

// Seeded random instances shared by the property suites: connected weighted
// graphs, subsets, vertex functions, and monotone set-function tables.

#include <algorithm>
#include <string>
#include <vector>

#include "capmod/rng.hpp"
#include "capmod/space.hpp"

namespace capmod {

// Connected graph: random spanning tree plus extra edges with probability p.
// Masses uniform in [mass_lo, mass_hi]; a vertex is massless with
// probability null_prob.
inline Space random_connected_graph(Rng& rng, std::size_t n, double mass_lo = 0.0, double mass_hi = 2.0,
                                    double w_lo = 0.1, double w_hi = 5.0, double p = 0.35,
                                    double null_prob = 0.0) {
  SpaceDescription d;
  for (std::size_t i = 0; i < n; ++i) {
    double m = rng.coin(null_prob) ? 0.0 : rng.uniform(mass_lo, mass_hi);
    d.vertices.push_back({"v" + std::to_string(i), m});
  }
  std::vector<std::vector<bool>> has(n, std::vector<bool>(n, false));
  for (std::size_t i = 1; i < n; ++i) {
    std::size_t j = rng.index(i);
    has[i][j] = has[j][i] = true;
    d.edges.push_back({"v" + std::to_string(j), "v" + std::to_string(i), rng.uniform(w_lo, w_hi)});
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!has[i][j] && rng.coin(p)) {
        has[i][j] = has[j][i] = true;
        d.edges.push_back({"v" + std::to_string(i), "v" + std::to_string(j), rng.uniform(w_lo, w_hi)});
      }
  return build_space(d);
}

inline Subset random_subset(Rng& rng, std::size_t n, double p = 0.5) {
  Subset s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = rng.coin(p);
  return s;
}

inline VertexFunction random_function(Rng& rng, std::size_t n, double lo = -2.0, double hi = 2.0) {
  VertexFunction f(static_cast<Eigen::Index>(n));
  for (auto& v : f) v = rng.uniform(lo, hi);
  return f;
}

// Random monotone set function on |X| = n with values in {0, ..., 8}/4:
// each set takes the max of its immediate subsets and a fresh random value.
inline std::vector<double> random_monotone_table(Rng& rng, std::size_t n) {
  std::vector<double> v(std::size_t{1} << n, 0.0);
  for (std::uint64_t m = 1; m < v.size(); ++m) {
    double lo = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (m >> i & 1u) lo = std::max(lo, v[m & ~(std::uint64_t{1} << i)]);
    int q = rng.integer(static_cast<int>(lo * 4), 8);
    v[m] = std::max(lo, q / 4.0);
  }
  return v;
}

// Budget-additive min(cap, Σ w_i) with quarter weights: monotone and
// submodular, values in {0, ..., 8}/4.
inline std::vector<double> random_submodular_table(Rng& rng, std::size_t n) {
  std::vector<int> w(n);
  for (auto& x : w) x = rng.integer(0, 4);
  int cap = rng.integer(1, 8);
  std::vector<double> v(std::size_t{1} << n, 0.0);
  for (std::uint64_t m = 0; m < v.size(); ++m) {
    int s = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (m >> i & 1u) s += w[i];
    v[m] = std::min(cap, s) / 4.0;
  }
  return v;
}

}  // namespace capmod
