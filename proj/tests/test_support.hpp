#pragma once

#include <string>
#include <vector>

#include "capmod/outer_measure.hpp"
#include "capmod/generators.hpp"
#include "capmod/rng.hpp"
#include "capmod/space.hpp"

namespace capmod::testing {

// K2: a, b with unit masses and one unit edge.
inline Space k2(double ma = 1.0, double mb = 1.0, double w = 1.0) {
  SpaceDescription d;
  d.vertices = {{"a", ma}, {"b", mb}};
  d.edges = {{"a", "b", w}};
  return build_space(d);
}

// Path a–b–c with unit weights.
inline Space path3(double ma = 1.0, double mb = 1.0, double mc = 1.0) {
  SpaceDescription d;
  d.vertices = {{"a", ma}, {"b", mb}, {"c", mc}};
  d.edges = {{"a", "b", 1.0}, {"b", "c", 1.0}};
  return build_space(d);
}

inline VertexFunction vec(std::initializer_list<double> values) {
  VertexFunction f(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) f[i++] = v;
  return f;
}

using capmod::random_connected_graph;
using capmod::random_function;
using capmod::random_monotone_table;
using capmod::random_subset;
using capmod::random_submodular_table;

}  // namespace capmod::testing
