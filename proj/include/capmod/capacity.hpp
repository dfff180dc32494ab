#pragma once

// Variational 2-capacity Cap(E) = min { Σ m f² + E(f) : f ≥ 1 on E } on a
// finite graph. The equilibrium potential is found by fixing f = 1 on E and
// solving the SPD system on the complement, then verifying the KKT
// multipliers; a primal-dual active-set loop handles the cases where the
// first guess fails verification.

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "capmod/detail/dirichlet_solve.hpp"
#include "capmod/outer_measure.hpp"
#include "capmod/report.hpp"
#include "capmod/rng.hpp"
#include "capmod/sobolev.hpp"
#include "capmod/space.hpp"

namespace capmod {

inline constexpr double kKktTol = 1e-9;

enum class CapacitySolver { linear_active_set, iterative_qp };

inline const char* to_string(CapacitySolver s) {
  return s == CapacitySolver::linear_active_set ? "linear_active_set" : "iterative_qp";
}

struct CapacityResult {
  double value = 0.0;
  VertexFunction potential;
  std::vector<std::pair<std::size_t, double>> kkt_multipliers;  // vertex of E → ((M+L)f)(x)
  CapacitySolver solver = CapacitySolver::linear_active_set;
  bool kkt_ok = true;
  std::size_t active_set_iterations = 1;
};

inline CapacityResult capacity(const Space& space, const Subset& set) {
  const std::size_t n = space.size();
  if (set.size() != n) throw Error("capacity: subset over a different vertex set");
  CapacityResult result;
  const VertexFunction ones = VertexFunction::Ones(static_cast<Eigen::Index>(n));

  Subset active = set;
  VertexFunction f;
  VertexFunction residual;
  for (std::size_t iter = 1;; ++iter) {
    f = detail::minimize_energy_with_fixed(space, active, ones);
    residual = detail::apply_mass_laplacian(space, f);
    bool changed = false;
    for (std::size_t x = 0; x < n; ++x) {
      if (!set[x]) continue;
      const auto i = static_cast<Eigen::Index>(x);
      if (active[x] && residual[i] < -kKktTol) {
        active[x] = false;
        changed = true;
      } else if (!active[x] && f[i] < 1.0 - kKktTol) {
        active[x] = true;
        changed = true;
      }
    }
    result.active_set_iterations = iter;
    if (!changed) break;
    result.solver = CapacitySolver::iterative_qp;
    if (iter > n + 2) {
      result.kkt_ok = false;
      break;
    }
  }

  result.potential = f;
  result.value = w12_norm_squared(space, f);
  for (std::size_t x = 0; x < n; ++x) {
    if (!set[x]) continue;
    const auto i = static_cast<Eigen::Index>(x);
    const double lambda = active[x] ? residual[i] : 0.0;
    result.kkt_multipliers.emplace_back(x, lambda);
    if (f[i] < 1.0 - kKktTol || lambda < -kKktTol) result.kkt_ok = false;
  }
  return result;
}

// ---- independent oracle ---------------------------------------------------

struct BruteForceOptions {
  std::size_t random_starts = 10;
  std::size_t max_iterations = 200000;
  double gradient_tol = 1e-10;
  std::uint64_t seed = 0x5eed;
};

// Projected gradient descent on the dense quadratic form with an Armijo
// backtracking search (Barzilai-Borwein trial step), from random starts and
// from χ_E; projection clamps f|_E to [1, ∞).
inline double brute_force_capacity(const Space& space, const Subset& set, const BruteForceOptions& opt = {}) {
  const std::size_t n = space.size();
  if (n > 24) throw Error("brute_force_capacity: at most 24 vertices");
  if (set.size() != n) throw Error("brute_force_capacity: subset over a different vertex set");
  if (subset_count(set) == 0) return 0.0;

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t x = 0; x < n; ++x) A(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) = space.mass(x);
  for (const auto& e : space.edges()) {
    const auto u = static_cast<Eigen::Index>(e.u), v = static_cast<Eigen::Index>(e.v);
    A(u, u) += e.weight;
    A(v, v) += e.weight;
    A(u, v) -= e.weight;
    A(v, u) -= e.weight;
  }
  auto objective = [&](const Eigen::VectorXd& f) { return f.dot(A * f); };
  auto project = [&](Eigen::VectorXd f) {
    for (std::size_t x = 0; x < n; ++x)
      if (set[x]) f[static_cast<Eigen::Index>(x)] = std::max(f[static_cast<Eigen::Index>(x)], 1.0);
    return f;
  };

  Rng rng(opt.seed);
  std::vector<Eigen::VectorXd> starts;
  starts.push_back(indicator(set));
  for (std::size_t s = 0; s < opt.random_starts; ++s) {
    Eigen::VectorXd f(static_cast<Eigen::Index>(n));
    for (auto& v : f) v = rng.uniform(-1.0, 2.0);
    starts.push_back(project(f));
  }

  double best = std::numeric_limits<double>::infinity();
  bool any_converged = false;
  for (Eigen::VectorXd f : starts) {
    Eigen::VectorXd g = 2.0 * (A * f);
    double phi = objective(f);
    double step = 1.0 / std::max(1e-12, 2.0 * A.diagonal().maxCoeff());
    bool converged = false;
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
      if ((project(f - g) - f).lpNorm<Eigen::Infinity>() <= opt.gradient_tol) {
        converged = true;
        break;
      }
      // The decrease φ(f+d) - φ(f) = g·d + d·Ad is evaluated directly so the
      // sufficient-decrease test stays meaningful below the rounding level of φ.
      double t = step;
      Eigen::VectorXd trial;
      double decrease = 0.0;
      for (int bt = 0; bt < 60; ++bt) {
        trial = project(f - t * g);
        Eigen::VectorXd d = trial - f;
        decrease = g.dot(d) + d.dot(A * d);
        if (decrease <= 1e-4 * g.dot(d)) break;
        t *= 0.5;
      }
      const double phi_trial = phi + decrease;
      Eigen::VectorXd g_new = 2.0 * (A * trial);
      Eigen::VectorXd s = trial - f, y = g_new - g;
      double sy = s.dot(y);
      step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-12, 1e12) : 1.0;
      f = std::move(trial);
      g = std::move(g_new);
      phi = phi_trial;
    }
    if (converged) {
      any_converged = true;
      best = std::min(best, objective(f));
    }
  }
  if (!any_converged) throw Error("brute_force_capacity: iteration budget exhausted before convergence");
  return best;
}

// ---- outer-measure adapter ------------------------------------------------

inline OuterMeasure capacity_outer_measure(std::shared_ptr<const Space> space) {
  const std::size_t n = space->size();
  return OuterMeasure(
      n, [space](const Subset& s) { return capacity(*space, s).value; }, "capacity");
}

inline OuterMeasure capacity_outer_measure(const Space& space) {
  return capacity_outer_measure(std::make_shared<const Space>(space));
}

// Along a nested chain the values are nondecreasing and the last set
// realizes the capacity of the union.
inline Report increasing_limit_check(const Space& space, const std::vector<Subset>& chain) {
  for (std::size_t i = 1; i < chain.size(); ++i)
    if (!is_subset_of(chain[i - 1], chain[i])) throw Error("increasing_limit_check: chain is not nested");
  Report report("increasing_limit", "capacity is continuous along increasing sequences");
  std::vector<double> values;
  Subset all(space.size(), false);
  for (const auto& s : chain) {
    values.push_back(capacity(space, s).value);
    all = subset_union(all, s);
  }
  report.data()["values"] = values;
  bool nondecreasing = true;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < values[i - 1] - kKktTol) nondecreasing = false;
  report.check_true("values nondecreasing along the chain", nondecreasing, values);
  if (!chain.empty()) {
    double union_value = capacity(space, all).value;
    report.check_close("Cap(union) = Cap(last)", values.back(), union_value, kKktTol);
  }
  return report;
}

}  // namespace capmod
