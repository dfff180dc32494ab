#pragma once

// Grid refinement studies and the moving-singleton scenarios.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "capmod/capacity.hpp"
#include "capmod/l0cap.hpp"
#include "capmod/quasicontinuity.hpp"
#include "capmod/report.hpp"

namespace capmod {

namespace detail {

inline void require_increasing(const std::vector<std::size_t>& n_list, const char* where) {
  if (n_list.empty()) throw Error(std::string(where) + ": empty list of grid sizes");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1]) throw Error(std::string(where) + ": grid sizes must be strictly increasing");
}

inline nlohmann::json solver_settings() {
  return {{"direct_solve_limit", kDirectSolveLimit}, {"cg_relative_residual", kCgRelativeResidual}, {"kkt_tol", kKktTol}};
}

inline Subset singleton(std::size_t n, std::size_t x) {
  Subset s(n, false);
  s[x] = true;
  return s;
}

}  // namespace detail

inline constexpr double kLineTarget = 2.0;

// Capacity of the center vertex of grid_1d(-L, L, n) against the continuum
// value 2 (minimizer e^{-|x|}).
inline Report study_refine_1d(double L, const std::vector<std::size_t>& n_list, double rel_tol = 0.02) {
  if (!(L >= 5.0)) throw Error("study_refine_1d: L must be at least 5");
  detail::require_increasing(n_list, "study_refine_1d");
  if (n_list.front() < 3) throw Error("study_refine_1d: need at least 3 grid points");
  Report r("refine_1d", "capacity of a point on the line");
  r.parameters() = {{"L", L}, {"n", n_list}, {"target", kLineTarget}, {"relative_tolerance", rel_tol},
                    {"solver", detail::solver_settings()}};
  std::vector<double> h, values, errors;
  for (std::size_t n : n_list) {
    const Space s = grid_1d(-L, L, n);
    h.push_back(2.0 * L / static_cast<double>(n - 1));
    values.push_back(capacity(s, detail::singleton(n, (n - 1) / 2)).value);
    errors.push_back(std::abs(values.back() - kLineTarget));
  }
  r.data()["h"] = h;
  r.data()["capacity"] = values;
  r.data()["error"] = errors;
  if (values.size() >= 2) {
    const std::size_t k = values.size() - 1;
    const double ratio = h[k - 1] / h[k];
    double order = 2.0;
    if (errors[k] > 0.0 && errors[k - 1] > 0.0) order = std::log(errors[k - 1] / errors[k]) / std::log(ratio);
    r.data()["observed_order"] = order;
    // Richardson extrapolation with the nominal second order.
    r.data()["limit_estimate"] = values[k] + (values[k] - values[k - 1]) / (ratio * ratio - 1.0);
  }
  r.check_close("finest capacity within tolerance of 2", kLineTarget, values.back(), rel_tol * kLineTarget);
  bool monotone = true;
  for (std::size_t i = 1; i < errors.size(); ++i) monotone = monotone && errors[i] < errors[i - 1];
  r.check_true("error decreases monotonically", monotone, errors);
  const Space finest = grid_1d(-L, L, n_list.back());
  const double whole = capacity(finest, full_subset(finest.size())).value;
  r.check_close("Cap(whole grid) = total mass = 2L", 2.0 * L, whole, 1e-9 * 2.0 * L);
  return r;
}

inline constexpr std::size_t kMaxGrid2d = 512;

// Capacity of the center vertex of grid_2d(-1, 1, n) with unit weights:
// points have zero capacity in the plane, so the values decay with n.
inline Report study_refine_2d(const std::vector<std::size_t>& n_list) {
  detail::require_increasing(n_list, "study_refine_2d");
  if (n_list.back() > kMaxGrid2d) throw Error("study_refine_2d: grid size above 512");
  if (n_list.front() < 2) throw Error("study_refine_2d: need at least 2 points per side");
  Report r("refine_2d", "points are capacity-null in dimension two");
  r.parameters() = {{"n", n_list}, {"domain", {-1.0, 1.0}}, {"edge_weight", 1.0}, {"solver", detail::solver_settings()}};
  std::vector<double> values;
  for (std::size_t n : n_list) {
    const Space s = grid_2d(-1.0, 1.0, n);
    values.push_back(capacity(s, detail::singleton(s.size(), s.index_of(grid_2d_id(n / 2, n / 2)))).value);
  }
  r.data()["capacity"] = values;
  bool decreasing = true;
  for (std::size_t i = 1; i < values.size(); ++i) decreasing = decreasing && values[i] < values[i - 1];
  r.check_true("capacity strictly decreasing", decreasing, values);
  const double ratio = values.back() / values.front();
  r.data()["ratio_last_first"] = ratio;
  if (values.size() >= 2) r.check("Cap(n_max) < 0.9 Cap(n_min)", 0.9, ratio, 0.0, ratio < 0.9);
  const Space coarse = grid_2d(-1.0, 1.0, n_list.front());
  r.check_close("Cap(whole grid) = total mass = 4", 4.0, capacity(coarse, full_subset(coarse.size())).value, 1e-9);
  return r;
}

// `count` vertices evenly spread over [-5, 5] on grid_1d(-10, 10, n).
inline std::vector<std::size_t> moving_singletons(std::size_t n, std::size_t count) {
  if (count < 2 || count > n / 4) throw Error("moving singletons: need 2 <= count <= n/4");
  const double lo = 0.25 * static_cast<double>(n - 1), hi = 0.75 * static_cast<double>(n - 1);
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < count; ++k)
    idx.push_back(static_cast<std::size_t>(std::lround(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1))));
  return idx;
}

// Translated singletons keep their capacity while χ_{P_k} → 0 pointwise, so
// the integrals do not tend to 0.
inline Report scenario_dominated_convergence_failure(std::size_t n = 1001, std::size_t count = 10) {
  Report r("dominated_convergence_failure", "no dominated convergence theorem for the capacity integral");
  r.parameters() = {{"n", n}, {"count", count}, {"domain", {-10.0, 10.0}}, {"solver", detail::solver_settings()}};
  const auto idx = moving_singletons(n, count);
  const CapContext ctx(grid_1d(-10.0, 10.0, n));
  std::vector<double> caps, integrals;
  Subset all(n, false);
  for (std::size_t x : idx) {
    const Subset p = detail::singleton(n, x);
    caps.push_back(ctx.cap(p));
    integrals.push_back(integrate(ctx.cap(), indicator(p)));
    all[x] = true;
  }
  r.data()["vertices"] = idx;
  r.data()["capacity"] = caps;
  r.data()["integral"] = integrals;
  const auto [mn, mx] = std::minmax_element(caps.begin(), caps.end());
  r.check("capacities within 5% of each other", 1.05, *mx / *mn, 0.0, *mx <= 1.05 * *mn);
  r.check("all capacities >= 0.5 Cap(P_1)", 0.5 * caps.front(), *mn, 0.0, *mn >= 0.5 * caps.front());
  const double union_cap = ctx.cap(all);
  r.check("0 < Cap(P_k) < Cap(union)", union_cap, *mx, 0.0, *mn > 0.0 && *mx < union_cap);
  const double lower = *std::min_element(integrals.begin(), integrals.end());
  r.check("integrals bounded below by a positive constant", 0.0, lower, 0.0, lower > 0.0);
  r.check_true("each vertex lies in at most one P_k (pointwise limit 0)",
               std::set<std::size_t>(idx.begin(), idx.end()).size() == idx.size());
  r.check_close("integral of the pointwise limit", 0.0, integrate(ctx.cap(), VertexFunction::Zero(static_cast<Eigen::Index>(n))), 0.0);
  return r;
}

// The moving singleton converges to 0 pointwise but neither in d_Cap nor in
// d_QU; the stationary singleton scaled by 1/k and the zero sequence do.
inline Report scenario_capae_vs_dcap(std::size_t n = 1001, std::size_t count = 10) {
  Report r("capae_vs_dcap", "pointwise convergence does not imply convergence in L0(Cap)");
  const ConvergenceOptions opt;
  const double qu_tol = 1e-2;
  r.parameters() = {{"n", n}, {"count", count}, {"eps_grid", opt.eps_grid}, {"window", opt.window},
                    {"tolerance", opt.tol}, {"qu_tolerance", qu_tol}};
  const auto idx = moving_singletons(n, count);
  const CapContext ctx(grid_1d(-10.0, 10.0, n));
  const VertexFunction zero = VertexFunction::Zero(static_cast<Eigen::Index>(n));

  std::vector<VertexFunction> moving;
  for (std::size_t x : idx) moving.push_back(indicator(detail::singleton(n, x)));
  const ConvergenceVerdict v = check_convergence(ctx, moving, zero, opt);
  const QuConvergence q = qu_convergence(ctx, moving, zero, qu_tol, opt.window);
  r.data()["moving_dcap"] = v.distances;
  r.data()["moving_dqu"] = q.distances;
  const double lower = *std::min_element(v.distances.begin(), v.distances.end());
  r.check("moving: d_Cap(f_k, 0) >= c > 0", 0.0, lower, 0.0, lower > 0.0);
  r.check_true("moving: d_Cap criterion fails", !v.metric_converges);
  r.check_true("moving: level-set criterion fails", !v.level_converges);
  r.check_true("moving: criteria agree", v.agree);
  r.check_true("moving: d_QU does not converge", !q.converges);
  std::vector<std::size_t> hits(n, 0);
  for (const auto& f : moving)
    for (std::size_t x = 0; x < n; ++x) hits[x] += f[static_cast<Eigen::Index>(x)] != 0.0;
  r.check_true("moving: pointwise convergence everywhere", *std::max_element(hits.begin(), hits.end()) <= 1);

  std::vector<VertexFunction> scaled;
  const VertexFunction chi = indicator(detail::singleton(n, (n - 1) / 2));
  for (int k = 1; k <= 200; ++k) scaled.push_back(chi / static_cast<double>(k));
  const ConvergenceVerdict vs = check_convergence(ctx, scaled, zero, opt);
  r.check_true("scaled stationary: both criteria converge", vs.metric_converges && vs.level_converges);
  r.check_true("scaled stationary: d_QU converges", qu_convergence(ctx, scaled, zero, qu_tol, opt.window).converges);

  const std::vector<VertexFunction> zeros(5, zero);
  const ConvergenceVerdict vz = check_convergence(ctx, zeros, zero, opt);
  r.check_true("zero sequence converges", vz.metric_converges && vz.level_converges &&
                                              qu_convergence(ctx, zeros, zero, qu_tol, opt.window).converges);
  return r;
}

}  // namespace capmod
