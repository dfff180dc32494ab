#pragma once

// L⁰(Cap): functions modulo capacity-null vertices, the exhaustion-weighted
// truncated-L¹ distance d_Cap, convergence criteria, simple-function
// approximation, and the projection to m-classes.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "capmod/capacity.hpp"
#include "capmod/outer_measure.hpp"
#include "capmod/sobolev.hpp"
#include "capmod/space.hpp"

namespace capmod {

// A space together with its (cached) capacity. Copies share the cache.
class CapContext {
 public:
  explicit CapContext(Space space)
      : space_(std::make_shared<const Space>(std::move(space))), cap_(capacity_outer_measure(space_)) {}
  explicit CapContext(std::shared_ptr<const Space> space) : space_(std::move(space)), cap_(capacity_outer_measure(space_)) {}

  const Space& space() const { return *space_; }
  std::shared_ptr<const Space> shared_space() const { return space_; }
  const OuterMeasure& cap() const { return cap_; }
  double cap(const Subset& s) const { return cap_(s); }

  // 1 / (Cap(A_k) ∨ 1) for every listed exhaustion set.
  std::vector<double> normalizers() const {
    std::vector<double> out;
    for (const auto& a : space_->exhaustion()) out.push_back(1.0 / std::max(cap_(a), 1.0));
    return out;
  }

 private:
  std::shared_ptr<const Space> space_;
  OuterMeasure cap_;
};

// A function modulo Cap-null vertices.
struct CapClass {
  VertexFunction representative;
};

inline bool equal_cap_a_e(const Space& space, const VertexFunction& a, const VertexFunction& b, double tol = 0.0) {
  Subset null = space.cap_null_vertices();
  for (std::size_t x = 0; x < space.size(); ++x)
    if (!null[x] && std::abs(a[static_cast<Eigen::Index>(x)] - b[static_cast<Eigen::Index>(x)]) > tol) return false;
  return true;
}

inline bool same_class(const Space& space, const CapClass& a, const CapClass& b, double tol = 0.0) {
  return equal_cap_a_e(space, a.representative, b.representative, tol);
}

inline VertexFunction truncated_difference(const VertexFunction& f, const VertexFunction& g) {
  return (f - g).cwiseAbs().cwiseMin(1.0);
}

// Σ_k 2^{-k} (Cap(A_k) ∨ 1)^{-1} ∫_{A_k} |f-g| ∧ 1 dCap, with the stationary
// tail of the exhaustion summed in closed form.
inline double dcap(const CapContext& ctx, const VertexFunction& f, const VertexFunction& g) {
  const Space& space = ctx.space();
  require_function(space, f, "dcap");
  require_function(space, g, "dcap");
  const VertexFunction h = truncated_difference(f, g);
  const auto weights = space.exhaustion_weights();
  const auto norm = ctx.normalizers();
  double d = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k)
    d += weights[k] * norm[k] * integrate(ctx.cap(), h, space.exhaustion()[k]);
  return d;
}

inline double dcap(const CapContext& ctx, const CapClass& f, const CapClass& g) {
  return dcap(ctx, f.representative, g.representative);
}

// Forget the values on m-null vertices (they are reset to 0 in the
// returned representative).
inline MClass pr_project(const Space& space, const CapClass& c) {
  require_function(space, c.representative, "pr_project");
  VertexFunction r = c.representative;
  for (std::size_t x = 0; x < space.size(); ++x)
    if (space.mass(x) == 0.0) r[static_cast<Eigen::Index>(x)] = 0.0;
  return {r};
}

// Pr fails to be injective exactly when some massless vertex has positive
// capacity.
inline std::optional<std::size_t> pr_non_injectivity_witness(const Space& space) {
  Subset null = space.cap_null_vertices();
  for (std::size_t x = 0; x < space.size(); ++x)
    if (space.mass(x) == 0.0 && !null[x]) return x;
  return std::nullopt;
}

// Floor quantization onto the grid εℤ: Σ_i iε χ_{f^{-1}([iε, (i+1)ε))}.
inline CapClass simple_approximate(const CapClass& f, double eps) {
  if (!(eps > 0.0)) throw Error("simple_approximate: eps must be positive");
  VertexFunction r = f.representative;
  for (auto& v : r) v = std::floor(v / eps) * eps;
  return {r};
}

struct ConvergenceOptions {
  std::vector<double> eps_grid{0.5, 0.1, 0.01};
  std::size_t window = 3;
  double tol = 1e-2;
};

struct ConvergenceVerdict {
  std::vector<double> distances;       // d_Cap(f_n, f) along the sequence
  std::vector<double> level_capacity;  // max_{ε, k} Cap(A_k ∩ {|f_n - f| > ε})
  bool metric_converges = false;       // criterion on d_Cap over the tail
  bool level_converges = false;        // criterion on Cap of level sets over the tail
  bool agree = false;
};

// Both characterizations of convergence in L⁰(Cap), evaluated on the last
// `window` terms of a finite sequence.
inline ConvergenceVerdict check_convergence(const CapContext& ctx, const std::vector<VertexFunction>& seq,
                                            const VertexFunction& limit, const ConvergenceOptions& opt = {}) {
  const Space& space = ctx.space();
  ConvergenceVerdict v;
  for (const auto& fn : seq) {
    v.distances.push_back(dcap(ctx, fn, limit));
    double worst = 0.0;
    const VertexFunction diff = (fn - limit).cwiseAbs();
    for (double eps : opt.eps_grid)
      for (const auto& a : space.exhaustion()) {
        Subset level(space.size());
        for (std::size_t x = 0; x < space.size(); ++x) level[x] = a[x] && diff[static_cast<Eigen::Index>(x)] > eps;
        worst = std::max(worst, ctx.cap(level));
      }
    v.level_capacity.push_back(worst);
  }
  const std::size_t start = seq.size() > opt.window ? seq.size() - opt.window : 0;
  v.metric_converges = true;
  v.level_converges = true;
  for (std::size_t i = start; i < seq.size(); ++i) {
    if (v.distances[i] > opt.tol) v.metric_converges = false;
    if (v.level_capacity[i] > opt.tol) v.level_converges = false;
  }
  v.agree = v.metric_converges == v.level_converges;
  return v;
}

// Greedy subsequence n_1 < n_2 < ... with d_Cap(f_{n_j}, f_{n_{j+1}}) ≤ 2^{-j}:
// n_j is the first index after n_{j-1} from which every later term lies
// within 2^{-j}.
inline std::vector<std::size_t> fast_cauchy_subsequence(const CapContext& ctx, const std::vector<VertexFunction>& seq) {
  std::vector<std::size_t> idx;
  if (seq.empty()) return idx;
  auto tail_within = [&](std::size_t from, double r) {
    for (std::size_t m = from + 1; m < seq.size(); ++m)
      if (dcap(ctx, seq[from], seq[m]) > r) return false;
    return true;
  };
  std::size_t cur = 0;
  for (int j = 1;; ++j) {
    const double r = std::ldexp(1.0, -j);
    while (cur < seq.size() && !tail_within(cur, r)) ++cur;
    if (cur >= seq.size()) break;
    if (idx.empty() || idx.back() != cur) idx.push_back(cur);
    if (cur + 1 == seq.size() || j > 60) break;
    ++cur;
  }
  return idx;
}

struct CompletionResult {
  std::vector<std::size_t> subsequence;
  VertexFunction limit;
  Subset exceptional;  // vertices where the last increment exceeds its 2^{-i} threshold
  double exceptional_capacity = 0.0;
  std::vector<double> distances;  // d_Cap(f_n, limit) for every n
};

// Finite-sequence version of the completeness construction: pass to a fast
// Cauchy subsequence, take its pointwise limit (the last extracted term) and
// measure the distances to it.
inline CompletionResult complete_limit(const CapContext& ctx, const std::vector<VertexFunction>& seq) {
  const Space& space = ctx.space();
  CompletionResult r;
  r.subsequence = fast_cauchy_subsequence(ctx, seq);
  if (r.subsequence.empty()) throw Error("complete_limit: empty sequence");
  r.limit = seq[r.subsequence.back()];
  r.exceptional = Subset(space.size(), false);
  if (r.subsequence.size() >= 2) {
    const std::size_t i = r.subsequence.size() - 1;
    const VertexFunction inc = (seq[r.subsequence[i]] - seq[r.subsequence[i - 1]]).cwiseAbs();
    const double thr = std::ldexp(1.0, -static_cast<int>(i));
    for (std::size_t x = 0; x < space.size(); ++x) r.exceptional[x] = inc[static_cast<Eigen::Index>(x)] > thr;
  }
  r.exceptional_capacity = ctx.cap(r.exceptional);
  for (const auto& fn : seq) r.distances.push_back(dcap(ctx, fn, r.limit));
  return r;
}

}  // namespace capmod
