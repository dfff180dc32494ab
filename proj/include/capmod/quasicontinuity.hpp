#pragma once

// The quasi-uniform distance d_QU, its comparison with d_Cap and with the
// W^{1,2} class norm, and the quasi-continuous-representative operator QCR.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "capmod/l0cap.hpp"
#include "capmod/report.hpp"
#include "capmod/sobolev.hpp"

namespace capmod {

enum class QCRegime { R1_fully_charged, R2_with_null_vertices };

inline QCRegime regime(const Space& space) {
  return space.fully_charged() ? QCRegime::R1_fully_charged : QCRegime::R2_with_null_vertices;
}

inline const char* to_string(QCRegime r) {
  return r == QCRegime::R1_fully_charged ? "R1_fully_charged" : "R2_with_null_vertices";
}

enum class DquMethod { exact_scan, brute_force, upper_bound };

inline const char* to_string(DquMethod m) {
  switch (m) {
    case DquMethod::exact_scan: return "exact_scan";
    case DquMethod::brute_force: return "brute_force";
    default: return "upper_bound";
  }
}

inline constexpr std::size_t kDquBruteForceLimit = 14;

struct DquResult {
  double value = 0.0;
  Subset optimal_set;
  std::optional<double> threshold;  // λ with optimal_set = {|f-g| ∧ 1 > λ}, for scans
  DquMethod method = DquMethod::exact_scan;  // method actually used
  bool downgraded = false;                   // exact_scan requested under a non-constant exhaustion
};

// Σ_k ω_k [Cap(E ∩ A_k) / (Cap(A_k) ∨ 1) + sup_{A_k \ E} h].
inline double dqu_cost(const CapContext& ctx, const VertexFunction& h, const Subset& e) {
  const Space& space = ctx.space();
  const auto weights = space.exhaustion_weights();
  const auto norm = ctx.normalizers();
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const Subset& a = space.exhaustion()[k];
    double sup = 0.0;
    for (std::size_t x = 0; x < space.size(); ++x)
      if (a[x] && !e[x]) sup = std::max(sup, h[static_cast<Eigen::Index>(x)]);
    total += weights[k] * (ctx.cap(subset_intersection(e, a)) * norm[k] + sup);
  }
  return total;
}

inline DquResult dqu(const CapContext& ctx, const VertexFunction& f, const VertexFunction& g,
                     DquMethod method = DquMethod::exact_scan) {
  const Space& space = ctx.space();
  require_function(space, f, "dqu");
  require_function(space, g, "dqu");
  const VertexFunction h = truncated_difference(f, g);
  const std::size_t n = space.size();
  DquResult r;
  r.method = method;

  if (method == DquMethod::brute_force) {
    if (n > kDquBruteForceLimit) throw Error("dqu: brute_force needs at most 14 vertices");
    r.value = std::numeric_limits<double>::infinity();
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
      Subset e = subset_from_mask(n, m);
      const double c = dqu_cost(ctx, h, e);
      if (c < r.value) {
        r.value = c;
        r.optimal_set = std::move(e);
      }
    }
    return r;
  }

  if (method == DquMethod::exact_scan && !space.has_constant_exhaustion()) {
    r.method = DquMethod::upper_bound;
    r.downgraded = true;
  }
  // Superlevel sets {h > λ}, λ ascending over 0 and the values of h; the
  // first strict minimum is kept, so ties resolve to the smallest λ.
  std::vector<double> levels(h.data(), h.data() + h.size());
  levels.push_back(0.0);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  r.value = std::numeric_limits<double>::infinity();
  for (double lambda : levels) {
    Subset e(n);
    for (std::size_t x = 0; x < n; ++x) e[x] = h[static_cast<Eigen::Index>(x)] > lambda;
    const double c = dqu_cost(ctx, h, e);
    if (c < r.value) {
      r.value = c;
      r.optimal_set = std::move(e);
      r.threshold = lambda;
    }
  }
  return r;
}

inline constexpr double kSandwichSlack = 1e-10;

// d_Cap ≤ d_QU ≤ 2 √d_Cap.
inline Report check_sandwich(const CapContext& ctx, const VertexFunction& f, const VertexFunction& g) {
  Report report("sandwich", "continuity of the embedding of QC(X) into L0(Cap)");
  const double dc = dcap(ctx, f, g);
  const DquResult q = dqu(ctx, f, g);
  report.data()["dcap"] = dc;
  report.data()["dqu"] = q.value;
  report.data()["dqu_method"] = to_string(q.method);
  report.check("dcap <= dqu", dc, q.value, kSandwichSlack, dc <= q.value + kSandwichSlack);
  const double upper = 2.0 * std::sqrt(dc);
  report.check("dqu <= 2 sqrt(dcap)", upper, q.value, kSandwichSlack, q.value <= upper + kSandwichSlack);
  return report;
}

// The canonical representative: harmonic at m-null vertices, 0 on wholly
// massless components.
inline CapClass qcr(const Space& space, const MClass& c) { return {canonical_representative(space, c)}; }

// Membership in the canonical quasi-continuous subspace.
inline bool is_canonical(const Space& space, const VertexFunction& f, double tol = 1e-12) {
  require_function(space, f, "is_canonical");
  const VertexFunction c = canonical_representative(space, MClass{f});
  return (c - f).lpNorm<Eigen::Infinity>() <= tol * std::max(1.0, f.lpNorm<Eigen::Infinity>());
}

// d_QU ≤ 3 ‖[f]_m - [g]_m‖^{2/3}. d_QU is evaluated on the canonical
// representatives of the two m-classes; values at m-null vertices of the raw
// inputs are not controlled by the class norm.
inline Report check_linkqusob(const CapContext& ctx, const VertexFunction& f, const VertexFunction& g) {
  const Space& space = ctx.space();
  Report report("linkqusob", "quasi-uniform distance controlled by the Sobolev norm");
  const VertexFunction cf = qcr(space, MClass{f}).representative;
  const VertexFunction cg = qcr(space, MClass{g}).representative;
  const double norm = std::sqrt(w12_norm_class(space, MClass{f - g}).norm_squared);
  const double bound = 3.0 * std::pow(norm, 2.0 / 3.0);
  const double d = dqu(ctx, cf, cg).value;
  report.data()["class_norm"] = norm;
  report.data()["dqu_canonical"] = d;
  report.data()["dqu_raw"] = dqu(ctx, f, g).value;
  report.check("dqu <= 3 norm^(2/3)", bound, d, kSandwichSlack, d <= bound + kSandwichSlack);
  return report;
}

struct QuConvergence {
  std::vector<double> distances;        // d_QU(f_n, f)
  bool converges = false;               // tail of length `window` below tol
  std::vector<std::size_t> subsequence; // n_j with d_QU(f_{n_j}, f) ≤ 2^{-j}
  double subsequence_sum = 0.0;         // Σ_j d_QU(f_{n_j}, f)
};

inline QuConvergence qu_convergence(const CapContext& ctx, const std::vector<VertexFunction>& seq,
                                    const VertexFunction& limit, double tol = 1e-2, std::size_t window = 3) {
  QuConvergence r;
  for (const auto& fn : seq) r.distances.push_back(dqu(ctx, fn, limit).value);
  const std::size_t start = seq.size() > window ? seq.size() - window : 0;
  r.converges = !seq.empty();
  for (std::size_t i = start; i < seq.size(); ++i)
    if (r.distances[i] > tol) r.converges = false;
  int j = 1;
  for (std::size_t i = 0; i < seq.size() && j <= 60; ++i)
    if (r.distances[i] <= std::ldexp(1.0, -j)) {
      r.subsequence.push_back(i);
      r.subsequence_sum += r.distances[i];
      ++j;
    }
  return r;
}

struct NormQcrCheck {
  VertexFunction abs_of_qcr;  // |QCR(f)|
  VertexFunction qcr_of_abs;  // QCR(|f|)
  double deviation = 0.0;
  bool asserted = false;  // R1, or constant sign on the boundary of each null component
  bool holds = false;
};

// |QCR(f)| = QCR(|f|). Asserted in R1 and, in R2, only when f has constant
// sign on the charged neighbours of every component of massless vertices
// (then the harmonic extension has that sign too); otherwise the deviation
// is only reported.
inline NormQcrCheck check_normqcr(const Space& space, const MClass& c, double tol = 1e-12) {
  NormQcrCheck r;
  const VertexFunction q = qcr(space, c).representative;
  r.abs_of_qcr = q.cwiseAbs();
  r.qcr_of_abs = qcr(space, MClass{c.representative.cwiseAbs()}).representative;
  r.deviation = (r.abs_of_qcr - r.qcr_of_abs).lpNorm<Eigen::Infinity>();
  r.holds = r.deviation <= tol * std::max(1.0, q.lpNorm<Eigen::Infinity>());

  // Components of the subgraph induced on massless vertices.
  const std::size_t n = space.size();
  std::vector<int> comp(n, -1);
  int next = 0;
  bool constant_sign = true;
  for (std::size_t s = 0; s < n; ++s) {
    if (space.mass(s) > 0.0 || comp[s] >= 0) continue;
    bool pos = false, neg = false;
    std::vector<std::size_t> stack{s};
    comp[s] = next;
    while (!stack.empty()) {
      const std::size_t x = stack.back();
      stack.pop_back();
      for (const auto& inc : space.incident(x)) {
        if (space.mass(inc.neighbor) > 0.0) {
          const double v = q[static_cast<Eigen::Index>(inc.neighbor)];
          pos = pos || v > 0.0;
          neg = neg || v < 0.0;
        } else if (comp[inc.neighbor] < 0) {
          comp[inc.neighbor] = next;
          stack.push_back(inc.neighbor);
        }
      }
    }
    if (pos && neg) constant_sign = false;
    ++next;
  }
  r.asserted = space.fully_charged() || constant_sign;
  return r;
}

}  // namespace capmod
