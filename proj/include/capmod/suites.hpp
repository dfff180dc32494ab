#pragma once

// Seeded property batteries. Each battery aggregates its per-sample checks
// into a few report records (worst deviation, violation counts), so a report
// stays small and byte-identical for a given seed.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "capmod/cap_module.hpp"
#include "capmod/capacity.hpp"
#include "capmod/generators.hpp"
#include "capmod/l0cap.hpp"
#include "capmod/outer_measure.hpp"
#include "capmod/quasicontinuity.hpp"
#include "capmod/report.hpp"
#include "capmod/sobolev.hpp"

namespace capmod {

namespace detail {

// Running worst value of a nonnegative deviation, recorded as one check.
struct Worst {
  double value = 0.0;
  std::size_t samples = 0;
  void add(double v) {
    value = std::max(value, v);
    ++samples;
  }
  bool record(Report& r, const std::string& name, double tol) const {
    return r.check(name, nlohmann::json{{"max_deviation_at_most", tol}},
                   nlohmann::json{{"max_deviation", value}, {"samples", samples}}, tol, value <= tol);
  }
};

struct Count {
  std::size_t violations = 0;
  std::size_t samples = 0;
  void add(bool ok) {
    violations += ok ? 0 : 1;
    ++samples;
  }
  bool record(Report& r, const std::string& name) const {
    return r.check(name, nlohmann::json{{"violations", 0}},
                   nlohmann::json{{"violations", violations}, {"samples", samples}}, 0.0, violations == 0);
  }
};

inline double rel(double dev, double scale) { return dev / std::max(1.0, std::abs(scale)); }

}  // namespace detail

// ---- Sobolev space ----------------------------------------------------------

inline Report battery_sobolev(Rng rng, std::size_t graphs = 50) {
  Report r("sobolev", "Dirichlet energy, W12 norm, lattice and class norm");
  r.parameters() = {{"graphs", graphs}};
  detail::Worst energy, parallelogram, optimality;
  detail::Count contraction;
  for (std::size_t t = 0; t < graphs; ++t) {
    Space s = random_connected_graph(rng, 2 + rng.index(15), 0.0, 2.0, 0.1, 5.0, 0.35, 0.3);
    const std::size_t n = s.size();
    VertexFunction f = random_function(rng, n), g = random_function(rng, n);
    const double e = dirichlet_energy(s, f);
    energy.add(detail::rel(std::abs(gradient_modulus(s, f).squaredNorm() - 2.0 * e), e));
    contraction.add(lattice_min_max(s, f, g).contraction_holds);
    const ClassNorm cf = w12_norm_class(s, MClass{f}), cg = w12_norm_class(s, MClass{g});
    const double lhs = w12_norm_class(s, MClass{f + g}).norm_squared + w12_norm_class(s, MClass{f - g}).norm_squared;
    const double rhs = 2.0 * cf.norm_squared + 2.0 * cg.norm_squared;
    parallelogram.add(detail::rel(std::abs(lhs - rhs), rhs));
    // The canonical representative minimizes the norm within the class.
    VertexFunction other = cf.canonical;
    for (std::size_t x = 0; x < n; ++x)
      if (s.mass(x) == 0.0) other[static_cast<Eigen::Index>(x)] += rng.uniform(-1.0, 1.0);
    optimality.add(std::max(0.0, cf.norm_squared - w12_norm_squared(s, other)));
  }
  energy.record(r, "sum |Df|^2 = 2 E(f)", 1e-12);
  contraction.record(r, "lattice normal contraction");
  parallelogram.record(r, "class norm parallelogram law", 1e-10);
  optimality.record(r, "canonical representative minimizes the class norm", 1e-12);
  return r;
}

// ---- outer measures and subadditivity of the integral ----------------------

struct SubadditivityStats {
  std::size_t instances = 0;
  std::size_t submodular = 0;
  std::size_t mismatches = 0;
  double prefix_deviation = 0.0;
};

// Monotone set functions on |X| ≤ 4 with values in {0..8}/4: the submodular
// verdict must match the exhaustive step-function violation search, and on
// submodular instances the proof measure reproduces the prefix values and
// the claimed integral comparisons exactly.
inline Report battery_subadditivity(Rng rng, std::size_t instances = 200, SubadditivityStats* stats = nullptr) {
  Report r("subadditivity", "submodularity iff subadditivity of the Cavalieri integral");
  r.parameters() = {{"instances", instances}, {"max_size", 4}, {"value_grid", "k/4, k = 0..8"}};
  SubadditivityStats st;
  detail::Count match, claims;
  for (std::size_t t = 0; t < instances; ++t) {
    const std::size_t n = 1 + rng.index(4);
    auto table = t % 2 ? random_monotone_table(rng, n) : random_submodular_table(rng, n);
    const OuterMeasure mu = table_measure(n, table);
    const bool sub = is_submodular(mu).holds;
    const auto violation = find_subadditivity_violation(mu, {false, 0, 4}, rng);
    match.add(sub == !violation.has_value());
    ++st.instances;
    if (!sub) continue;
    ++st.submodular;
    for (int k = 0; k < 4; ++k) {
      VertexFunction f(static_cast<Eigen::Index>(n)), g(static_cast<Eigen::Index>(n));
      for (std::size_t x = 0; x < n; ++x) {
        f[static_cast<Eigen::Index>(x)] = rng.integer(0, 3);
        g[static_cast<Eigen::Index>(x)] = rng.integer(0, 3);
      }
      const ProofMeasure pm = proof_measure(mu, f, g);
      Subset prefix(n, false);
      for (std::size_t i = 0; i < pm.atoms.size(); ++i) {
        prefix = subset_union(prefix, pm.atoms[i]);
        st.prefix_deviation = std::max(st.prefix_deviation, std::abs(pm.nu(prefix) - mu(prefix)));
      }
      const ClaimNu sum = check_claim_nu(mu, pm, f + g, 0.0);
      const ClaimNu cf = check_claim_nu(mu, pm, f, 0.0);
      const ClaimNu cg = check_claim_nu(mu, pm, g, 0.0);
      claims.add(sum.ordered && sum.equality && cf.holds && cg.holds);
    }
  }
  st.mismatches = match.violations;
  match.record(r, "is_submodular verdict = no subadditivity violation");
  r.check("proof measure prefix identity", 0.0, st.prefix_deviation, 0.0, st.prefix_deviation == 0.0);
  claims.record(r, "int (f+g) dnu = int (f+g) dmu, int f dnu <= int f dmu");
  r.data()["submodular_instances"] = st.submodular;
  if (stats != nullptr) *stats = st;
  return r;
}

inline Report battery_outer(Rng rng, std::size_t instances = 200) {
  Report r("outer", "outer measures, Cavalieri integral and its subadditivity");
  r.merge(battery_subadditivity(rng.split(1), instances));
  Rng local = rng.split(2);
  detail::Count builtin;
  for (std::size_t n : {1u, 3u, 5u, 8u}) {
    builtin.add(is_submodular(sqrt_card_measure(n)).holds);
    builtin.add(is_submodular(counting_measure(n)).holds);
    builtin.add(n < 2 || !is_submodular(card_squared_measure(n)).holds);
  }
  builtin.record(r, "builtin measures have the expected submodularity");
  detail::Worst layer;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + local.index(8);
    const OuterMeasure mu = sqrt_card_measure(n);
    VertexFunction f = random_function(local, n, 0.0, 3.0);
    // Layer-cake sum over the sorted values, computed independently.
    std::vector<double> levels(f.data(), f.data() + f.size());
    std::sort(levels.begin(), levels.end());
    double expected = 0.0, prev = 0.0;
    for (double t_i : levels) {
      if (t_i <= prev) continue;
      Subset above(n);
      for (std::size_t x = 0; x < n; ++x) above[x] = f[static_cast<Eigen::Index>(x)] >= t_i;
      expected += (t_i - prev) * mu(above);
      prev = t_i;
    }
    layer.add(detail::rel(std::abs(integrate(mu, f) - expected), expected));
  }
  layer.record(r, "integral equals the layer-cake sum", 1e-12);
  return r;
}

// ---- capacity ---------------------------------------------------------------

inline Report battery_capacity_oracle(Rng rng, std::size_t graphs = 50, std::size_t max_vertices = 8) {
  Report r("capacity_oracle", "capacity as the minimum of the W12 norm over admissible functions");
  r.parameters() = {{"graphs", graphs}, {"max_vertices", max_vertices}, {"mass_range", {0.0, 2.0}},
                    {"weight_range", {0.1, 5.0}}};
  detail::Worst gap;
  detail::Count kkt;
  for (std::size_t t = 0; t < graphs; ++t) {
    Space s = random_connected_graph(rng, 2 + rng.index(max_vertices - 1), 0.0, 2.0, 0.1, 5.0);
    Subset e = random_subset(rng, s.size(), 0.4);
    const CapacityResult c = capacity(s, e);
    kkt.add(c.kkt_ok);
    gap.add(std::abs(c.value - brute_force_capacity(s, e)));
  }
  gap.record(r, "|capacity - brute force| <= 1e-6", 1e-6);
  kkt.record(r, "KKT conditions verified");
  return r;
}

inline Report battery_capacity_outer(Rng rng, std::size_t graphs = 10, std::size_t vertices = 5) {
  Report r("capacity_outer", "capacity is a submodular outer measure above m");
  r.parameters() = {{"graphs", graphs}, {"vertices", vertices}};
  detail::Count sub, mono, subadd, above;
  for (std::size_t t = 0; t < graphs; ++t) {
    auto s = std::make_shared<const Space>(random_connected_graph(rng, vertices));
    const OuterMeasure mu = capacity_outer_measure(s);
    sub.add(is_submodular(mu, CheckMode::exhaustive(), nullptr, 1e-9).holds);
    mono.add(is_monotone(mu, 1e-9).holds);
    subadd.add(is_subadditive(mu, 1e-9).holds);
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << vertices); ++m) {
      double mass = 0.0;
      for (std::size_t x = 0; x < vertices; ++x)
        if (m >> x & 1u) mass += s->mass(x);
      above.add(mass <= mu(m) + 1e-9);
    }
  }
  sub.record(r, "submodular (all subset pairs)");
  mono.record(r, "monotone");
  subadd.record(r, "countably subadditive on finite families");
  above.record(r, "m(E) <= Cap(E)");
  return r;
}

inline Report battery_capacity(Rng rng) {
  Report r("capacity", "2-capacity");
  r.merge(battery_capacity_oracle(rng.split(1)));
  r.merge(battery_capacity_outer(rng.split(2)));
  Rng local = rng.split(3);
  detail::Count chains;
  for (int t = 0; t < 20; ++t) {
    Space s = random_connected_graph(local, 3 + local.index(10), 0.0, 2.0, 0.1, 5.0, 0.35, 0.2);
    std::vector<Subset> chain;
    Subset cur(s.size(), false);
    for (std::size_t x = 0; x < s.size(); ++x) {
      if (local.coin(0.5)) cur[x] = true;
      chain.push_back(cur);
    }
    chains.add(increasing_limit_check(s, chain).pass());
  }
  chains.record(r, "continuity along increasing chains");
  return r;
}

// ---- metrics -----------------------------------------------------------------

struct MetricStats {
  std::size_t sandwich_pairs = 0;
  std::size_t brute_force_comparisons = 0;
  double scan_vs_brute = 0.0;
};

inline Report battery_sandwich(Rng rng, std::size_t graphs = 10, std::size_t pairs_per_graph = 10,
                               MetricStats* stats = nullptr) {
  Report r("sandwich", "d_Cap <= d_QU <= 2 sqrt(d_Cap); exact threshold scan");
  r.parameters() = {{"graphs", graphs}, {"pairs_per_graph", pairs_per_graph}, {"slack", kSandwichSlack}};
  detail::Count lower, upper;
  detail::Worst scan;
  MetricStats st;
  for (std::size_t gi = 0; gi < graphs; ++gi) {
    CapContext ctx(random_connected_graph(rng, 2 + rng.index(11), 0.0, 2.0, 0.1, 5.0, 0.35, 0.2));
    const std::size_t n = ctx.space().size();
    for (std::size_t p = 0; p < pairs_per_graph; ++p) {
      const double amp = std::pow(10.0, rng.uniform(-3.0, 0.5));
      VertexFunction f = amp * random_function(rng, n), g = amp * random_function(rng, n);
      const double dc = dcap(ctx, f, g);
      const double dq = dqu(ctx, f, g).value;
      lower.add(dc <= dq + kSandwichSlack);
      upper.add(dq <= 2.0 * std::sqrt(dc) + kSandwichSlack);
      ++st.sandwich_pairs;
      if (n <= 12) {
        scan.add(std::abs(dq - dqu(ctx, f, g, DquMethod::brute_force).value));
        ++st.brute_force_comparisons;
      }
    }
  }
  st.scan_vs_brute = scan.value;
  lower.record(r, "d_Cap <= d_QU");
  upper.record(r, "d_QU <= 2 sqrt(d_Cap)");
  scan.record(r, "exact_scan = brute_force", 1e-12);
  if (stats != nullptr) *stats = st;
  return r;
}

inline Report battery_linkqusob(Rng rng, std::size_t pairs = 100) {
  Report r("linkqusob", "d_QU <= 3 ||[f]-[g]||^(2/3)");
  r.parameters() = {{"pairs", pairs}, {"slack", kSandwichSlack}};
  detail::Count bound;
  for (std::size_t t = 0; t < pairs; ++t) {
    CapContext ctx(random_connected_graph(rng, 2 + rng.index(11), 0.0, 2.0, 0.1, 5.0, 0.35, 0.2));
    const std::size_t n = ctx.space().size();
    const double amp = std::pow(10.0, rng.uniform(-4.0, 0.5));
    bound.add(check_linkqusob(ctx, amp * random_function(rng, n), amp * random_function(rng, n)).pass());
  }
  bound.record(r, "d_QU <= 3 norm^(2/3)");
  return r;
}

inline Report battery_dcap(Rng rng, std::size_t graphs = 10, std::size_t triples = 100) {
  Report r("dcap", "d_Cap is a pseudometric separating Cap-classes");
  r.parameters() = {{"graphs", graphs}, {"triples_per_graph", triples}};
  detail::Worst symmetry, triangle;
  detail::Count separation;
  for (std::size_t gi = 0; gi < graphs; ++gi) {
    CapContext ctx(random_connected_graph(rng, 2 + rng.index(9), 0.0, 2.0, 0.1, 5.0, 0.35, 0.2));
    const Space& s = ctx.space();
    const std::size_t n = s.size();
    for (std::size_t t = 0; t < triples; ++t) {
      VertexFunction f = random_function(rng, n), g = random_function(rng, n), h = random_function(rng, n);
      symmetry.add(std::abs(dcap(ctx, f, g) - dcap(ctx, g, f)));
      triangle.add(std::max(0.0, dcap(ctx, f, h) - dcap(ctx, f, g) - dcap(ctx, g, h)));
    }
    VertexFunction f = random_function(rng, n);
    VertexFunction g = f;
    const Subset null = s.cap_null_vertices();
    for (std::size_t x = 0; x < n; ++x)
      if (null[x]) g[static_cast<Eigen::Index>(x)] += 1.0;
    separation.add(dcap(ctx, f, g) == 0.0);
    const std::size_t x = rng.index(n);
    g = f;
    g[static_cast<Eigen::Index>(x)] += 0.5;
    separation.add((dcap(ctx, f, g) > 0.0) == !null[x]);
  }
  symmetry.record(r, "symmetry", 0.0);
  triangle.record(r, "triangle inequality", 1e-12);
  separation.record(r, "d_Cap = 0 iff equal off Cap-null vertices");
  return r;
}

inline Report battery_qcr(Rng rng, std::size_t samples = 100) {
  Report r("qcr", "quasi-continuous representative of Sobolev classes");
  r.parameters() = {{"samples", samples}};
  detail::Worst projection, linearity;
  detail::Count normqcr;
  std::size_t normqcr_reported = 0;
  for (std::size_t t = 0; t < samples; ++t) {
    Space s = random_connected_graph(rng, 3 + rng.index(10), 0.0, 2.0, 0.1, 5.0, 0.35, t % 2 ? 0.35 : 0.0);
    const std::size_t n = s.size();
    MClass c{random_function(rng, n)}, d{random_function(rng, n)};
    const VertexFunction qc = qcr(s, c).representative, qd = qcr(s, d).representative;
    double dev = 0.0;
    for (std::size_t x = 0; x < n; ++x)
      if (s.mass(x) > 0.0)
        dev = std::max(dev, std::abs(qc[static_cast<Eigen::Index>(x)] - c.representative[static_cast<Eigen::Index>(x)]));
    projection.add(dev);
    const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
    const VertexFunction lhs = qcr(s, MClass{a * c.representative + b * d.representative}).representative;
    const VertexFunction rhs = a * qc + b * qd;
    linearity.add((lhs - rhs).lpNorm<Eigen::Infinity>() / std::max(1.0, rhs.lpNorm<Eigen::Infinity>()));
    const NormQcrCheck nq = check_normqcr(s, c);
    if (nq.asserted)
      normqcr.add(nq.holds);
    else
      ++normqcr_reported;
  }
  projection.record(r, "Pr(QCR(c)) = c", 0.0);
  linearity.record(r, "QCR linear", 1e-12);
  normqcr.record(r, "|QCR f| = QCR |f| where asserted");
  r.data()["normqcr_reported_only"] = normqcr_reported;
  return r;
}

inline Report battery_metrics(Rng rng) {
  Report r("metrics", "L0(Cap) and quasi-uniform metrics");
  r.merge(battery_dcap(rng.split(1)));
  r.merge(battery_sandwich(rng.split(2)));
  r.merge(battery_linkqusob(rng.split(3)));
  r.merge(battery_qcr(rng.split(4)));
  return r;
}

// ---- modules -------------------------------------------------------------------

// Module identities on `samples` seeded (space, scalar, field) draws.
inline Report battery_modules(Rng rng, std::size_t samples = 500) {
  Report r("modules", "tangent L0(Cap)-module, quotient and factorization");
  r.parameters() = {{"samples", samples}, {"tolerance", kModuleTol}};
  detail::Count axioms, hilbert, factor;
  detail::Worst norm_identity, gradient_norm, projection, linearity, qcr_field_identity;
  std::size_t strictness_candidates = 0;
  for (std::size_t t = 0; t < samples; ++t) {
    CapContext ctx(random_connected_graph(rng, 2 + rng.index(7), 0.0, 2.0, 0.1, 5.0, 0.35, t % 2 ? 0.3 : 0.0));
    const Space& s = ctx.space();
    const std::size_t n = s.size();
    const VertexFunction f = random_function(rng, n), g = random_function(rng, n);
    const DartField v = random_field(s, rng), w = random_field(s, rng);
    const DartField gf = gradient_field(s, f);
    axioms.add(check_module_axioms(ctx, {f, g, indicator(random_subset(rng, n))}, {v, w, gf, zero_field(s)}).pass());
    hilbert.add(check_parallelogram(s, v, w).pass() && check_parallelogram(s, gf, gradient_field(s, g)).pass());
    norm_identity.add(pr_bar_norm_deviation(s, v));
    gradient_norm.add((pointwise_norm(s, gf) - gradient_modulus(s, f)).lpNorm<Eigen::Infinity>());

    const VertexFunction q = qcr(s, MClass{f}).representative;
    double dev = 0.0;
    for (std::size_t x = 0; x < n; ++x)
      if (s.mass(x) > 0.0) dev = std::max(dev, std::abs(q[static_cast<Eigen::Index>(x)] - f[static_cast<Eigen::Index>(x)]));
    projection.add(dev);
    const double a = rng.uniform(-2.0, 2.0);
    const VertexFunction lin = qcr(s, MClass{a * f + g}).representative - (a * q + qcr(s, MClass{g}).representative);
    linearity.add(lin.lpNorm<Eigen::Infinity>() / std::max(1.0, q.lpNorm<Eigen::Infinity>()));

    const MDartClass cls = pr_bar(s, v);
    const DartField canon = qcr_field(s, cls);
    qcr_field_identity.add(same_class(s, pr_bar(s, canon), cls) ? 0.0 : 1.0);

    std::vector<DartField> tests{v, w, gf};
    for (Eigen::Index d = 0; d < static_cast<Eigen::Index>(s.dart_count()); ++d)
      tests.push_back(DartField::Unit(static_cast<Eigen::Index>(s.dart_count()), d));
    bool ok = true;
    for (const Eigen::MatrixXd& T : {Eigen::MatrixXd(charged_dart_mask(s).asDiagonal()),
                                     Eigen::MatrixXd(0.5 * charged_dart_mask(s).asDiagonal()),
                                     pr_bar_times(s, indicator(random_subset(rng, n)))})
      ok = ok && factor_through(s, T, tests, &rng, 5).report.pass();
    factor.add(ok);

    if (!s.fully_charged() && t % 25 == 1) {
      const QCVectorFields qc = qc_vector_fields(s);
      for (Eigen::Index c = 0; c < qc.basis.cols(); ++c)
        if (!alt_membership(s, qc, qc.basis.col(c), QCReading::canonical)) ++strictness_candidates;
    }
  }
  axioms.record(r, "module axioms");
  hilbert.record(r, "parallelogram identity");
  norm_identity.record(r, "|pr_bar(v)| = Pr(|v|)", kModuleTol);
  gradient_norm.record(r, "|grad f| = gradient modulus", kModuleTol);
  projection.record(r, "Pr(QCR(c)) = c", 0.0);
  linearity.record(r, "QCR linear", kModuleTol);
  qcr_field_identity.record(r, "pr_bar(qcr_field(c)) = c", 0.0);
  factor.record(r, "factor_through commutes and is m-linear");
  r.data()["canonical_alt_membership_failures_R2"] = strictness_candidates;
  return r;
}

// ---- suite runner --------------------------------------------------------------

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"axioms", "outer", "capacity", "metrics", "modules", "all"};
  return names;
}

inline Report run_suite(const std::string& name, std::uint64_t seed) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw Error("unknown suite '" + name + "'; valid suites: " + list);
  }
  Report r("suite/" + name, "property batteries");
  r.parameters() = {{"suite", name}, {"seed", seed}};
  const Rng root(seed);
  const bool all = name == "all";
  if (all || name == "axioms") r.merge(battery_sobolev(root.split(1)));
  if (all || name == "outer") r.merge(battery_outer(root.split(2)));
  if (all || name == "capacity") r.merge(battery_capacity(root.split(3)));
  if (all || name == "metrics") r.merge(battery_metrics(root.split(4)));
  if (all || name == "modules") r.merge(battery_modules(root.split(5)));
  return r;
}

// Writes <path> as JSON and the same path with a .csv extension.
inline void write_report(const Report& r, const std::string& path) {
  std::string csv_path = path;
  const auto dot = csv_path.find_last_of('.');
  const auto slash = csv_path.find_last_of('/');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) csv_path.erase(dot);
  csv_path += ".csv";
  if (csv_path == path) csv_path += ".csv";
  std::ofstream js(path);
  if (!js) throw Error("cannot write report to '" + path + "'");
  js << r.to_json().dump(2) << '\n';
  std::ofstream cs(csv_path);
  if (!cs) throw Error("cannot write report to '" + csv_path + "'");
  cs << r.to_csv();
  if (!js || !cs) throw Error("failed writing report '" + path + "'");
}

inline Report run_suite(const std::string& name, std::uint64_t seed, const std::string& report_path) {
  Report r = run_suite(name, seed);
  write_report(r, report_path);
  return r;
}

}  // namespace capmod
