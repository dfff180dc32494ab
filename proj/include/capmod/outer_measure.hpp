#pragma once

// Set functions on a finite ground set {0, ..., n-1}: caching wrapper,
// Cavalieri integration, submodularity checks, and the atom measure used to
// prove subadditivity of the integral for submodular μ.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "capmod/rng.hpp"
#include "capmod/space.hpp"

namespace capmod {

inline constexpr double kSetFunctionTol = 1e-12;

enum class Verdict { unknown, yes, no };

struct PropertyFlag {
  Verdict verdict = Verdict::unknown;
  std::optional<std::pair<Subset, Subset>> witness;
};

// Monotone set function with a thread-safe evaluation cache. Copies share
// the cache and the verification flags.
class OuterMeasure {
 public:
  using Evaluator = std::function<double(const Subset&)>;

  OuterMeasure(std::size_t n, Evaluator eval, std::string name = "custom")
      : state_(std::make_shared<State>()) {
    state_->n = n;
    state_->eval = std::move(eval);
    state_->name = std::move(name);
  }

  std::size_t size() const { return state_->n; }
  const std::string& name() const { return state_->name; }

  double operator()(const Subset& s) const {
    if (s.size() != state_->n) throw Error("outer measure: subset over a different ground set");
    if (std::none_of(s.begin(), s.end(), [](bool b) { return b; })) return 0.0;
    {
      std::shared_lock lock(state_->mutex);
      auto it = state_->cache.find(s);
      if (it != state_->cache.end()) return it->second;
    }
    double v = state_->eval(s);
    std::unique_lock lock(state_->mutex);
    state_->cache.emplace(s, v);
    return v;
  }

  double operator()(std::uint64_t mask) const { return (*this)(subset_from_mask(state_->n, mask)); }

  std::size_t cache_size() const {
    std::shared_lock lock(state_->mutex);
    return state_->cache.size();
  }

  PropertyFlag flag(const std::string& property) const {
    std::shared_lock lock(state_->mutex);
    auto it = state_->flags.find(property);
    return it == state_->flags.end() ? PropertyFlag{} : it->second;
  }
  void set_flag(const std::string& property, PropertyFlag f) const {
    std::unique_lock lock(state_->mutex);
    state_->flags[property] = std::move(f);
  }

 private:
  struct State {
    std::size_t n = 0;
    Evaluator eval;
    std::string name;
    mutable std::shared_mutex mutex;
    std::unordered_map<Subset, double> cache;
    std::map<std::string, PropertyFlag> flags;
  };
  std::shared_ptr<State> state_;
};

inline OuterMeasure counting_measure(std::size_t n) {
  return OuterMeasure(n, [](const Subset& s) { return static_cast<double>(subset_count(s)); }, "counting");
}

inline OuterMeasure sqrt_card_measure(std::size_t n) {
  return OuterMeasure(n, [](const Subset& s) { return std::sqrt(static_cast<double>(subset_count(s))); },
                      "sqrt_card");
}

inline OuterMeasure card_squared_measure(std::size_t n) {
  return OuterMeasure(
      n,
      [](const Subset& s) {
        double c = static_cast<double>(subset_count(s));
        return c * c;
      },
      "card_squared");
}

// Table indexed by bitmask; values.size() must be 2^n with values[0] = 0.
inline OuterMeasure table_measure(std::size_t n, std::vector<double> values) {
  if (n > 24) throw Error("table measure: ground set too large");
  if (values.size() != (std::size_t{1} << n)) throw Error("table measure: need exactly 2^n values");
  if (values[0] != 0.0) throw Error("table measure: value of the empty set must be 0");
  for (double v : values)
    if (!(v >= 0.0)) throw Error("table measure: values must be nonnegative");
  auto table = std::make_shared<const std::vector<double>>(std::move(values));
  return OuterMeasure(n, [table](const Subset& s) { return (*table)[subset_to_mask(s)]; }, "table");
}

// ---- integration ----------------------------------------------------------

// Exact Cavalieri sum Σ (t_i - t_{i-1}) μ({f ≥ t_i}) over the sorted distinct
// positive values of f (optionally multiplied by χ_E).
inline double integrate(const OuterMeasure& mu, const VertexFunction& f,
                        const std::optional<Subset>& restrict_to = std::nullopt) {
  const std::size_t n = mu.size();
  if (static_cast<std::size_t>(f.size()) != n) throw Error("integrate: function size mismatch");
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = f[static_cast<Eigen::Index>(i)];
    if (std::isnan(v)) throw Error("integrate: NaN value");
    if (v < 0.0) throw Error("integrate: negative value; the integrand must be nonnegative");
    values[i] = (restrict_to && !(*restrict_to)[i]) ? 0.0 : v;
  }
  std::vector<double> levels;
  for (double v : values)
    if (v > 0.0) levels.push_back(v);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  double total = 0.0;
  double prev = 0.0;
  Subset level(n);
  for (double t : levels) {
    for (std::size_t i = 0; i < n; ++i) level[i] = values[i] >= t;
    double m = mu(level);
    if (std::isinf(m)) return std::numeric_limits<double>::infinity();
    total += (t - prev) * m;
    prev = t;
  }
  return total;
}

// ---- property checks -------------------------------------------------------

struct PairCheck {
  bool holds = true;
  std::optional<std::pair<Subset, Subset>> witness;
  double excess = 0.0;  // worst lhs - rhs found
  std::size_t pairs_checked = 0;
};

namespace detail {

inline std::vector<double> all_values(const OuterMeasure& mu) {
  const std::size_t n = mu.size();
  std::vector<double> v(std::size_t{1} << n);
  for (std::uint64_t m = 0; m < v.size(); ++m) v[m] = mu(m);
  return v;
}

}  // namespace detail

struct CheckMode {
  enum class Kind { exhaustive, sampled } kind = Kind::exhaustive;
  std::size_t budget = 0;

  static CheckMode exhaustive() { return {}; }
  static CheckMode sampled(std::size_t budget) { return {Kind::sampled, budget}; }
};

inline constexpr std::size_t kExhaustiveLimit = 16;

// μ(E∪F) + μ(E∩F) ≤ μ(E) + μ(F) for every pair. Exhaustive mode compares all
// pairs up to |X| = 10 and the equivalent single-element exchange
// inequalities μ(S+i) + μ(S+j) ≥ μ(S+i+j) + μ(S) up to |X| = 16.
inline PairCheck is_submodular(const OuterMeasure& mu, CheckMode mode = CheckMode::exhaustive(),
                               Rng* rng = nullptr, double tol = kSetFunctionTol) {
  const std::size_t n = mu.size();
  PairCheck out;
  auto consider = [&](std::uint64_t e, std::uint64_t f, double lhs, double rhs) {
    ++out.pairs_checked;
    double excess = lhs - rhs;
    if (excess > out.excess) out.excess = excess;
    if (excess > tol && (!out.witness || excess >= out.excess)) {
      out.holds = false;
      out.witness = std::make_pair(subset_from_mask(n, e), subset_from_mask(n, f));
    }
  };

  if (mode.kind == CheckMode::Kind::exhaustive) {
    if (n > kExhaustiveLimit) throw Error("is_submodular: exhaustive mode requires |X| <= 16");
    auto v = detail::all_values(mu);
    const std::uint64_t N = v.size();
    if (n <= 10) {
      for (std::uint64_t e = 0; e < N; ++e)
        for (std::uint64_t f = e + 1; f < N; ++f) consider(e, f, v[e | f] + v[e & f], v[e] + v[f]);
    } else {
      for (std::uint64_t s = 0; s < N; ++s)
        for (std::size_t i = 0; i < n; ++i) {
          if (s >> i & 1u) continue;
          for (std::size_t j = i + 1; j < n; ++j) {
            if (s >> j & 1u) continue;
            std::uint64_t si = s | (1ull << i), sj = s | (1ull << j);
            consider(si, sj, v[si | sj] + v[s], v[si] + v[sj]);
          }
        }
    }
  } else {
    if (!rng) throw Error("is_submodular: sampled mode needs a generator");
    for (std::size_t t = 0; t < mode.budget; ++t) {
      Subset e(n), f(n);
      for (std::size_t i = 0; i < n; ++i) {
        e[i] = rng->coin();
        f[i] = rng->coin();
      }
      ++out.pairs_checked;
      double excess = mu(subset_union(e, f)) + mu(subset_intersection(e, f)) - mu(e) - mu(f);
      out.excess = std::max(out.excess, excess);
      if (excess > tol && out.holds) {
        out.holds = false;
        out.witness = std::make_pair(e, f);
      }
    }
  }
  mu.set_flag("submodular", {out.holds ? (mode.kind == CheckMode::Kind::exhaustive ? Verdict::yes : Verdict::unknown)
                                       : Verdict::no,
                             out.witness});
  return out;
}

// E ⊆ F ⇒ μ(E) ≤ μ(F), via the single-element steps S ⊂ S+i.
inline PairCheck is_monotone(const OuterMeasure& mu, double tol = kSetFunctionTol) {
  const std::size_t n = mu.size();
  if (n > kExhaustiveLimit) throw Error("is_monotone: exhaustive check requires |X| <= 16");
  auto v = detail::all_values(mu);
  PairCheck out;
  for (std::uint64_t s = 0; s < v.size(); ++s)
    for (std::size_t i = 0; i < n; ++i) {
      if (s >> i & 1u) continue;
      std::uint64_t t = s | (1ull << i);
      ++out.pairs_checked;
      double excess = v[s] - v[t];
      out.excess = std::max(out.excess, excess);
      if (excess > tol && out.holds) {
        out.holds = false;
        out.witness = std::make_pair(subset_from_mask(n, s), subset_from_mask(n, t));
      }
    }
  mu.set_flag("monotone", {out.holds ? Verdict::yes : Verdict::no, out.witness});
  return out;
}

// μ(E∪F) ≤ μ(E) + μ(F) over all pairs (finite and countable subadditivity
// agree on a finite ground set).
inline PairCheck is_subadditive(const OuterMeasure& mu, double tol = kSetFunctionTol) {
  const std::size_t n = mu.size();
  if (n > 12) throw Error("is_subadditive: exhaustive check requires |X| <= 12");
  auto v = detail::all_values(mu);
  PairCheck out;
  for (std::uint64_t e = 0; e < v.size(); ++e)
    for (std::uint64_t f = e + 1; f < v.size(); ++f) {
      ++out.pairs_checked;
      double excess = v[e | f] - v[e] - v[f];
      out.excess = std::max(out.excess, excess);
      if (excess > tol && out.holds) {
        out.holds = false;
        out.witness = std::make_pair(subset_from_mask(n, e), subset_from_mask(n, f));
      }
    }
  mu.set_flag("subadditive", {out.holds ? Verdict::yes : Verdict::no, out.witness});
  return out;
}

// ---- subadditivity of the integral ----------------------------------------

struct Violation {
  VertexFunction f;
  VertexFunction g;
  double integral_sum;   // ∫(f+g) dμ
  double sum_integrals;  // ∫f dμ + ∫g dμ
};

struct ViolationSearch {
  bool witness_first = true;       // try χ_E, χ_F from a submodularity witness
  std::size_t random_budget = 0;   // random step-function pairs
  std::size_t exhaustive_up_to = 4;  // enumerate all {0..3}-valued pairs for |X| ≤ this
};

inline std::optional<Violation> find_subadditivity_violation(const OuterMeasure& mu, const ViolationSearch& search,
                                                             Rng& rng, double tol = kSetFunctionTol) {
  const std::size_t n = mu.size();
  auto test = [&](const VertexFunction& f, const VertexFunction& g) -> std::optional<Violation> {
    double lhs = integrate(mu, f + g);
    double rhs = integrate(mu, f) + integrate(mu, g);
    if (lhs > rhs + tol) return Violation{f, g, lhs, rhs};
    return std::nullopt;
  };

  if (search.witness_first) {
    PairCheck sub = n <= kExhaustiveLimit
                        ? is_submodular(mu, CheckMode::exhaustive(), nullptr, tol)
                        : is_submodular(mu, CheckMode::sampled(std::max<std::size_t>(search.random_budget, 1)), &rng,
                                        tol);
    if (sub.witness)
      if (auto v = test(indicator(sub.witness->first), indicator(sub.witness->second))) return v;
  }

  if (n <= search.exhaustive_up_to) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= 4;
    std::vector<VertexFunction> steps(total, VertexFunction::Zero(static_cast<Eigen::Index>(n)));
    for (std::size_t code = 0; code < total; ++code) {
      std::size_t c = code;
      for (std::size_t i = 0; i < n; ++i, c /= 4) steps[code][static_cast<Eigen::Index>(i)] = static_cast<double>(c % 4);
    }
    std::vector<double> single(total);
    for (std::size_t a = 0; a < total; ++a) single[a] = integrate(mu, steps[a]);
    for (std::size_t a = 0; a < total; ++a)
      for (std::size_t b = a; b < total; ++b) {
        double lhs = integrate(mu, steps[a] + steps[b]);
        if (lhs > single[a] + single[b] + tol) return Violation{steps[a], steps[b], lhs, single[a] + single[b]};
      }
  }

  for (std::size_t t = 0; t < search.random_budget; ++t) {
    VertexFunction f(static_cast<Eigen::Index>(n)), g(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      f[static_cast<Eigen::Index>(i)] = rng.integer(0, 3);
      g[static_cast<Eigen::Index>(i)] = rng.integer(0, 3);
    }
    if (auto v = test(f, g)) return v;
  }
  return std::nullopt;
}

// Atoms of the algebra generated by the level sets of f and g on the support
// {f > 0} ∪ {g > 0}, ordered so that f+g is nonincreasing (ties by ascending
// atom index), together with the measure ν fixed by ν(A_1 ∪ ... ∪ A_i) =
// μ(A_1 ∪ ... ∪ A_i).
struct ProofMeasure {
  std::vector<Subset> atoms;
  std::vector<double> atom_values;  // ν(A_i)
  std::vector<double> level;        // (f+g) on A_i
  std::vector<double> prefix_mu;    // μ(A_1 ∪ ... ∪ A_i)

  double nu(const Subset& union_of_atoms) const {
    double s = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (is_subset_of(atoms[i], union_of_atoms)) s += atom_values[i];
    return s;
  }
};

inline ProofMeasure proof_measure(const OuterMeasure& mu, const VertexFunction& f, const VertexFunction& g,
                                  double tol = kSetFunctionTol) {
  const std::size_t n = mu.size();
  if (static_cast<std::size_t>(f.size()) != n || static_cast<std::size_t>(g.size()) != n)
    throw Error("proof_measure: function size mismatch");
  if ((f.array() < 0.0).any() || (g.array() < 0.0).any()) throw Error("proof_measure: functions must be nonnegative");

  // Atoms keyed by (f, g) value pair, indexed by first vertex.
  std::vector<std::pair<double, double>> keys;
  std::vector<Subset> atoms;
  for (std::size_t x = 0; x < n; ++x) {
    const double fx = f[static_cast<Eigen::Index>(x)], gx = g[static_cast<Eigen::Index>(x)];
    if (fx == 0.0 && gx == 0.0) continue;
    auto it = std::find(keys.begin(), keys.end(), std::make_pair(fx, gx));
    std::size_t a = static_cast<std::size_t>(it - keys.begin());
    if (it == keys.end()) {
      keys.emplace_back(fx, gx);
      atoms.emplace_back(n, false);
    }
    atoms[a][x] = true;
  }
  std::vector<std::size_t> order(atoms.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return keys[a].first + keys[a].second > keys[b].first + keys[b].second;
  });

  ProofMeasure pm;
  Subset prefix(n, false);
  double prev = 0.0;
  for (std::size_t idx : order) {
    prefix = subset_union(prefix, atoms[idx]);
    double m = mu(prefix);
    if (!std::isfinite(m)) throw Error("proof_measure: μ must be finite on the support");
    double value = m - prev;
    if (value < -tol) throw Error("proof_measure: μ is not monotone (negative prefix difference)");
    pm.atoms.push_back(atoms[idx]);
    pm.atom_values.push_back(std::max(value, 0.0));
    pm.level.push_back(keys[idx].first + keys[idx].second);
    pm.prefix_mu.push_back(m);
    prev = m;
  }
  return pm;
}

struct ClaimNu {
  double integral_mu = 0.0;
  double integral_nu = 0.0;
  bool ordered = false;       // h nonincreasing along the atom order
  bool inequality = false;    // ∫h dν ≤ ∫h dμ
  bool equality = false;      // |∫h dν - ∫h dμ| ≤ tol
  bool holds = false;         // inequality, and equality whenever ordered
};

inline ClaimNu check_claim_nu(const OuterMeasure& mu, const ProofMeasure& pm, const VertexFunction& h,
                              double tol = kSetFunctionTol) {
  const std::size_t n = mu.size();
  if ((h.array() < 0.0).any()) throw Error("check_claim_nu: h must be nonnegative");
  Subset covered(n, false);
  std::vector<double> atom_h;
  for (const auto& atom : pm.atoms) {
    std::optional<double> value;
    for (std::size_t x = 0; x < n; ++x) {
      if (!atom[x]) continue;
      covered[x] = true;
      double hx = h[static_cast<Eigen::Index>(x)];
      if (value && *value != hx) throw Error("check_claim_nu: h is not constant on an atom");
      value = hx;
    }
    atom_h.push_back(*value);
  }
  for (std::size_t x = 0; x < n; ++x)
    if (!covered[x] && h[static_cast<Eigen::Index>(x)] != 0.0)
      throw Error("check_claim_nu: h must vanish off the atoms");

  ClaimNu out;
  out.integral_mu = integrate(mu, h);
  for (std::size_t i = 0; i < atom_h.size(); ++i) out.integral_nu += atom_h[i] * pm.atom_values[i];
  out.ordered = std::is_sorted(atom_h.begin(), atom_h.end(), std::greater<>());
  out.inequality = out.integral_nu <= out.integral_mu + tol;
  out.equality = std::abs(out.integral_nu - out.integral_mu) <= tol * std::max(1.0, std::abs(out.integral_mu));
  out.holds = out.inequality && (!out.ordered || out.equality);
  return out;
}

inline ClaimNu check_claim_nu(const OuterMeasure& mu, const VertexFunction& f, const VertexFunction& g,
                              const VertexFunction& h, double tol = kSetFunctionTol) {
  return check_claim_nu(mu, proof_measure(mu, f, g, tol), h, tol);
}

// A sequence of sets given as a finite prefix followed by a cycle repeated
// forever; an empty cycle means the sequence is eventually empty.
struct SetSequence {
  std::vector<Subset> prefix;
  std::vector<Subset> cycle;
};

// ⋂_n ⋃_{m ≥ n} E_m: only the sets in the cycle recur.
inline Subset limsup_of_sets(std::size_t n, const SetSequence& seq) {
  Subset out(n, false);
  for (const auto& s : seq.cycle) out = subset_union(out, s);
  return out;
}

}  // namespace capmod
