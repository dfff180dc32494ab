#pragma once

// Finite weighted-graph model of a metric measure space: vertices with
// masses, weighted undirected edges, and an exhaustion A_1 ⊆ A_2 ⊆ ... of
// the vertex set. Every other module works on top of this.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace capmod {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Subsets of the vertex set, indexed by vertex position.
using Subset = std::vector<bool>;
// Real-valued function on the vertices, indexed by vertex position.
using VertexFunction = Eigen::VectorXd;

inline Subset empty_subset(std::size_t n) { return Subset(n, false); }
inline Subset full_subset(std::size_t n) { return Subset(n, true); }

inline Subset subset_from_mask(std::size_t n, std::uint64_t mask) {
  Subset s(n, false);
  for (std::size_t i = 0; i < n && i < 64; ++i) s[i] = ((mask >> i) & 1u) != 0;
  return s;
}

inline std::uint64_t subset_to_mask(const Subset& s) {
  if (s.size() > 64) throw Error("subset_to_mask: ground set larger than 64");
  std::uint64_t mask = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i]) mask |= (std::uint64_t{1} << i);
  return mask;
}

inline std::size_t subset_count(const Subset& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), true));
}

inline bool is_subset_of(const Subset& a, const Subset& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] && !b[i]) return false;
  return true;
}

inline Subset subset_union(const Subset& a, const Subset& b) {
  Subset r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] || b[i];
  return r;
}

inline Subset subset_intersection(const Subset& a, const Subset& b) {
  Subset r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] && b[i];
  return r;
}

inline Subset subset_difference(const Subset& a, const Subset& b) {
  Subset r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] && !b[i];
  return r;
}

inline VertexFunction indicator(const Subset& s) {
  VertexFunction f = VertexFunction::Zero(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i]) f[static_cast<Eigen::Index>(i)] = 1.0;
  return f;
}

struct Edge {
  std::size_t u;
  std::size_t v;
  double weight;
};

// One incident edge seen from a vertex. Darts are oriented edges: edge e
// owns darts 2e (u→v) and 2e+1 (v→u).
struct Incidence {
  std::size_t neighbor;
  double weight;
  std::size_t edge;
  std::size_t out_dart;  // this vertex → neighbor
  std::size_t in_dart;   // neighbor → this vertex
};

struct VertexSpec {
  std::string id;
  double mass = 0.0;
};

struct EdgeSpec {
  std::string u;
  std::string v;
  double weight = 1.0;
};

// Input to build_space. An absent exhaustion installs A_k = X for all k.
struct SpaceDescription {
  std::vector<VertexSpec> vertices;
  std::vector<EdgeSpec> edges;
  std::optional<std::vector<std::vector<std::string>>> exhaustion;
};

class Space {
 public:
  std::size_t size() const { return ids_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t dart_count() const { return 2 * edges_.size(); }

  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::size_t i) const { return ids_.at(i); }
  const VertexFunction& mass() const { return mass_; }
  double mass(std::size_t i) const { return mass_[static_cast<Eigen::Index>(i)]; }
  double total_mass() const { return mass_.sum(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Incidence>& incident(std::size_t i) const { return adjacency_.at(i); }

  std::size_t dart_from(std::size_t d) const {
    const Edge& e = edges_.at(d / 2);
    return d % 2 == 0 ? e.u : e.v;
  }
  std::size_t dart_to(std::size_t d) const {
    const Edge& e = edges_.at(d / 2);
    return d % 2 == 0 ? e.v : e.u;
  }
  double dart_weight(std::size_t d) const { return edges_.at(d / 2).weight; }
  static std::size_t reverse_dart(std::size_t d) { return d ^ std::size_t{1}; }

  std::optional<std::size_t> find(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t index_of(const std::string& id) const {
    auto i = find(id);
    if (!i) throw Error("unknown vertex id '" + id + "'");
    return *i;
  }

  // Exhaustion as stored; the last set is always the full vertex set and
  // A_k for k beyond the list equals the last set.
  const std::vector<Subset>& exhaustion() const { return exhaustion_; }
  bool has_constant_exhaustion() const {
    return std::all_of(exhaustion_.begin(), exhaustion_.end(),
                       [](const Subset& s) { return std::all_of(s.begin(), s.end(), [](bool b) { return b; }); });
  }

  // Weights ω_k with Σ_k ω_k = 1 that fold the stationary tail into the last
  // listed set: ω_k = 2^{-k} for k < K and ω_K = 2^{-(K-1)}.
  std::vector<double> exhaustion_weights() const {
    const std::size_t K = exhaustion_.size();
    std::vector<double> w(K);
    for (std::size_t k = 1; k <= K; ++k) w[k - 1] = std::ldexp(1.0, -static_cast<int>(k));
    w[K - 1] = std::ldexp(1.0, -static_cast<int>(K - 1));
    return w;
  }

  Subset null_vertices() const {
    Subset s(size());
    for (std::size_t i = 0; i < size(); ++i) s[i] = mass(i) == 0.0;
    return s;
  }
  bool fully_charged() const { return (mass_.array() > 0.0).all(); }

  // Connected-component label per vertex, labels in order of first vertex.
  std::vector<std::size_t> components() const {
    std::vector<std::size_t> label(size(), SIZE_MAX);
    std::size_t next = 0;
    for (std::size_t s = 0; s < size(); ++s) {
      if (label[s] != SIZE_MAX) continue;
      std::vector<std::size_t> stack{s};
      label[s] = next;
      while (!stack.empty()) {
        std::size_t x = stack.back();
        stack.pop_back();
        for (const auto& inc : adjacency_[x])
          if (label[inc.neighbor] == SIZE_MAX) {
            label[inc.neighbor] = next;
            stack.push_back(inc.neighbor);
          }
      }
      ++next;
    }
    return label;
  }

  // Vertices of capacity zero: those whose whole component is massless.
  Subset cap_null_vertices() const {
    auto label = components();
    std::vector<double> comp_mass(size(), 0.0);
    for (std::size_t i = 0; i < size(); ++i) comp_mass[label[i]] += mass(i);
    Subset s(size());
    for (std::size_t i = 0; i < size(); ++i) s[i] = comp_mass[label[i]] == 0.0;
    return s;
  }

  Subset subset(const std::vector<std::string>& ids) const {
    Subset s(size(), false);
    for (const auto& id : ids) s[index_of(id)] = true;
    return s;
  }

  friend Space build_space(const SpaceDescription& description);

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  VertexFunction mass_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Incidence>> adjacency_;
  std::vector<Subset> exhaustion_;
};

inline Space build_space(const SpaceDescription& description) {
  Space s;
  const std::size_t n = description.vertices.size();
  if (n == 0) throw Error("space has no vertices");
  s.ids_.reserve(n);
  s.mass_.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& vs = description.vertices[i];
    if (!s.index_.emplace(vs.id, i).second) throw Error("duplicate vertex id '" + vs.id + "'");
    if (!(vs.mass >= 0.0) || !std::isfinite(vs.mass))
      throw Error("negative or non-finite mass at vertex '" + vs.id + "'");
    s.ids_.push_back(vs.id);
    s.mass_[static_cast<Eigen::Index>(i)] = vs.mass;
  }

  s.adjacency_.assign(n, {});
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& es : description.edges) {
    auto iu = s.find(es.u);
    auto iv = s.find(es.v);
    if (!iu) throw Error("edge to unknown vertex '" + es.u + "'");
    if (!iv) throw Error("edge to unknown vertex '" + es.v + "'");
    if (*iu == *iv) throw Error("self-loop at vertex '" + es.u + "'");
    if (!(es.weight > 0.0) || !std::isfinite(es.weight))
      throw Error("nonpositive weight on edge '" + es.u + "'-'" + es.v + "'");
    auto key = std::minmax(*iu, *iv);
    if (!seen.insert(key).second) throw Error("duplicate edge '" + es.u + "'-'" + es.v + "'");
    const std::size_t e = s.edges_.size();
    s.edges_.push_back(Edge{*iu, *iv, es.weight});
    s.adjacency_[*iu].push_back(Incidence{*iv, es.weight, e, 2 * e, 2 * e + 1});
    s.adjacency_[*iv].push_back(Incidence{*iu, es.weight, e, 2 * e + 1, 2 * e});
  }

  if (description.exhaustion && !description.exhaustion->empty()) {
    Subset prev(n, false);
    for (const auto& ids : *description.exhaustion) {
      Subset a(n, false);
      for (const auto& id : ids) {
        auto i = s.find(id);
        if (!i) throw Error("exhaustion names unknown vertex '" + id + "'");
        a[*i] = true;
      }
      if (subset_count(a) == 0) throw Error("exhaustion contains an empty set");
      if (!is_subset_of(prev, a)) throw Error("exhaustion is not nested");
      s.exhaustion_.push_back(a);
      prev = std::move(a);
    }
    if (subset_count(prev) != n) throw Error("exhaustion does not exhaust the vertex set");
  } else {
    s.exhaustion_.push_back(full_subset(n));
  }
  return s;
}

// Pairwise shortest-path distances with edge length 1/√w. Unreachable pairs
// hold +∞.
class Metric {
 public:
  static constexpr double unreachable = std::numeric_limits<double>::infinity();

  explicit Metric(std::size_t n) : n_(n), d_(n * n, unreachable) {}
  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  double& at(std::size_t i, std::size_t j) { return d_[i * n_ + j]; }
  bool reachable(std::size_t i, std::size_t j) const { return std::isfinite((*this)(i, j)); }

 private:
  std::size_t n_;
  std::vector<double> d_;
};

inline double edge_length(double weight) { return 1.0 / std::sqrt(weight); }

inline Metric shortest_path_metric(const Space& space) {
  const std::size_t n = space.size();
  Metric metric(n);
  using Item = std::pair<double, std::size_t>;
  for (std::size_t src = 0; src < n; ++src) {
    std::vector<double> dist(n, Metric::unreachable);
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[src] = 0.0;
    pq.emplace(0.0, src);
    while (!pq.empty()) {
      auto [d, x] = pq.top();
      pq.pop();
      if (d > dist[x]) continue;
      for (const auto& inc : space.incident(x)) {
        double nd = d + edge_length(inc.weight);
        if (nd < dist[inc.neighbor]) {
          dist[inc.neighbor] = nd;
          pq.emplace(nd, inc.neighbor);
        }
      }
    }
    for (std::size_t j = 0; j < n; ++j) metric.at(src, j) = dist[j];
  }
  return metric;
}

// Uniform grid on [lo, hi] with trapezoidal masses and edge weights 1/h, so
// that Σ w (Δf)² approximates ∫ f'².
inline Space grid_1d(double lo, double hi, std::size_t n) {
  if (n < 2) throw Error("grid_1d: need at least 2 points");
  if (!(lo < hi)) throw Error("grid_1d: require lo < hi");
  const double h = (hi - lo) / static_cast<double>(n - 1);
  SpaceDescription d;
  d.vertices.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double m = (i == 0 || i + 1 == n) ? 0.5 * h : h;
    d.vertices.push_back({"x" + std::to_string(i), m});
  }
  for (std::size_t i = 0; i + 1 < n; ++i)
    d.edges.push_back({"x" + std::to_string(i), "x" + std::to_string(i + 1), 1.0 / h});
  return build_space(d);
}

inline std::string grid_2d_id(std::size_t i, std::size_t j) {
  return "p" + std::to_string(i) + "_" + std::to_string(j);
}

// n×n lattice on [lo, hi]² with masses h² (halved on edges, quartered at
// corners) and unit edge weights.
inline Space grid_2d(double lo, double hi, std::size_t n) {
  if (n < 2) throw Error("grid_2d: need at least 2 points per side");
  if (!(lo < hi)) throw Error("grid_2d: require lo < hi");
  const double h = (hi - lo) / static_cast<double>(n - 1);
  SpaceDescription d;
  d.vertices.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double fi = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double fj = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
      d.vertices.push_back({grid_2d_id(i, j), fi * fj * h * h});
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i + 1 < n) d.edges.push_back({grid_2d_id(i, j), grid_2d_id(i + 1, j), 1.0});
      if (j + 1 < n) d.edges.push_back({grid_2d_id(i, j), grid_2d_id(i, j + 1), 1.0});
    }
  return build_space(d);
}

// ---- JSON ---------------------------------------------------------------

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                           const std::string& where) {
  if (!obj.is_object()) throw Error(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; });
    if (!ok) throw Error(where + ": unknown field '" + it.key() + "'");
  }
}

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(where + ": missing field '" + std::string(key) + "'");
  return *it;
}

}  // namespace detail

inline SpaceDescription space_description_from_json(const nlohmann::json& j) {
  detail::reject_unknown(j, {"vertices", "edges", "exhaustion"}, "space");
  SpaceDescription d;
  try {
    for (const auto& v : detail::require(j, "vertices", "space")) {
      detail::reject_unknown(v, {"id", "mass"}, "vertex");
      d.vertices.push_back({detail::require(v, "id", "vertex").get<std::string>(),
                            detail::require(v, "mass", "vertex").get<double>()});
    }
    if (j.contains("edges"))
      for (const auto& e : j.at("edges")) {
        detail::reject_unknown(e, {"u", "v", "w"}, "edge");
        d.edges.push_back({detail::require(e, "u", "edge").get<std::string>(),
                           detail::require(e, "v", "edge").get<std::string>(),
                           detail::require(e, "w", "edge").get<double>()});
      }
    if (j.contains("exhaustion"))
      d.exhaustion = j.at("exhaustion").get<std::vector<std::vector<std::string>>>();
  } catch (const nlohmann::json::exception& ex) {
    throw Error(std::string("space: malformed JSON: ") + ex.what());
  }
  return d;
}

inline Space space_from_json(const nlohmann::json& j) { return build_space(space_description_from_json(j)); }

inline nlohmann::json space_to_json(const Space& s) {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (std::size_t i = 0; i < s.size(); ++i) j["vertices"].push_back({{"id", s.id(i)}, {"mass", s.mass(i)}});
  j["edges"] = nlohmann::json::array();
  for (const auto& e : s.edges()) j["edges"].push_back({{"u", s.id(e.u)}, {"v", s.id(e.v)}, {"w", e.weight}});
  if (!s.has_constant_exhaustion()) {
    auto& ex = j["exhaustion"] = nlohmann::json::array();
    for (const auto& a : s.exhaustion()) {
      nlohmann::json ids = nlohmann::json::array();
      for (std::size_t i = 0; i < s.size(); ++i)
        if (a[i]) ids.push_back(s.id(i));
      ex.push_back(ids);
    }
  }
  return j;
}

// VertexFunction as {id: value}; every vertex must be present.
inline VertexFunction function_from_json(const Space& s, const nlohmann::json& j) {
  if (!j.is_object()) throw Error("vertex function: expected an object id -> value");
  VertexFunction f = VertexFunction::Constant(static_cast<Eigen::Index>(s.size()),
                                              std::numeric_limits<double>::quiet_NaN());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "canonical") continue;
    f[static_cast<Eigen::Index>(s.index_of(it.key()))] = it.value().get<double>();
  }
  for (std::size_t i = 0; i < s.size(); ++i)
    if (std::isnan(f[static_cast<Eigen::Index>(i)]))
      throw Error("vertex function: missing value for vertex '" + s.id(i) + "'");
  return f;
}

inline nlohmann::json function_to_json(const Space& s, const VertexFunction& f, bool canonical = false) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < s.size(); ++i) j[s.id(i)] = f[static_cast<Eigen::Index>(i)];
  if (canonical) j["canonical"] = true;
  return j;
}

}  // namespace capmod
