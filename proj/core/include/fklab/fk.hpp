#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fklab/lattice.hpp"

namespace fklab {

// Open/closed assignment over the real edges of a domain, bit-packed.
struct EdgeConfiguration {
  std::vector<uint64_t> bits;
  int32_t n_edges = 0;

  EdgeConfiguration() = default;
  explicit EdgeConfiguration(int32_t n) : bits((n + 63) / 64, 0), n_edges(n) {}

  bool open(EdgeId e) const { return (bits[e >> 6] >> (e & 63)) & 1u; }
  void set(EdgeId e, bool v) {
    uint64_t m = 1ull << (e & 63);
    if (v) bits[e >> 6] |= m; else bits[e >> 6] &= ~m;
  }
  void flip(EdgeId e) { bits[e >> 6] ^= 1ull << (e & 63); }
  int32_t open_count() const {
    int32_t o = 0;
    for (uint64_t w : bits) o += (int32_t)__builtin_popcountll(w);
    return o;
  }
  static EdgeConfiguration all_open(int32_t n) {
    EdgeConfiguration c(n);
    for (EdgeId e = 0; e < n; ++e) c.set(e, true);
    return c;
  }
  static EdgeConfiguration from_word(int32_t n, uint64_t w) {
    EdgeConfiguration c(n);
    c.bits[0] = n >= 64 ? w : (w & ((n == 64) ? ~0ull : ((1ull << n) - 1)));
    return c;
  }
  uint64_t word() const { return bits.empty() ? 0 : bits[0]; }
  bool operator==(const EdgeConfiguration& o) const { return n_edges == o.n_edges && bits == o.bits; }
};

// Partition of boundary sites into wired classes; sites not mentioned are
// singletons. free = no classes, wired = one class over the whole boundary,
// dobrushin = the domain's wired arc as one class.
struct BoundaryPartition {
  std::vector<std::vector<SiteId>> classes;

  static BoundaryPartition free_bc() { return {}; }
  static BoundaryPartition wired_bc(const Domain& d) {
    BoundaryPartition p;
    p.classes.push_back(d.boundary_walk);
    return p;
  }
  static BoundaryPartition dobrushin_bc(const Domain& d) {
    BoundaryPartition p;
    if (d.wired_arc.size() > 1) p.classes.push_back(d.wired_arc);
    return p;
  }
  // true if every wiring of `other` is implied by this partition (xi >= psi)
  bool dominates(const BoundaryPartition& other, int32_t n_sites) const;
};

struct MeasureSpec {
  double p = 0.5;
  double q = 1.0;
  std::string bc = "free";  // "free" | "wired" | "dobrushin"

  BoundaryPartition partition(const Domain& d) const {
    if (bc == "free") return BoundaryPartition::free_bc();
    if (bc == "wired") return BoundaryPartition::wired_bc(d);
    if (bc == "dobrushin") return BoundaryPartition::dobrushin_bc(d);
    throw invalid_parameter("MeasureSpec: unknown bc " + bc);
  }
  std::string to_json() const;
  static MeasureSpec from_json(const std::string& text);
};

// Flat union-find over site ids with path halving.
struct UnionFind {
  std::vector<int32_t> parent;

  explicit UnionFind(int32_t n) { reset(n); }
  void reset(int32_t n) {
    parent.resize(n);
    for (int32_t i = 0; i < n; ++i) parent[i] = i;
  }
  int32_t find(int32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(int32_t x, int32_t y) {
    x = find(x);
    y = find(y);
    if (x == y) return false;
    if (x < y) parent[y] = x; else parent[x] = y;
    return true;
  }
};

// Number of connected components of omega ∪ xi (isolated sites count; ghost
// edges are not part of omega).
int32_t cluster_count(const Domain& d, const EdgeConfiguration& cfg, const BoundaryPartition& bc);

// Same count via breadth-first search; test oracle for the union-find path.
int32_t cluster_count_bfs(const Domain& d, const EdgeConfiguration& cfg, const BoundaryPartition& bc);

// Unnormalized weight p^o (1-p)^c q^k. Uses log-space evaluation once the
// domain exceeds 40 edges.
double weight(const Domain& d, const EdgeConfiguration& cfg, const MeasureSpec& spec);
double log_weight(const Domain& d, const EdgeConfiguration& cfg, const MeasureSpec& spec);

// p_c(q) = sqrt(q) / (1 + sqrt(q))
double critical_point(double q);

// Dual parameters: q* = q and p*p/[(1-p*)(1-p)] = q, with the limits p*(0)=1,
// p*(1)=0.
std::pair<double, double> dual_parameters(double p, double q);

// Dual graph of a planar box/rect domain: one vertex per bounded face plus a
// single outer vertex; dual edge i crosses primal edge i.
struct DualGraph {
  int32_t n_vertices = 0;  // bounded faces + 1 (outer is the last id)
  int32_t outer = 0;
  std::vector<std::pair<int32_t, int32_t>> edges;  // aligned with primal edge ids
  std::vector<Coord> face_pos;                     // SW corner of each bounded face
};

DualGraph dual_graph(const Domain& d);

// Dual configuration: dual edge open iff the primal edge is closed.
EdgeConfiguration dual_configuration(const EdgeConfiguration& cfg);

// Component count on the dual graph (free partition).
int32_t dual_cluster_count(const DualGraph& g, const EdgeConfiguration& dual_cfg);

}  // namespace fklab
