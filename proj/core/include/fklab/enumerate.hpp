#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fklab/loops.hpp"

namespace fklab {

struct too_large : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Indicator functionals evaluated per configuration during an exact pass.
// Connected(a,b) sees the boundary wiring (connectivity in omega ∪ xi);
// Crossing(A,B) uses open paths of omega alone.
struct Event {
  enum Kind { Connected, EdgeOpen, Crossing, And } kind = Connected;
  SiteId a = kNoSite, b = kNoSite;
  EdgeId edge = kNoEdge;
  std::vector<SiteId> set_a, set_b;
  int32_t lhs = -1, rhs = -1;

  static Event connected(SiteId a, SiteId b) {
    Event e;
    e.kind = Connected;
    e.a = a;
    e.b = b;
    return e;
  }
  static Event edge_open(EdgeId id) {
    Event e;
    e.kind = EdgeOpen;
    e.edge = id;
    return e;
  }
  static Event crossing(std::vector<SiteId> sa, std::vector<SiteId> sb) {
    Event e;
    e.kind = Crossing;
    e.set_a = std::move(sa);
    e.set_b = std::move(sb);
    return e;
  }
  static Event conj(int32_t i, int32_t j) {
    Event e;
    e.kind = And;
    e.lhs = i;
    e.rhs = j;
    return e;
  }
};

struct PassOptions {
  uint64_t forced_open = 0;
  uint64_t forced_closed = 0;
  bool trace_field = false;
  std::optional<MedialEdge> start;  // gamma start override (defaults to e_a)
  int w_clamp = 48;
  int max_exact_edges = 24;         // default enumeration cap; raise explicitly
  int threads = 0;
  std::vector<Event> events;
};

// Exact enumeration reduced to integer counts on the (o,k) grid, where o is
// the number of open edges and k the cluster count under the boundary
// partition. One pass serves every (p,q) afterwards.
struct JointCounts {
  int32_t n_edges = 0;
  int32_t k_max = 0;
  int32_t n_cells = 0;    // (n_edges+1) * (k_max+1)
  int32_t n_field = 0;    // domain medial edges (0 unless trace_field)
  int32_t n_events = 0;
  int w_clamp = 0;
  int w_seen_min = 0, w_seen_max = 0;
  uint64_t n_configs = 0;

  std::vector<uint64_t> z;      // [cell]
  std::vector<uint64_t> ev;     // [cell * n_events + i]
  std::vector<uint64_t> field;  // [cell * plane + medial * n_w + (w + w_clamp)]

  int32_t n_w() const { return 2 * w_clamp + 1; }
  size_t plane() const { return (size_t)n_field * n_w(); }

  struct CellWeights {
    std::vector<double> w;
    double Z = 0.0;
  };
  CellWeights weights(double p, double q) const;

  double event_mean(int32_t i, const CellWeights& cw) const;
  double gamma_prob(int32_t medial_idx, const CellWeights& cw) const;
  // F(e) = E[e^{i sigma W(e,e_b)} 1_{e in gamma}]; windings in quarter turns.
  std::complex<double> observable_f(int32_t medial_idx, double sigma, const CellWeights& cw) const;
  // G(e) = E[W e^{i W} 1_{e in gamma}] with W in radians.
  std::complex<double> observable_g(int32_t medial_idx, const CellWeights& cw) const;

  void save(const std::string& path) const;
  static std::optional<JointCounts> load(const std::string& path);
};

JointCounts exact_pass(const Domain& d, const BoundaryPartition& bc, const PassOptions& opts);

// Per-configuration probabilities for small domains (index = edge bit word).
std::vector<double> exact_distribution(const Domain& d, const MeasureSpec& spec, int max_edges = 20);

// Direct expectation of a real functional under the finite-volume measure.
double enumerate_expectation(const Domain& d, const MeasureSpec& spec,
                             const std::function<double(const EdgeConfiguration&)>& f,
                             int max_edges = 24);

// Compensated (Neumaier) accumulator used for all floating reductions.
struct Accum {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) comp += (sum - t) + v;
    else comp += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace fklab
