#pragma once

#include <string>
#include <vector>

#include "fklab/fk.hpp"

namespace fklab {

// Exploration path from e_a to e_b with per-edge windings (quarter turns to e_b).
struct GammaTrace {
  std::vector<MedialEdge> edges;
  std::vector<int> winding;  // winding[i] = W(edges[i], e_b) in quarter turns
  int total_winding() const { return winding.empty() ? 0 : winding.front(); }
};

struct LoopConfiguration {
  std::vector<std::vector<MedialEdge>> loops;  // closed cycles, domain medial edges only
  GammaTrace gamma;                            // empty for free/wired boundary conditions
  int32_t loop_count = 0;                      // ℓ(ω): cycles touching the domain's medial edges
};

struct not_on_path : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// State of the lattice edge at the medial vertex ahead of m: ghost edges are
// always open, absent edges closed, real edges follow the configuration.
inline bool edge_open_ahead(const Domain& d, const EdgeConfiguration& cfg, MedialEdge m) {
  EdgeId e = medial_head_edge(d, m);
  if (e == kNoEdge) return false;
  if (d.edges[e].ghost) return true;
  return cfg.open(e);
}

// Trace the exploration path of a configuration on a Dobrushin-type domain,
// starting from `start` (defaults to the domain's e_a) and ending at e_b.
GammaTrace trace_gamma(const Domain& d, const EdgeConfiguration& cfg);
GammaTrace trace_gamma_from(const Domain& d, const EdgeConfiguration& cfg, MedialEdge start,
                            MedialEdge end, bool cyclic);

// Full Eulerian decomposition: gamma plus all loops meeting the domain's
// medial edge set.
LoopConfiguration loops_of(const Domain& d, const EdgeConfiguration& cfg);

// Recover the configuration from the turns of a loop decomposition; inverse of
// loops_of on the real edges it covers. Edges not visited by any loop keep the
// value of `fallback` (does not happen on the domains built here).
EdgeConfiguration reconstruct_configuration(const Domain& d, const LoopConfiguration& lc);

// x^{o(omega)} sqrt(q)^{l(omega)} with x = p / [sqrt(q) (1-p)]; proportional to
// weight() with a configuration-independent constant on Dobrushin-type domains.
double loop_weight(const Domain& d, const EdgeConfiguration& cfg, double p, double q);

// Signed quarter-turn winding between two edges of a path (both must lie on it).
int winding_along(const GammaTrace& g, MedialEdge e_from, MedialEdge e_to);

// JSON export of a loop configuration as polylines of medial midpoints.
std::string loops_to_json(const Domain& d, const LoopConfiguration& lc);

}  // namespace fklab
