#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace fklab {

using SiteId = int32_t;
using EdgeId = int32_t;

constexpr SiteId kNoSite = -1;
constexpr EdgeId kNoEdge = -1;

struct Coord {
  int x = 0;
  int y = 0;
  int z = 0;  // cover level; 0 for planar domains

  bool operator==(const Coord& o) const { return x == o.x && y == o.y && z == o.z; }
};

struct CoordHash {
  size_t operator()(const Coord& c) const {
    uint64_t h = (uint64_t)(uint32_t)c.x;
    h = h * 0x9e3779b97f4a7c15ull + (uint32_t)c.y;
    h = h * 0x9e3779b97f4a7c15ull + (uint32_t)c.z;
    return (size_t)h;
  }
};

enum Compass : uint8_t { N = 0, E = 1, S = 2, W = 3 };

constexpr Compass compass_cw(Compass c) { return Compass((c + 1) & 3); }
constexpr Compass compass_ccw(Compass c) { return Compass((c + 3) & 3); }
constexpr Compass compass_opposite(Compass c) { return Compass((c + 2) & 3); }

// Medial edges are indexed by (anchor site, quadrant). The quadrant edge of a
// site s runs counterclockwise around the face of s between the midpoints of
// two of its incident lattice edges:
//   NE: mid(E) -> mid(N),  NW: mid(N) -> mid(W),
//   SW: mid(W) -> mid(S),  SE: mid(S) -> mid(E).
// Every medial edge borders exactly one site face, so this indexing is unique,
// and it works unchanged on the universal-cover graph where global planar
// coordinates do not exist.
enum Quadrant : uint8_t { NE = 0, NW = 1, SW = 2, SE = 3 };

constexpr Compass quadrant_tail(Quadrant q) {
  constexpr Compass t[4] = {E, N, W, S};
  return t[q];
}
constexpr Compass quadrant_head(Quadrant q) {
  constexpr Compass t[4] = {N, W, S, E};
  return t[q];
}
constexpr Quadrant quadrant_with_tail(Compass c) {
  // inverse of quadrant_tail
  constexpr Quadrant t[4] = {NW, NE, SE, SW};  // N,E,S,W
  return t[c];
}
// Continuation of a loop after the medial vertex at mid(edge(s, head(q))):
// open edge -> right turn, crossing to the neighbouring face;
// closed/absent edge -> left turn, staying on the same face.
constexpr Quadrant quadrant_right(Quadrant q) {
  constexpr Quadrant t[4] = {SE, NE, NW, SW};  // NE,NW,SW,SE
  return t[q];
}
constexpr Quadrant quadrant_left(Quadrant q) {
  constexpr Quadrant t[4] = {NW, SW, SE, NE};
  return t[q];
}

struct MedialEdge {
  SiteId anchor = kNoSite;
  Quadrant quad = NE;

  bool valid() const { return anchor != kNoSite; }
  uint32_t token(int /*unused*/ = 0) const { return (uint32_t)anchor * 4u + quad; }
  bool operator==(const MedialEdge& o) const { return anchor == o.anchor && quad == o.quad; }
  bool operator!=(const MedialEdge& o) const { return !(*this == o); }
};

enum class DomainKind { Box, Rect, Slit, Cover };
enum class LoopBc { Free, Wired, Dobrushin };

// Ports of an interior medial vertex (the midpoint of a present lattice edge),
// labelled by compass position as in the local relation F(NW)-F(SE)=i[F(NE)-F(SW)].
struct MedialVertexPorts {
  EdgeId vertex = kNoEdge;  // medial vertices are identified with lattice edges
  MedialEdge nw, ne, sw, se;
};

struct BoundaryFace {
  SiteId site = kNoSite;
  MedialEdge e_in, e_out;       // the contour edges bordering this face
  int w_in = INT32_MIN;         // winding W(e_in, e_b) in quarter turns
  int w_out = INT32_MIN;        // winding W(e_out, e_b)
  bool on_outer_box = false;    // lies on the enclosing box boundary (slit: distinguishes the slit sides)
};

// An immutable lattice domain: primal sites and edges, plus the ghost edges
// that realise wired boundary arcs for the loop representation. Ghost sites
// and edges sit after the real ones in the tables; ghost edges are treated as
//永 open by the loop tracer and ignored by configurations and measures.
struct Domain {
  DomainKind kind = DomainKind::Box;
  int n = 0;      // size parameter
  int levels = 0; // cover truncation T (|x3| <= T)

  std::vector<Coord> site_pos;                 // real sites first, then ghosts
  int32_t n_real_sites = 0;
  struct EdgeRec {
    SiteId a = kNoSite, b = kNoSite;  // b = neighbour of a in direction `dir`
    Compass dir = N;
    bool ghost = false;
  };
  std::vector<EdgeRec> edges;                  // real edges first, then ghosts
  int32_t n_real_edges = 0;

  std::vector<std::array<EdgeId, 4>> edge_at;  // per site (incl. ghosts), per compass
  std::vector<std::array<SiteId, 4>> nbr_at;

  LoopBc bc = LoopBc::Free;
  SiteId a = kNoSite, b = kNoSite;             // Dobrushin marks (slit/cover: a = b = origin)
  std::vector<SiteId> wired_arc;               // sites of the wired class, in boundary order
  MedialEdge e_a, e_b;
  bool cyclic_gamma = false;                   // cover: e_a and e_b are the same medial edge

  // Medial bookkeeping (real anchors only).
  std::vector<MedialEdge> medial_edges;        // the domain's medial edge set
  std::vector<int32_t> medial_index;           // token -> index into medial_edges, or -1

  std::vector<SiteId> boundary_walk;           // ccw ordered boundary sites (planar domains)
  std::vector<BoundaryFace> boundary_faces;
  int w_ab = 0;                                // W(e_a, e_b) in quarter turns (Dobrushin-type)

  std::unordered_map<Coord, SiteId, CoordHash> site_by_pos;

  SiteId site_at(Coord c) const {
    auto it = site_by_pos.find(c);
    return it == site_by_pos.end() ? kNoSite : it->second;
  }
  bool is_real_site(SiteId s) const { return s >= 0 && s < n_real_sites; }
  bool dobrushin_like() const { return bc == LoopBc::Dobrushin; }

  EdgeId edge_between(SiteId u, SiteId v) const {
    if (u == kNoSite || v == kNoSite) return kNoEdge;
    for (int c = 0; c < 4; ++c)
      if (nbr_at[u][c] == v && edge_at[u][c] != kNoEdge) return edge_at[u][c];
    return kNoEdge;
  }

  // The four medial edges incident to the midpoint of a present lattice edge.
  MedialVertexPorts ports(EdgeId e) const;

  // True iff every medial edge incident to the midpoint of e joins two present
  // lattice-edge midpoints (no boundary stitching nearby).
  bool is_strict_interior_vertex(EdgeId e) const;

  int32_t medial_idx(MedialEdge m) const {
    if (!m.valid() || m.anchor >= n_real_sites) return -1;
    return medial_index[m.token()];
  }
};

// --- builders -------------------------------------------------------------

// Box [-n,n]^2 with all nearest-neighbour edges. Free boundary conditions.
Domain build_box(int n);

// Rectangle [x0,x1] x [y0,y1].
Domain build_rect(int x0, int x1, int y0, int y1);

// Slit domain S_n: vertex set [-n,n]^2 minus the sites (k,0), k > 0, with the
// induced edges. Free boundary conditions; for the loop representation this is
// a degenerate Dobrushin domain whose wired arc is the origin alone.
Domain build_slit_domain(int n);

// Truncated universal-cover graph U_n with levels |x3| <= T. Vertices (x1,x2,x3)
// with |x1|,|x2| <= n; edges
//   [(x1,x2,x3),(x1,x2+1,x3)]           always,
//   [(x1,x2,x3),(x1+1,x2,x3)]           unless x1 = 0 and x2 < 0,
//   [(0,x2,x3),(1,x2,x3+1)]             for x2 < 0.
Domain build_universal_cover(int n, int T);

// Attach Dobrushin marks to a box/rect domain: free arc from a counterclockwise
// to b, wired arc from b counterclockwise to a. Adds the ghost ring and rungs
// realising the wiring and sets e_a/e_b.
Domain with_dobrushin(Domain box, Coord a, Coord b);

// Wire the whole boundary (ghost ring plus a rung at every boundary site).
Domain with_wired(Domain box);

// --- geometry helpers ------------------------------------------------------

// Successor of a medial edge under the loop turn rule. `open` is the state of
// the lattice edge at the medial vertex being crossed; `turn` receives +1 for
// a left turn and -1 for a right turn.
inline MedialEdge medial_step(const Domain& d, MedialEdge m, bool open, int& turn) {
  Compass h = quadrant_head(m.quad);
  if (open) {
    turn = -1;
    return MedialEdge{d.nbr_at[m.anchor][h], quadrant_right(m.quad)};
  }
  turn = +1;
  return MedialEdge{m.anchor, quadrant_left(m.quad)};
}

// Lattice edge whose midpoint the medial edge m points at.
inline EdgeId medial_head_edge(const Domain& d, MedialEdge m) {
  return d.edge_at[m.anchor][quadrant_head(m.quad)];
}
inline EdgeId medial_tail_edge(const Domain& d, MedialEdge m) {
  return d.edge_at[m.anchor][quadrant_tail(m.quad)];
}

// Midpoint of a medial edge in lattice units (planar domains).
std::array<double, 2> medial_midpoint(const Domain& d, MedialEdge m);

// Serialization of domain descriptors (kind, n, T, markings) for the CLI.
std::string domain_to_json(const Domain& d);
Domain domain_from_json(const std::string& text);

struct invalid_parameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct unsupported_domain : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fklab
