#include "fklab/loops.hpp"

#include <set>

#include "fklab/rng.hpp"
#include "testkit.hpp"

using namespace fklab;

namespace {

Domain dobrushin2() { return with_dobrushin(build_rect(0, 2, 0, 2), {0, 0, 0}, {2, 2, 0}); }

int loop_turning(const Domain& d, const std::vector<MedialEdge>& loop) {
  int total = 0;
  for (size_t i = 0; i < loop.size(); ++i) {
    const MedialEdge& cur = loop[i];
    const MedialEdge& nxt = loop[(i + 1) % loop.size()];
    total += (nxt.anchor == cur.anchor) ? +1 : -1;
  }
  return total;
}

// The turn table against the hand-drawn cases: at the midpoint of an open
// vertical edge the curve entering through NW leaves through SW; if the edge
// is closed it leaves through NE.
void turn_table_fixture() {
  Domain d = dobrushin2();
  EdgeId e = d.edge_between(d.site_at({1, 1, 0}), d.site_at({1, 2, 0}));  // vertical
  REQUIRE(e != kNoEdge && d.edges[e].dir == N);
  MedialVertexPorts p = d.ports(e);
  int turn = 0;
  REQUIRE(medial_step(d, p.nw, true, turn) == p.sw);
  REQUIRE(turn == -1);
  REQUIRE(medial_step(d, p.nw, false, turn) == p.ne);
  REQUIRE(turn == +1);
  REQUIRE(medial_step(d, p.se, true, turn) == p.ne);
  REQUIRE(medial_step(d, p.se, false, turn) == p.sw);
  // horizontal edge: entries are NE/SW
  EdgeId h = d.edge_between(d.site_at({0, 1, 0}), d.site_at({1, 1, 0}));
  REQUIRE(h != kNoEdge && d.edges[h].dir == E);
  MedialVertexPorts ph = d.ports(h);
  REQUIRE(medial_step(d, ph.ne, true, turn) == ph.nw);
  REQUIRE(medial_step(d, ph.ne, false, turn) == ph.se);
  REQUIRE(medial_step(d, ph.sw, true, turn) == ph.se);
  REQUIRE(medial_step(d, ph.sw, false, turn) == ph.nw);
}

// Exhaustive round trip on the 2x2 Dobrushin box: configuration -> loops ->
// configuration.
void bijection_round_trip() {
  Domain d = dobrushin2();
  for (uint64_t w = 0; w < (1ull << d.n_real_edges); ++w) {
    EdgeConfiguration cfg = EdgeConfiguration::from_word(d.n_real_edges, w);
    LoopConfiguration lc = loops_of(d, cfg);
    EdgeConfiguration back = reconstruct_configuration(d, lc);
    REQUIRE(back == cfg);
  }
}

// Every domain medial edge is used exactly once by the loops plus gamma.
void eulerian_cover() {
  Domain d = dobrushin2();
  Rng rng(17, 0);
  for (int rep = 0; rep < 300; ++rep) {
    EdgeConfiguration cfg(d.n_real_edges);
    for (EdgeId e = 0; e < d.n_real_edges; ++e) cfg.set(e, rng.uniform() < 0.5);
    LoopConfiguration lc = loops_of(d, cfg);
    std::vector<int> used(d.medial_edges.size(), 0);
    size_t covered = 0;
    auto absorb = [&](const std::vector<MedialEdge>& path, bool cyclic) {
      size_t count = cyclic && !path.empty() && path.front() == path.back() ? path.size() - 1
                                                                            : path.size();
      for (size_t i = 0; i < count; ++i) {
        int32_t idx = d.medial_idx(path[i]);
        if (idx >= 0) {
          used[idx]++;
          ++covered;
        }
      }
    };
    for (const auto& loop : lc.loops) absorb(loop, false);
    absorb(lc.gamma.edges, d.cyclic_gamma);
    REQUIRE(covered == d.medial_edges.size());
    for (int u : used) REQUIRE(u == 1);
  }
}

// loop_weight is proportional to the FK weight with a constant ratio.
void loop_weight_ratio() {
  for (double q : {0.7, 1.0, 1.6, 2.0, 3.0, 4.0}) {
    for (double p : {0.35, critical_point(q), 0.6}) {
      Domain d = dobrushin2();
      MeasureSpec spec{p, q, "dobrushin"};
      double ratio0 = -1.0;
      for (uint64_t w = 0; w < (1ull << d.n_real_edges); ++w) {
        EdgeConfiguration cfg = EdgeConfiguration::from_word(d.n_real_edges, w);
        double lw = loop_weight(d, cfg, p, q);
        double fw = weight(d, cfg, spec);
        double ratio = lw / fw;
        if (ratio0 < 0) ratio0 = ratio;
        REQUIRE_NEAR(ratio / ratio0, 1.0, 1e-10);
      }
    }
  }
  // same on the degenerate slit Dobrushin domain (free measure)
  {
    double q = 2.0, p = critical_point(q);
    Domain d = build_slit_domain(1);
    MeasureSpec spec{p, q, "free"};
    double ratio0 = -1.0;
    for (uint64_t w = 0; w < (1ull << d.n_real_edges); ++w) {
      EdgeConfiguration cfg = EdgeConfiguration::from_word(d.n_real_edges, w);
      double ratio = loop_weight(d, cfg, p, q) / weight(d, cfg, spec);
      if (ratio0 < 0) ratio0 = ratio;
      REQUIRE_NEAR(ratio / ratio0, 1.0, 1e-10);
    }
  }
}

// at p = p_c, x = 1: loop weight reduces to sqrt(q)^l
void loop_weight_at_pc() {
  double q = 2.37;
  double pc = critical_point(q);
  REQUIRE_NEAR(pc / (std::sqrt(q) * (1.0 - pc)), 1.0, 1e-14);
  Domain d = build_slit_domain(1);
  EdgeConfiguration cfg = EdgeConfiguration::from_word(d.n_real_edges, 0b10110);
  LoopConfiguration lc = loops_of(d, cfg);
  REQUIRE_NEAR(loop_weight(d, cfg, pc, q), std::pow(std::sqrt(q), lc.loop_count), 1e-12);
  // q = 1: weight reduces to x^o
  double x = 0.3 / (1.0 - 0.3);
  REQUIRE_NEAR(loop_weight(d, cfg, 0.3, 1.0), std::pow(x, cfg.open_count()), 1e-12);
}

// gamma hugs the free arc when everything is open and the wired arc when
// everything is closed.
void gamma_hugging() {
  Domain d = dobrushin2();
  std::vector<bool> wired(d.n_real_sites, false);
  for (SiteId s : d.wired_arc) wired[s] = true;

  EdgeConfiguration open = EdgeConfiguration::all_open(d.n_real_edges);
  GammaTrace g_open = trace_gamma(d, open);
  std::set<uint32_t> on_open;
  for (const MedialEdge& m : g_open.edges) on_open.insert(m.token());
  for (const auto& f : d.boundary_faces) {
    if (f.site == d.a || f.site == d.b) continue;
    bool in_on = on_open.count(f.e_in.token()) > 0;
    bool out_on = on_open.count(f.e_out.token()) > 0;
    if (!wired[f.site]) REQUIRE(in_on && out_on);
    else REQUIRE(!in_on && !out_on);
  }

  EdgeConfiguration closed(d.n_real_edges);
  GammaTrace g_closed = trace_gamma(d, closed);
  std::set<uint32_t> on_closed;
  for (const MedialEdge& m : g_closed.edges) on_closed.insert(m.token());
  for (const auto& f : d.boundary_faces) {
    if (f.site == d.a || f.site == d.b) continue;
    bool in_on = on_closed.count(f.e_in.token()) > 0;
    bool out_on = on_closed.count(f.e_out.token()) > 0;
    if (wired[f.site]) REQUIRE(in_on && out_on);
    else REQUIRE(!in_on && !out_on);
  }
}

// Interface property: a free-arc site is connected to the wired arc iff its
// boundary medial edges lie on gamma.
void interface_property() {
  Domain d = dobrushin2();
  std::vector<bool> wired(d.n_real_sites, false);
  for (SiteId s : d.wired_arc) wired[s] = true;
  BoundaryPartition bc = BoundaryPartition::dobrushin_bc(d);
  for (uint64_t w = 0; w < (1ull << d.n_real_edges); ++w) {
    EdgeConfiguration cfg = EdgeConfiguration::from_word(d.n_real_edges, w);
    GammaTrace g = trace_gamma(d, cfg);
    std::set<uint32_t> on;
    for (const MedialEdge& m : g.edges) on.insert(m.token());
    UnionFind uf(d.n_real_sites);
    for (SiteId s : d.wired_arc) uf.unite(d.wired_arc[0], s);
    for (EdgeId e = 0; e < d.n_real_edges; ++e)
      if (cfg.open(e)) uf.unite(d.edges[e].a, d.edges[e].b);
    for (const auto& f : d.boundary_faces) {
      if (wired[f.site]) continue;
      bool conn = uf.find(f.site) == uf.find(d.wired_arc[0]);
      REQUIRE(conn == (on.count(f.e_in.token()) > 0));
      REQUIRE(conn == (on.count(f.e_out.token()) > 0));
    }
  }
}

// Boundary windings are configuration independent.
void boundary_winding_determinism() {
  for (Domain d : {dobrushin2(), build_slit_domain(2)}) {
    std::vector<const BoundaryFace*> face_in(4 * d.site_pos.size(), nullptr);
    std::vector<const BoundaryFace*> face_out(4 * d.site_pos.size(), nullptr);
    for (const auto& f : d.boundary_faces) {
      face_in[f.e_in.token()] = &f;
      face_out[f.e_out.token()] = &f;
    }
    Rng rng(23, 1);
    for (int rep = 0; rep < 400; ++rep) {
      EdgeConfiguration cfg(d.n_real_edges);
      for (EdgeId e = 0; e < d.n_real_edges; ++e) cfg.set(e, rng.uniform() < 0.5);
      GammaTrace g = trace_gamma(d, cfg);
      REQUIRE(g.total_winding() == d.w_ab);
      for (size_t i = 0; i < g.edges.size(); ++i) {
        uint32_t tok = g.edges[i].token();
        if (face_in[tok]) REQUIRE(g.winding[i] == face_in[tok]->w_in);
        if (face_out[tok]) REQUIRE(g.winding[i] == face_out[tok]->w_out);
      }
    }
  }
}

// Winding additivity along the path and the not-on-path error.
void winding_arithmetic() {
  Domain d = build_slit_domain(2);
  EdgeConfiguration cfg = EdgeConfiguration::all_open(d.n_real_edges);
  GammaTrace g = trace_gamma(d, cfg);
  REQUIRE(g.edges.size() >= 5);
  MedialEdge e1 = g.edges[0], e2 = g.edges[g.edges.size() / 2], e3 = g.edges.back();
  REQUIRE(winding_along(g, e1, e3) == winding_along(g, e1, e2) + winding_along(g, e2, e3));
  // a single medial step turns by one quarter
  REQUIRE(std::abs(winding_along(g, g.edges[0], g.edges[1])) == 1);
  MedialEdge absent{d.site_at({0, 0, 0}), NW};
  bool on = false;
  for (const MedialEdge& m : g.edges)
    if (m == absent) on = true;
  if (!on) REQUIRE_THROWS(winding_along(g, absent, e3), not_on_path);
}

// Closed loops turn by +-2 pi: +4 quarters around an isolated site, -4 around
// an isolated dual face (the two winding examples of the figure).
void loop_turning_numbers() {
  Domain d = build_box(1);
  EdgeConfiguration closed(d.n_real_edges);
  LoopConfiguration lc = loops_of(d, closed);
  REQUIRE(lc.loop_count == 9);  // one counterclockwise loop per isolated site
  for (const auto& loop : lc.loops) REQUIRE(loop_turning(d, loop) == +4);

  EdgeConfiguration open = EdgeConfiguration::all_open(d.n_real_edges);
  LoopConfiguration lo = loops_of(d, open);
  int cw = 0, ccw = 0;
  for (const auto& loop : lo.loops) {
    int t = loop_turning(d, loop);
    REQUIRE(std::abs(t) == 4);
    (t < 0 ? cw : ccw)++;
  }
  REQUIRE(cw == 4);   // clockwise around each interior dual face
  REQUIRE(ccw == 1);  // the outer cluster boundary
}

// Slit domain: all-open gamma is the full boundary contour, all-closed gamma
// is the little loop around the origin's face.
void slit_gamma() {
  Domain d = build_slit_domain(2);
  EdgeConfiguration closed(d.n_real_edges);
  GammaTrace g = trace_gamma(d, closed);
  REQUIRE(g.edges.size() == 4);
  REQUIRE(g.total_winding() == 3);
  REQUIRE(g.edges.front() == d.e_a);
  REQUIRE(g.edges.back() == d.e_b);

  EdgeConfiguration open = EdgeConfiguration::all_open(d.n_real_edges);
  GammaTrace go = trace_gamma(d, open);
  std::set<uint32_t> on;
  for (const MedialEdge& m : go.edges) on.insert(m.token());
  for (const auto& f : d.boundary_faces) {
    REQUIRE(on.count(f.e_in.token()) == 1);
    REQUIRE(on.count(f.e_out.token()) == 1);
  }
}

// Universal cover: gamma is the cut-open loop around the origin cluster with
// total winding 2 pi.
void cover_gamma() {
  Domain d = build_universal_cover(1, 2);
  Rng rng(31, 2);
  for (int rep = 0; rep < 100; ++rep) {
    EdgeConfiguration cfg(d.n_real_edges);
    for (EdgeId e = 0; e < d.n_real_edges; ++e) cfg.set(e, rng.uniform() < 0.5);
    GammaTrace g = trace_gamma(d, cfg);
    REQUIRE(g.edges.front() == d.e_a);
    REQUIRE(g.edges.back() == d.e_b);
    REQUIRE(g.total_winding() == 4);
  }
  EdgeConfiguration closed(d.n_real_edges);
  GammaTrace g = trace_gamma(d, closed);
  REQUIRE(g.edges.size() == 5);  // the four quadrant edges of the origin face, cut open
}

void loops_json_export() {
  Domain d = build_slit_domain(1);
  EdgeConfiguration cfg = EdgeConfiguration::from_word(d.n_real_edges, 0b101);
  std::string js = loops_to_json(d, loops_of(d, cfg));
  REQUIRE(js.find("\"gamma\"") != std::string::npos);
  REQUIRE(js.find("\"loop_count\"") != std::string::npos);
}

}  // namespace

int main() {
  return testkit::run_all({
      {"turn_table_fixture", turn_table_fixture},
      {"bijection_round_trip", bijection_round_trip},
      {"eulerian_cover", eulerian_cover},
      {"loop_weight_ratio", loop_weight_ratio},
      {"loop_weight_at_pc", loop_weight_at_pc},
      {"gamma_hugging", gamma_hugging},
      {"interface_property", interface_property},
      {"boundary_winding_determinism", boundary_winding_determinism},
      {"winding_arithmetic", winding_arithmetic},
      {"loop_turning_numbers", loop_turning_numbers},
      {"slit_gamma", slit_gamma},
      {"cover_gamma", cover_gamma},
      {"loops_json_export", loops_json_export},
  });
}
