#include "fklab/lattice.hpp"

#include <algorithm>
#include <cassert>

#include "json.hpp"

namespace fklab {

namespace {

constexpr std::array<int, 4> kDx = {0, 1, 0, -1};  // N,E,S,W
constexpr std::array<int, 4> kDy = {1, 0, -1, 0};

SiteId add_site(Domain& d, Coord c) {
  SiteId id = (SiteId)d.site_pos.size();
  d.site_pos.push_back(c);
  d.edge_at.push_back({kNoEdge, kNoEdge, kNoEdge, kNoEdge});
  d.nbr_at.push_back({kNoSite, kNoSite, kNoSite, kNoSite});
  d.site_by_pos.emplace(c, id);
  return id;
}

EdgeId add_edge(Domain& d, SiteId u, SiteId v, Compass dir, bool ghost) {
  EdgeId id = (EdgeId)d.edges.size();
  d.edges.push_back({u, v, dir, ghost});
  d.edge_at[u][dir] = id;
  d.nbr_at[u][dir] = v;
  d.edge_at[v][compass_opposite(dir)] = id;
  d.nbr_at[v][compass_opposite(dir)] = u;
  return id;
}

bool real_present(const Domain& d, EdgeId e) { return e != kNoEdge && e < d.n_real_edges; }

// Counterclockwise outer-face walk. At each site the walk continues with the
// first present real edge scanning counterclockwise from the reversal of the
// arrival direction (excluded), falling back to doubling back at a dead end.
std::vector<SiteId> trace_boundary_walk(const Domain& d) {
  SiteId start = 0;
  for (SiteId s = 0; s < d.n_real_sites; ++s) {
    Coord a = d.site_pos[s], b = d.site_pos[start];
    if (a.y < b.y || (a.y == b.y && a.x < b.x)) start = s;
  }
  auto next_dir = [&](SiteId u, Compass arrival) -> Compass {
    Compass c = compass_opposite(arrival);
    for (int i = 0; i < 4; ++i) {
      c = compass_ccw(c);
      if (real_present(d, d.edge_at[u][c])) return c;
    }
    throw unsupported_domain("boundary walk hit an isolated site");
  };

  Compass d0 = next_dir(start, S);  // the lexicographic minimum is a SW corner
  std::vector<SiteId> walk;
  SiteId u = start;
  Compass dir = d0;
  do {
    walk.push_back(u);
    u = d.nbr_at[u][dir];
    dir = next_dir(u, dir);
  } while (!(u == start && dir == d0));
  return walk;
}

void build_medial_set(Domain& d) {
  d.medial_index.assign(4 * d.site_pos.size(), -1);
  d.medial_edges.clear();
  for (SiteId s = 0; s < d.n_real_sites; ++s) {
    for (int q = 0; q < 4; ++q) {
      MedialEdge m{s, Quadrant(q)};
      if (real_present(d, medial_tail_edge(d, m)) || real_present(d, medial_head_edge(d, m))) {
        d.medial_index[m.token()] = (int32_t)d.medial_edges.size();
        d.medial_edges.push_back(m);
      }
    }
  }
}

void build_boundary_faces(Domain& d) {
  d.boundary_faces.clear();
  for (SiteId s = 0; s < d.n_real_sites; ++s) {
    MedialEdge ein, eout;
    int n_in = 0, n_out = 0;
    for (int q = 0; q < 4; ++q) {
      MedialEdge m{s, Quadrant(q)};
      bool tail = real_present(d, medial_tail_edge(d, m));
      bool head = real_present(d, medial_head_edge(d, m));
      if (!tail && head) {
        ein = m;
        ++n_in;
      } else if (tail && !head) {
        eout = m;
        ++n_out;
      }
    }
    if (n_in == 0 && n_out == 0) continue;
    if (n_in != 1 || n_out != 1)
      throw unsupported_domain("boundary face without a unique contour edge pair");
    BoundaryFace f;
    f.site = s;
    f.e_in = ein;
    f.e_out = eout;
    Coord c = d.site_pos[s];
    f.on_outer_box = std::abs(c.x) == d.n || std::abs(c.y) == d.n;
    if (d.kind == DomainKind::Rect) f.on_outer_box = true;
    d.boundary_faces.push_back(f);
  }
}

// Trace gamma for a constant edge state and record contour-edge windings.
void calibrate_windings(Domain& d) {
  if (!d.dobrushin_like()) return;

  std::vector<BoundaryFace*> face_of_token(4 * d.site_pos.size(), nullptr);
  std::vector<bool> token_is_in(4 * d.site_pos.size(), false);
  for (auto& f : d.boundary_faces) {
    face_of_token[f.e_in.token()] = &f;
    token_is_in[f.e_in.token()] = true;
    face_of_token[f.e_out.token()] = &f;
  }

  int w_ab_seen = INT32_MIN;
  auto trace = [&](bool all_open) {
    std::vector<MedialEdge> path;
    std::vector<int> turn_after;  // turn between path[i] and path[i+1]
    MedialEdge m = d.e_a;
    size_t guard = 16 * d.site_pos.size() + 64;
    for (size_t steps = 0;; ++steps) {
      if (steps > guard) throw unsupported_domain("calibration trace did not close");
      path.push_back(m);
      if (m == d.e_b && (steps > 0 || !d.cyclic_gamma)) break;
      EdgeId e = medial_head_edge(d, m);
      bool open = e != kNoEdge && (d.edges[e].ghost || all_open);
      int t = 0;
      m = medial_step(d, m, open, t);
      turn_after.push_back(t);
      if (d.cyclic_gamma && m == d.e_b) {
        path.push_back(m);
        break;
      }
    }
    // winding from each traversed edge to e_b
    int w = 0;
    std::vector<int> winding(path.size(), 0);
    for (size_t i = path.size(); i-- > 1;) {
      winding[i] = w;
      w += turn_after[i - 1];
    }
    winding[0] = w;
    size_t count = d.cyclic_gamma ? path.size() - 1 : path.size();
    for (size_t i = 0; i < count; ++i) {
      MedialEdge g = path[i];
      if (g.anchor >= d.n_real_sites) continue;
      BoundaryFace* f = face_of_token[g.token()];
      if (!f) continue;
      int& slot = token_is_in[g.token()] ? f->w_in : f->w_out;
      if (slot != INT32_MIN && slot != winding[i])
        throw unsupported_domain("boundary winding changed between calibration traces");
      slot = winding[i];
    }
    if (w_ab_seen == INT32_MIN)
      w_ab_seen = winding[0];
    else if (w_ab_seen != winding[0])
      throw unsupported_domain("W(e_a,e_b) differs between calibration traces");
  };

  trace(true);
  if (!d.cyclic_gamma && d.kind != DomainKind::Slit) trace(false);
  d.w_ab = w_ab_seen;
}

Domain finish(Domain d) {
  build_medial_set(d);
  build_boundary_faces(d);
  calibrate_windings(d);
  return d;
}

void mark_dobrushin_edges(Domain& d, const std::vector<SiteId>& walk, size_t ia, size_t ib) {
  // e_a: between the dead-end rung at a and the first free-arc edge;
  // e_b: between the last free-arc edge and the rung at b.
  size_t m = walk.size();
  SiteId f1 = walk[(ia + 1) % m];
  SiteId fm = walk[(ib + m - 1) % m];
  Compass c_free = N, c_in = N;
  for (int c = 0; c < 4; ++c) {
    if (d.nbr_at[d.a][c] == f1 && d.edge_at[d.a][c] != kNoEdge) c_free = Compass(c);
    if (d.nbr_at[fm][c] == d.b && d.edge_at[fm][c] != kNoEdge) c_in = compass_opposite(Compass(c));
  }
  d.e_a = MedialEdge{d.a, quadrant_with_tail(compass_cw(c_free))};
  d.e_b = MedialEdge{d.b, quadrant_with_tail(c_in)};
}

}  // namespace

MedialVertexPorts Domain::ports(EdgeId e) const {
  if (e == kNoEdge || e >= n_real_edges) throw invalid_parameter("ports: not a real edge");
  const auto& r = edges[e];
  MedialVertexPorts p;
  p.vertex = e;
  if (r.dir == N) {
    p.nw = {r.b, SW};
    p.ne = {r.b, SE};
    p.sw = {r.a, NW};
    p.se = {r.a, NE};
  } else {
    p.ne = {r.b, NW};
    p.se = {r.b, SW};
    p.nw = {r.a, NE};
    p.sw = {r.a, SE};
  }
  return p;
}

bool Domain::is_strict_interior_vertex(EdgeId e) const {
  MedialVertexPorts p = ports(e);
  for (const MedialEdge& m : {p.nw, p.ne, p.sw, p.se}) {
    EdgeId t = medial_tail_edge(*this, m);
    EdgeId h = medial_head_edge(*this, m);
    if (t == kNoEdge || t >= n_real_edges) return false;
    if (h == kNoEdge || h >= n_real_edges) return false;
  }
  return true;
}

Domain build_rect(int x0, int x1, int y0, int y1) {
  if (x1 <= x0 || y1 <= y0) throw invalid_parameter("build_rect: empty rectangle");
  Domain d;
  d.kind = DomainKind::Rect;
  d.n = std::max({std::abs(x0), std::abs(x1), std::abs(y0), std::abs(y1)});
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) add_site(d, {x, y, 0});
  d.n_real_sites = (int32_t)d.site_pos.size();
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      SiteId s = d.site_at({x, y, 0});
      if (y + 1 <= y1) add_edge(d, s, d.site_at({x, y + 1, 0}), N, false);
      if (x + 1 <= x1) add_edge(d, s, d.site_at({x + 1, y, 0}), E, false);
    }
  d.n_real_edges = (int32_t)d.edges.size();
  d.boundary_walk = trace_boundary_walk(d);
  return finish(std::move(d));
}

Domain build_box(int n) {
  if (n < 1) throw invalid_parameter("build_box: n must be >= 1");
  Domain d = build_rect(-n, n, -n, n);
  d.kind = DomainKind::Box;
  d.n = n;
  return d;
}

Domain build_slit_domain(int n) {
  if (n < 1) throw invalid_parameter("build_slit_domain: n must be >= 1");
  Domain d;
  d.kind = DomainKind::Slit;
  d.n = n;
  for (int y = -n; y <= n; ++y)
    for (int x = -n; x <= n; ++x) {
      if (y == 0 && x > 0) continue;  // slit: sites (k,0), k>0 removed
      add_site(d, {x, y, 0});
    }
  d.n_real_sites = (int32_t)d.site_pos.size();
  for (SiteId s = 0; s < d.n_real_sites; ++s) {
    Coord c = d.site_pos[s];
    SiteId up = d.site_at({c.x, c.y + 1, 0});
    SiteId right = d.site_at({c.x + 1, c.y, 0});
    if (up != kNoSite) add_edge(d, s, up, N, false);
    if (right != kNoSite) add_edge(d, s, right, E, false);
  }
  d.n_real_edges = (int32_t)d.edges.size();
  d.boundary_walk = trace_boundary_walk(d);

  // Degenerate Dobrushin domain: wired arc reduced to the origin.
  d.bc = LoopBc::Dobrushin;
  d.a = d.b = d.site_at({0, 0, 0});
  d.wired_arc = {d.a};
  size_t ia = 0;
  for (size_t i = 0; i < d.boundary_walk.size(); ++i)
    if (d.boundary_walk[i] == d.a) ia = i;
  mark_dobrushin_edges(d, d.boundary_walk, ia, ia);
  return finish(std::move(d));
}

Domain build_universal_cover(int n, int T) {
  if (n < 1 || T < 1) throw invalid_parameter("build_universal_cover: need n >= 1, T >= 1");
  Domain d;
  d.kind = DomainKind::Cover;
  d.n = n;
  d.levels = T;
  for (int z = -T; z <= T; ++z)
    for (int y = -n; y <= n; ++y)
      for (int x = -n; x <= n; ++x) add_site(d, {x, y, z});
  d.n_real_sites = (int32_t)d.site_pos.size();
  for (SiteId s = 0; s < d.n_real_sites; ++s) {
    Coord c = d.site_pos[s];
    SiteId up = d.site_at({c.x, c.y + 1, c.z});
    if (up != kNoSite) add_edge(d, s, up, N, false);
    if (c.x == 0 && c.y < 0) {
      // cut-crossing edge [(0,x2,x3),(1,x2,x3+1)]
      SiteId e = d.site_at({1, c.y, c.z + 1});
      if (e != kNoSite) add_edge(d, s, e, E, false);
    } else {
      SiteId e = d.site_at({c.x + 1, c.y, c.z});
      if (e != kNoSite) add_edge(d, s, e, E, false);
    }
  }
  d.n_real_edges = (int32_t)d.edges.size();

  d.bc = LoopBc::Dobrushin;
  d.a = d.b = d.site_at({0, 0, 0});
  d.wired_arc = {d.a};
  d.e_a = d.e_b = MedialEdge{d.a, SE};
  d.cyclic_gamma = true;
  return finish(std::move(d));
}

namespace {

// Ghost ring one step outside the whole boundary, with rungs to the wired sites.
void attach_ghosts(Domain& d, const std::vector<SiteId>& wired_sites) {
  std::unordered_map<Coord, SiteId, CoordHash> ring;
  int x0 = INT32_MAX, x1 = INT32_MIN, y0 = INT32_MAX, y1 = INT32_MIN;
  for (SiteId s = 0; s < d.n_real_sites; ++s) {
    x0 = std::min(x0, d.site_pos[s].x);
    x1 = std::max(x1, d.site_pos[s].x);
    y0 = std::min(y0, d.site_pos[s].y);
    y1 = std::max(y1, d.site_pos[s].y);
  }
  auto ring_site = [&](Coord c) -> SiteId {
    auto it = ring.find(c);
    if (it != ring.end()) return it->second;
    SiteId id = add_site(d, c);
    ring.emplace(c, id);
    return id;
  };
  std::vector<Coord> ring_path;
  for (int x = x0 - 1; x <= x1 + 1; ++x) ring_path.push_back({x, y0 - 1, 0});
  for (int y = y0; y <= y1 + 1; ++y) ring_path.push_back({x1 + 1, y, 0});
  for (int x = x1; x >= x0 - 1; --x) ring_path.push_back({x, y1 + 1, 0});
  for (int y = y1; y >= y0; --y) ring_path.push_back({x0 - 1, y, 0});
  for (size_t i = 0; i < ring_path.size(); ++i) {
    Coord u = ring_path[i], v = ring_path[(i + 1) % ring_path.size()];
    SiteId su = ring_site(u), sv = ring_site(v);
    Compass dir;
    if (v.x == u.x + 1) dir = E;
    else if (v.x == u.x - 1) dir = W;
    else if (v.y == u.y + 1) dir = N;
    else dir = S;
    if (dir == W || dir == S) {
      std::swap(su, sv);
      dir = compass_opposite(dir);
    }
    if (d.edge_at[su][dir] == kNoEdge) add_edge(d, su, sv, dir, true);
  }
  for (SiteId u : wired_sites) {
    Coord c = d.site_pos[u];
    for (int ci = 0; ci < 4; ++ci) {
      if (d.edge_at[u][ci] != kNoEdge) continue;
      Coord v{c.x + kDx[ci], c.y + kDy[ci], 0};
      auto it = ring.find(v);
      if (it == ring.end()) continue;
      SiteId su = u, sv = it->second;
      Compass dir = Compass(ci);
      if (dir == W || dir == S) {
        std::swap(su, sv);
        dir = compass_opposite(dir);
      }
      add_edge(d, su, sv, dir, true);
    }
  }
}

}  // namespace

Domain with_dobrushin(Domain d, Coord ca, Coord cb) {
  if (d.kind != DomainKind::Box && d.kind != DomainKind::Rect)
    throw unsupported_domain("with_dobrushin: expects a box or rectangle");
  SiteId a = d.site_at(ca), b = d.site_at(cb);
  if (a == kNoSite || b == kNoSite || a == b)
    throw invalid_parameter("with_dobrushin: a, b must be distinct domain sites");
  const auto walk = d.boundary_walk;
  size_t ia = walk.size(), ib = walk.size();
  for (size_t i = 0; i < walk.size(); ++i) {
    if (walk[i] == a) ia = i;
    if (walk[i] == b) ib = i;
  }
  if (ia == walk.size() || ib == walk.size())
    throw invalid_parameter("with_dobrushin: a, b must be boundary sites");

  d.bc = LoopBc::Dobrushin;
  d.a = a;
  d.b = b;
  d.wired_arc.clear();
  for (size_t i = ib;; i = (i + 1) % walk.size()) {
    d.wired_arc.push_back(walk[i]);
    if (i == ia) break;
  }
  attach_ghosts(d, d.wired_arc);
  mark_dobrushin_edges(d, walk, ia, ib);
  return finish(std::move(d));
}

Domain with_wired(Domain d) {
  if (d.kind != DomainKind::Box && d.kind != DomainKind::Rect)
    throw unsupported_domain("with_wired: expects a box or rectangle");
  d.bc = LoopBc::Wired;
  d.wired_arc = d.boundary_walk;
  attach_ghosts(d, d.wired_arc);
  return finish(std::move(d));
}

std::array<double, 2> medial_midpoint(const Domain& d, MedialEdge m) {
  Coord c = d.site_pos[m.anchor];
  Compass t = quadrant_tail(m.quad), h = quadrant_head(m.quad);
  double x = c.x + 0.25 * (kDx[t] + kDx[h]);
  double y = c.y + 0.25 * (kDy[t] + kDy[h]);
  return {x, y};
}

std::string domain_to_json(const Domain& d) {
  nlohmann::json j;
  switch (d.kind) {
    case DomainKind::Box: j["kind"] = "box"; break;
    case DomainKind::Rect: j["kind"] = "rect"; break;
    case DomainKind::Slit: j["kind"] = "slit"; break;
    case DomainKind::Cover: j["kind"] = "cover"; break;
  }
  j["n"] = d.n;
  if (d.kind == DomainKind::Cover) j["T"] = d.levels;
  if (d.bc == LoopBc::Dobrushin && d.kind != DomainKind::Slit && d.kind != DomainKind::Cover) {
    Coord a = d.site_pos[d.a], b = d.site_pos[d.b];
    j["a"] = {a.x, a.y};
    j["b"] = {b.x, b.y};
  }
  if (d.kind == DomainKind::Rect) {
    int x0 = INT32_MAX, x1 = INT32_MIN, y0 = INT32_MAX, y1 = INT32_MIN;
    for (SiteId s = 0; s < d.n_real_sites; ++s) {
      x0 = std::min(x0, d.site_pos[s].x);
      x1 = std::max(x1, d.site_pos[s].x);
      y0 = std::min(y0, d.site_pos[s].y);
      y1 = std::max(y1, d.site_pos[s].y);
    }
    j["extent"] = {x0, x1, y0, y1};
  }
  return j.dump();
}

Domain domain_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  std::string kind = j.at("kind");
  if (kind == "box") {
    Domain d = build_box(j.at("n"));
    if (j.contains("a")) {
      auto a = j["a"], b = j["b"];
      d = with_dobrushin(std::move(d), {a[0], a[1], 0}, {b[0], b[1], 0});
    }
    return d;
  }
  if (kind == "rect") {
    auto e = j.at("extent");
    Domain d = build_rect(e[0], e[1], e[2], e[3]);
    if (j.contains("a")) {
      auto a = j["a"], b = j["b"];
      d = with_dobrushin(std::move(d), {a[0], a[1], 0}, {b[0], b[1], 0});
    }
    return d;
  }
  if (kind == "slit") return build_slit_domain(j.at("n"));
  if (kind == "cover") return build_universal_cover(j.at("n"), j.at("T"));
  throw invalid_parameter("domain_from_json: unknown kind " + kind);
}

}  // namespace fklab
