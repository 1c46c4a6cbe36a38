#include "fklab/fk.hpp"

#include <algorithm>
#include <queue>

#include "json.hpp"

namespace fklab {

bool BoundaryPartition::dominates(const BoundaryPartition& other, int32_t n_sites) const {
  UnionFind uf(n_sites);
  for (const auto& cls : classes)
    for (size_t i = 1; i < cls.size(); ++i) uf.unite(cls[0], cls[i]);
  for (const auto& cls : other.classes)
    for (size_t i = 1; i < cls.size(); ++i)
      if (uf.find(cls[0]) != uf.find(cls[i])) return false;
  return true;
}

std::string MeasureSpec::to_json() const {
  nlohmann::json j{{"p", p}, {"q", q}, {"bc", bc}};
  return j.dump();
}

MeasureSpec MeasureSpec::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  MeasureSpec s;
  s.p = j.at("p");
  s.q = j.at("q");
  s.bc = j.value("bc", "free");
  if (s.p < 0.0 || s.p > 1.0) throw invalid_parameter("MeasureSpec: p outside [0,1]");
  if (s.q <= 0.0) throw invalid_parameter("MeasureSpec: q must be positive");
  return s;
}

int32_t cluster_count(const Domain& d, const EdgeConfiguration& cfg, const BoundaryPartition& bc) {
  UnionFind uf(d.n_real_sites);
  for (const auto& cls : bc.classes)
    for (size_t i = 1; i < cls.size(); ++i) uf.unite(cls[0], cls[i]);
  for (EdgeId e = 0; e < d.n_real_edges; ++e)
    if (cfg.open(e)) uf.unite(d.edges[e].a, d.edges[e].b);
  int32_t k = 0;
  for (SiteId s = 0; s < d.n_real_sites; ++s)
    if (uf.find(s) == s) ++k;
  return k;
}

int32_t cluster_count_bfs(const Domain& d, const EdgeConfiguration& cfg, const BoundaryPartition& bc) {
  std::vector<int32_t> cls(d.n_real_sites, -1);
  for (int32_t c = 0; c < (int32_t)bc.classes.size(); ++c)
    for (SiteId s : bc.classes[c]) cls[s] = c;
  std::vector<std::vector<SiteId>> members(bc.classes.size());
  for (int32_t c = 0; c < (int32_t)bc.classes.size(); ++c) members[c] = bc.classes[c];

  std::vector<bool> seen(d.n_real_sites, false);
  std::vector<bool> cls_seen(bc.classes.size(), false);
  int32_t k = 0;
  std::queue<SiteId> q;
  for (SiteId s0 = 0; s0 < d.n_real_sites; ++s0) {
    if (seen[s0]) continue;
    ++k;
    seen[s0] = true;
    q.push(s0);
    while (!q.empty()) {
      SiteId u = q.front();
      q.pop();
      if (cls[u] >= 0 && !cls_seen[cls[u]]) {
        cls_seen[cls[u]] = true;
        for (SiteId v : members[cls[u]])
          if (!seen[v]) {
            seen[v] = true;
            q.push(v);
          }
      }
      for (int c = 0; c < 4; ++c) {
        EdgeId e = d.edge_at[u][c];
        if (e == kNoEdge || e >= d.n_real_edges || !cfg.open(e)) continue;
        SiteId v = d.nbr_at[u][c];
        if (!seen[v]) {
          seen[v] = true;
          q.push(v);
        }
      }
    }
  }
  return k;
}

double log_weight(const Domain& d, const EdgeConfiguration& cfg, const MeasureSpec& spec) {
  if (spec.q <= 0.0) throw invalid_parameter("log_weight: q must be positive");
  int32_t o = cfg.open_count();
  int32_t c = d.n_real_edges - o;
  int32_t k = cluster_count(d, cfg, spec.partition(d));
  double lw = 0.0;
  if (o > 0) lw += o * std::log(spec.p);
  if (c > 0) lw += c * std::log(1.0 - spec.p);
  lw += k * std::log(spec.q);
  return lw;
}

double weight(const Domain& d, const EdgeConfiguration& cfg, const MeasureSpec& spec) {
  if (spec.q <= 0.0) throw invalid_parameter("weight: q must be positive");
  int32_t o = cfg.open_count();
  int32_t c = d.n_real_edges - o;
  if (spec.p == 0.0) return o == 0 ? std::pow(spec.q, cluster_count(d, cfg, spec.partition(d))) : 0.0;
  if (spec.p == 1.0) return c == 0 ? std::pow(spec.q, cluster_count(d, cfg, spec.partition(d))) : 0.0;
  if (d.n_real_edges > 40) return std::exp(log_weight(d, cfg, spec));
  int32_t k = cluster_count(d, cfg, spec.partition(d));
  return std::pow(spec.p, o) * std::pow(1.0 - spec.p, c) * std::pow(spec.q, k);
}

double critical_point(double q) {
  if (q <= 0.0) throw invalid_parameter("critical_point: q must be positive");
  double r = std::sqrt(q);
  return r / (1.0 + r);
}

std::pair<double, double> dual_parameters(double p, double q) {
  if (q <= 0.0) throw invalid_parameter("dual_parameters: q must be positive");
  if (p < 0.0 || p > 1.0) throw invalid_parameter("dual_parameters: p outside [0,1]");
  if (p == 0.0) return {1.0, q};
  if (p == 1.0) return {0.0, q};
  double pstar = q * (1.0 - p) / (p + q * (1.0 - p));
  return {pstar, q};
}

DualGraph dual_graph(const Domain& d) {
  if (d.kind == DomainKind::Cover) throw unsupported_domain("dual_graph: universal cover has no planar dual");
  DualGraph g;
  std::unordered_map<Coord, int32_t, CoordHash> face_id;
  auto face_of = [&](Coord sw) -> int32_t {
    // bounded face with SW corner sw exists iff its four corner sites do and
    // no site was removed
    Coord c[4] = {sw, {sw.x + 1, sw.y, 0}, {sw.x, sw.y + 1, 0}, {sw.x + 1, sw.y + 1, 0}};
    for (const Coord& cc : c)
      if (d.site_at(cc) == kNoSite || !d.is_real_site(d.site_at(cc))) return -1;
    auto it = face_id.find(sw);
    if (it != face_id.end()) return it->second;
    int32_t id = (int32_t)g.face_pos.size();
    face_id.emplace(sw, id);
    g.face_pos.push_back(sw);
    return id;
  };
  // first pass assigns ids to all bounded faces in scan order
  for (SiteId s = 0; s < d.n_real_sites; ++s) face_of(d.site_pos[s]);
  g.outer = (int32_t)g.face_pos.size();
  g.n_vertices = g.outer + 1;
  g.edges.resize(d.n_real_edges);
  for (EdgeId e = 0; e < d.n_real_edges; ++e) {
    const auto& r = d.edges[e];
    Coord ca = d.site_pos[r.a];
    int32_t f1, f2;
    if (r.dir == N) {  // vertical edge: faces east and west of it
      f1 = face_of({ca.x, ca.y, 0});
      f2 = face_of({ca.x - 1, ca.y, 0});
    } else {           // horizontal edge: faces north and south
      f1 = face_of({ca.x, ca.y, 0});
      f2 = face_of({ca.x, ca.y - 1, 0});
    }
    g.edges[e] = {f1 < 0 ? g.outer : f1, f2 < 0 ? g.outer : f2};
  }
  return g;
}

EdgeConfiguration dual_configuration(const EdgeConfiguration& cfg) {
  EdgeConfiguration d(cfg.n_edges);
  for (EdgeId e = 0; e < cfg.n_edges; ++e) d.set(e, !cfg.open(e));
  return d;
}

int32_t dual_cluster_count(const DualGraph& g, const EdgeConfiguration& dual_cfg) {
  UnionFind uf(g.n_vertices);
  for (EdgeId e = 0; e < (EdgeId)g.edges.size(); ++e)
    if (dual_cfg.open(e)) uf.unite(g.edges[e].first, g.edges[e].second);
  int32_t k = 0;
  for (int32_t v = 0; v < g.n_vertices; ++v)
    if (uf.find(v) == v) ++k;
  return k;
}

}  // namespace fklab
