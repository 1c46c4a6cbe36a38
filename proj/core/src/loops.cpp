#include "fklab/loops.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace fklab {

GammaTrace trace_gamma_from(const Domain& d, const EdgeConfiguration& cfg, MedialEdge start,
                            MedialEdge end, bool cyclic) {
  GammaTrace g;
  std::vector<int> turns;  // turn between consecutive edges
  MedialEdge m = start;
  size_t guard = 16 * d.site_pos.size() + 64;
  for (size_t steps = 0;; ++steps) {
    if (steps > guard) throw unsupported_domain("trace_gamma: path did not reach e_b");
    g.edges.push_back(m);
    if (m == end && (steps > 0 || !cyclic)) break;
    int t = 0;
    m = medial_step(d, m, edge_open_ahead(d, cfg, m), t);
    turns.push_back(t);
    if (cyclic && m == end) {
      g.edges.push_back(m);
      break;
    }
  }
  g.winding.assign(g.edges.size(), 0);
  int w = 0;
  for (size_t i = g.edges.size(); i-- > 1;) {
    g.winding[i] = w;
    w += turns[i - 1];
  }
  g.winding[0] = w;
  return g;
}

GammaTrace trace_gamma(const Domain& d, const EdgeConfiguration& cfg) {
  if (!d.dobrushin_like()) throw unsupported_domain("trace_gamma: domain has no exploration path");
  return trace_gamma_from(d, cfg, d.e_a, d.e_b, d.cyclic_gamma);
}

LoopConfiguration loops_of(const Domain& d, const EdgeConfiguration& cfg) {
  LoopConfiguration lc;
  std::vector<bool> visited(4 * d.site_pos.size(), false);
  if (d.dobrushin_like()) {
    lc.gamma = trace_gamma(d, cfg);
    size_t count = d.cyclic_gamma ? lc.gamma.edges.size() - 1 : lc.gamma.edges.size();
    for (size_t i = 0; i < count; ++i) visited[lc.gamma.edges[i].token()] = true;
    if (!d.cyclic_gamma) {
      // The gamma cycle closes through ghost territory (or the slit cut); mark
      // the remainder of its cycle visited so it is not collected as a loop.
      MedialEdge m = lc.gamma.edges.back();
      size_t guard = 64 * d.site_pos.size() + 64;
      for (size_t steps = 0; !(m == lc.gamma.edges.front() && steps > 0); ++steps) {
        if (steps > guard) throw unsupported_domain("loops_of: gamma cycle did not close");
        int t = 0;
        m = medial_step(d, m, edge_open_ahead(d, cfg, m), t);
        visited[m.token()] = true;
      }
    }
  }
  for (const MedialEdge& seed : d.medial_edges) {
    if (visited[seed.token()]) continue;
    std::vector<MedialEdge> cycle;
    MedialEdge m = seed;
    size_t guard = 64 * d.site_pos.size() + 64;
    for (size_t steps = 0;; ++steps) {
      if (steps > guard) throw unsupported_domain("loops_of: loop did not close");
      visited[m.token()] = true;
      cycle.push_back(m);
      int t = 0;
      m = medial_step(d, m, edge_open_ahead(d, cfg, m), t);
      if (m == seed) break;
    }
    lc.loops.push_back(std::move(cycle));
  }
  lc.loop_count = (int32_t)lc.loops.size();
  return lc;
}

EdgeConfiguration reconstruct_configuration(const Domain& d, const LoopConfiguration& lc) {
  EdgeConfiguration cfg(d.n_real_edges);
  std::vector<bool> assigned(d.n_real_edges, false);
  auto absorb = [&](const std::vector<MedialEdge>& path, bool cyclic) {
    size_t n = path.size();
    if (n == 0) return;
    size_t last = cyclic ? n : n - 1;
    for (size_t i = 0; i < last; ++i) {
      MedialEdge cur = path[i];
      MedialEdge nxt = path[(i + 1) % n];
      EdgeId e = medial_head_edge(d, cur);
      bool open;
      if (nxt.anchor == cur.anchor) open = false;       // left turn
      else open = true;                                  // right turn
      if (e == kNoEdge || e >= d.n_real_edges || d.edges[e].ghost) continue;
      cfg.set(e, open);
      assigned[e] = true;
    }
  };
  for (const auto& loop : lc.loops) absorb(loop, true);
  if (!lc.gamma.edges.empty()) absorb(lc.gamma.edges, false);
  (void)assigned;
  return cfg;
}

double loop_weight(const Domain& d, const EdgeConfiguration& cfg, double p, double q) {
  if (q <= 0.0 || p < 0.0 || p >= 1.0) throw invalid_parameter("loop_weight: need q > 0, p in [0,1)");
  double x = p / (std::sqrt(q) * (1.0 - p));
  LoopConfiguration lc = loops_of(d, cfg);
  return std::pow(x, cfg.open_count()) * std::pow(std::sqrt(q), lc.loop_count);
}

int winding_along(const GammaTrace& g, MedialEdge e_from, MedialEdge e_to) {
  int i_from = -1, i_to = -1;
  for (size_t i = 0; i < g.edges.size(); ++i) {
    if (i_from < 0 && g.edges[i] == e_from) i_from = (int)i;
    if (g.edges[i] == e_to) i_to = (int)i;
  }
  if (i_from < 0 || i_to < 0) throw not_on_path("winding_along: edge not on path");
  return g.winding[i_from] - g.winding[i_to];
}

std::string loops_to_json(const Domain& d, const LoopConfiguration& lc) {
  nlohmann::json j;
  auto polyline = [&](const std::vector<MedialEdge>& path) {
    nlohmann::json pts = nlohmann::json::array();
    for (const MedialEdge& m : path) {
      auto mid = medial_midpoint(d, m);
      pts.push_back({mid[0], mid[1]});
    }
    return pts;
  };
  j["loops"] = nlohmann::json::array();
  for (const auto& loop : lc.loops) j["loops"].push_back(polyline(loop));
  if (!lc.gamma.edges.empty()) j["gamma"] = polyline(lc.gamma.edges);
  j["loop_count"] = lc.loop_count;
  return j.dump();
}

}  // namespace fklab
