#include "fklab/fk.hpp"

#include "fklab/enumerate.hpp"
#include "fklab/rng.hpp"
#include "testkit.hpp"

using namespace fklab;

namespace {

void cluster_counts() {
  Domain d = build_box(1);
  EdgeConfiguration closed(d.n_real_edges);
  REQUIRE(cluster_count(d, closed, BoundaryPartition::free_bc()) == 9);
  EdgeConfiguration open = EdgeConfiguration::all_open(d.n_real_edges);
  REQUIRE(cluster_count(d, open, BoundaryPartition::free_bc()) == 1);
  REQUIRE(cluster_count(d, open, BoundaryPartition::wired_bc(d)) == 1);
  // all closed under wired bc: boundary is one class, the centre is alone
  REQUIRE(cluster_count(d, closed, BoundaryPartition::wired_bc(d)) == 2);
}

void union_find_vs_bfs() {
  Rng rng(11, 0);
  for (const Domain& d : {build_box(2), build_slit_domain(2), build_universal_cover(1, 1)}) {
    std::vector<BoundaryPartition> bcs = {BoundaryPartition::free_bc()};
    if (d.kind != DomainKind::Cover) bcs.push_back(BoundaryPartition::wired_bc(d));
    for (int rep = 0; rep < 200; ++rep) {
      EdgeConfiguration cfg(d.n_real_edges);
      for (EdgeId e = 0; e < d.n_real_edges; ++e) cfg.set(e, rng.uniform() < 0.5);
      for (const auto& bc : bcs)
        REQUIRE(cluster_count(d, cfg, bc) == cluster_count_bfs(d, cfg, bc));
    }
  }
  Domain d = with_dobrushin(build_rect(0, 2, 0, 2), {0, 0, 0}, {2, 2, 0});
  BoundaryPartition bc = BoundaryPartition::dobrushin_bc(d);
  for (int rep = 0; rep < 200; ++rep) {
    EdgeConfiguration cfg(d.n_real_edges);
    for (EdgeId e = 0; e < d.n_real_edges; ++e) cfg.set(e, rng.uniform() < 0.5);
    REQUIRE(cluster_count(d, cfg, bc) == cluster_count_bfs(d, cfg, bc));
  }
}

void weights() {
  Domain d = build_box(1);
  EdgeConfiguration closed(d.n_real_edges);
  EdgeConfiguration open = EdgeConfiguration::all_open(d.n_real_edges);
  MeasureSpec p1{1.0, 2.0, "free"};
  REQUIRE(weight(d, open, p1) > 0.0);
  REQUIRE(weight(d, closed, p1) == 0.0);
  MeasureSpec p0{0.0, 2.0, "free"};
  REQUIRE(weight(d, closed, p0) > 0.0);
  REQUIRE(weight(d, open, p0) == 0.0);
  // q = 1: q^k drops out, the weight is the Bernoulli product
  Rng rng(3, 0);
  MeasureSpec q1{0.37, 1.0, "free"};
  for (int rep = 0; rep < 50; ++rep) {
    EdgeConfiguration cfg(d.n_real_edges);
    for (EdgeId e = 0; e < d.n_real_edges; ++e) cfg.set(e, rng.uniform() < 0.5);
    int o = cfg.open_count();
    double bern = std::pow(0.37, o) * std::pow(0.63, d.n_real_edges - o);
    REQUIRE_NEAR(weight(d, cfg, q1), bern, 1e-15);
  }
  // log-space path agrees with the direct product
  MeasureSpec s{0.4, 1.7, "free"};
  EdgeConfiguration cfg(d.n_real_edges);
  cfg.set(0, true);
  cfg.set(5, true);
  REQUIRE_NEAR(std::exp(log_weight(d, cfg, s)), weight(d, cfg, s), 1e-12);
}

void critical_point_values() {
  REQUIRE_NEAR(critical_point(4.0), 2.0 / 3.0, 1e-15);
  REQUIRE_NEAR(critical_point(1.0), 0.5, 1e-15);
  REQUIRE_NEAR(critical_point(2.0), 0.585786437626905, 1e-14);
  REQUIRE_THROWS(critical_point(0.0), invalid_parameter);
  REQUIRE_THROWS(critical_point(-1.0), invalid_parameter);
}

void dual_parameter_values() {
  auto [p1, q1] = dual_parameters(0.5, 2.0);
  REQUIRE_NEAR(p1, 2.0 / 3.0, 1e-15);
  REQUIRE(q1 == 2.0);
  for (double q : {0.5, 1.0, 1.7, 2.0, 3.3, 4.0}) {
    double pc = critical_point(q);
    REQUIRE_NEAR(dual_parameters(pc, q).first, pc, 1e-14);
  }
  REQUIRE(dual_parameters(1.0, 2.0).first == 0.0);
  REQUIRE(dual_parameters(0.0, 2.0).first == 1.0);
  REQUIRE(dual_parameters(0.999999, 2.0).first < 1e-5);
  auto [ps, qs] = dual_parameters(0.31, 2.6);
  REQUIRE_NEAR(dual_parameters(ps, qs).first, 0.31, 1e-14);
}

void dual_config_involution() {
  Domain d = build_box(1);
  Rng rng(5, 0);
  for (int rep = 0; rep < 50; ++rep) {
    EdgeConfiguration cfg(d.n_real_edges);
    for (EdgeId e = 0; e < d.n_real_edges; ++e) cfg.set(e, rng.uniform() < 0.5);
    EdgeConfiguration dd = dual_configuration(dual_configuration(cfg));
    REQUIRE(dd == cfg);
    REQUIRE(dual_configuration(cfg).open_count() == d.n_real_edges - cfg.open_count());
  }
  EdgeConfiguration open = EdgeConfiguration::all_open(d.n_real_edges);
  REQUIRE(dual_configuration(open).open_count() == 0);
  REQUIRE_THROWS(dual_graph(build_universal_cover(1, 1)), unsupported_domain);
}

void dual_graph_structure() {
  Domain d = build_box(1);
  DualGraph g = dual_graph(d);
  REQUIRE((int)g.face_pos.size() == 4);  // one bounded face per primal face
  REQUIRE(g.n_vertices == 5);            // plus the outer vertex
  REQUIRE((int)g.edges.size() == d.n_real_edges);
}

// Euler bookkeeping: k*(omega*) = o(omega) - |V| + k(omega) + 1 on a planar box.
void euler_consistency() {
  Domain d = build_rect(0, 2, 0, 2);
  DualGraph g = dual_graph(d);
  for (uint64_t w = 0; w < (1ull << d.n_real_edges); ++w) {
    EdgeConfiguration cfg = EdgeConfiguration::from_word(d.n_real_edges, w);
    int32_t k = cluster_count(d, cfg, BoundaryPartition::free_bc());
    int32_t kstar = dual_cluster_count(g, dual_configuration(cfg));
    REQUIRE(kstar == cfg.open_count() - d.n_real_sites + k + 1);
  }
}

// Pushforward of the free measure under dualization equals the (p*,q) measure
// on the dual graph, the outer vertex realising the wired side.
void dual_distribution() {
  Domain d = build_rect(0, 2, 0, 2);
  DualGraph g = dual_graph(d);
  double q = 2.0, p = 0.44;
  auto [pstar, qstar] = dual_parameters(p, q);
  uint64_t total = 1ull << d.n_real_edges;

  std::vector<double> primal(total), dual(total);
  Accum z1, z2;
  for (uint64_t w = 0; w < total; ++w) {
    EdgeConfiguration cfg = EdgeConfiguration::from_word(d.n_real_edges, w);
    int32_t o = cfg.open_count();
    int32_t k = cluster_count(d, cfg, BoundaryPartition::free_bc());
    primal[w] = std::pow(p, o) * std::pow(1 - p, d.n_real_edges - o) * std::pow(q, k);
    z1.add(primal[w]);
    int32_t ks = dual_cluster_count(g, cfg);
    dual[w] = std::pow(pstar, o) * std::pow(1 - pstar, d.n_real_edges - o) * std::pow(qstar, ks);
    z2.add(dual[w]);
  }
  for (uint64_t w = 0; w < total; ++w) {
    EdgeConfiguration cfg = EdgeConfiguration::from_word(d.n_real_edges, w);
    uint64_t wstar = dual_configuration(cfg).word();
    REQUIRE_NEAR(primal[w] / z1.value(), dual[wstar] / z2.value(), 1e-12);
  }
}

double event_prob(const Domain& d, const MeasureSpec& spec,
                  const std::function<bool(const EdgeConfiguration&)>& ev) {
  return enumerate_expectation(d, spec,
                               [&](const EdgeConfiguration& c) { return ev(c) ? 1.0 : 0.0; });
}

void fkg_and_comparison() {
  Domain d = build_rect(0, 2, 0, 2);
  SiteId a = d.site_at({0, 0, 0}), b = d.site_at({2, 2, 0});
  auto connected_ab = [&](const EdgeConfiguration& c) {
    UnionFind uf(d.n_real_sites);
    for (EdgeId e = 0; e < d.n_real_edges; ++e)
      if (c.open(e)) uf.unite(d.edges[e].a, d.edges[e].b);
    return uf.find(a) == uf.find(b);
  };
  auto edge0 = [&](const EdgeConfiguration& c) { return c.open(0); };
  auto many_open = [&](const EdgeConfiguration& c) { return c.open_count() >= 7; };

  for (double q : {1.0, 1.5, 2.0, 4.0}) {
    for (double p : {0.4, critical_point(q)}) {
      MeasureSpec spec{p, q, "free"};
      double pab = event_prob(d, spec, connected_ab);
      double pe = event_prob(d, spec, edge0);
      double pm = event_prob(d, spec, many_open);
      auto both1 = [&](const EdgeConfiguration& c) { return connected_ab(c) && edge0(c); };
      auto both2 = [&](const EdgeConfiguration& c) { return many_open(c) && edge0(c); };
      REQUIRE(event_prob(d, spec, both1) >= pab * pe - 1e-12);
      REQUIRE(event_prob(d, spec, both2) >= pm * pe - 1e-12);
    }
  }

  Domain dd = with_dobrushin(build_rect(0, 2, 0, 2), {0, 0, 0}, {2, 2, 0});
  BoundaryPartition free = BoundaryPartition::free_bc();
  BoundaryPartition dob = BoundaryPartition::dobrushin_bc(dd);
  BoundaryPartition wired = BoundaryPartition::wired_bc(dd);
  REQUIRE(wired.dominates(dob, dd.n_real_sites));
  REQUIRE(dob.dominates(free, dd.n_real_sites));
  REQUIRE(!free.dominates(dob, dd.n_real_sites));

  for (double q : {1.0, 2.0, 3.0}) {
    double p = critical_point(q);
    auto prob_with = [&](const BoundaryPartition& bc) {
      Accum num, den;
      SiteId sa = dd.site_at({0, 0, 0}), sb = dd.site_at({2, 2, 0});
      for (uint64_t w = 0; w < (1ull << dd.n_real_edges); ++w) {
        EdgeConfiguration cfg = EdgeConfiguration::from_word(dd.n_real_edges, w);
        int o = cfg.open_count();
        double wt = std::pow(p, o) * std::pow(1 - p, dd.n_real_edges - o) *
                    std::pow(q, cluster_count(dd, cfg, bc));
        den.add(wt);
        UnionFind uf(dd.n_real_sites);
        for (EdgeId e = 0; e < dd.n_real_edges; ++e)
          if (cfg.open(e)) uf.unite(dd.edges[e].a, dd.edges[e].b);
        if (uf.find(sa) == uf.find(sb)) num.add(wt);
      }
      return num.value() / den.value();
    };
    double pf = prob_with(free), pd = prob_with(dob), pw = prob_with(wired);
    REQUIRE(pw >= pd - 1e-12);
    REQUIRE(pd >= pf - 1e-12);
  }
}

void measure_spec_json() {
  MeasureSpec s{0.25, 2.5, "dobrushin"};
  MeasureSpec t = MeasureSpec::from_json(s.to_json());
  REQUIRE(t.p == s.p && t.q == s.q && t.bc == s.bc);
  REQUIRE_THROWS(MeasureSpec::from_json("{\"p\":2.0,\"q\":1.0}"), invalid_parameter);
  REQUIRE_THROWS(MeasureSpec::from_json("{\"p\":0.5,\"q\":-1.0}"), invalid_parameter);
}

}  // namespace

int main() {
  return testkit::run_all({
      {"cluster_counts", cluster_counts},
      {"union_find_vs_bfs", union_find_vs_bfs},
      {"weights", weights},
      {"critical_point_values", critical_point_values},
      {"dual_parameter_values", dual_parameter_values},
      {"dual_config_involution", dual_config_involution},
      {"dual_graph_structure", dual_graph_structure},
      {"euler_consistency", euler_consistency},
      {"dual_distribution", dual_distribution},
      {"fkg_and_comparison", fkg_and_comparison},
      {"measure_spec_json", measure_spec_json},
  });
}
