#include "fklab/observables.hpp"

#include <algorithm>

#include "testkit.hpp"

using namespace fklab;

namespace {

Domain dobrushin2() { return with_dobrushin(build_rect(0, 2, 0, 2), {0, 0, 0}, {2, 2, 0}); }

void spin_values() {
  REQUIRE_NEAR(spin(2.0).sigma, 0.5, 1e-15);
  REQUIRE_NEAR(spin(3.0).sigma, 2.0 / 3.0, 1e-14);
  REQUIRE_NEAR(spin(4.0).sigma, 1.0, 1e-15);
  REQUIRE_NEAR(spin(1.0).sigma, 1.0 / 3.0, 1e-14);
  REQUIRE_THROWS(spin(4.5), complex_spin_unsupported);
  REQUIRE_THROWS(spin(-0.1), complex_spin_unsupported);
  // the two closed forms for sigma agree on a dense grid
  for (int i = 0; i <= 400; ++i) {
    double q = 4.0 * i / 400.0;
    double s1 = spin(q).sigma;
    double s2 = 1.0 - (2.0 / M_PI) * std::acos(std::sqrt(q) / 2.0);
    REQUIRE_NEAR(s1, s2, 1e-12);
    REQUIRE_NEAR(std::sin(s1 * M_PI / 2.0), std::sqrt(q) / 2.0, 1e-12);
  }
}

// Brute-force oracle for F on a small Dobrushin domain: direct sum over all
// configurations using weight() and trace_gamma(), independent of the count
// tensors of the enumeration engine.
ObservableField field_by_brute_force(const Domain& d, double p, double q, double sigma) {
  MeasureSpec spec{p, q, d.wired_arc.size() > 1 ? "dobrushin" : "free"};
  std::vector<cplx> sum(d.medial_edges.size(), cplx{0, 0});
  double z = 0.0;
  for (uint64_t w = 0; w < (1ull << d.n_real_edges); ++w) {
    EdgeConfiguration cfg = EdgeConfiguration::from_word(d.n_real_edges, w);
    double wt = weight(d, cfg, spec);
    z += wt;
    GammaTrace g = trace_gamma(d, cfg);
    size_t count = d.cyclic_gamma ? g.edges.size() - 1 : g.edges.size();
    for (size_t i = 0; i < count; ++i) {
      int32_t idx = d.medial_idx(g.edges[i]);
      if (idx < 0) continue;
      double ang = sigma * g.winding[i] * (M_PI / 2.0);
      sum[idx] += wt * cplx{std::cos(ang), std::sin(ang)};
    }
  }
  ObservableField f;
  f.p = p;
  f.q = q;
  f.sigma = sigma;
  f.value.resize(sum.size());
  for (size_t i = 0; i < sum.size(); ++i) f.value[i] = sum[i] / z;
  return f;
}

void observable_f_against_oracle() {
  // 1x2 Dobrushin domain at q = 2, p = p_c: engine vs direct sum
  Domain d = with_dobrushin(build_rect(0, 1, 0, 2), {0, 0, 0}, {1, 2, 0});
  double q = 2.0, p = critical_point(q);
  ExactObservables obs = ExactObservables::build(d);
  ObservableField f = obs.field_f(p, q);
  ObservableField oracle = field_by_brute_force(d, p, q, spin(q).sigma);
  for (size_t i = 0; i < f.value.size(); ++i)
    REQUIRE_NEAR(std::abs(f.value[i] - oracle.value[i]), 0.0, 1e-13);

  // F(e_b) = 1 for several (p,q)
  int32_t ib = d.medial_idx(d.e_b);
  for (double qq : {0.5, 1.0, 2.0, 3.5}) {
    for (double pp : {0.3, critical_point(qq), 0.7}) {
      ObservableField g = obs.field_f(pp, qq);
      REQUIRE_NEAR(std::abs(g.value[ib] - cplx(1.0, 0.0)), 0.0, 1e-13);
    }
  }
  // |F(e)| <= P(e in gamma) <= 1
  for (size_t i = 0; i < f.value.size(); ++i) {
    REQUIRE(std::abs(f.value[i]) <= f.gamma_prob[i] + 1e-13);
    REQUIRE(f.gamma_prob[i] <= 1.0 + 1e-13);
  }
}

void vertex_observable_cases() {
  Domain d = dobrushin2();
  ExactObservables obs = ExactObservables::build(d);
  ObservableField f = obs.field_f(critical_point(2.0), 2.0);
  for (EdgeId e = 0; e < d.n_real_edges; ++e) {
    MedialVertexPorts p = d.ports(e);
    cplx expect = 0.5 * (f.value[d.medial_idx(p.nw)] + f.value[d.medial_idx(p.ne)] +
                         f.value[d.medial_idx(p.sw)] + f.value[d.medial_idx(p.se)]);
    REQUIRE_NEAR(std::abs(vertex_observable(d, f, e) - expect), 0.0, 1e-15);
  }
  // values (1, i, -1, -i) average to zero
  ObservableField synth = f;
  MedialVertexPorts p0 = d.ports(0);
  synth.value[d.medial_idx(p0.nw)] = {1, 0};
  synth.value[d.medial_idx(p0.ne)] = {0, 1};
  synth.value[d.medial_idx(p0.sw)] = {-1, 0};
  synth.value[d.medial_idx(p0.se)] = {0, -1};
  REQUIRE_NEAR(std::abs(vertex_observable(d, synth, 0)), 0.0, 1e-15);
  REQUIRE_THROWS(d.ports(d.n_real_edges + 1), invalid_parameter);
}

void local_relation() {
  // 3x3 Dobrushin box (24 edges), q = 2 at p_c: residuals vanish
  Domain d = with_dobrushin(build_rect(0, 3, 0, 3), {0, 0, 0}, {3, 3, 0});
  ExactObservables obs = ExactObservables::build(d);
  {
    ObservableField f = obs.field_f(critical_point(2.0), 2.0);
    REQUIRE(max_local_relation_residual(d, f) < 1e-12);
  }
  {
    ObservableField f = obs.field_f(0.45, 2.0);
    REQUIRE(max_local_relation_residual(d, f) > 1e-6);
  }
  // q = 4, sigma = 1: the relation holds for every p
  for (double p : {0.4, 2.0 / 3.0, 0.8}) {
    ObservableField f = obs.field_f_spin(p, 4.0, 1.0);
    REQUIRE(max_local_relation_residual(d, f) < 1e-12);
  }
}

void q4_observable() {
  Domain d = dobrushin2();
  ExactObservables obs = ExactObservables::build(d);
  ObservableField g = obs.field_g(2.0 / 3.0);
  REQUIRE(max_local_relation_residual(d, g) < 1e-12);
  REQUIRE_NEAR(std::abs(g.value[d.medial_idx(d.e_b)]), 0.0, 1e-14);  // W = 0 kills G(e_b)
  ObservableField g_off = obs.field_g(0.5);
  REQUIRE(max_local_relation_residual(d, g_off) > 1e-6);
}

void contribution_table() {
  Domain d = dobrushin2();
  for (double q : {1.5, 2.0, 3.0}) {
    auto rep = contribution_table_check(d, q, critical_point(q));
    REQUIRE(rep.n_pairs > 0);
    REQUIRE(rep.n_canonical > 0);
    REQUIRE(rep.scalar_identity_error < 1e-14);
    REQUIRE(rep.max_ratio_error < 1e-12);
    REQUIRE(rep.max_pair_residual < 1e-14);
  }
}

void contour_sums() {
  Domain d = build_slit_domain(1);
  ExactObservables obs = ExactObservables::build(d);
  double q = 2.0, p = critical_point(q);
  ObservableField f = obs.field_f(p, q);
  for (EdgeId v = 0; v < d.n_real_edges; ++v) {
    cplx cs = contour_sum(d, f, {v});
    REQUIRE_NEAR(std::abs(cs), std::abs(local_relation_residual(d, f, v)), 1e-12);
    REQUIRE_NEAR(std::abs(cs), 0.0, 1e-12);
  }
  std::vector<EdgeId> all_v;
  for (EdgeId v = 0; v < d.n_real_edges; ++v) all_v.push_back(v);
  REQUIRE_NEAR(std::abs(contour_sum(d, f, all_v)), 0.0, 1e-10);
  ObservableField f_off = obs.field_f(0.45, q);
  REQUIRE(std::abs(contour_sum(d, f_off, all_v)) > 1e-6);

  // telescoping is algebraic: it holds for arbitrary fields
  Rng rng(9, 4);
  ObservableField rand_f = f;
  for (auto& v : rand_f.value) v = {rng.uniform() - 0.5, rng.uniform() - 0.5};
  cplx whole = contour_sum(d, rand_f, all_v);
  cplx pieces{0, 0};
  for (EdgeId v : all_v) pieces += contour_sum(d, rand_f, {v});
  REQUIRE_NEAR(std::abs(whole - pieces), 0.0, 1e-12);
}

void delta_coefficients() {
  // slit-wall value at sigma = 1/2 (q = 2)
  double del = delta_coefficient(0.5, 4, 5, 3);
  REQUIRE_NEAR(del, -0.29289321881345254, 1e-12);
  double del_low = delta_coefficient(0.5, -2, -1, 3);
  REQUIRE_NEAR(del, del_low, 1e-14);  // both slit sides give the same value
  for (double q : {1.0, 1.5, 2.0, 2.9}) {
    double sigma = spin(q).sigma;
    double C = delta_bound(sigma, 3);
    for (int w_in = -6; w_in <= 8; ++w_in)
      REQUIRE(std::abs(delta_coefficient(sigma, w_in, w_in + 1, 3)) <= C + 1e-12);
  }
  for (double q : {1.0, 2.0, 3.0}) {
    double sigma = spin(q).sigma;
    REQUIRE(delta_coefficient(sigma, 4, 5, 3) <= 1e-15);
    REQUIRE(delta_coefficient(sigma, -2, -1, 3) <= 1e-15);
  }
  REQUIRE_THROWS(delta_coefficient(1.0, 4, 5, 3), wrong_observable);
  REQUIRE_NEAR(delta_coefficient_q4(4, 5, 4), 0.25, 1e-15);

  // x = 0 constant: 1 - e^{i(sigma-1)3pi/2} = -2i sin[(sigma-1)3pi/4] e^{i(sigma-1)3pi/4}
  for (int i = 1; i < 40; ++i) {
    double sigma = i / 40.0;
    cplx lhs = cplx(1, 0) - std::exp(cplx(0, (sigma - 1) * 1.5 * M_PI));
    cplx rhs = -2.0 * cplx(0, 1) * std::sin((sigma - 1) * 0.75 * M_PI) *
               std::exp(cplx(0, (sigma - 1) * 0.75 * M_PI));
    REQUIRE_NEAR(std::abs(lhs - rhs), 0.0, 1e-14);
  }
}

void boundary_identity_slit1() {
  Domain d = build_slit_domain(1);
  ExactObservables obs = ExactObservables::build(d);
  for (double q : {1.0, 2.0, 2.5, 2.9}) {
    auto r = boundary_identity_exact(obs, q);
    REQUIRE(r.residual < 1e-10);
    REQUIRE_NEAR(std::abs(r.precursor - cplx(0, 1)), 0.0, 1e-10);
  }
  auto r4 = boundary_identity_exact(obs, 4.0);
  REQUIRE(r4.residual < 1e-10);
}

void boundary_law() {
  for (double q : {1.0, 2.0, 3.0}) {
    double p = critical_point(q);
    {
      Domain d = dobrushin2();
      ExactObservables obs = ExactObservables::build(d);
      REQUIRE(max_boundary_law_residual(obs, p, q) < 1e-12);
    }
    {
      Domain d = build_slit_domain(1);
      ExactObservables obs = ExactObservables::build(d);
      REQUIRE(max_boundary_law_residual(obs, p, q) < 1e-12);
    }
  }
}

void martingale() {
  Domain d = dobrushin2();
  REQUIRE(martingale_check(d, 2.0, critical_point(2.0)) < 1e-10);
  REQUIRE(martingale_check(d, 1.0, critical_point(1.0)) < 1e-10);
}

void mc_boundary_identity() {
  Domain d = build_slit_domain(1);
  McOptions mc;
  mc.seed = 5;
  mc.n_chains = 4;
  mc.n_sweeps = 20000;
  auto r = boundary_identity_mc(d, 2.0, mc);
  REQUIRE(r.stderr_ > 0.0);
  REQUIRE(r.residual <= 4.0 * r.stderr_ + 1e-3);
}

void csv_export() {
  Domain d = build_slit_domain(1);
  ExactObservables obs = ExactObservables::build(d);
  ObservableField f = obs.field_f(0.5, 1.0);
  std::string csv = f.to_csv(d);
  REQUIRE(csv.rfind("edge,x,y,re,im,stderr", 0) == 0);
  size_t rows = std::count(csv.begin(), csv.end(), '\n');
  REQUIRE(rows == d.medial_edges.size() + 1);
}

}  // namespace

int main() {
  return testkit::run_all({
      {"spin_values", spin_values},
      {"observable_f_against_oracle", observable_f_against_oracle},
      {"vertex_observable_cases", vertex_observable_cases},
      {"local_relation", local_relation},
      {"q4_observable", q4_observable},
      {"contribution_table", contribution_table},
      {"contour_sums", contour_sums},
      {"delta_coefficients", delta_coefficients},
      {"boundary_identity_slit1", boundary_identity_slit1},
      {"boundary_law", boundary_law},
      {"martingale", martingale},
      {"mc_boundary_identity", mc_boundary_identity},
      {"csv_export", csv_export},
  });
}
