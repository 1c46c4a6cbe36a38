#include "fklab/observables.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace fklab {

namespace {
constexpr double kHalfPi = M_PI / 2.0;
}

Spin spin(double q) {
  if (q < 0.0 || q > 4.0)
    throw complex_spin_unsupported("spin: sigma is complex outside q in [0,4]");
  Spin s;
  s.q = q;
  s.sigma = (2.0 / M_PI) * std::asin(std::sqrt(q) / 2.0);
  return s;
}

std::string ObservableField::to_csv(const Domain& d) const {
  std::ostringstream os;
  os.precision(17);
  os << "edge,x,y,re,im,stderr\n";
  for (size_t i = 0; i < value.size(); ++i) {
    auto mid = medial_midpoint(d, d.medial_edges[i]);
    os << i << ',' << mid[0] << ',' << mid[1] << ',' << value[i].real() << ',' << value[i].imag()
       << ',' << (stderr_.empty() ? 0.0 : stderr_[i]) << '\n';
  }
  return os.str();
}

ExactObservables::ExactObservables(const Domain& d, JointCounts counts)
    : d_(&d), counts_(std::move(counts)) {
  conn_event_.assign(d.n_real_sites, -1);
  for (int32_t i = 0; i < (int32_t)d.boundary_faces.size(); ++i)
    conn_event_[d.boundary_faces[i].site] = i;
}

ExactObservables ExactObservables::build(const Domain& d, PassOptions opts) {
  if (!d.dobrushin_like())
    throw unsupported_domain("ExactObservables: needs a Dobrushin-type domain");
  opts.trace_field = true;
  SiteId rep = d.wired_arc.empty() ? d.a : d.wired_arc.front();
  opts.events.clear();
  for (const auto& f : d.boundary_faces) opts.events.push_back(Event::connected(f.site, rep));
  BoundaryPartition bc = BoundaryPartition::dobrushin_bc(d);
  return ExactObservables(d, exact_pass(d, bc, opts));
}

ObservableField ExactObservables::field_f_spin(double p, double q, double sigma) const {
  auto cw = counts_.weights(p, q);
  ObservableField f;
  f.mode = ObservableField::Mode::Exact;
  f.observable = ObservableField::Kind::F;
  f.p = p;
  f.q = q;
  f.sigma = sigma;
  int32_t n = (int32_t)d_->medial_edges.size();
  f.value.resize(n);
  f.stderr_.assign(n, 0.0);
  f.gamma_prob.resize(n);
  for (int32_t i = 0; i < n; ++i) {
    f.value[i] = counts_.observable_f(i, sigma, cw);
    f.gamma_prob[i] = counts_.gamma_prob(i, cw);
  }
  return f;
}

ObservableField ExactObservables::field_f(double p, double q) const {
  return field_f_spin(p, q, spin(q).sigma);
}

ObservableField ExactObservables::field_g(double p) const {
  auto cw = counts_.weights(p, 4.0);
  ObservableField f;
  f.mode = ObservableField::Mode::Exact;
  f.observable = ObservableField::Kind::G;
  f.p = p;
  f.q = 4.0;
  f.sigma = 1.0;
  int32_t n = (int32_t)d_->medial_edges.size();
  f.value.resize(n);
  f.stderr_.assign(n, 0.0);
  f.gamma_prob.resize(n);
  for (int32_t i = 0; i < n; ++i) {
    f.value[i] = counts_.observable_g(i, cw);
    f.gamma_prob[i] = counts_.gamma_prob(i, cw);
  }
  return f;
}

double ExactObservables::gamma_probability(MedialEdge m, double p, double q) const {
  int32_t i = d_->medial_idx(m);
  if (i < 0) throw undefined_vertex("gamma_probability: edge outside the medial set");
  return counts_.gamma_prob(i, counts_.weights(p, q));
}

double ExactObservables::boundary_connectivity(SiteId x, double p, double q) const {
  if (x < 0 || x >= (SiteId)conn_event_.size() || conn_event_[x] < 0)
    throw invalid_parameter("boundary_connectivity: not a boundary-face site");
  return counts_.event_mean(conn_event_[x], counts_.weights(p, q));
}

cplx vertex_observable(const Domain& d, const ObservableField& f, EdgeId v) {
  MedialVertexPorts ports = d.ports(v);
  return 0.5 * (f.at(d, ports.nw) + f.at(d, ports.ne) + f.at(d, ports.sw) + f.at(d, ports.se));
}

cplx local_relation_residual(const Domain& d, const ObservableField& f, EdgeId v) {
  MedialVertexPorts ports = d.ports(v);
  cplx i{0.0, 1.0};
  return f.at(d, ports.nw) - f.at(d, ports.se) - i * (f.at(d, ports.ne) - f.at(d, ports.sw));
}

double max_local_relation_residual(const Domain& d, const ObservableField& f) {
  double worst = 0.0;
  for (EdgeId e = 0; e < d.n_real_edges; ++e)
    worst = std::max(worst, std::abs(local_relation_residual(d, f, e)));
  return worst;
}

namespace {

// Winding of every medial edge to e_b modulo 2*pi (4 quarter turns), by BFS
// over the turn relations; well defined on simply connected domains.
std::vector<int8_t> winding_mod4_table(const Domain& d) {
  size_t n_tok = 4 * d.site_pos.size();
  std::vector<int8_t> w(n_tok, -1);
  std::deque<uint32_t> queue;
  auto set_push = [&](uint32_t tok, int val) {
    val = ((val % 4) + 4) % 4;
    if (w[tok] < 0) {
      w[tok] = (int8_t)val;
      queue.push_back(tok);
    }
  };
  set_push(d.e_b.token(), 0);
  while (!queue.empty()) {
    uint32_t tok = queue.front();
    queue.pop_front();
    SiteId s = (SiteId)(tok >> 2);
    Quadrant q = Quadrant(tok & 3);
    int wm = w[tok];
    // successors: W(m) = turn + W(succ)
    set_push(((uint32_t)s << 2) | quadrant_left(q), wm - 1);
    SiteId nb = d.nbr_at[s][quadrant_head(q)];
    if (nb != kNoSite) set_push(((uint32_t)nb << 2) | quadrant_right(q), wm + 1);
    // predecessors: W(pred) = turn + W(m)
    for (int qp = 0; qp < 4; ++qp) {
      if (quadrant_left(Quadrant(qp)) == q)  // left predecessor on the same anchor
        set_push(((uint32_t)s << 2) | qp, wm + 1);
      if (quadrant_right(Quadrant(qp)) == q) {
        SiteId a = d.nbr_at[s][compass_opposite(quadrant_head(Quadrant(qp)))];
        if (a != kNoSite) set_push(((uint32_t)a << 2) | qp, wm - 1);
      }
    }
  }
  return w;
}

cplx phase_of_quarters(double factor, int quarters) {
  double ang = factor * quarters * kHalfPi;
  return {std::cos(ang), std::sin(ang)};
}

}  // namespace

cplx contour_sum(const Domain& d, const ObservableField& f, const std::vector<EdgeId>& vertex_set) {
  std::vector<bool> in_set(d.n_real_edges, false);
  for (EdgeId e : vertex_set) {
    if (e < 0 || e >= d.n_real_edges) throw invalid_parameter("contour_sum: bad vertex id");
    in_set[e] = true;
  }
  auto wtab = winding_mod4_table(d);
  auto in_v = [&](EdgeId e) { return e != kNoEdge && e < d.n_real_edges && in_set[e]; };
  Accum re, im;
  // Iterate the medial edges bordering the set: exiting edges have their tail
  // vertex inside, entering edges their head vertex inside.
  std::vector<bool> seen(d.medial_edges.size(), false);
  for (EdgeId v : vertex_set) {
    MedialVertexPorts ports = d.ports(v);
    for (const MedialEdge& m : {ports.nw, ports.ne, ports.sw, ports.se}) {
      int32_t idx = d.medial_idx(m);
      if (idx < 0 || seen[idx]) continue;
      seen[idx] = true;
      EdgeId tail = medial_tail_edge(d, m), head = medial_head_edge(d, m);
      bool tin = in_v(tail), hin = in_v(head);
      if (tin == hin) continue;  // interior (telescopes) or unrelated
      int sign = tin ? +1 : -1;  // tail in V: exiting; head in V: entering
      if (wtab[m.token()] < 0) throw unsupported_domain("contour_sum: winding table incomplete");
      cplx term = phase_of_quarters(-1.0, wtab[m.token()]) * f.value[idx];
      re.add(sign * term.real());
      im.add(sign * term.imag());
    }
  }
  return {re.value(), im.value()};
}

ContributionTableReport contribution_table_check(const Domain& d, double q, double p, int max_edges) {
  if (!d.dobrushin_like())
    throw unsupported_domain("contribution_table_check: needs a Dobrushin-type domain");
  if (d.n_real_edges > max_edges || d.n_real_edges > 24)
    throw too_large("contribution_table_check: domain too large for pair enumeration");
  double sigma = spin(q).sigma;
  double x_loop = p / (std::sqrt(q) * (1.0 - p));
  ContributionTableReport rep;
  rep.scalar_identity_error =
      std::abs(cplx(0, 1) * std::sqrt(q) -
               (std::exp(cplx(0, sigma * M_PI / 2)) - std::exp(cplx(0, -sigma * M_PI / 2))));

  BoundaryPartition bc = BoundaryPartition::dobrushin_bc(d);
  MeasureSpec spec{p, q, d.wired_arc.size() > 1 ? "dobrushin" : "free"};
  uint64_t total = 1ull << d.n_real_edges;

  // Z for normalized contributions
  Accum zacc;
  std::vector<double> wts(total);
  for (uint64_t wd = 0; wd < total; ++wd) {
    EdgeConfiguration cfg = EdgeConfiguration::from_word(d.n_real_edges, wd);
    int32_t o = cfg.open_count();
    int32_t k = cluster_count(d, cfg, bc);
    wts[wd] = std::pow(p, o) * std::pow(1.0 - p, d.n_real_edges - o) * std::pow(q, k);
    zacc.add(wts[wd]);
  }
  double Z = zacc.value();

  // per-configuration edge contribution e_w = P(w) e^{i sigma W} 1_{e in gamma}
  struct TraceInfo {
    std::vector<int8_t> on;      // per token
    std::vector<int32_t> wind;   // per token
  };
  auto trace_info = [&](const EdgeConfiguration& cfg, TraceInfo& ti) {
    ti.on.assign(4 * d.site_pos.size(), 0);
    ti.wind.assign(4 * d.site_pos.size(), 0);
    GammaTrace g = trace_gamma(d, cfg);
    size_t count = d.cyclic_gamma ? g.edges.size() - 1 : g.edges.size();
    for (size_t i = 0; i < count; ++i) {
      ti.on[g.edges[i].token()] = 1;
      ti.wind[g.edges[i].token()] = g.winding[i];
    }
  };
  auto contribution = [&](const TraceInfo& ti, double pw, MedialEdge m) -> cplx {
    if (!ti.on[m.token()]) return {0.0, 0.0};
    return pw * phase_of_quarters(sigma, ti.wind[m.token()]);
  };

  TraceInfo ti_w, ti_s;
  for (uint64_t wd = 0; wd < total; ++wd) {
    EdgeConfiguration cfg = EdgeConfiguration::from_word(d.n_real_edges, wd);
    trace_info(cfg, ti_w);
    double pw = wts[wd] / Z;
    for (EdgeId v = 0; v < d.n_real_edges; ++v) {
      if (!cfg.open(v)) continue;  // handle each pair once, from its open side
      EdgeConfiguration cfs = cfg;
      cfs.flip(v);
      uint64_t ws = cfs.word();
      double ps = wts[ws] / Z;
      trace_info(cfs, ti_s);
      MedialVertexPorts ports = d.ports(v);
      cplx nw = contribution(ti_w, pw, ports.nw) + contribution(ti_s, ps, ports.nw);
      cplx se = contribution(ti_w, pw, ports.se) + contribution(ti_s, ps, ports.se);
      cplx ne = contribution(ti_w, pw, ports.ne) + contribution(ti_s, ps, ports.ne);
      cplx sw = contribution(ti_w, pw, ports.sw) + contribution(ti_s, ps, ports.sw);
      double resid = std::abs(nw - se - cplx(0, 1) * (ne - sw));
      rep.max_pair_residual = std::max(rep.max_pair_residual, resid);
      rep.n_pairs++;

      // canonical proof-table case: vertical edge, gamma(omega) enters NW once
      bool nw_on = ti_w.on[ports.nw.token()], se_on = ti_w.on[ports.se.token()];
      if (d.edges[v].dir == N && nw_on && !se_on) {
        rep.n_canonical++;
        double ratio = wts[ws] / wts[wd];
        rep.max_ratio_error =
            std::max(rep.max_ratio_error, std::abs(ratio * x_loop * std::sqrt(q) - 1.0));
        // winding shifts of the proof table, exact in quarter turns
        int w_nw = ti_w.wind[ports.nw.token()];
        bool ok = ti_s.on[ports.nw.token()] && ti_s.wind[ports.nw.token()] == w_nw &&
                  ti_s.on[ports.ne.token()] && ti_s.wind[ports.ne.token()] == w_nw - 1 &&
                  ti_s.on[ports.se.token()] && ti_s.wind[ports.se.token()] == w_nw + 2 &&
                  ti_s.on[ports.sw.token()] && ti_s.wind[ports.sw.token()] == w_nw + 1 &&
                  ti_w.on[ports.sw.token()] && ti_w.wind[ports.sw.token()] == w_nw + 1;
        if (!ok) rep.max_pair_residual = std::max(rep.max_pair_residual, 1.0);
      }
    }
  }
  return rep;
}

double delta_coefficient(double sigma, int w_in, int w_out, int w_ab) {
  double sm1 = sigma - 1.0;
  double W_in = w_in * kHalfPi, W_out = w_out * kHalfPi, W_ab = w_ab * kHalfPi;
  double denom = std::sin(sm1 * W_ab / 2.0);
  if (std::abs(denom) < 1e-12)
    throw wrong_observable("delta_coefficient: sigma -> 1 is handled by the q=4 observable");
  return std::cos(sm1 * ((W_out + W_in) / 2.0 - W_ab / 2.0)) * std::sin(sm1 * (W_out - W_in) / 2.0) /
         denom;
}

double delta_bound(double sigma, int w_ab) {
  double denom = std::sin((1.0 - sigma) * (w_ab * kHalfPi) / 2.0);
  if (std::abs(denom) < 1e-12)
    throw wrong_observable("delta_bound: sigma -> 1 is handled by the q=4 observable");
  return 1.0 / std::abs(denom);
}

double delta_coefficient_q4(int w_in, int w_out, int w_ab) {
  return (double)(w_out - w_in) / (double)w_ab;
}

BoundaryIdentityResult boundary_identity_exact(const ExactObservables& obs, double q) {
  const Domain& d = obs.domain();
  if (d.kind != DomainKind::Slit)
    throw unsupported_domain("boundary_identity_exact: exact mode implemented for slit domains");
  double p = critical_point(q);
  BoundaryIdentityResult r;
  Accum lhs, pre_re, pre_im;
  bool q4 = std::abs(q - 4.0) < 1e-12;
  double sigma = q4 ? 1.0 : spin(q).sigma;
  cplx denom{0, 0};
  if (!q4)
    denom = 2.0 * std::sin((sigma - 1.0) * d.w_ab * kHalfPi / 2.0) *
            std::exp(cplx(0, (sigma - 1.0) * d.w_ab * kHalfPi / 2.0));
  for (const auto& f : d.boundary_faces) {
    if (f.site == d.a) continue;
    double phi = obs.boundary_connectivity(f.site, p, q);
    if (q4) {
      lhs.add(delta_coefficient_q4(f.w_in, f.w_out, d.w_ab) * phi);
    } else {
      lhs.add(delta_coefficient(sigma, f.w_in, f.w_out, d.w_ab) * phi);
      cplx bracket = (std::exp(cplx(0, (sigma - 1.0) * f.w_out * kHalfPi)) -
                      std::exp(cplx(0, (sigma - 1.0) * f.w_in * kHalfPi))) /
                     denom;
      pre_re.add(bracket.real() * phi);
      pre_im.add(bracket.imag() * phi);
    }
  }
  r.lhs = lhs.value();
  r.residual = std::abs(r.lhs - 1.0);
  r.precursor = q4 ? cplx(0.0, r.lhs) : cplx(pre_re.value(), pre_im.value());
  return r;
}

BoundaryIdentityResult boundary_identity_mc(const Domain& d, double q, const McOptions& opts) {
  if (d.kind != DomainKind::Slit && d.kind != DomainKind::Cover)
    throw unsupported_domain("boundary_identity_mc: slit or cover domains only");
  double p = critical_point(q);
  bool q4 = std::abs(q - 4.0) < 1e-12;
  double sigma = q4 ? 1.0 : spin(q).sigma;

  std::vector<double> delta(d.boundary_faces.size());
  for (size_t i = 0; i < d.boundary_faces.size(); ++i) {
    const auto& f = d.boundary_faces[i];
    delta[i] = (f.site == d.a) ? 0.0
               : q4 ? delta_coefficient_q4(f.w_in, f.w_out, d.w_ab)
                    : delta_coefficient(sigma, f.w_in, f.w_out, d.w_ab);
  }

  MeasureSpec spec{p, q, "free"};
  // one scalar functional: sum of delta_x over boundary sites in the cluster
  // of the origin (stderr then includes cross-site correlations)
  auto g = [&](const EdgeConfiguration& cfg, std::vector<double>& out) {
    thread_local std::vector<int32_t> mark;
    thread_local std::vector<SiteId> stack;
    mark.assign(d.n_real_sites, 0);
    stack.clear();
    stack.push_back(d.a);
    mark[d.a] = 1;
    while (!stack.empty()) {
      SiteId u = stack.back();
      stack.pop_back();
      for (int c = 0; c < 4; ++c) {
        EdgeId e = d.edge_at[u][c];
        if (e == kNoEdge || e >= d.n_real_edges || !cfg.open(e)) continue;
        SiteId v = d.nbr_at[u][c];
        if (!mark[v]) {
          mark[v] = 1;
          stack.push_back(v);
        }
      }
    }
    double s = 0.0;
    for (size_t i = 0; i < d.boundary_faces.size(); ++i)
      if (mark[d.boundary_faces[i].site]) s += delta[i];
    out[0] = s;
  };
  McOptions o = opts;
  o.kind = SamplerKind::HeatBathSingleEdge;  // cover graphs sample by heat bath
  if (d.kind == DomainKind::Slit) o.kind = opts.kind;
  auto est = estimate_vector(d, Measure::of(d, spec), 1, g, o)[0];

  BoundaryIdentityResult r;
  r.lhs = est.mean;
  r.residual = std::abs(est.mean - 1.0);
  r.stderr_ = est.stderr_;
  r.precursor = cplx(0.0, est.mean);
  if (d.kind == DomainKind::Cover) {
    // mass of the untruncated identity beyond |x3| <= T:
    // sum_{|x3|>T} C * (#wall sites per level) * r^{|x3|}, r = 1 - (1-p)^n
    double C = q4 ? 2.0 / (double)d.w_ab : delta_bound(sigma, d.w_ab);
    double rr = 1.0 - std::pow(1.0 - p, d.n);
    int per_level = 8 * d.n;
    r.truncation_bound = 2.0 * C * per_level * std::pow(rr, d.levels + 1) / (1.0 - rr);
  }
  return r;
}

double martingale_check(const Domain& d, double q, double p, int max_edges) {
  if (!d.dobrushin_like()) throw unsupported_domain("martingale_check: Dobrushin domain required");
  EdgeId eps1 = medial_head_edge(d, d.e_a);
  if (eps1 == kNoEdge || eps1 >= d.n_real_edges)
    throw unsupported_domain("martingale_check: first step is not a real edge");

  PassOptions base;
  base.max_exact_edges = max_edges;
  ExactObservables full = ExactObservables::build(d, base);
  ObservableField f_full = full.field_f(p, q);

  MeasureSpec spec{p, q, d.wired_arc.size() > 1 ? "dobrushin" : "free"};
  double p_open = enumerate_expectation(
      d, spec, [&](const EdgeConfiguration& c) { return c.open(eps1) ? 1.0 : 0.0; }, max_edges);

  int t = 0;
  MedialEdge start_open = medial_step(d, d.e_a, true, t);
  MedialEdge start_closed = medial_step(d, d.e_a, false, t);

  PassOptions po = base;
  po.forced_open = 1ull << eps1;
  po.start = start_open;
  ObservableField f_open = ExactObservables::build(d, po).field_f(p, q);

  PassOptions pc = base;
  pc.forced_closed = 1ull << eps1;
  pc.start = start_closed;
  ObservableField f_closed = ExactObservables::build(d, pc).field_f(p, q);

  int32_t skip = d.medial_idx(d.e_a);
  double worst = 0.0;
  for (int32_t i = 0; i < (int32_t)d.medial_edges.size(); ++i) {
    if (i == skip) continue;
    cplx lhs = p_open * f_open.value[i] + (1.0 - p_open) * f_closed.value[i];
    worst = std::max(worst, std::abs(lhs - f_full.value[i]));
  }
  return worst;
}

double max_boundary_law_residual(const ExactObservables& obs, double p, double q) {
  const Domain& d = obs.domain();
  double sigma = spin(q).sigma;
  ObservableField field = obs.field_f(p, q);
  std::vector<bool> wired(d.n_real_sites, false);
  for (SiteId s : d.wired_arc) wired[s] = true;
  double worst = 0.0;
  for (const auto& f : d.boundary_faces) {
    if (wired[f.site]) continue;  // Prop. 2 concerns the free arc
    double phi = obs.boundary_connectivity(f.site, p, q);
    for (auto [m, w] : {std::pair<MedialEdge, int>{f.e_in, f.w_in}, {f.e_out, f.w_out}}) {
      int32_t idx = d.medial_idx(m);
      if (idx < 0) continue;
      cplx expect = phase_of_quarters(sigma, w) * phi;
      worst = std::max(worst, std::abs(field.value[idx] - expect));
    }
  }
  return worst;
}

}  // namespace fklab
