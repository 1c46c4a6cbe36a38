#pragma once

#include <complex>
#include <optional>

#include "fklab/sampler.hpp"

namespace fklab {

using cplx = std::complex<double>;

struct complex_spin_unsupported : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct wrong_observable : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct excluded_site : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct undefined_vertex : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Spin sigma(q) solving sin(sigma pi/2) = sqrt(q)/2, real in [0,1] for q in [0,4].
struct Spin {
  double q = 0.0;
  double sigma = 0.0;
};
Spin spin(double q);

// Complex field on the domain's medial edges: the parafermionic observable F
// (or the q=4 observable G), exact or Monte Carlo.
struct ObservableField {
  enum class Mode { Exact, MonteCarlo };
  enum class Kind { F, G };
  Mode mode = Mode::Exact;
  Kind observable = Kind::F;
  double p = 0.0, q = 0.0, sigma = 0.0;
  std::vector<cplx> value;        // indexed like Domain::medial_edges
  std::vector<double> stderr_;    // per edge; zeros in exact mode
  std::vector<double> gamma_prob; // E[1_{e in gamma}]

  cplx at(const Domain& d, MedialEdge m) const {
    int32_t i = d.medial_idx(m);
    if (i < 0) throw undefined_vertex("ObservableField: medial edge outside the domain set");
    return value[i];
  }
  std::string to_csv(const Domain& d) const;  // edge, x, y, re, im, stderr
};

// Exact observables on a Dobrushin-type domain, from one enumeration pass.
// The pass is shared: build once, evaluate F/G at any (p,q).
class ExactObservables {
 public:
  ExactObservables(const Domain& d, JointCounts counts);

  // builds the enumeration (forced masks etc. via opts)
  static ExactObservables build(const Domain& d, PassOptions opts = {});

  const Domain& domain() const { return *d_; }
  const JointCounts& counts() const { return counts_; }

  ObservableField field_f(double p, double q) const;           // spin sigma(q)
  ObservableField field_f_spin(double p, double q, double sigma) const;
  ObservableField field_g(double p) const;                     // q = 4
  double gamma_probability(MedialEdge m, double p, double q) const;

 private:
  const Domain* d_;
  JointCounts counts_;
  std::vector<int32_t> conn_event_;  // boundary-face site -> event index
 public:
  // probability that a boundary-face site is connected to the wired arc
  double boundary_connectivity(SiteId x, double p, double q) const;
};

// F(v) = 1/2 sum of F over the four medial edges incident to the midpoint of
// lattice edge v.
cplx vertex_observable(const Domain& d, const ObservableField& f, EdgeId v);

// F(NW) - F(SE) - i [F(NE) - F(SW)] at an interior medial vertex.
cplx local_relation_residual(const Domain& d, const ObservableField& f, EdgeId v);

// Max |residual| over interior medial vertices (all four port edges in the
// domain's medial set).
double max_local_relation_residual(const Domain& d, const ObservableField& f);

// Discrete contour sum: sum over edges exiting the medial-vertex set V minus
// the sum over entering edges of e^{-i W(e,e_b)} F(e). Windings in quarter
// turns from `winding`, which must cover every edge crossing the contour.
cplx contour_sum(const Domain& d, const ObservableField& f, const std::vector<EdgeId>& vertex_set);

// Verifies the configuration-pair identity behind the local relation on every
// interior medial vertex: for each configuration omega and its edge flip
// s(omega),
//   NW_w + NW_s - SE_w - SE_s = i [NE_w + NE_s - SW_w - SW_s],
// plus the loop weight ratio 1/sqrt(q) and the +-pi/2 winding shifts of the
// canonical case, and e^{i sigma pi/2} - e^{-i sigma pi/2} = i sqrt(q).
struct ContributionTableReport {
  double max_pair_residual = 0.0;
  double max_ratio_error = 0.0;
  double scalar_identity_error = 0.0;
  int64_t n_pairs = 0;
  int64_t n_canonical = 0;
  bool pass(double tol) const {
    return max_pair_residual < tol && max_ratio_error < tol && scalar_identity_error < tol &&
           n_pairs > 0;
  }
};
ContributionTableReport contribution_table_check(const Domain& d, double q, double p,
                                                 int max_edges = 24);

// delta_x from the boundary-contour telescoping. Windings in quarter turns;
// w_ab is W(e_a,e_b) (6 quarters on slit domains, 8 on the universal cover).
double delta_coefficient(double sigma, int w_in, int w_out, int w_ab);
double delta_bound(double sigma, int w_ab);  // C = 1/|sin((1-sigma) w_ab/2)|
// q = 4 variant from the observable G: (w_out - w_in) / w_ab.
double delta_coefficient_q4(int w_in, int w_out, int w_ab);

struct BoundaryIdentityResult {
  double lhs = 0.0;        // sum of delta_x * phi(0 <-> x)
  double residual = 0.0;   // |lhs - 1|
  double stderr_ = 0.0;    // 0 in exact mode
  cplx precursor{0.0, 0.0};  // complex contour sum whose exact value is i
  double truncation_bound = 0.0;  // cover domains: missing |x3| > T mass bound
};

// Exact boundary identity on a slit domain (sum over all boundary faces).
BoundaryIdentityResult boundary_identity_exact(const ExactObservables& obs, double q);

// Monte Carlo boundary identity (slit or cover domains).
BoundaryIdentityResult boundary_identity_mc(const Domain& d, double q, const McOptions& opts);

// One-step martingale check: E over the law of the first exploration step of
// the observable in the reduced domain equals the observable in the full
// domain. Returns the max deviation over medial edges.
double martingale_check(const Domain& d, double q, double p, int max_edges = 24);

// Prop. 2 boundary law: max over boundary faces on the free arc of
// |F(e) - e^{i sigma W(e,e_b)} phi(x <-> wired arc)|, both sides exact.
double max_boundary_law_residual(const ExactObservables& obs, double p, double q);

}  // namespace fklab
