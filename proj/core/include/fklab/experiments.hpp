#pragma once

#include <string>

#include "fklab/observables.hpp"

namespace fklab {

struct ReportRow {
  std::string experiment;
  double q = 0.0, p = 0.0;
  int n = 0;
  std::string quantity;
  double value = 0.0;
  double stderr_ = 0.0;
  double tolerance = 0.0;
  int pass = -1;  // 1 pass, 0 fail, -1 informational
};

struct ExperimentReport {
  std::string name;
  std::string config_json = "{}";
  uint64_t seed = 0;
  double runtime_sec = 0.0;
  std::vector<ReportRow> rows;

  bool all_pass() const {
    for (const auto& r : rows)
      if (r.pass == 0) return false;
    return true;
  }
  std::string to_csv() const;   // experiment,q,p,n,quantity,value,stderr,tolerance,pass
  std::string to_json() const;
  void add(ReportRow r) { rows.push_back(std::move(r)); }
};

// --- verify: identity families on enumerable domains ------------------------

struct VerifyConfig {
  std::vector<double> qs = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5};
  std::vector<double> off_critical_ps = {0.45, 0.65};  // at q = 2
  std::vector<std::string> domains = {"dobrushin2", "dobrushin3", "slit1"};
  int max_exact_edges = 24;
  int threads = 0;
};

// Builds the named test domain: dobrushinN = [0,N]^2 box with a/b at opposite
// corners, slitN = S_N.
Domain named_domain(const std::string& name);

ExperimentReport run_verify_identities(const VerifyConfig& cfg, uint64_t seed);

// --- crossing: self-duality -------------------------------------------------

struct CrossingConfig {
  std::vector<double> qs = {1.0, 2.0};
  std::vector<double> qs_exact = {1.0, 1.5, 2.0, 3.0};
  int n_exact = 2;
  int n_mc = 8;
  int n_lemma = 4;
  McOptions mc{};
};

// Mixed crossing boundary conditions: left and right sides wired as two
// distinct classes, free elsewhere.
BoundaryPartition crossing_partition(const Domain& rect);

// Probability of an open top-bottom crossing (paths in omega only).
double crossing_probability_exact(const Domain& rect, double p, double q);

ExperimentReport run_crossing(const CrossingConfig& cfg, uint64_t seed);

// --- xi: divergence of the correlation length --------------------------------

struct XiConfig {
  double q = 1.0;
  std::vector<double> ps = {0.35, 0.42, 0.48};
  int n_max = 6;
  int box_half = 16;  // free box [-H,H]^2, H >= 2 n_max
  McOptions mc{};
};

struct FitResult {
  double slope = 0.0, slope_err = 0.0, intercept = 0.0, sse = 0.0;
  int n_points = 0;
};
// weighted least squares y = a + b x
FitResult linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& w);

ExperimentReport run_correlation_length(const XiConfig& cfg, uint64_t seed);

// --- chi: susceptibility / polynomial decay ----------------------------------

struct ChiConfig {
  double q = 1.0;
  int radius = 16;
  int box_half = 32;
  McOptions mc{};
};

ExperimentReport run_susceptibility(const ChiConfig& cfg, uint64_t seed);

// --- cover: universal-cover contour identity --------------------------------

struct CoverConfig {
  double q = 2.0;
  int n = 1;
  int T = 3;
  bool t_sensitivity = true;  // also run at T+1 and compare
  McOptions mc{};
};

ExperimentReport run_universal_cover(const CoverConfig& cfg, uint64_t seed);

// --- kappa -------------------------------------------------------------------

// Conjectured SLE parameter 4*pi / arccos(-sqrt(q)/2), report only.
double predicted_kappa(double q);

ExperimentReport run_kappa(const std::vector<double>& qs);

// --- scaling (exploratory) ----------------------------------------------------

struct ScalingConfig {
  double q = 2.0;
  int n = 8;
  McOptions mc{};
};

ExperimentReport run_scaling_comparison(const ScalingConfig& cfg, uint64_t seed);

}  // namespace fklab
