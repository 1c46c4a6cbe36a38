#include "fklab/experiments.hpp"

#include "json.hpp"
#include "testkit.hpp"

using namespace fklab;

namespace {

// The adopted convention (left/right wired as two distinct classes, crossings
// by open paths only) gives exactly 1/2 on [0,n] x [0,n+1] at the self-dual
// point. This pins down the open boundary-condition question.
void crossing_exact_half() {
  for (int n : {1, 2}) {
    Domain rect = build_rect(0, n, 0, n + 1);
    for (double q : {1.0, 1.5, 2.0, 3.0, 4.0}) {
      double pr = crossing_probability_exact(rect, critical_point(q), q);
      REQUIRE_NEAR(pr, 0.5, 1e-12);
    }
    // off the self-dual point the probability moves away from 1/2
    double off = crossing_probability_exact(rect, 0.4, 2.0);
    REQUIRE(std::abs(off - 0.5) > 1e-3);
  }
}

void verify_experiment_small() {
  VerifyConfig cfg;
  cfg.qs = {1.0, 2.0};
  cfg.domains = {"dobrushin2", "slit1"};
  ExperimentReport rep = run_verify_identities(cfg, 1);
  REQUIRE(rep.all_pass());
  REQUIRE(!rep.rows.empty());
  // csv schema
  std::string csv = rep.to_csv();
  REQUIRE(csv.rfind("experiment,q,p,n,quantity,value,stderr,tolerance,pass", 0) == 0);
  auto js = nlohmann::json::parse(rep.to_json());
  REQUIRE(js["all_pass"].get<bool>());
  REQUIRE(js["rows"].size() == rep.rows.size());
}

void crossing_experiment_small() {
  CrossingConfig cfg;
  cfg.qs = {1.0};
  cfg.qs_exact = {1.0, 2.0};
  cfg.n_mc = 4;
  cfg.n_lemma = 2;
  cfg.mc.n_chains = 4;
  cfg.mc.n_sweeps = 4000;
  cfg.mc.burn_in = 500;
  ExperimentReport rep = run_crossing(cfg, 3);
  REQUIRE(rep.all_pass());
}

void xi_experiment_small() {
  XiConfig cfg;
  cfg.q = 1.0;
  cfg.ps = {0.30, 0.45};
  cfg.n_max = 4;
  cfg.box_half = 8;
  cfg.mc.n_chains = 4;
  cfg.mc.n_sweeps = 8000;
  cfg.mc.burn_in = 500;
  ExperimentReport rep = run_correlation_length(cfg, 7);
  // the exact enumeration row and the xi ordering must hold even at this size
  bool saw_exact = false, saw_gap = false;
  for (const auto& r : rep.rows) {
    if (r.quantity == "supermultiplicativity_exact_margin") {
      saw_exact = true;
      REQUIRE(r.pass == 1);
    }
    if (r.quantity == "xi_increasing_gap") {
      saw_gap = true;
      REQUIRE(r.pass == 1);  // p = 0.30 vs 0.45 is far apart: clean separation
    }
  }
  REQUIRE(saw_exact && saw_gap);
}

void chi_experiment_small() {
  ChiConfig cfg;
  cfg.q = 1.0;
  cfg.radius = 6;
  cfg.box_half = 12;
  cfg.mc.n_chains = 4;
  cfg.mc.n_sweeps = 6000;
  cfg.mc.burn_in = 500;
  ExperimentReport rep = run_susceptibility(cfg, 9);
  for (const auto& r : rep.rows) {
    if (r.quantity == "S_R_monotone") REQUIRE(r.pass == 1);
    if (r.quantity == "power_preferred_over_exponential") REQUIRE(r.pass == 1);
    if (r.quantity == "alpha_hat") REQUIRE(r.pass == 1);
  }
}

void cover_experiment_small() {
  CoverConfig cfg;
  cfg.q = 2.0;
  cfg.n = 1;
  cfg.T = 2;
  cfg.t_sensitivity = false;
  cfg.mc.n_chains = 2;
  cfg.mc.n_sweeps = 4000;
  cfg.mc.burn_in = 500;
  ExperimentReport rep = run_universal_cover(cfg, 11);
  for (const auto& r : rep.rows)
    if (r.quantity == "cover_identity_residual") REQUIRE(r.pass == 1);
}

void kappa_values() {
  REQUIRE_NEAR(predicted_kappa(0.0), 8.0, 1e-13);
  REQUIRE_NEAR(predicted_kappa(1.0), 6.0, 1e-13);
  REQUIRE_NEAR(predicted_kappa(4.0), 4.0, 1e-13);
  REQUIRE_NEAR(predicted_kappa(2.0), 4.0 * M_PI / std::acos(-std::sqrt(2.0) / 2.0), 1e-15);
  REQUIRE_THROWS(predicted_kappa(4.2), invalid_parameter);
  ExperimentReport rep = run_kappa({0.0, 1.0, 2.0, 4.0});
  REQUIRE(rep.all_pass());
}

void scaling_report_emitted() {
  ScalingConfig cfg;
  cfg.q = 2.0;
  cfg.n = 4;
  cfg.mc.n_chains = 2;
  cfg.mc.n_sweeps = 3000;
  cfg.mc.burn_in = 300;
  ExperimentReport rep = run_scaling_comparison(cfg, 13);
  bool saw_corr = false;
  for (const auto& r : rep.rows) {
    REQUIRE(r.pass == -1);  // exploratory: no gates
    if (r.quantity == "modulus_correlation") saw_corr = true;
  }
  REQUIRE(saw_corr);
}

void deterministic_reports() {
  CrossingConfig cfg;
  cfg.qs = {1.0};
  cfg.qs_exact = {};
  cfg.n_mc = 3;
  cfg.n_lemma = 2;
  cfg.mc.n_chains = 2;
  cfg.mc.n_sweeps = 1000;
  cfg.mc.burn_in = 100;
  ExperimentReport a = run_crossing(cfg, 21);
  ExperimentReport b = run_crossing(cfg, 21);
  REQUIRE(a.rows.size() == b.rows.size());
  for (size_t i = 0; i < a.rows.size(); ++i) {
    REQUIRE(a.rows[i].value == b.rows[i].value);
    REQUIRE(a.rows[i].stderr_ == b.rows[i].stderr_);
  }
}

}  // namespace

int main() {
  return testkit::run_all({
      {"crossing_exact_half", crossing_exact_half},
      {"verify_experiment_small", verify_experiment_small},
      {"crossing_experiment_small", crossing_experiment_small},
      {"xi_experiment_small", xi_experiment_small},
      {"chi_experiment_small", chi_experiment_small},
      {"cover_experiment_small", cover_experiment_small},
      {"kappa_values", kappa_values},
      {"scaling_report_emitted", scaling_report_emitted},
      {"deterministic_reports", deterministic_reports},
  });
}
