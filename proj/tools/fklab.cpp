// fklab: FK percolation experiments from the command line.
//
//   fklab verify|crossing|xi|chi|cover|kappa|scaling --config <json> --seed <u64> --out <dir>
//
// Each subcommand runs one named experiment, writes <out>/<name>.csv and
// <out>/<name>.json, and exits 0 iff every non-exploratory assertion passed.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "fklab/experiments.hpp"

using nlohmann::json;

namespace {

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  json j;
  in >> j;
  return j;
}

void apply_mc(const json& j, fklab::McOptions& mc) {
  if (j.contains("sweeps")) mc.n_sweeps = j["sweeps"].get<uint64_t>();
  if (j.contains("burn_in")) mc.burn_in = j["burn_in"].get<uint64_t>();
  if (j.contains("chains")) mc.n_chains = j["chains"].get<int>();
  if (j.contains("sampler")) {
    std::string s = j["sampler"];
    if (s == "heat-bath") mc.kind = fklab::SamplerKind::HeatBathSingleEdge;
    else if (s == "chayes-machta") mc.kind = fklab::SamplerKind::ChayesMachtaCluster;
    else throw std::runtime_error("unknown sampler " + s);
  }
}

int emit(const fklab::ExperimentReport& rep, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream csv(out_dir + "/" + rep.name + ".csv");
    csv << rep.to_csv();
  }
  {
    std::ofstream js(out_dir + "/" + rep.name + ".json");
    js << rep.to_json() << '\n';
  }
  int failed = 0, passed = 0, info = 0;
  for (const auto& r : rep.rows) {
    if (r.pass == 1) ++passed;
    else if (r.pass == 0) ++failed;
    else ++info;
  }
  std::cout << rep.name << ": " << passed << " passed, " << failed << " failed, " << info
            << " informational rows (" << rep.runtime_sec << " s)\n";
  for (const auto& r : rep.rows)
    if (r.pass == 0)
      std::cout << "  FAIL " << r.experiment << " " << r.quantity << " q=" << r.q << " p=" << r.p
                << " n=" << r.n << " value=" << r.value << " tol=" << r.tolerance << "\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"planar FK percolation: parafermionic observables and experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "fklab-out";
  uint64_t seed = 1;
  app.add_option("--config", config_path, "JSON config file")->capture_default_str();
  app.add_option("--seed", seed, "master seed")->capture_default_str();
  app.add_option("--out", out_dir, "output directory")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "exact identity families on enumerable domains");
  auto* crossing = app.add_subcommand("crossing", "self-dual crossing probabilities");
  auto* xi = app.add_subcommand("xi", "correlation length growth below p_c");
  auto* chi = app.add_subcommand("chi", "susceptibility partial sums at p_c");
  auto* cover = app.add_subcommand("cover", "universal-cover contour identity");
  auto* kappa = app.add_subcommand("kappa", "conjectured SLE parameter table");
  auto* scaling = app.add_subcommand("scaling", "exploratory scaling-limit comparison");

  CLI11_PARSE(app, argc, argv);

  try {
    json j = load_config(config_path);
    if (verify->parsed()) {
      fklab::VerifyConfig cfg;
      if (j.contains("qs")) cfg.qs = j["qs"].get<std::vector<double>>();
      if (j.contains("off_critical_ps"))
        cfg.off_critical_ps = j["off_critical_ps"].get<std::vector<double>>();
      if (j.contains("domains")) cfg.domains = j["domains"].get<std::vector<std::string>>();
      if (j.contains("max_exact_edges")) cfg.max_exact_edges = j["max_exact_edges"];
      return emit(fklab::run_verify_identities(cfg, seed), out_dir);
    }
    if (crossing->parsed()) {
      fklab::CrossingConfig cfg;
      if (j.contains("qs")) cfg.qs = j["qs"].get<std::vector<double>>();
      if (j.contains("n_exact")) cfg.n_exact = j["n_exact"];
      if (j.contains("n_mc")) cfg.n_mc = j["n_mc"];
      if (j.contains("n_lemma")) cfg.n_lemma = j["n_lemma"];
      apply_mc(j, cfg.mc);
      return emit(fklab::run_crossing(cfg, seed), out_dir);
    }
    if (xi->parsed()) {
      int rc = 0;
      std::vector<fklab::XiConfig> cfgs;
      if (j.contains("runs")) {
        for (const auto& run : j["runs"]) {
          fklab::XiConfig cfg;
          cfg.q = run.at("q");
          if (run.contains("ps")) cfg.ps = run["ps"].get<std::vector<double>>();
          if (run.contains("n_max")) cfg.n_max = run["n_max"];
          if (run.contains("box_half")) cfg.box_half = run["box_half"];
          apply_mc(j, cfg.mc);
          cfgs.push_back(cfg);
        }
      } else {
        fklab::XiConfig c1;
        c1.q = 1.0;
        c1.ps = {0.35, 0.42, 0.48};
        fklab::XiConfig c2;
        c2.q = 2.0;
        c2.ps = {0.40, 0.50, 0.57};
        apply_mc(j, c1.mc);
        apply_mc(j, c2.mc);
        cfgs = {c1, c2};
      }
      fklab::ExperimentReport all;
      all.name = "xi";
      all.seed = seed;
      for (auto& cfg : cfgs) {
        auto rep = fklab::run_correlation_length(cfg, seed);
        for (auto& r : rep.rows) all.rows.push_back(r);
        all.runtime_sec += rep.runtime_sec;
        all.config_json = rep.config_json;
      }
      return emit(all, out_dir);
    }
    if (chi->parsed()) {
      std::vector<double> qs = {1.0, 2.0};
      if (j.contains("qs")) qs = j["qs"].get<std::vector<double>>();
      fklab::ExperimentReport all;
      all.name = "chi";
      all.seed = seed;
      for (double q : qs) {
        fklab::ChiConfig cfg;
        cfg.q = q;
        if (j.contains("radius")) cfg.radius = j["radius"];
        if (j.contains("box_half")) cfg.box_half = j["box_half"];
        apply_mc(j, cfg.mc);
        auto rep = fklab::run_susceptibility(cfg, seed);
        for (auto& r : rep.rows) all.rows.push_back(r);
        all.runtime_sec += rep.runtime_sec;
        all.config_json = rep.config_json;
      }
      return emit(all, out_dir);
    }
    if (cover->parsed()) {
      std::vector<double> qs = {2.0, 3.5};
      if (j.contains("qs")) qs = j["qs"].get<std::vector<double>>();
      fklab::ExperimentReport all;
      all.name = "cover";
      all.seed = seed;
      for (double q : qs) {
        fklab::CoverConfig cfg;
        cfg.q = q;
        if (j.contains("n")) cfg.n = j["n"];
        if (j.contains("T")) cfg.T = j["T"];
        if (j.contains("t_sensitivity")) cfg.t_sensitivity = j["t_sensitivity"];
        apply_mc(j, cfg.mc);
        auto rep = fklab::run_universal_cover(cfg, seed);
        for (auto& r : rep.rows) all.rows.push_back(r);
        all.runtime_sec += rep.runtime_sec;
        all.config_json = rep.config_json;
      }
      return emit(all, out_dir);
    }
    if (kappa->parsed()) {
      std::vector<double> qs = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
      if (j.contains("qs")) qs = j["qs"].get<std::vector<double>>();
      return emit(fklab::run_kappa(qs), out_dir);
    }
    if (scaling->parsed()) {
      fklab::ScalingConfig cfg;
      if (j.contains("q")) cfg.q = j["q"];
      if (j.contains("n")) cfg.n = j["n"];
      apply_mc(j, cfg.mc);
      return emit(fklab::run_scaling_comparison(cfg, seed), out_dir);
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 2;
}
