#pragma once

#include <complex>
#include <functional>

#include "fklab/enumerate.hpp"
#include "fklab/rng.hpp"

namespace fklab {

// Runtime measure: parameters plus a resolved boundary partition (which may be
// a custom one, e.g. the mixed crossing boundary conditions).
struct Measure {
  double p = 0.5;
  double q = 1.0;
  BoundaryPartition bc;

  static Measure of(const Domain& d, const MeasureSpec& spec) {
    return Measure{spec.p, spec.q, spec.partition(d)};
  }
};

struct ChainState {
  EdgeConfiguration config;
  uint64_t stream = 0;
  uint64_t steps = 0;
};

// Single-bond heat-bath dynamics: the edge is resampled from its conditional
// law, open with probability p / (p + (1-p) q^{1-kappa}) where kappa = 1 iff
// the endpoints are connected off this edge in omega ∪ xi.
class HeatBath {
 public:
  HeatBath(const Domain& d, const Measure& m);
  HeatBath(const Domain& d, const MeasureSpec& spec) : HeatBath(d, Measure::of(d, spec)) {}

  void step(ChainState& st, Rng& rng, EdgeId e) const;
  void sweep(ChainState& st, Rng& rng) const;
  bool connected_off_edge(const EdgeConfiguration& cfg, EdgeId e) const;
  double open_probability(bool connected_off) const {
    return connected_off ? p_ : p_ / (p_ + (1.0 - p_) * q_);
  }

 private:
  const Domain& d_;
  double p_, q_;
  std::vector<int32_t> class_of_;
  std::vector<std::vector<SiteId>> members_;
  mutable std::vector<int32_t> stack_;
  mutable std::vector<uint32_t> seen_;
  mutable std::vector<uint32_t> cls_seen_;
  mutable uint32_t epoch_ = 0;
};

// Chayes-Machta single-color cluster dynamics for real q >= 1: clusters of
// omega ∪ xi are activated independently with probability 1/q and the edges
// inside the active set are resampled as Bernoulli(p).
class ChayesMachta {
 public:
  ChayesMachta(const Domain& d, const Measure& m);
  ChayesMachta(const Domain& d, const MeasureSpec& spec) : ChayesMachta(d, Measure::of(d, spec)) {}

  void sweep(ChainState& st, Rng& rng) const;
  const std::vector<int32_t>& roots() const { return roots_; }
  const std::vector<uint8_t>& last_active() const { return active_; }

 private:
  const Domain& d_;
  double p_, q_;
  std::vector<std::pair<int32_t, int32_t>> wire_pairs_;
  mutable UnionFind uf_;
  mutable std::vector<int32_t> roots_;
  mutable std::vector<uint8_t> active_;
};

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  uint64_t n_samples = 0;
  double ess = 0.0;  // autocorrelation-adjusted effective sample size

  bool consistent_with(double truth, double n_sigma = 3.0) const {
    return std::abs(mean - truth) <= n_sigma * stderr_;
  }
};

enum class SamplerKind { HeatBathSingleEdge, ChayesMachtaCluster };

struct McOptions {
  uint64_t seed = 1;
  int n_chains = 8;
  uint64_t n_sweeps = 10000;   // post burn-in, per chain
  uint64_t burn_in = 1000;
  SamplerKind kind = SamplerKind::ChayesMachtaCluster;
};

// Deterministic multi-chain estimates. Chain c uses the rng stream (seed, c);
// chains are reduced in index order, so output is reproducible for a fixed
// (seed, n_chains, schedule) regardless of thread count. stderr comes from the
// across-chain spread, the effective sample size from per-chain batch means.
// `measure` is invoked concurrently from the chain threads and must not share
// mutable state across calls (use thread_local scratch).
std::vector<Estimate> estimate_vector(
    const Domain& d, const Measure& m, int n_outputs,
    const std::function<void(const EdgeConfiguration&, std::vector<double>&)>& measure,
    const McOptions& opts);

std::vector<Estimate> estimate_many(
    const Domain& d, const MeasureSpec& spec,
    const std::vector<std::function<double(const EdgeConfiguration&)>>& fs, const McOptions& opts);

Estimate estimate(const Domain& d, const MeasureSpec& spec,
                  const std::function<double(const EdgeConfiguration&)>& f, const McOptions& opts);

// Total-variation distance between the empirical configuration distribution
// and the exact one, for domains with at most 16 edges.
double sampler_tv_distance(const Domain& d, const MeasureSpec& spec, const McOptions& opts);

}  // namespace fklab
