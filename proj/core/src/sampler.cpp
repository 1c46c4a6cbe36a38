#include "fklab/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <thread>

namespace fklab {

HeatBath::HeatBath(const Domain& d, const Measure& m) : d_(d), p_(m.p), q_(m.q) {
  if (q_ <= 0.0) throw invalid_parameter("HeatBath: q must be positive");
  class_of_.assign(d.n_real_sites, -1);
  members_.resize(m.bc.classes.size());
  for (int32_t c = 0; c < (int32_t)m.bc.classes.size(); ++c) {
    members_[c] = m.bc.classes[c];
    for (SiteId s : m.bc.classes[c]) class_of_[s] = c;
  }
  seen_.assign(d.n_real_sites, 0);
  cls_seen_.assign(std::max<size_t>(1, m.bc.classes.size()), 0);
}

bool HeatBath::connected_off_edge(const EdgeConfiguration& cfg, EdgeId e) const {
  SiteId src = d_.edges[e].a, dst = d_.edges[e].b;
  ++epoch_;
  stack_.clear();
  stack_.push_back(src);
  seen_[src] = epoch_;
  while (!stack_.empty()) {
    SiteId u = stack_.back();
    stack_.pop_back();
    if (u == dst) return true;
    int32_t c = class_of_[u];
    if (c >= 0 && cls_seen_[c] != epoch_) {
      cls_seen_[c] = epoch_;
      for (SiteId v : members_[c])
        if (seen_[v] != epoch_) {
          seen_[v] = epoch_;
          stack_.push_back(v);
        }
    }
    for (int dir = 0; dir < 4; ++dir) {
      EdgeId f = d_.edge_at[u][dir];
      if (f == kNoEdge || f >= d_.n_real_edges || f == e || !cfg.open(f)) continue;
      SiteId v = d_.nbr_at[u][dir];
      if (seen_[v] != epoch_) {
        seen_[v] = epoch_;
        stack_.push_back(v);
      }
    }
  }
  return false;
}

void HeatBath::step(ChainState& st, Rng& rng, EdgeId e) const {
  bool kappa = connected_off_edge(st.config, e);
  st.config.set(e, rng.uniform() < open_probability(kappa));
  ++st.steps;
}

void HeatBath::sweep(ChainState& st, Rng& rng) const {
  for (EdgeId e = 0; e < d_.n_real_edges; ++e) step(st, rng, e);
}

ChayesMachta::ChayesMachta(const Domain& d, const Measure& m)
    : d_(d), p_(m.p), q_(m.q), uf_(d.n_real_sites) {
  if (q_ < 1.0) throw invalid_parameter("ChayesMachta: cluster dynamics requires q >= 1");
  for (const auto& cls : m.bc.classes)
    for (size_t i = 1; i < cls.size(); ++i) wire_pairs_.push_back({cls[0], cls[i]});
  roots_.assign(d.n_real_sites, 0);
  active_.assign(d.n_real_sites, 0);
}

void ChayesMachta::sweep(ChainState& st, Rng& rng) const {
  uf_.reset(d_.n_real_sites);
  for (auto [x, y] : wire_pairs_) uf_.unite(x, y);
  for (EdgeId e = 0; e < d_.n_real_edges; ++e)
    if (st.config.open(e)) uf_.unite(d_.edges[e].a, d_.edges[e].b);
  for (SiteId s = 0; s < d_.n_real_sites; ++s) roots_[s] = uf_.find(s);
  double inv_q = 1.0 / q_;  // every cluster is active at q = 1
  for (SiteId s = 0; s < d_.n_real_sites; ++s)
    if (roots_[s] == s) active_[s] = rng.uniform() < inv_q;
  for (EdgeId e = 0; e < d_.n_real_edges; ++e) {
    if (active_[roots_[d_.edges[e].a]] && active_[roots_[d_.edges[e].b]])
      st.config.set(e, rng.uniform() < p_);
  }
  ++st.steps;
}

namespace {

struct ChainResult {
  Accum sum;
  Accum sum_sq;
  uint64_t n = 0;
  std::vector<double> batch_means;
};

void run_chain(const Domain& d, const Measure& m, const McOptions& opts, int chain,
               const std::function<void(const EdgeConfiguration&, std::vector<double>&)>& measure,
               int n_fs, std::vector<ChainResult>& out) {
  Rng rng(opts.seed, (uint64_t)chain);
  ChainState st;
  st.config = EdgeConfiguration(d.n_real_edges);
  st.stream = (uint64_t)chain;
  for (EdgeId e = 0; e < d.n_real_edges; ++e) st.config.set(e, rng.uniform() < 0.5);

  HeatBath hb(d, m);
  std::unique_ptr<ChayesMachta> cm;
  if (opts.kind == SamplerKind::ChayesMachtaCluster) cm = std::make_unique<ChayesMachta>(d, m);

  auto one_sweep = [&]() {
    if (cm) cm->sweep(st, rng);
    else hb.sweep(st, rng);
  };
  for (uint64_t i = 0; i < opts.burn_in; ++i) one_sweep();

  const int n_batches = 32;
  uint64_t batch_len = std::max<uint64_t>(1, opts.n_sweeps / n_batches);
  std::vector<Accum> batch(n_fs);
  std::vector<uint64_t> batch_n(n_fs, 0);
  std::vector<double> vals(n_fs, 0.0);
  for (uint64_t i = 0; i < opts.n_sweeps; ++i) {
    one_sweep();
    measure(st.config, vals);
    for (int j = 0; j < n_fs; ++j) {
      double v = vals[j];
      out[j].sum.add(v);
      out[j].sum_sq.add(v * v);
      out[j].n++;
      batch[j].add(v);
      batch_n[j]++;
      if (batch_n[j] == batch_len) {
        out[j].batch_means.push_back(batch[j].value() / (double)batch_len);
        batch[j] = Accum{};
        batch_n[j] = 0;
      }
    }
  }
}

}  // namespace

std::vector<Estimate> estimate_vector(
    const Domain& d, const Measure& m, int n_outputs,
    const std::function<void(const EdgeConfiguration&, std::vector<double>&)>& measure,
    const McOptions& opts) {
  int n_fs = n_outputs;
  int n_chains = std::max(1, opts.n_chains);
  std::vector<std::vector<ChainResult>> per_chain(n_chains, std::vector<ChainResult>(n_fs));

  unsigned hw = std::thread::hardware_concurrency();
  int n_threads = std::min<int>(n_chains, hw ? (int)hw : 1);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int c = next.fetch_add(1);
      if (c >= n_chains) break;
      run_chain(d, m, opts, c, measure, n_fs, per_chain[c]);
    }
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // combine in chain order
  std::vector<Estimate> out(n_fs);
  for (int j = 0; j < n_fs; ++j) {
    Accum total, total_sq;
    uint64_t n = 0;
    std::vector<double> chain_means;
    std::vector<double> all_batches;
    for (int c = 0; c < n_chains; ++c) {
      const ChainResult& r = per_chain[c][j];
      total.add(r.sum.value());
      total_sq.add(r.sum_sq.value());
      n += r.n;
      if (r.n) chain_means.push_back(r.sum.value() / (double)r.n);
      for (double b : r.batch_means) all_batches.push_back(b);
    }
    Estimate e;
    e.n_samples = n;
    e.mean = total.value() / (double)n;
    if (chain_means.size() > 1) {
      Accum var;
      for (double cm : chain_means) var.add((cm - e.mean) * (cm - e.mean));
      double v = var.value() / (double)(chain_means.size() - 1);
      e.stderr_ = std::sqrt(std::max(0.0, v) / (double)chain_means.size());
    } else if (all_batches.size() > 1) {
      Accum var;
      double bm = 0;
      for (double b : all_batches) bm += b;
      bm /= (double)all_batches.size();
      for (double b : all_batches) var.add((b - bm) * (b - bm));
      double v = var.value() / (double)(all_batches.size() - 1);
      e.stderr_ = std::sqrt(std::max(0.0, v) / (double)all_batches.size());
    }
    e.ess = (double)n;
    if (all_batches.size() > 1 && n > 1) {
      double naive_var = total_sq.value() / (double)n - e.mean * e.mean;
      double bm = 0;
      for (double b : all_batches) bm += b;
      bm /= (double)all_batches.size();
      double bvar = 0;
      for (double b : all_batches) bvar += (b - bm) * (b - bm);
      bvar /= (double)(all_batches.size() - 1);
      uint64_t batch_len = std::max<uint64_t>(1, opts.n_sweeps / 32);
      double per_sample_var = bvar * (double)batch_len;
      if (per_sample_var > 0 && naive_var > 0)
        e.ess = std::min((double)n, (double)n * naive_var / per_sample_var);
    }
    out[j] = e;
  }
  return out;
}

std::vector<Estimate> estimate_many(
    const Domain& d, const MeasureSpec& spec,
    const std::vector<std::function<double(const EdgeConfiguration&)>>& fs, const McOptions& opts) {
  return estimate_vector(
      d, Measure::of(d, spec), (int)fs.size(),
      [&](const EdgeConfiguration& cfg, std::vector<double>& out) {
        for (size_t j = 0; j < fs.size(); ++j) out[j] = fs[j](cfg);
      },
      opts);
}

Estimate estimate(const Domain& d, const MeasureSpec& spec,
                  const std::function<double(const EdgeConfiguration&)>& f, const McOptions& opts) {
  return estimate_many(d, spec, {f}, opts)[0];
}

double sampler_tv_distance(const Domain& d, const MeasureSpec& spec, const McOptions& opts) {
  if (d.n_real_edges > 16) throw too_large("sampler_tv_distance: domain too large");
  std::vector<double> exact = exact_distribution(d, spec, 16);
  Measure m = Measure::of(d, spec);

  int n_chains = std::max(1, opts.n_chains);
  std::vector<std::vector<uint64_t>> hists(n_chains, std::vector<uint64_t>(exact.size(), 0));
  unsigned hw = std::thread::hardware_concurrency();
  int n_threads = std::min<int>(n_chains, hw ? (int)hw : 1);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int c = next.fetch_add(1);
      if (c >= n_chains) break;
      Rng rng(opts.seed, (uint64_t)c);
      ChainState st;
      st.config = EdgeConfiguration(d.n_real_edges);
      for (EdgeId e = 0; e < d.n_real_edges; ++e) st.config.set(e, rng.uniform() < 0.5);
      HeatBath hb(d, m);
      std::unique_ptr<ChayesMachta> cm;
      if (opts.kind == SamplerKind::ChayesMachtaCluster) cm = std::make_unique<ChayesMachta>(d, m);
      for (uint64_t i = 0; i < opts.burn_in; ++i) {
        if (cm) cm->sweep(st, rng);
        else hb.sweep(st, rng);
      }
      for (uint64_t i = 0; i < opts.n_sweeps; ++i) {
        if (cm) cm->sweep(st, rng);
        else hb.sweep(st, rng);
        hists[c][st.config.word()]++;
      }
    }
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<uint64_t> hist(exact.size(), 0);
  uint64_t total = 0;
  for (int c = 0; c < n_chains; ++c)
    for (size_t w = 0; w < hist.size(); ++w) hist[w] += hists[c][w];
  for (uint64_t h : hist) total += h;

  double tv = 0.0;
  for (size_t w = 0; w < hist.size(); ++w)
    tv += std::abs((double)hist[w] / (double)total - exact[w]);
  return 0.5 * tv;
}

}  // namespace fklab
