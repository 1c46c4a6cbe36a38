#include "fklab/enumerate.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <thread>

namespace fklab {

namespace {

struct FlatDomain {
  int32_t n_sites = 0, n_real_sites = 0, n_real_edges = 0;
  std::vector<int32_t> edge_at;   // [site*4 + compass]
  std::vector<int32_t> nbr_at;    // [site*4 + compass]
  std::vector<int32_t> medial_index;
  std::vector<std::pair<int32_t, int32_t>> edge_ends;

  explicit FlatDomain(const Domain& d) {
    n_sites = (int32_t)d.site_pos.size();
    n_real_sites = d.n_real_sites;
    n_real_edges = d.n_real_edges;
    edge_at.resize(4 * n_sites);
    nbr_at.resize(4 * n_sites);
    for (int32_t s = 0; s < n_sites; ++s)
      for (int c = 0; c < 4; ++c) {
        edge_at[4 * s + c] = d.edge_at[s][c];
        nbr_at[4 * s + c] = d.nbr_at[s][c];
      }
    medial_index = d.medial_index;
    edge_ends.resize(d.edges.size());
    for (size_t e = 0; e < d.edges.size(); ++e) edge_ends[e] = {d.edges[e].a, d.edges[e].b};
  }
};

constexpr uint8_t kHead[4] = {N, W, S, E};      // per quadrant NE,NW,SW,SE
constexpr uint8_t kRight[4] = {SE, NE, NW, SW};
constexpr uint8_t kLeft[4] = {NW, SW, SE, NE};

struct Tracer {
  const FlatDomain& fd;
  uint32_t start_token = 0, end_token = 0;
  bool cyclic = false;
  std::vector<uint32_t> toks;
  std::vector<int8_t> turns;

  Tracer(const FlatDomain& f, MedialEdge start, MedialEdge end, bool cyc)
      : fd(f), start_token(start.token()), end_token(end.token()), cyclic(cyc) {
    toks.reserve(512);
    turns.reserve(512);
  }

  // returns false on guard overflow (construction bug)
  bool run(uint64_t bits) {
    toks.clear();
    turns.clear();
    uint32_t tok = start_token;
    size_t guard = 16 * (size_t)fd.n_sites + 64;
    for (size_t steps = 0;; ++steps) {
      if (steps > guard) return false;
      toks.push_back(tok);
      if (tok == end_token && (steps > 0 || !cyclic)) break;
      uint32_t anchor = tok >> 2, quad = tok & 3;
      int32_t e = fd.edge_at[4 * anchor + kHead[quad]];
      bool open = e >= 0 && (e >= fd.n_real_edges || ((bits >> e) & 1));
      if (open) {
        tok = (uint32_t)fd.nbr_at[4 * anchor + kHead[quad]] * 4u + kRight[quad];
        turns.push_back(-1);
      } else {
        tok = anchor * 4u + kLeft[quad];
        turns.push_back(+1);
      }
      if (cyclic && tok == end_token) {
        toks.push_back(tok);
        break;
      }
    }
    return true;
  }
};

}  // namespace

JointCounts exact_pass(const Domain& d, const BoundaryPartition& bc, const PassOptions& opts) {
  if (d.n_real_edges > 62) throw too_large("exact_pass: more than 62 edges");
  int n_forced = __builtin_popcountll(opts.forced_open | opts.forced_closed);
  int n_free = d.n_real_edges - n_forced;
  if (opts.forced_open & opts.forced_closed)
    throw invalid_parameter("exact_pass: an edge is forced both open and closed");
  if (n_free > opts.max_exact_edges)
    throw too_large("exact_pass: " + std::to_string(n_free) + " free edges exceed the exact-mode cap of " +
                    std::to_string(opts.max_exact_edges));
  if (opts.trace_field && !d.dobrushin_like())
    throw unsupported_domain("exact_pass: field tracing needs a Dobrushin-type domain");

  FlatDomain fd(d);
  std::vector<int32_t> free_pos;
  for (EdgeId e = 0; e < d.n_real_edges; ++e)
    if (!((opts.forced_open >> e) & 1) && !((opts.forced_closed >> e) & 1)) free_pos.push_back(e);

  JointCounts jc;
  jc.n_edges = d.n_real_edges;
  jc.k_max = d.n_real_sites;
  jc.n_cells = (jc.n_edges + 1) * (jc.k_max + 1);
  jc.n_events = (int32_t)opts.events.size();
  jc.w_clamp = opts.w_clamp;
  jc.n_field = opts.trace_field ? (int32_t)d.medial_edges.size() : 0;
  jc.n_configs = 1ull << n_free;

  // partition wirings, applied before the per-configuration unions
  std::vector<std::pair<int32_t, int32_t>> wire_pairs;
  for (const auto& cls : bc.classes)
    for (size_t i = 1; i < cls.size(); ++i) wire_pairs.push_back({cls[0], cls[i]});

  MedialEdge start = opts.start.value_or(d.e_a);

  int n_threads = opts.threads > 0 ? opts.threads : (int)std::thread::hardware_concurrency();
  if (n_threads < 1) n_threads = 1;
  uint64_t total = jc.n_configs;
  if (total < 4096) n_threads = 1;

  std::atomic<bool> failed{false};
  std::vector<JointCounts> parts((size_t)n_threads);

  auto work = [&](int t) {
    JointCounts& p = parts[t];
    p = jc;  // copy shape
    p.z.assign(p.n_cells, 0);
    p.ev.assign((size_t)p.n_cells * std::max(1, (int)p.n_events), 0);
    if (p.n_field) p.field.assign((size_t)p.n_cells * p.plane(), 0);
    p.w_seen_min = INT32_MAX;
    p.w_seen_max = INT32_MIN;

    uint64_t lo = total / n_threads * t + std::min<uint64_t>(t, total % n_threads);
    uint64_t hi = lo + total / n_threads + (t < (int)(total % n_threads) ? 1 : 0);

    std::vector<int32_t> parent0(fd.n_real_sites);
    for (int32_t i = 0; i < fd.n_real_sites; ++i) parent0[i] = i;
    {
      UnionFind uf0(fd.n_real_sites);
      for (auto [x, y] : wire_pairs) uf0.unite(x, y);
      for (int32_t i = 0; i < fd.n_real_sites; ++i) parent0[i] = uf0.find(i);
    }
    bool need_raw = false;
    for (const Event& evt : opts.events)
      if (evt.kind == Event::Crossing) need_raw = true;
    need_raw = need_raw && !wire_pairs.empty();

    std::vector<int32_t> parent(fd.n_real_sites);
    std::vector<int32_t> parent_raw(fd.n_real_sites);
    std::vector<uint8_t> flags(std::max(1, (int)p.n_events));
    Tracer tracer(fd, start, d.e_b, d.cyclic_gamma);
    std::vector<int32_t> windings;
    windings.reserve(512);

    auto find = [&](int32_t x) {
      while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
      }
      return x;
    };
    // connectivity in omega alone (crossing events ignore the boundary wiring)
    auto find_raw = [&](int32_t x) {
      while (parent_raw[x] != x) {
        parent_raw[x] = parent_raw[parent_raw[x]];
        x = parent_raw[x];
      }
      return x;
    };

    for (uint64_t cfg = lo; cfg < hi; ++cfg) {
      uint64_t bits = opts.forced_open;
      {
        uint64_t c = cfg;
        while (c) {
          int j = __builtin_ctzll(c);
          bits |= 1ull << free_pos[j];
          c &= c - 1;
        }
      }
      int32_t o = (int32_t)__builtin_popcountll(bits);
      std::memcpy(parent.data(), parent0.data(), sizeof(int32_t) * fd.n_real_sites);
      if (need_raw)
        for (int32_t i = 0; i < fd.n_real_sites; ++i) parent_raw[i] = i;
      int32_t k = fd.n_real_sites;
      {
        // the wired classes already collapsed k by their sizes
        for (const auto& cls : bc.classes) k -= (int32_t)cls.size() - 1;
        uint64_t m = bits;
        while (m) {
          int e = __builtin_ctzll(m);
          m &= m - 1;
          int32_t ra = find(fd.edge_ends[e].first);
          int32_t rb = find(fd.edge_ends[e].second);
          if (ra != rb) {
            parent[ra < rb ? rb : ra] = ra < rb ? ra : rb;
            --k;
          }
          if (need_raw) {
            int32_t sa = find_raw(fd.edge_ends[e].first);
            int32_t sb = find_raw(fd.edge_ends[e].second);
            if (sa != sb) parent_raw[sa < sb ? sb : sa] = sa < sb ? sa : sb;
          }
        }
      }
      size_t cell = (size_t)o * (jc.k_max + 1) + k;
      p.z[cell]++;

      for (int32_t i = 0; i < p.n_events; ++i) {
        const Event& evt = opts.events[i];
        uint8_t v = 0;
        switch (evt.kind) {
          case Event::Connected: v = find(evt.a) == find(evt.b); break;
          case Event::EdgeOpen: v = (bits >> evt.edge) & 1; break;
          case Event::Crossing: {
            uint64_t roots = 0;
            if (need_raw) {
              for (SiteId s : evt.set_a) roots |= 1ull << find_raw(s);
              for (SiteId s : evt.set_b)
                if ((roots >> find_raw(s)) & 1) {
                  v = 1;
                  break;
                }
            } else {
              for (SiteId s : evt.set_a) roots |= 1ull << find(s);
              for (SiteId s : evt.set_b)
                if ((roots >> find(s)) & 1) {
                  v = 1;
                  break;
                }
            }
            break;
          }
          case Event::And: v = flags[evt.lhs] & flags[evt.rhs]; break;
        }
        flags[i] = v;
        p.ev[cell * p.n_events + i] += v;
      }

      if (p.n_field) {
        if (!tracer.run(bits)) {
          failed.store(true);
          return;
        }
        size_t L = tracer.toks.size();
        windings.assign(L, 0);
        int w = 0;
        for (size_t i = L; i-- > 1;) {
          windings[i] = w;
          w += tracer.turns[i - 1];
        }
        windings[0] = w;
        uint64_t* plane_ptr = p.field.data() + cell * p.plane();
        size_t count = d.cyclic_gamma ? L - 1 : L;
        for (size_t i = 0; i < count; ++i) {
          int32_t idx = fd.medial_index[tracer.toks[i]];
          if (idx < 0) continue;  // corner stitch outside the medial edge set
          int wi = windings[i];
          p.w_seen_min = std::min(p.w_seen_min, wi);
          p.w_seen_max = std::max(p.w_seen_max, wi);
          if (wi < -p.w_clamp || wi > p.w_clamp) {
            failed.store(true);
            return;
          }
          plane_ptr[(size_t)idx * p.n_w() + (wi + p.w_clamp)]++;
        }
      }
    }
  };

  if (n_threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw unsupported_domain("exact_pass: gamma trace failed or winding clamp exceeded");

  jc.z.assign(jc.n_cells, 0);
  jc.ev.assign((size_t)jc.n_cells * std::max(1, (int)jc.n_events), 0);
  if (jc.n_field) jc.field.assign((size_t)jc.n_cells * jc.plane(), 0);
  jc.w_seen_min = INT32_MAX;
  jc.w_seen_max = INT32_MIN;
  for (int t = 0; t < n_threads; ++t) {
    const JointCounts& p = parts[t];
    if (p.z.empty()) continue;
    for (size_t i = 0; i < jc.z.size(); ++i) jc.z[i] += p.z[i];
    for (size_t i = 0; i < jc.ev.size(); ++i) jc.ev[i] += p.ev[i];
    for (size_t i = 0; i < jc.field.size(); ++i) jc.field[i] += p.field[i];
    jc.w_seen_min = std::min(jc.w_seen_min, p.w_seen_min);
    jc.w_seen_max = std::max(jc.w_seen_max, p.w_seen_max);
  }
  return jc;
}

JointCounts::CellWeights JointCounts::weights(double p, double q) const {
  CellWeights cw;
  cw.w.assign(n_cells, 0.0);
  std::vector<double> pw(n_edges + 1), cz(n_edges + 1), qk(k_max + 1);
  pw[0] = cz[0] = 1.0;
  for (int i = 1; i <= n_edges; ++i) {
    pw[i] = pw[i - 1] * p;
    cz[i] = cz[i - 1] * (1.0 - p);
  }
  qk[0] = 1.0;
  for (int i = 1; i <= k_max; ++i) qk[i] = qk[i - 1] * q;
  Accum zacc;
  for (int o = 0; o <= n_edges; ++o)
    for (int k = 0; k <= k_max; ++k) {
      size_t cell = (size_t)o * (k_max + 1) + k;
      if (!z[cell]) continue;
      cw.w[cell] = pw[o] * cz[n_edges - o] * qk[k];
      zacc.add((double)z[cell] * cw.w[cell]);
    }
  cw.Z = zacc.value();
  return cw;
}

double JointCounts::event_mean(int32_t i, const CellWeights& cw) const {
  Accum acc;
  for (int32_t cell = 0; cell < n_cells; ++cell) {
    uint64_t c = ev[(size_t)cell * n_events + i];
    if (c) acc.add((double)c * cw.w[cell]);
  }
  return acc.value() / cw.Z;
}

double JointCounts::gamma_prob(int32_t medial_idx, const CellWeights& cw) const {
  Accum acc;
  for (int32_t cell = 0; cell < n_cells; ++cell) {
    if (!z[cell]) continue;
    const uint64_t* row = field.data() + (size_t)cell * plane() + (size_t)medial_idx * n_w();
    uint64_t tot = 0;
    for (int32_t w = 0; w < n_w(); ++w) tot += row[w];
    if (tot) acc.add((double)tot * cw.w[cell]);
  }
  return acc.value() / cw.Z;
}

std::complex<double> JointCounts::observable_f(int32_t medial_idx, double sigma,
                                               const CellWeights& cw) const {
  std::vector<std::complex<double>> phase(n_w());
  for (int32_t i = 0; i < n_w(); ++i) {
    double ang = sigma * (i - w_clamp) * (M_PI / 2.0);
    phase[i] = {std::cos(ang), std::sin(ang)};
  }
  Accum re, im;
  for (int32_t cell = 0; cell < n_cells; ++cell) {
    if (!z[cell]) continue;
    const uint64_t* row = field.data() + (size_t)cell * plane() + (size_t)medial_idx * n_w();
    std::complex<double> s{0.0, 0.0};
    bool any = false;
    for (int32_t w = 0; w < n_w(); ++w)
      if (row[w]) {
        s += (double)row[w] * phase[w];
        any = true;
      }
    if (any) {
      re.add(s.real() * cw.w[cell]);
      im.add(s.imag() * cw.w[cell]);
    }
  }
  return {re.value() / cw.Z, im.value() / cw.Z};
}

std::complex<double> JointCounts::observable_g(int32_t medial_idx, const CellWeights& cw) const {
  Accum re, im;
  for (int32_t cell = 0; cell < n_cells; ++cell) {
    if (!z[cell]) continue;
    const uint64_t* row = field.data() + (size_t)cell * plane() + (size_t)medial_idx * n_w();
    std::complex<double> s{0.0, 0.0};
    bool any = false;
    for (int32_t w = 0; w < n_w(); ++w)
      if (row[w]) {
        double ang = (w - w_clamp) * (M_PI / 2.0);
        s += (double)row[w] * ang * std::complex<double>{std::cos(ang), std::sin(ang)};
        any = true;
      }
    if (any) {
      re.add(s.real() * cw.w[cell]);
      im.add(s.imag() * cw.w[cell]);
    }
  }
  return {re.value() / cw.Z, im.value() / cw.Z};
}

void JointCounts::save(const std::string& path) const {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("JointCounts::save: cannot open " + path);
  uint64_t header[10] = {0x464b4c414231ull, (uint64_t)n_edges, (uint64_t)k_max, (uint64_t)n_cells,
                         (uint64_t)n_field, (uint64_t)n_events, (uint64_t)(int64_t)w_clamp,
                         (uint64_t)(int64_t)w_seen_min, (uint64_t)(int64_t)w_seen_max, n_configs};
  std::fwrite(header, sizeof(header), 1, f);
  auto dump = [&](const std::vector<uint64_t>& v) {
    uint64_t n = v.size();
    std::fwrite(&n, sizeof(n), 1, f);
    if (n) std::fwrite(v.data(), sizeof(uint64_t), n, f);
  };
  dump(z);
  dump(ev);
  dump(field);
  std::fclose(f);
}

std::optional<JointCounts> JointCounts::load(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) return std::nullopt;
  uint64_t header[10];
  if (std::fread(header, sizeof(header), 1, f) != 1 || header[0] != 0x464b4c414231ull) {
    std::fclose(f);
    return std::nullopt;
  }
  JointCounts jc;
  jc.n_edges = (int32_t)header[1];
  jc.k_max = (int32_t)header[2];
  jc.n_cells = (int32_t)header[3];
  jc.n_field = (int32_t)header[4];
  jc.n_events = (int32_t)header[5];
  jc.w_clamp = (int)(int64_t)header[6];
  jc.w_seen_min = (int)(int64_t)header[7];
  jc.w_seen_max = (int)(int64_t)header[8];
  jc.n_configs = header[9];
  auto slurp = [&](std::vector<uint64_t>& v) -> bool {
    uint64_t n = 0;
    if (std::fread(&n, sizeof(n), 1, f) != 1) return false;
    v.resize(n);
    return n == 0 || std::fread(v.data(), sizeof(uint64_t), n, f) == n;
  };
  bool ok = slurp(jc.z) && slurp(jc.ev) && slurp(jc.field);
  std::fclose(f);
  if (!ok) return std::nullopt;
  return jc;
}

std::vector<double> exact_distribution(const Domain& d, const MeasureSpec& spec, int max_edges) {
  if (d.n_real_edges > max_edges || d.n_real_edges > 24)
    throw too_large("exact_distribution: domain too large");
  BoundaryPartition bc = spec.partition(d);
  uint64_t total = 1ull << d.n_real_edges;
  std::vector<double> probs(total);
  Accum zacc;
  for (uint64_t w = 0; w < total; ++w) {
    EdgeConfiguration cfg = EdgeConfiguration::from_word(d.n_real_edges, w);
    int32_t o = cfg.open_count();
    int32_t k = cluster_count(d, cfg, bc);
    double wt = std::pow(spec.p, o) * std::pow(1.0 - spec.p, d.n_real_edges - o) * std::pow(spec.q, k);
    probs[w] = wt;
    zacc.add(wt);
  }
  double Z = zacc.value();
  for (double& v : probs) v /= Z;
  return probs;
}

double enumerate_expectation(const Domain& d, const MeasureSpec& spec,
                             const std::function<double(const EdgeConfiguration&)>& f,
                             int max_edges) {
  if (d.n_real_edges > max_edges)
    throw too_large("enumerate_expectation: domain exceeds the exact-mode cap");
  BoundaryPartition bc = spec.partition(d);
  uint64_t total = 1ull << d.n_real_edges;
  Accum num, den;
  for (uint64_t w = 0; w < total; ++w) {
    EdgeConfiguration cfg = EdgeConfiguration::from_word(d.n_real_edges, w);
    int32_t o = cfg.open_count();
    int32_t k = cluster_count(d, cfg, bc);
    double wt = std::pow(spec.p, o) * std::pow(1.0 - spec.p, d.n_real_edges - o) * std::pow(spec.q, k);
    den.add(wt);
    double fv = f(cfg);
    if (fv != 0.0) num.add(fv * wt);
  }
  return num.value() / den.value();
}

}  // namespace fklab
