#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cutsel/common.hpp"
#include "cutsel/state_graph.hpp"
#include "cutsel/tensor.hpp"

namespace cutsel {

enum class ActMode { Sample, MeanGreedy };

/// Named parameter registry. Registration order is the canonical order for
/// optimizer updates and checkpoints.
class ParamStore {
 public:
  Tensor make(const std::string& name, int rows, int cols, int fan_in, Rng& rng) {
    Tensor t = Tensor::leaf(rows, cols, true);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& v : t.values()) v = rng.uniform(-bound, bound);
    add(name, t);
    return t;
  }

  void add(const std::string& name, const Tensor& t) {
    if (index_.count(name)) throw std::invalid_argument("ParamStore: duplicate name " + name);
    index_[name] = items_.size();
    items_.emplace_back(name, t);
  }

  const std::vector<std::pair<std::string, Tensor>>& items() const { return items_; }

  Tensor at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::invalid_argument("ParamStore: unknown name " + name);
    return items_[it->second].second;
  }

  std::size_t count_values() const {
    std::size_t n = 0;
    for (const auto& [name, t] : items_) n += t.values().size();
    return n;
  }

  void save(std::ostream& out) const {
    for (const auto& [name, t] : items_) {
      out << "PARAM " << name << ' ' << t.rows() << ' ' << t.cols() << "\n";
      const auto& v = t.values();
      for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << fmt_g17(v[i]);
      out << "\n";
    }
  }

  void load_values(std::istream& in) {
    std::size_t loaded = 0;
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::string key, name;
      int rows = 0, cols = 0;
      if (!(ls >> key)) continue;
      if (key != "PARAM") throw std::runtime_error("checkpoint: expected PARAM, got " + key);
      if (!(ls >> name >> rows >> cols)) throw std::runtime_error("checkpoint: bad PARAM header");
      auto it = index_.find(name);
      if (it == index_.end()) throw std::runtime_error("checkpoint: unknown parameter " + name);
      Tensor t = items_[it->second].second;
      if (t.rows() != rows || t.cols() != cols)
        throw std::runtime_error("checkpoint: shape mismatch for " + name);
      if (!std::getline(in, line)) throw std::runtime_error("checkpoint: missing values for " + name);
      std::istringstream vs(line);
      for (auto& v : t.values())
        if (!(vs >> v)) throw std::runtime_error("checkpoint: short value row for " + name);
      ++loaded;
    }
    if (loaded != items_.size())
      throw std::runtime_error("checkpoint: parameter count mismatch");
  }

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
  std::map<std::string, std::size_t> index_;
};

struct HgtConfig {
  int layers = 2;
  int heads = 4;
  int dim = 64;
  int head_dim() const { return dim / heads; }
};

inline constexpr int kNumNodeTypes = 3;  // var, con, cut

inline int relation_source_type(Relation r) {
  switch (r) {
    case Relation::VarToCon: return 0;
    case Relation::ConToVar: return 1;
    case Relation::VarToCut: return 0;
    case Relation::CutToVar: return 2;
    case Relation::ConToCut: return 1;
    case Relation::CutToCon: return 2;
  }
  return -1;
}

inline int relation_target_type(Relation r) {
  switch (r) {
    case Relation::VarToCon: return 1;
    case Relation::ConToVar: return 0;
    case Relation::VarToCut: return 2;
    case Relation::CutToVar: return 0;
    case Relation::ConToCut: return 2;
    case Relation::CutToCon: return 1;
  }
  return -1;
}

/// HGT weights: type-specific input projections and per-layer Q/K/M maps,
/// plus per-relation attention and message maps with a scalar relation prior.
struct HgtParams {
  HgtConfig cfg;
  std::array<Tensor, kNumNodeTypes> in_w, in_b;
  struct Layer {
    std::array<Tensor, kNumNodeTypes> q, k, m;          // dim x dim
    std::array<std::vector<Tensor>, kNumRelations> att;  // per head, dk x dk
    std::array<std::vector<Tensor>, kNumRelations> msg;  // per head, dk x dk
    std::array<Tensor, kNumRelations> mu;                // 1x1 relation prior
    std::array<Tensor, kNumNodeTypes> out_w, out_b;
  };
  std::vector<Layer> layers;

  static HgtParams init(const HgtConfig& cfg, ParamStore& store, Rng& rng) {
    if (cfg.dim % cfg.heads != 0)
      throw std::invalid_argument("HgtConfig: dim must be divisible by heads");
    HgtParams p;
    p.cfg = cfg;
    const std::array<int, kNumNodeTypes> in_dims{kVarFeatDim, kConFeatDim, kCutFeatDim};
    const std::array<const char*, kNumNodeTypes> tn{"var", "con", "cut"};
    for (int t = 0; t < kNumNodeTypes; ++t) {
      const auto st = static_cast<std::size_t>(t);
      p.in_w[st] = store.make(std::string("hgt.in.") + tn[st] + ".w", in_dims[st], cfg.dim,
                              in_dims[st], rng);
      p.in_b[st] = store.make(std::string("hgt.in.") + tn[st] + ".b", 1, cfg.dim, in_dims[st], rng);
    }
    const int dk = cfg.head_dim();
    for (int l = 0; l < cfg.layers; ++l) {
      Layer layer;
      const std::string lp = "hgt.l" + std::to_string(l) + ".";
      for (int t = 0; t < kNumNodeTypes; ++t) {
        const auto st = static_cast<std::size_t>(t);
        layer.q[st] = store.make(lp + tn[st] + ".q", cfg.dim, cfg.dim, cfg.dim, rng);
        layer.k[st] = store.make(lp + tn[st] + ".k", cfg.dim, cfg.dim, cfg.dim, rng);
        layer.m[st] = store.make(lp + tn[st] + ".m", cfg.dim, cfg.dim, cfg.dim, rng);
      }
      for (int r = 0; r < kNumRelations; ++r) {
        const auto sr = static_cast<std::size_t>(r);
        const std::string rp = lp + "rel" + std::to_string(r) + ".";
        for (int h = 0; h < cfg.heads; ++h) {
          layer.att[sr].push_back(store.make(rp + "att.h" + std::to_string(h), dk, dk, dk, rng));
          layer.msg[sr].push_back(store.make(rp + "msg.h" + std::to_string(h), dk, dk, dk, rng));
        }
        Tensor mu = Tensor::leaf(1, 1, true);
        mu.values()[0] = 1.0;
        store.add(rp + "mu", mu);
        layer.mu[sr] = mu;
      }
      for (int t = 0; t < kNumNodeTypes; ++t) {
        const auto st = static_cast<std::size_t>(t);
        layer.out_w[st] = store.make(lp + tn[st] + ".out.w", cfg.dim, cfg.dim, cfg.dim, rng);
        layer.out_b[st] = store.make(lp + tn[st] + ".out.b", 1, cfg.dim, cfg.dim, rng);
      }
      p.layers.push_back(std::move(layer));
    }
    return p;
  }
};

/// Feature matrices and edge index lists extracted from a StateGraph, in
/// whatever node order the caller fixed.
struct GraphTensors {
  Tensor x[kNumNodeTypes];
  std::array<std::pair<std::vector<int>, std::vector<int>>, kNumRelations> edges;
  std::array<int, kNumNodeTypes> counts{};
};

inline GraphTensors graph_tensors(const StateGraph& g) {
  GraphTensors gt;
  gt.counts = {g.num_vars(), g.num_cons(), g.num_cuts()};

  std::vector<double> vf;
  for (const auto& f : g.var_feats) vf.insert(vf.end(), f.begin(), f.end());
  gt.x[0] = Tensor::constant(g.num_vars(), kVarFeatDim, std::move(vf));
  std::vector<double> cf;
  for (const auto& f : g.con_feats) cf.insert(cf.end(), f.begin(), f.end());
  gt.x[1] = Tensor::constant(g.num_cons(), kConFeatDim, std::move(cf));
  std::vector<double> uf;
  for (const auto& f : g.cut_feats) uf.insert(uf.end(), f.begin(), f.end());
  gt.x[2] = Tensor::constant(g.num_cuts(), kCutFeatDim, std::move(uf));

  for (int r = 0; r < kNumRelations; ++r) {
    const auto sr = static_cast<std::size_t>(r);
    for (const auto& [s, t] : g.edges[sr]) {
      gt.edges[sr].first.push_back(s);
      gt.edges[sr].second.push_back(t);
    }
  }
  return gt;
}

/// One multi-head HGT pass per layer: per relation, attention-weighted
/// messages from sources flow to targets; heads occupy disjoint column
/// blocks; relations sum. Residual update with a type-specific output map.
inline std::array<Tensor, kNumNodeTypes> hgt_forward(const GraphTensors& g, const HgtParams& p) {
  const int dk = p.cfg.head_dim();
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));

  std::array<Tensor, kNumNodeTypes> h;
  for (int t = 0; t < kNumNodeTypes; ++t) {
    const auto st = static_cast<std::size_t>(t);
    h[st] = add_rowvec(matmul(g.x[st], p.in_w[st]), p.in_b[st]);
  }

  for (const auto& layer : p.layers) {
    std::array<Tensor, kNumNodeTypes> q, k, m;
    for (int t = 0; t < kNumNodeTypes; ++t) {
      const auto st = static_cast<std::size_t>(t);
      if (g.counts[st] == 0) continue;
      q[st] = matmul(h[st], layer.q[st]);
      k[st] = matmul(h[st], layer.k[st]);
      m[st] = matmul(h[st], layer.m[st]);
    }

    std::array<Tensor, kNumNodeTypes> agg;  // H-tilde accumulators
    for (int r = 0; r < kNumRelations; ++r) {
      const auto sr = static_cast<std::size_t>(r);
      const auto& [src_idx, tgt_idx] = g.edges[sr];
      if (src_idx.empty()) continue;
      const int stype = relation_source_type(static_cast<Relation>(r));
      const int ttype = relation_target_type(static_cast<Relation>(r));
      const auto ss = static_cast<std::size_t>(stype);
      const auto ts = static_cast<std::size_t>(ttype);

      std::vector<Tensor> head_out;
      for (int head = 0; head < p.cfg.heads; ++head) {
        const int c0 = head * dk, c1 = (head + 1) * dk;
        Tensor ke = gather_rows(slice_cols(k[ss], c0, c1), src_idx);
        Tensor qe = gather_rows(slice_cols(q[ts], c0, c1), tgt_idx);
        Tensor me = gather_rows(slice_cols(m[ss], c0, c1), src_idx);
        Tensor logits = rows_dot(matmul(ke, layer.att[sr][static_cast<std::size_t>(head)]), qe);
        logits = scale(scale_by(logits, layer.mu[sr]), inv_sqrt_dk);
        Tensor att = segment_softmax(logits, tgt_idx, g.counts[ts]);
        Tensor msg = matmul(me, layer.msg[sr][static_cast<std::size_t>(head)]);
        head_out.push_back(segment_sum(mul_colvec(msg, att), tgt_idx, g.counts[ts]));
      }
      Tensor rel_out = concat_cols(head_out);
      agg[ts] = agg[ts].defined() ? add(agg[ts], rel_out) : rel_out;
    }

    for (int t = 0; t < kNumNodeTypes; ++t) {
      const auto st = static_cast<std::size_t>(t);
      if (g.counts[st] == 0) continue;
      Tensor tilde = agg[st].defined()
                         ? agg[st]
                         : Tensor::constant(g.counts[st], p.cfg.dim,
                                            std::vector<double>(
                                                static_cast<std::size_t>(g.counts[st]) *
                                                    static_cast<std::size_t>(p.cfg.dim),
                                                0.0));
      h[st] = add(add_rowvec(matmul(relu(tilde), layer.out_w[st]), layer.out_b[st]), h[st]);
    }
  }
  return h;
}

/// Softmax(query . emb / sqrt(d))-weighted sum of the cut embeddings.
inline Tensor attention_pool(const Tensor& cut_emb, const Tensor& query) {
  if (cut_emb.rows() < 1) throw std::invalid_argument("attention_pool: no cuts");
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(cut_emb.cols()));
  Tensor scores = scale(matmul(cut_emb, transpose(query)), inv_sqrt_d);  // C x 1
  Tensor weights = masked_softmax(scores, std::vector<bool>(static_cast<std::size_t>(cut_emb.rows()), false));
  return matmul(transpose(weights), cut_emb);  // 1 x d
}

/// Pointer decoder and the two policy heads on top of the pooled embedding.
struct PolicyHeads {
  Tensor pool_query;                         // 1 x d
  Tensor ratio_w1, ratio_b1, ratio_w2, ratio_b2;  // d->d->2 (mean, raw sigma)
  Tensor value_w1, value_b1, value_w2, value_b2;  // d->d->1
  Tensor gru_wz, gru_uz, gru_bz;
  Tensor gru_wr, gru_ur, gru_br;
  Tensor gru_wh, gru_uh, gru_bh;
  Tensor ptr_enc, ptr_state, ptr_v;          // pointer attention maps
  Tensor start_token;                        // 1 x d
  Tensor pos_scale;                          // 1 x d gate for the order-sensitive ablation

  static PolicyHeads init(const HgtConfig& cfg, ParamStore& store, Rng& rng) {
    PolicyHeads h;
    const int d = cfg.dim;
    h.pool_query = store.make("heads.pool_query", 1, d, d, rng);
    h.ratio_w1 = store.make("heads.ratio.w1", d, d, d, rng);
    h.ratio_b1 = store.make("heads.ratio.b1", 1, d, d, rng);
    h.ratio_w2 = store.make("heads.ratio.w2", d, 2, d, rng);
    h.ratio_b2 = store.make("heads.ratio.b2", 1, 2, d, rng);
    h.value_w1 = store.make("heads.value.w1", d, d, d, rng);
    h.value_b1 = store.make("heads.value.b1", 1, d, d, rng);
    h.value_w2 = store.make("heads.value.w2", d, 1, d, rng);
    h.value_b2 = store.make("heads.value.b2", 1, 1, d, rng);
    h.gru_wz = store.make("heads.gru.wz", d, d, d, rng);
    h.gru_uz = store.make("heads.gru.uz", d, d, d, rng);
    h.gru_bz = store.make("heads.gru.bz", 1, d, d, rng);
    h.gru_wr = store.make("heads.gru.wr", d, d, d, rng);
    h.gru_ur = store.make("heads.gru.ur", d, d, d, rng);
    h.gru_br = store.make("heads.gru.br", 1, d, d, rng);
    h.gru_wh = store.make("heads.gru.wh", d, d, d, rng);
    h.gru_uh = store.make("heads.gru.uh", d, d, d, rng);
    h.gru_bh = store.make("heads.gru.bh", 1, d, d, rng);
    h.ptr_enc = store.make("heads.ptr.enc", d, d, d, rng);
    h.ptr_state = store.make("heads.ptr.state", d, d, d, rng);
    h.ptr_v = store.make("heads.ptr.v", d, 1, d, rng);
    h.start_token = store.make("heads.start_token", 1, d, d, rng);
    Tensor ones = Tensor::leaf(1, d, true);
    for (auto& v : ones.values()) v = 1.0;
    store.add("heads.pos_scale", ones);
    h.pos_scale = ones;
    return h;
  }

  Tensor gru_step(const Tensor& x, const Tensor& state) const {
    Tensor z = sigmoid(add_rowvec(add(matmul(x, gru_wz), matmul(state, gru_uz)), gru_bz));
    Tensor r = sigmoid(add_rowvec(add(matmul(x, gru_wr), matmul(state, gru_ur)), gru_br));
    Tensor cand = tanh_f(add_rowvec(add(matmul(x, gru_wh), matmul(mul(r, state), gru_uh)), gru_bh));
    // (1 - z) * state + z * cand
    return add(mul(sub(Tensor::constant(1, z.cols(), std::vector<double>(static_cast<std::size_t>(z.cols()), 1.0)), z), state),
               mul(z, cand));
  }

  Tensor ratio_stats(const Tensor& pooled) const {  // 1 x 2: (mu, raw sigma)
    return add_rowvec(matmul(relu(add_rowvec(matmul(pooled, ratio_w1), ratio_b1)), ratio_w2),
                      ratio_b2);
  }

  Tensor value(const Tensor& pooled) const {  // 1 x 1
    return add_rowvec(matmul(relu(add_rowvec(matmul(pooled, value_w1), value_b1)), value_w2),
                      value_b2);
  }
};

struct DecodeResult {
  std::vector<int> indices;        // distinct positions into cut_emb rows
  std::vector<Tensor> step_logps;  // one 1x1 tensor per step
  Tensor total_logp;               // 1x1
};

/// Selects k distinct cuts by pointer attention against a recurrent state
/// seeded from the pooled embedding. Greedy mode takes the argmax with exact
/// ties broken by the smallest key; sample mode draws from the masked softmax.
inline DecodeResult pointer_decode(const Tensor& cut_emb, const Tensor& pooled,
                                   const PolicyHeads& heads, int k, ActMode mode, Rng& rng,
                                   const std::vector<std::uint64_t>* keys = nullptr) {
  const int c = cut_emb.rows();
  if (k < 0 || k > c) throw std::invalid_argument("pointer_decode: k out of range");
  if (keys && static_cast<int>(keys->size()) != c)
    throw std::invalid_argument("pointer_decode: key count mismatch");

  DecodeResult res;
  res.total_logp = Tensor::scalar_const(0.0);
  if (k == 0) return res;

  Tensor enc = matmul(cut_emb, heads.ptr_enc);  // C x d
  Tensor state = pooled;
  std::vector<bool> taken(static_cast<std::size_t>(c), false);

  for (int step = 0; step < k; ++step) {
    Tensor input = (step == 0) ? heads.start_token : row(cut_emb, res.indices.back());
    state = heads.gru_step(input, state);
    Tensor scores = matmul(tanh_f(add_rowvec(enc, matmul(state, heads.ptr_state))), heads.ptr_v);
    Tensor probs = masked_softmax(scores, taken);

    int chosen = -1;
    if (mode == ActMode::MeanGreedy) {
      double best = -1.0;
      for (int i = 0; i < c; ++i) {
        if (taken[static_cast<std::size_t>(i)]) continue;
        const double pi = probs.values()[static_cast<std::size_t>(i)];
        if (pi > best) {
          best = pi;
          chosen = i;
        } else if (pi == best && keys && (*keys)[static_cast<std::size_t>(i)] <
                                             (*keys)[static_cast<std::size_t>(chosen)]) {
          chosen = i;
        }
      }
    } else {
      const double draw = rng.uniform();
      double acc = 0;
      for (int i = 0; i < c; ++i) {
        if (taken[static_cast<std::size_t>(i)]) continue;
        acc += probs.values()[static_cast<std::size_t>(i)];
        if (draw < acc) {
          chosen = i;
          break;
        }
      }
      if (chosen < 0) {  // numerical tail: last unmasked entry
        for (int i = c - 1; i >= 0; --i)
          if (!taken[static_cast<std::size_t>(i)]) {
            chosen = i;
            break;
          }
      }
    }

    taken[static_cast<std::size_t>(chosen)] = true;
    res.indices.push_back(chosen);
    Tensor logp = log_f(add_const(pick(probs, chosen), 1e-300));
    res.step_logps.push_back(logp);
    res.total_logp = add(res.total_logp, logp);
  }
  return res;
}

/// Standard sinusoidal positional encoding table (count x dim), constant.
inline Tensor sinusoidal_pe(int count, int dim) {
  std::vector<double> v(static_cast<std::size_t>(count) * dim, 0.0);
  for (int pos = 0; pos < count; ++pos) {
    for (int i = 0; i < dim; ++i) {
      const double rate = std::pow(10000.0, -2.0 * (i / 2) / static_cast<double>(dim));
      v[static_cast<std::size_t>(pos) * dim + i] =
          (i % 2 == 0) ? std::sin(pos * rate) : std::cos(pos * rate);
    }
  }
  return Tensor::constant(count, dim, std::move(v));
}

/// Full parameter bundle of the learned policy.
struct PolicyParams {
  HgtConfig cfg;
  ParamStore store;
  HgtParams hgt;
  PolicyHeads heads;

  static PolicyParams init(const HgtConfig& cfg, std::uint64_t seed) {
    PolicyParams p;
    p.cfg = cfg;
    Rng rng(seed);
    p.hgt = HgtParams::init(cfg, p.store, rng);
    p.heads = PolicyHeads::init(cfg, p.store, rng);
    return p;
  }

  void save(std::ostream& out) const {
    out << "CKPT v1 " << store.items().size() << ' ' << cfg.layers << ' ' << cfg.heads << ' '
        << cfg.dim << "\n";
    store.save(out);
  }

  static PolicyParams load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("checkpoint: empty stream");
    std::istringstream hs(line);
    std::string magic, version;
    std::size_t count = 0;
    HgtConfig cfg;
    if (!(hs >> magic >> version >> count >> cfg.layers >> cfg.heads >> cfg.dim) ||
        magic != "CKPT" || version != "v1")
      throw std::runtime_error("checkpoint: bad header");
    PolicyParams p = init(cfg, 0);
    if (count != p.store.items().size())
      throw std::runtime_error("checkpoint: parameter count mismatch");
    p.store.load_values(in);
    return p;
  }
};

}  // namespace cutsel
