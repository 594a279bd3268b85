#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ems/common.hpp"

namespace ems {

struct EncoderConfig {
  int n_layers = 2;
  int n_heads = 4;
  int d = 64;
  int d_ff = 256;
  double dropout_hidden = 0.1;
  double dropout_attn = 0.1;
  int max_positions = 128;

  void validate() const {
    if (n_layers < 1) throw ConfigError("n_layers must be >= 1");
    if (n_heads < 1 || d % n_heads != 0) throw ConfigError("d must be divisible by n_heads");
    if (d_ff < 1) throw ConfigError("d_ff must be >= 1");
    if (dropout_hidden < 0 || dropout_hidden >= 1 || dropout_attn < 0 || dropout_attn >= 1)
      throw ConfigError("dropout rates must be in [0, 1)");
    if (max_positions < 120) throw ConfigError("max_positions must be >= 120");
  }
};

template <typename S>
struct EncoderLayerParams {
  Mat<S> wq, wk, wv, wo;  // d x d
  Vec<S> bq, bk, bv, bo;
  Vec<S> ln1_g, ln1_b;
  Mat<S> ff_w1;  // d_ff x d
  Vec<S> ff_b1;
  Mat<S> ff_w2;  // d x d_ff
  Vec<S> ff_b2;
  Vec<S> ln2_g, ln2_b;
};

template <typename S>
struct EncoderParams {
  Mat<S> tok_emb;  // d_vcb x d
  Mat<S> pos_emb;  // max_positions x d
  std::vector<EncoderLayerParams<S>> layers;
  Vec<S> lnf_g, lnf_b;
};

namespace detail {
constexpr double kLnEps = 1e-5;
}

// ---------------------------------------------------------------------------
// Forward caches (per batch row; rows are sliced to their true length, so no
// pad position ever enters the computation).
// ---------------------------------------------------------------------------

template <typename S>
struct LnCache {
  Mat<S> xhat;
  Vec<S> inv_std;
};

template <typename S>
struct LayerCache {
  Mat<S> x_in;
  LnCache<S> ln1;
  Mat<S> a;  // LN1 output, attention input
  Mat<S> q, k, v;
  std::vector<Mat<S>> probs;       // per head, post-softmax
  std::vector<Mat<S>> attn_drop;   // per head dropout masks (empty = identity)
  Mat<S> concat;                   // heads' outputs concatenated
  Mat<S> attn_proj;
  Mat<S> drop1;  // hidden dropout mask after attention (empty = identity)
  Mat<S> x_mid;
  LnCache<S> ln2;
  Mat<S> f;  // LN2 output, FF input
  Mat<S> ff_pre;
  Mat<S> ff_act;
  Mat<S> ff_out;
  Mat<S> drop2;
};

template <typename S>
struct RowCache {
  std::vector<int> ids;
  Mat<S> emb;  // post-dropout embedding sum (stream input)
  Mat<S> drop_emb;
  std::vector<LayerCache<S>> layers;
  LnCache<S> lnf;
};

template <typename S>
struct EncodeCache {
  std::vector<RowCache<S>> rows;
};

template <typename S>
struct EncodeResult {
  std::vector<Mat<S>> hidden;  // per row: true_len x d
  Mat<S> pooled;               // B x d
};

// ---------------------------------------------------------------------------
// Primitive layers
// ---------------------------------------------------------------------------

template <typename S>
void layer_norm(const Mat<S>& x, const Vec<S>& g, const Vec<S>& b, Mat<S>& out, LnCache<S>* c) {
  const Eigen::Index n = x.rows(), d = x.cols();
  out.resize(n, d);
  Mat<S> xhat(n, d);
  Vec<S> inv_std(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    S mu = x.row(i).mean();
    S var = (x.row(i).array() - mu).square().mean();
    S inv = S(1) / std::sqrt(var + S(detail::kLnEps));
    xhat.row(i) = (x.row(i).array() - mu) * inv;
    out.row(i) = xhat.row(i).cwiseProduct(g.transpose()) + b.transpose();
    inv_std(i) = inv;
  }
  if (c) {
    c->xhat = std::move(xhat);
    c->inv_std = std::move(inv_std);
  }
}

// dx = inv_std * (g' - mean(g') - xhat * mean(g' .* xhat)), g' = dy .* gamma
template <typename S>
Mat<S> layer_norm_backward(const Mat<S>& dy, const LnCache<S>& c, const Vec<S>& g, Vec<S>& dgamma, Vec<S>& dbeta) {
  const Eigen::Index n = dy.rows(), d = dy.cols();
  Mat<S> dx(n, d);
  dbeta += dy.colwise().sum().transpose();
  dgamma += dy.cwiseProduct(c.xhat).colwise().sum().transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Array<S, 1, Eigen::Dynamic> gp = dy.row(i).cwiseProduct(g.transpose()).array();
    S m1 = gp.mean();
    S m2 = (gp * c.xhat.row(i).array()).mean();
    dx.row(i) = (c.inv_std(i) * (gp - m1 - c.xhat.row(i).array() * m2)).matrix();
  }
  return dx;
}

template <typename S>
void softmax_rows(Mat<S>& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    S mx = m.row(i).maxCoeff();
    m.row(i) = (m.row(i).array() - mx).exp();
    m.row(i) /= m.row(i).sum();
  }
}

/// Inverted-dropout mask: entries are 0 or 1/(1-p), drawn row-major.
template <typename S>
Mat<S> dropout_mask(Rng& rng, double p, Eigen::Index rows, Eigen::Index cols) {
  Mat<S> m(rows, cols);
  const S keep = S(1.0 / (1.0 - p));
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform() >= p ? keep : S(0);
  return m;
}

// ---------------------------------------------------------------------------
// Encoder forward / backward
// ---------------------------------------------------------------------------

template <typename S>
int row_true_length(const MatI& mask, int row) {
  int len = 0;
  bool seen_pad = false;
  for (int j = 0; j < mask.cols(); ++j) {
    if (mask(row, j) == 1) {
      if (seen_pad) throw InvalidInput("mask is not monotone in row " + std::to_string(row));
      ++len;
    } else {
      seen_pad = true;
    }
  }
  return len;
}

/// Pre-norm transformer encoder over one padded id matrix. Returns per-token
/// hidden states (true length per row) and masked mean-pooled sentence
/// embeddings. With train_mode off the result is deterministic and
/// independent of padding and batch grouping.
template <typename S>
EncodeResult<S> encode(const EncoderParams<S>& params, const EncoderConfig& cfg, const MatI& ids, const MatI& mask,
                       bool train_mode, uint64_t rng_seed, EncodeCache<S>* cache = nullptr) {
  if (ids.rows() != mask.rows() || ids.cols() != mask.cols()) throw InvalidInput("ids/mask shape mismatch");
  const int B = static_cast<int>(ids.rows());
  const int dh = cfg.d / cfg.n_heads;
  const S inv_sqrt_dh = S(1) / std::sqrt(S(dh));
  const bool drop_h = train_mode && cfg.dropout_hidden > 0;
  const bool drop_a = train_mode && cfg.dropout_attn > 0;

  EncodeResult<S> res;
  res.hidden.resize(B);
  res.pooled.resize(B, cfg.d);
  if (cache) cache->rows.resize(B);

  for (int b = 0; b < B; ++b) {
    const int len = row_true_length<S>(mask, b);
    if (len == 0) throw InvalidInput("all-pad row " + std::to_string(b));
    if (len > cfg.max_positions) throw InvalidInput("row longer than max_positions");

    Rng rng(mix_seed(rng_seed, static_cast<uint64_t>(b)));
    RowCache<S> rc;
    rc.ids.resize(len);

    Mat<S> x(len, cfg.d);
    for (int i = 0; i < len; ++i) {
      int id = ids(b, i);
      if (id < 0 || id >= params.tok_emb.rows()) throw InvalidInput("token id out of range");
      rc.ids[i] = id;
      x.row(i) = params.tok_emb.row(id) + params.pos_emb.row(i);
    }
    if (drop_h) {
      rc.drop_emb = dropout_mask<S>(rng, cfg.dropout_hidden, len, cfg.d);
      x = x.cwiseProduct(rc.drop_emb);
    }
    rc.emb = x;

    rc.layers.resize(cfg.n_layers);
    for (int l = 0; l < cfg.n_layers; ++l) {
      const auto& lp = params.layers[l];
      LayerCache<S>& lc = rc.layers[l];
      lc.x_in = x;

      layer_norm(x, lp.ln1_g, lp.ln1_b, lc.a, &lc.ln1);
      lc.q = (lc.a * lp.wq.transpose()).rowwise() + lp.bq.transpose();
      lc.k = (lc.a * lp.wk.transpose()).rowwise() + lp.bk.transpose();
      lc.v = (lc.a * lp.wv.transpose()).rowwise() + lp.bv.transpose();
      lc.concat.resize(len, cfg.d);
      lc.probs.resize(cfg.n_heads);
      if (drop_a) lc.attn_drop.resize(cfg.n_heads);
      for (int h = 0; h < cfg.n_heads; ++h) {
        auto qh = lc.q.middleCols(h * dh, dh);
        auto kh = lc.k.middleCols(h * dh, dh);
        auto vh = lc.v.middleCols(h * dh, dh);
        Mat<S> scores = qh * kh.transpose() * inv_sqrt_dh;
        softmax_rows(scores);
        lc.probs[h] = scores;
        if (drop_a) {
          lc.attn_drop[h] = dropout_mask<S>(rng, cfg.dropout_attn, len, len);
          scores = scores.cwiseProduct(lc.attn_drop[h]);
        }
        lc.concat.middleCols(h * dh, dh) = scores * vh;
      }
      lc.attn_proj = (lc.concat * lp.wo.transpose()).rowwise() + lp.bo.transpose();
      Mat<S> attn_out = lc.attn_proj;
      if (drop_h) {
        lc.drop1 = dropout_mask<S>(rng, cfg.dropout_hidden, len, cfg.d);
        attn_out = attn_out.cwiseProduct(lc.drop1);
      }
      x += attn_out;
      lc.x_mid = x;

      layer_norm(x, lp.ln2_g, lp.ln2_b, lc.f, &lc.ln2);
      lc.ff_pre = (lc.f * lp.ff_w1.transpose()).rowwise() + lp.ff_b1.transpose();
      lc.ff_act = lc.ff_pre.cwiseMax(S(0));
      lc.ff_out = (lc.ff_act * lp.ff_w2.transpose()).rowwise() + lp.ff_b2.transpose();
      Mat<S> ff_out = lc.ff_out;
      if (drop_h) {
        lc.drop2 = dropout_mask<S>(rng, cfg.dropout_hidden, len, cfg.d);
        ff_out = ff_out.cwiseProduct(lc.drop2);
      }
      x += ff_out;
    }

    Mat<S> h;
    layer_norm(x, params.lnf_g, params.lnf_b, h, &rc.lnf);
    res.pooled.row(b) = h.colwise().mean();
    res.hidden[b] = std::move(h);
    if (cache) (*cache).rows[b] = std::move(rc);
  }
  return res;
}

/// Backpropagate d(loss)/d(pooled) through the encoder, accumulating into
/// grads (same layout as params).
template <typename S>
void encode_backward(const EncoderParams<S>& params, const EncoderConfig& cfg, const EncodeCache<S>& cache,
                     const Mat<S>& d_pooled, EncoderParams<S>& grads) {
  const int B = static_cast<int>(cache.rows.size());
  const int dh = cfg.d / cfg.n_heads;
  const S inv_sqrt_dh = S(1) / std::sqrt(S(dh));

  for (int b = 0; b < B; ++b) {
    const RowCache<S>& rc = cache.rows[b];
    const int len = static_cast<int>(rc.ids.size());

    // pooled = mean of final hidden rows
    Mat<S> dh_final(len, cfg.d);
    for (int i = 0; i < len; ++i) dh_final.row(i) = d_pooled.row(b) / S(len);

    Mat<S> dx = layer_norm_backward(dh_final, rc.lnf, params.lnf_g, grads.lnf_g, grads.lnf_b);

    for (int l = cfg.n_layers - 1; l >= 0; --l) {
      const auto& lp = params.layers[l];
      auto& lg = grads.layers[l];
      const LayerCache<S>& lc = rc.layers[l];

      // x = x_mid + drop2 .* ff_out
      Mat<S> dff_out = lc.drop2.size() ? dx.cwiseProduct(lc.drop2) : dx;
      lg.ff_b2 += dff_out.colwise().sum().transpose();
      lg.ff_w2 += dff_out.transpose() * lc.ff_act;
      Mat<S> dff_act = dff_out * lp.ff_w2;
      Mat<S> dff_pre = dff_act.cwiseProduct((lc.ff_pre.array() > S(0)).template cast<S>().matrix());
      lg.ff_b1 += dff_pre.colwise().sum().transpose();
      lg.ff_w1 += dff_pre.transpose() * lc.f;
      Mat<S> df = dff_pre * lp.ff_w1;
      dx += layer_norm_backward(df, lc.ln2, lp.ln2_g, lg.ln2_g, lg.ln2_b);

      // x_mid = x_in + drop1 .* attn_proj
      Mat<S> dattn_proj = lc.drop1.size() ? dx.cwiseProduct(lc.drop1) : dx;
      lg.bo += dattn_proj.colwise().sum().transpose();
      lg.wo += dattn_proj.transpose() * lc.concat;
      Mat<S> dconcat = dattn_proj * lp.wo;

      Mat<S> dq = Mat<S>::Zero(len, cfg.d);
      Mat<S> dk = Mat<S>::Zero(len, cfg.d);
      Mat<S> dv = Mat<S>::Zero(len, cfg.d);
      for (int h = 0; h < cfg.n_heads; ++h) {
        auto qh = lc.q.middleCols(h * dh, dh);
        auto kh = lc.k.middleCols(h * dh, dh);
        auto vh = lc.v.middleCols(h * dh, dh);
        const Mat<S>& p = lc.probs[h];
        Mat<S> dOh = dconcat.middleCols(h * dh, dh);
        Mat<S> p_used = lc.attn_drop.size() ? p.cwiseProduct(lc.attn_drop[h]) : p;
        Mat<S> dPd = dOh * vh.transpose();
        dv.middleCols(h * dh, dh) = p_used.transpose() * dOh;
        Mat<S> dP = lc.attn_drop.size() ? dPd.cwiseProduct(lc.attn_drop[h]) : dPd;
        // softmax rows backward
        Mat<S> dScore(len, len);
        for (int i = 0; i < len; ++i) {
          S dot = dP.row(i).dot(p.row(i));
          dScore.row(i) = p.row(i).cwiseProduct(dP.row(i).array() - dot).matrix();
        }
        dScore *= inv_sqrt_dh;
        dq.middleCols(h * dh, dh) = dScore * kh;
        dk.middleCols(h * dh, dh) = dScore.transpose() * qh;
      }
      lg.bq += dq.colwise().sum().transpose();
      lg.bk += dk.colwise().sum().transpose();
      lg.bv += dv.colwise().sum().transpose();
      lg.wq += dq.transpose() * lc.a;
      lg.wk += dk.transpose() * lc.a;
      lg.wv += dv.transpose() * lc.a;
      Mat<S> da = dq * lp.wq + dk * lp.wk + dv * lp.wv;
      dx += layer_norm_backward(da, lc.ln1, lp.ln1_g, lg.ln1_g, lg.ln1_b);
    }

    Mat<S> demb = rc.drop_emb.size() ? dx.cwiseProduct(rc.drop_emb) : dx;
    for (int i = 0; i < len; ++i) {
      grads.tok_emb.row(rc.ids[i]) += demb.row(i);
      grads.pos_emb.row(i) += demb.row(i);
    }
  }
}

}  // namespace ems
