#pragma once

#include <cmath>
#include <vector>

#include "mlin/mli.hpp"
#include "mlin/model.hpp"

namespace mlin::testing::naive {

/// Loop-based reference for the MLI stages and the full network. Written
/// directly from the math with nested loops and plain vectors, independent
/// of the tensor core; the vectorized implementation is tested against it.

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

inline Mat from_tensor(const Tensor& t) {
  Mat out(t.rows(), Vec(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.cols(); ++j) out[i][j] = t.at(i, j);
  }
  return out;
}

inline Vec vec_from_tensor(const Tensor& t) {
  auto v = t.values();
  return Vec(v.begin(), v.end());
}

struct HeadRef {
  Mat w_qr, w_qe, w_k, w_v;
  Vec b_qr, b_qe, b_k, b_v;
};

struct LayerRef {
  Mat w_r, w_e, w_a, w_c, w_p;
  Vec b_r, b_e, b_a, b_c, b_p;
  std::vector<HeadRef> heads;
  Mat w_or, w_oe;
  Vec b_or, b_oe;
};

inline LayerRef layer_from(const MliLayerParams& p, const MliConfig& cfg) {
  LayerRef ref;
  ref.w_r = from_tensor(p.w_r);
  ref.b_r = vec_from_tensor(p.b_r);
  ref.w_e = from_tensor(p.w_e);
  ref.b_e = vec_from_tensor(p.b_e);
  ref.w_a = from_tensor(p.w_a);
  ref.b_a = vec_from_tensor(p.b_a);
  ref.w_c = from_tensor(p.w_c);
  ref.b_c = vec_from_tensor(p.b_c);
  ref.w_p = from_tensor(p.w_p);
  ref.b_p = vec_from_tensor(p.b_p);
  for (const AggregationHead& h : p.heads) {
    HeadRef hr;
    hr.w_qr = from_tensor(h.w_qr);
    hr.b_qr = vec_from_tensor(h.b_qr);
    hr.w_qe = from_tensor(h.w_qe);
    hr.b_qe = vec_from_tensor(h.b_qe);
    hr.w_k = from_tensor(h.w_k);
    hr.b_k = vec_from_tensor(h.b_k);
    if (!cfg.identity_values) {
      hr.w_v = from_tensor(h.w_v);
      hr.b_v = vec_from_tensor(h.b_v);
    }
    ref.heads.push_back(std::move(hr));
  }
  if (!cfg.identity_values) {
    ref.w_or = from_tensor(p.w_or);
    ref.b_or = vec_from_tensor(p.b_or);
    ref.w_oe = from_tensor(p.w_oe);
    ref.b_oe = vec_from_tensor(p.b_oe);
  }
  return ref;
}

// y[i][:] = x[i][:]·w + b
inline Mat affine(const Mat& x, const Mat& w, const Vec& b) {
  const std::size_t p = x.size(), q = w.size(), r = b.size();
  Mat y(p, Vec(r));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      double s = b[j];
      for (std::size_t c = 0; c < q; ++c) s += x[i][c] * w[c][j];
      y[i][j] = s;
    }
  }
  return y;
}

inline void softmax_row(Vec& row) {
  double m = row[0];
  for (double v : row) m = std::max(m, v);
  double z = 0.0;
  for (double& v : row) {
    v = std::exp(v - m);
    z += v;
  }
  for (double& v : row) v /= z;
}

// L[i][j] = softmax_j(b[i] + w[i]·x[j]), X̄ = L·X
inline std::pair<Mat, Mat> summarize(const Mat& x, const Mat& w,
                                     const Vec& b) {
  const std::size_t k = w.size(), n = x.size(), d = x[0].size();
  Mat weights(k, Vec(n));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = b[i];
      for (std::size_t c = 0; c < d; ++c) s += w[i][c] * x[j][c];
      weights[i][j] = s;
    }
    softmax_row(weights[i]);
  }
  Mat summary(k, Vec(d, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t c = 0; c < d; ++c) {
        summary[i][c] += weights[i][j] * x[j][c];
      }
    }
  }
  return {weights, summary};
}

// Pair matrix, row (i*k + j) fuses rbar[i] with ebar[j], then the affine map.
inline Mat interact(const Mat& rbar, const Mat& ebar, InteractionOp op,
                    const Mat& w_a, const Vec& b_a) {
  const std::size_t k = rbar.size(), d = rbar[0].size();
  Mat out;
  out.reserve(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      Vec fused;
      switch (op) {
        case InteractionOp::product:
          fused.resize(d);
          for (std::size_t c = 0; c < d; ++c) {
            fused[c] = rbar[i][c] * ebar[j][c];
          }
          break;
        case InteractionOp::addition:
          fused.resize(d);
          for (std::size_t c = 0; c < d; ++c) {
            fused[c] = rbar[i][c] + ebar[j][c];
          }
          break;
        case InteractionOp::concat:
          fused = rbar[i];
          fused.insert(fused.end(), ebar[j].begin(), ebar[j].end());
          break;
      }
      Vec row(b_a.size());
      for (std::size_t c = 0; c < b_a.size(); ++c) {
        double s = b_a[c];
        for (std::size_t c2 = 0; c2 < fused.size(); ++c2) {
          s += fused[c2] * w_a[c2][c];
        }
        row[c] = s;
      }
      out.push_back(std::move(row));
    }
  }
  return out;
}

// Â[p] = (Ã[p]·w_c + b_c) + (Σ_p' w_p[p][p']·Ã[p'] + b_p[p])
inline Mat propagate(const Mat& a_flat, const Mat& w_c, const Vec& b_c,
                     const Mat& w_p, const Vec& b_p) {
  const std::size_t kk = a_flat.size(), d = a_flat[0].size();
  Mat out(kk, Vec(d));
  for (std::size_t p = 0; p < kk; ++p) {
    for (std::size_t c = 0; c < d; ++c) {
      double channel = b_c[c];
      for (std::size_t c2 = 0; c2 < d; ++c2) {
        channel += a_flat[p][c2] * w_c[c2][c];
      }
      double mixed = b_p[p];
      for (std::size_t p2 = 0; p2 < kk; ++p2) {
        mixed += w_p[p][p2] * a_flat[p2][c];
      }
      out[p][c] = channel + mixed;
    }
  }
  return out;
}

inline Mat aggregate(const Mat& x, const Mat& a_hat, const LayerRef& layer,
                     const MliConfig& cfg, bool region) {
  const std::size_t n = x.size(), d = cfg.d_model, kk = a_hat.size();
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(cfg.head_dim));
  Mat concat(n);
  for (const HeadRef& head : layer.heads) {
    const Mat& w_q = region ? head.w_qr : head.w_qe;
    const Vec& b_q = region ? head.b_qr : head.b_qe;
    Mat queries = affine(x, w_q, b_q);
    Mat keys = affine(a_hat, head.w_k, head.b_k);
    Mat attn(n, Vec(kk));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t p = 0; p < kk; ++p) {
        double s = 0.0;
        for (std::size_t t = 0; t < cfg.head_dim; ++t) {
          s += queries[i][t] * keys[p][t];
        }
        attn[i][p] = s * inv_sqrt;
      }
      softmax_row(attn[i]);
    }
    const Mat values =
        cfg.identity_values ? a_hat : affine(a_hat, head.w_v, head.b_v);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t u = 0; u < values[0].size(); ++u) {
        double s = 0.0;
        for (std::size_t p = 0; p < kk; ++p) s += attn[i][p] * values[p][u];
        concat[i].push_back(s);
      }
    }
  }
  Mat context = concat;
  if (!cfg.identity_values) {
    context = affine(concat, region ? layer.w_or : layer.w_oe,
                     region ? layer.b_or : layer.b_oe);
  }
  Mat out(n, Vec(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) out[i][c] = x[i][c] + context[i][c];
  }
  return out;
}

inline std::pair<Mat, Mat> mli_forward(const Mat& r, const Mat& e,
                                       const LayerRef& layer,
                                       const MliConfig& cfg) {
  auto [l_r, r_bar] = summarize(r, layer.w_r, layer.b_r);
  auto [l_e, e_bar] = summarize(e, layer.w_e, layer.b_e);
  Mat a = interact(r_bar, e_bar, cfg.interaction, layer.w_a, layer.b_a);
  Mat a_hat = propagate(a, layer.w_c, layer.b_c, layer.w_p, layer.b_p);
  return {aggregate(r, a_hat, layer, cfg, true),
          aggregate(e, a_hat, layer, cfg, false)};
}

inline Vec network_forward(const MlinModel& model, const Mat& r_in,
                           const Mat& e_in) {
  Mat r = affine(r_in, from_tensor(model.w_proj_r),
                 vec_from_tensor(model.b_proj_r));
  Mat e = affine(e_in, from_tensor(model.w_proj_e),
                 vec_from_tensor(model.b_proj_e));
  for (const MliLayerParams& params : model.layers) {
    LayerRef layer = layer_from(params, model.cfg);
    auto [r_u, e_u] = mli_forward(r, e, layer, model.cfg);
    r = std::move(r_u);
    e = std::move(e_u);
  }
  const std::size_t d = model.cfg.d_model;
  Vec fused(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    double r_pool = 0.0, e_pool = 0.0;
    for (const Vec& row : r) r_pool += row[c];
    for (const Vec& row : e) e_pool += row[c];
    fused[c] = (r_pool / static_cast<double>(r.size())) *
               (e_pool / static_cast<double>(e.size()));
  }
  Mat logits = affine({fused}, from_tensor(model.w_cls),
                      vec_from_tensor(model.b_cls));
  return logits[0];
}

}  // namespace mlin::testing::naive
