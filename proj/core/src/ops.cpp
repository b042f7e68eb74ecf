#include "mlin/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "mlin/error.hpp"

namespace mlin {

namespace {

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected a rank-2 tensor, got " +
                     shape_str(t.shape()));
  }
}

// c += a·b with a: p×q, b: q×r, all row-major.
void mm_acc_nn(const double* a, const double* b, double* c, std::size_t p,
               std::size_t q, std::size_t r) {
  for (std::size_t i = 0; i < p; ++i) {
    const double* arow = a + i * q;
    double* crow = c + i * r;
    for (std::size_t l = 0; l < q; ++l) {
      const double al = arow[l];
      const double* brow = b + l * r;
      for (std::size_t j = 0; j < r; ++j) crow[j] += al * brow[j];
    }
  }
}

// c += a·bᵀ with a: p×q, b: r×q.
void mm_acc_nt(const double* a, const double* b, double* c, std::size_t p,
               std::size_t q, std::size_t r) {
  for (std::size_t i = 0; i < p; ++i) {
    const double* arow = a + i * q;
    double* crow = c + i * r;
    for (std::size_t j = 0; j < r; ++j) {
      const double* brow = b + j * q;
      double s = 0.0;
      for (std::size_t l = 0; l < q; ++l) s += arow[l] * brow[l];
      crow[j] += s;
    }
  }
}

// c += aᵀ·b with a: q×p, b: q×r.
void mm_acc_tn(const double* a, const double* b, double* c, std::size_t p,
               std::size_t q, std::size_t r) {
  for (std::size_t l = 0; l < q; ++l) {
    const double* arow = a + l * p;
    const double* brow = b + l * r;
    for (std::size_t i = 0; i < p; ++i) {
      const double ai = arow[i];
      double* crow = c + i * r;
      for (std::size_t j = 0; j < r; ++j) crow[j] += ai * brow[j];
    }
  }
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions disagree: " +
                     shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  const std::size_t p = a.rows(), q = a.cols(), r = b.cols();
  Tensor out = Tensor::zeros({p, r});
  mm_acc_nn(a.values().data(), b.values().data(), out.mutable_values().data(),
            p, q, r);
  tape.record(out, {a, b}, [a, b, out, p, q, r]() {
    const double* g = out.grad().data();
    mm_acc_nt(g, b.values().data(), a.grad_buffer().data(), p, r, q);
    mm_acc_tn(a.values().data(), g, b.grad_buffer().data(), q, p, r);
  });
  return out;
}

Tensor linear(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& b) {
  require_rank2(x, "linear");
  require_rank2(w, "linear");
  if (b.rank() != 1) {
    throw ShapeError("linear: bias must be rank-1, got " +
                     shape_str(b.shape()));
  }
  if (x.cols() != w.rows() || w.cols() != b.dim(0)) {
    throw ShapeError("linear: incompatible shapes x=" + shape_str(x.shape()) +
                     " w=" + shape_str(w.shape()) +
                     " b=" + shape_str(b.shape()));
  }
  const std::size_t p = x.rows(), q = x.cols(), r = w.cols();
  Tensor out = Tensor::zeros({p, r});
  double* ov = out.mutable_values().data();
  const double* bv = b.values().data();
  for (std::size_t i = 0; i < p; ++i) {
    double* orow = ov + i * r;
    for (std::size_t j = 0; j < r; ++j) orow[j] = bv[j];
  }
  mm_acc_nn(x.values().data(), w.values().data(), ov, p, q, r);
  tape.record(out, {x, w, b}, [x, w, b, out, p, q, r]() {
    const double* g = out.grad().data();
    mm_acc_nt(g, w.values().data(), x.grad_buffer().data(), p, r, q);
    mm_acc_tn(x.values().data(), g, w.grad_buffer().data(), q, p, r);
    double* bg = b.grad_buffer().data();
    for (std::size_t i = 0; i < p; ++i) {
      const double* grow = g + i * r;
      for (std::size_t j = 0; j < r; ++j) bg[j] += grow[j];
    }
  });
  return out;
}

Tensor softmax_rows(Tape& tape, const Tensor& x) {
  require_rank2(x, "softmax_rows");
  const std::size_t p = x.rows(), q = x.cols();
  Tensor out = Tensor::zeros({p, q});
  const double* xv = x.values().data();
  double* ov = out.mutable_values().data();
  for (std::size_t i = 0; i < p; ++i) {
    const double* row = xv + i * q;
    double* orow = ov + i * q;
    double m = row[0];
    for (std::size_t j = 1; j < q; ++j) m = std::max(m, row[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
      orow[j] = std::exp(row[j] - m);
      z += orow[j];
    }
    for (std::size_t j = 0; j < q; ++j) orow[j] /= z;
  }
  tape.record(out, {x}, [x, out, p, q]() {
    const double* g = out.grad().data();
    const double* y = out.values().data();
    double* xg = x.grad_buffer().data();
    for (std::size_t i = 0; i < p; ++i) {
      const double* grow = g + i * q;
      const double* yrow = y + i * q;
      double dot = 0.0;
      for (std::size_t j = 0; j < q; ++j) dot += grow[j] * yrow[j];
      double* xrow = xg + i * q;
      for (std::size_t j = 0; j < q; ++j) {
        xrow[j] += yrow[j] * (grow[j] - dot);
      }
    }
  });
  return out;
}

Tensor softmax_cols(Tape& tape, const Tensor& x) {
  require_rank2(x, "softmax_cols");
  const std::size_t p = x.rows(), q = x.cols();
  Tensor out = Tensor::zeros({p, q});
  const double* xv = x.values().data();
  double* ov = out.mutable_values().data();
  for (std::size_t j = 0; j < q; ++j) {
    double m = xv[j];
    for (std::size_t i = 1; i < p; ++i) m = std::max(m, xv[i * q + j]);
    double z = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      ov[i * q + j] = std::exp(xv[i * q + j] - m);
      z += ov[i * q + j];
    }
    for (std::size_t i = 0; i < p; ++i) ov[i * q + j] /= z;
  }
  tape.record(out, {x}, [x, out, p, q]() {
    const double* g = out.grad().data();
    const double* y = out.values().data();
    double* xg = x.grad_buffer().data();
    for (std::size_t j = 0; j < q; ++j) {
      double dot = 0.0;
      for (std::size_t i = 0; i < p; ++i) dot += g[i * q + j] * y[i * q + j];
      for (std::size_t i = 0; i < p; ++i) {
        xg[i * q + j] += y[i * q + j] * (g[i * q + j] - dot);
      }
    }
  });
  return out;
}

Tensor elementwise(Tape& tape, const Tensor& a, const Tensor& b, EwOp op) {
  if (a.shape() != b.shape()) {
    throw ShapeError("elementwise: shape mismatch " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  }
  const std::size_t n = a.size();
  Tensor out = Tensor::zeros(a.shape());
  const double* av = a.values().data();
  const double* bv = b.values().data();
  double* ov = out.mutable_values().data();
  if (op == EwOp::mul) {
    for (std::size_t i = 0; i < n; ++i) ov[i] = av[i] * bv[i];
    tape.record(out, {a, b}, [a, b, out, n]() {
      const double* g = out.grad().data();
      double* ag = a.grad_buffer().data();
      double* bg = b.grad_buffer().data();
      const double* av2 = a.values().data();
      const double* bv2 = b.values().data();
      for (std::size_t i = 0; i < n; ++i) {
        ag[i] += g[i] * bv2[i];
        bg[i] += g[i] * av2[i];
      }
    });
  } else {
    for (std::size_t i = 0; i < n; ++i) ov[i] = av[i] + bv[i];
    tape.record(out, {a, b}, [a, b, out, n]() {
      const double* g = out.grad().data();
      double* ag = a.grad_buffer().data();
      double* bg = b.grad_buffer().data();
      for (std::size_t i = 0; i < n; ++i) {
        ag[i] += g[i];
        bg[i] += g[i];
      }
    });
  }
  return out;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  return elementwise(tape, a, b, EwOp::mul);
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  return elementwise(tape, a, b, EwOp::add);
}

Tensor scale(Tape& tape, const Tensor& x, double factor) {
  const std::size_t n = x.size();
  Tensor out = Tensor::zeros(x.shape());
  const double* xv = x.values().data();
  double* ov = out.mutable_values().data();
  for (std::size_t i = 0; i < n; ++i) ov[i] = factor * xv[i];
  tape.record(out, {x}, [x, out, factor, n]() {
    const double* g = out.grad().data();
    double* xg = x.grad_buffer().data();
    for (std::size_t i = 0; i < n; ++i) xg[i] += factor * g[i];
  });
  return out;
}

Tensor transpose(Tape& tape, const Tensor& x) {
  require_rank2(x, "transpose");
  const std::size_t p = x.rows(), q = x.cols();
  Tensor out = Tensor::zeros({q, p});
  const double* xv = x.values().data();
  double* ov = out.mutable_values().data();
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < q; ++j) ov[j * p + i] = xv[i * q + j];
  }
  tape.record(out, {x}, [x, out, p, q]() {
    const double* g = out.grad().data();
    double* xg = x.grad_buffer().data();
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < q; ++j) xg[i * q + j] += g[j * p + i];
    }
  });
  return out;
}

Tensor reshape(Tape& tape, const Tensor& x, Shape target) {
  if (shape_size(target) != x.size()) {
    throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " +
                     shape_str(target));
  }
  const std::size_t n = x.size();
  auto xv = x.values();
  Tensor out =
      Tensor::from(std::move(target), std::vector<double>(xv.begin(), xv.end()));
  tape.record(out, {x}, [x, out, n]() {
    const double* g = out.grad().data();
    double* xg = x.grad_buffer().data();
    for (std::size_t i = 0; i < n; ++i) xg[i] += g[i];
  });
  return out;
}

Tensor concat_cols(Tape& tape, const Tensor& a, const Tensor& b) {
  require_rank2(a, "concat_cols");
  require_rank2(b, "concat_cols");
  if (a.rows() != b.rows()) {
    throw ShapeError("concat_cols: row counts disagree: " +
                     shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  const std::size_t p = a.rows(), qa = a.cols(), qb = b.cols();
  Tensor out = Tensor::zeros({p, qa + qb});
  const double* av = a.values().data();
  const double* bv = b.values().data();
  double* ov = out.mutable_values().data();
  for (std::size_t i = 0; i < p; ++i) {
    double* orow = ov + i * (qa + qb);
    const double* arow = av + i * qa;
    const double* brow = bv + i * qb;
    for (std::size_t j = 0; j < qa; ++j) orow[j] = arow[j];
    for (std::size_t j = 0; j < qb; ++j) orow[qa + j] = brow[j];
  }
  tape.record(out, {a, b}, [a, b, out, p, qa, qb]() {
    const double* g = out.grad().data();
    double* ag = a.grad_buffer().data();
    double* bg = b.grad_buffer().data();
    for (std::size_t i = 0; i < p; ++i) {
      const double* grow = g + i * (qa + qb);
      for (std::size_t j = 0; j < qa; ++j) ag[i * qa + j] += grow[j];
      for (std::size_t j = 0; j < qb; ++j) bg[i * qb + j] += grow[qa + j];
    }
  });
  return out;
}

Tensor mean_rows(Tape& tape, const Tensor& x) {
  require_rank2(x, "mean_rows");
  const std::size_t p = x.rows(), q = x.cols();
  Tensor out = Tensor::zeros({q});
  const double* xv = x.values().data();
  double* ov = out.mutable_values().data();
  for (std::size_t i = 0; i < p; ++i) {
    const double* row = xv + i * q;
    for (std::size_t j = 0; j < q; ++j) ov[j] += row[j];
  }
  const double inv = 1.0 / static_cast<double>(p);
  for (std::size_t j = 0; j < q; ++j) ov[j] *= inv;
  tape.record(out, {x}, [x, out, p, q, inv]() {
    const double* g = out.grad().data();
    double* xg = x.grad_buffer().data();
    for (std::size_t i = 0; i < p; ++i) {
      double* xrow = xg + i * q;
      for (std::size_t j = 0; j < q; ++j) xrow[j] += inv * g[j];
    }
  });
  return out;
}

Tensor repeat_rows(Tape& tape, const Tensor& x, std::size_t times) {
  require_rank2(x, "repeat_rows");
  if (times == 0) throw ShapeError("repeat_rows: times must be positive");
  const std::size_t n = x.rows(), d = x.cols();
  Tensor out = Tensor::zeros({n * times, d});
  const double* xv = x.values().data();
  double* ov = out.mutable_values().data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < times; ++t) {
      double* orow = ov + (i * times + t) * d;
      const double* xrow = xv + i * d;
      for (std::size_t j = 0; j < d; ++j) orow[j] = xrow[j];
    }
  }
  tape.record(out, {x}, [x, out, n, d, times]() {
    const double* g = out.grad().data();
    double* xg = x.grad_buffer().data();
    for (std::size_t i = 0; i < n; ++i) {
      double* xrow = xg + i * d;
      for (std::size_t t = 0; t < times; ++t) {
        const double* grow = g + (i * times + t) * d;
        for (std::size_t j = 0; j < d; ++j) xrow[j] += grow[j];
      }
    }
  });
  return out;
}

Tensor tile_rows(Tape& tape, const Tensor& x, std::size_t times) {
  require_rank2(x, "tile_rows");
  if (times == 0) throw ShapeError("tile_rows: times must be positive");
  const std::size_t n = x.rows(), d = x.cols();
  Tensor out = Tensor::zeros({n * times, d});
  const double* xv = x.values().data();
  double* ov = out.mutable_values().data();
  for (std::size_t t = 0; t < times; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      double* orow = ov + (t * n + i) * d;
      const double* xrow = xv + i * d;
      for (std::size_t j = 0; j < d; ++j) orow[j] = xrow[j];
    }
  }
  tape.record(out, {x}, [x, out, n, d, times]() {
    const double* g = out.grad().data();
    double* xg = x.grad_buffer().data();
    for (std::size_t t = 0; t < times; ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        const double* grow = g + (t * n + i) * d;
        double* xrow = xg + i * d;
        for (std::size_t j = 0; j < d; ++j) xrow[j] += grow[j];
      }
    }
  });
  return out;
}

Tensor dropout(Tape& tape, const Tensor& x, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1), got " +
                      std::to_string(rate));
  }
  if (rate == 0.0) return x;
  const std::size_t n = x.size();
  const double keep_scale = 1.0 / (1.0 - rate);
  auto mask = std::make_shared<std::vector<double>>(n);
  for (std::size_t i = 0; i < n; ++i) {
    (*mask)[i] = rng.uniform() >= rate ? keep_scale : 0.0;
  }
  Tensor out = Tensor::zeros(x.shape());
  const double* xv = x.values().data();
  double* ov = out.mutable_values().data();
  for (std::size_t i = 0; i < n; ++i) ov[i] = xv[i] * (*mask)[i];
  tape.record(out, {x}, [x, out, mask, n]() {
    const double* g = out.grad().data();
    double* xg = x.grad_buffer().data();
    for (std::size_t i = 0; i < n; ++i) xg[i] += g[i] * (*mask)[i];
  });
  return out;
}

Tensor cross_entropy(Tape& tape, const Tensor& logits, std::size_t label) {
  if (logits.rank() != 1) {
    throw ShapeError("cross_entropy: logits must be rank-1, got " +
                     shape_str(logits.shape()));
  }
  const std::size_t c = logits.dim(0);
  if (label >= c) {
    throw std::out_of_range("cross_entropy: label " + std::to_string(label) +
                            " out of range for " + std::to_string(c) +
                            " classes");
  }
  const double* lv = logits.values().data();
  double m = lv[0];
  for (std::size_t j = 1; j < c; ++j) m = std::max(m, lv[j]);
  auto probs = std::make_shared<std::vector<double>>(c);
  double z = 0.0;
  for (std::size_t j = 0; j < c; ++j) {
    (*probs)[j] = std::exp(lv[j] - m);
    z += (*probs)[j];
  }
  for (std::size_t j = 0; j < c; ++j) (*probs)[j] /= z;
  Tensor out = Tensor::scalar(m + std::log(z) - lv[label]);
  tape.record(out, {logits}, [logits, out, probs, label, c]() {
    const double g = out.grad()[0];
    double* lg = logits.grad_buffer().data();
    for (std::size_t j = 0; j < c; ++j) {
      lg[j] += g * ((*probs)[j] - (j == label ? 1.0 : 0.0));
    }
  });
  return out;
}

}  // namespace mlin
