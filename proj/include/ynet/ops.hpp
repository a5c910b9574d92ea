#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "ynet/tensor.hpp"

// The fixed op set the network is built from. Every op is a pure function of
// its inputs; when a Tape is supplied it records a hand-written backward step
// that accumulates into the gradient buffers of whichever inputs carry one.

namespace ynet {

namespace detail {

template <typename Scalar>
using MatMap = Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename Scalar>
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

/// Unrolls convolution patches: col(k, n) with k = (c*kh+di)*kw+dj and
/// n = i*w_out+j equals input(c, i+di-pad, j+dj-pad), zero outside.
template <typename Scalar>
void im2col(const Tensor<Scalar>& input, int kh, int kw, int pad, int h_out, int w_out,
            typename Tensor<Scalar>::Array& col) {
  const int c_in = input.extent(0), h = input.extent(1), w = input.extent(2);
  const int n = h_out * w_out;
  col.resize(static_cast<Eigen::Index>(c_in) * kh * kw * n);
  Scalar* dst = col.data();
  for (int c = 0; c < c_in; ++c) {
    const Scalar* src = input.data() + c * h * w;
    for (int di = 0; di < kh; ++di) {
      for (int dj = 0; dj < kw; ++dj) {
        for (int i = 0; i < h_out; ++i) {
          const int si = i + di - pad;
          if (si < 0 || si >= h) {
            for (int j = 0; j < w_out; ++j) *dst++ = Scalar(0);
            continue;
          }
          const Scalar* row = src + si * w;
          for (int j = 0; j < w_out; ++j) {
            const int sj = j + dj - pad;
            *dst++ = (sj < 0 || sj >= w) ? Scalar(0) : row[sj];
          }
        }
      }
    }
  }
}

/// Scatter-add of a col buffer back onto the input gradient.
template <typename Scalar>
void col2im_add(const typename Tensor<Scalar>::Array& col, int c_in, int h, int w, int kh, int kw,
                int pad, int h_out, int w_out, typename Tensor<Scalar>::Array& grad) {
  const Scalar* src = col.data();
  for (int c = 0; c < c_in; ++c) {
    Scalar* dst = grad.data() + c * h * w;
    for (int di = 0; di < kh; ++di) {
      for (int dj = 0; dj < kw; ++dj) {
        for (int i = 0; i < h_out; ++i) {
          const int si = i + di - pad;
          if (si < 0 || si >= h) {
            src += w_out;
            continue;
          }
          Scalar* row = dst + si * w;
          for (int j = 0; j < w_out; ++j) {
            const int sj = j + dj - pad;
            if (sj >= 0 && sj < w) row[sj] += src[j];
          }
          src += w_out;
        }
      }
    }
  }
}

}  // namespace detail

/// Cross-correlation of a C_in x H x W input with C_out x C_in x kh x kw
/// weights, plus a per-output-channel bias.
template <typename Scalar>
Tensor<Scalar> conv2d(const Tensor<Scalar>& input, const Tensor<Scalar>& weight,
                      const Tensor<Scalar>& bias, int padding, Tape<Scalar>* tape = nullptr) {
  if (input.rank() != 3 || weight.rank() != 4) {
    throw std::invalid_argument("conv2d expects input " + shape_string(input.shape()) +
                                " rank 3 and weight " + shape_string(weight.shape()) + " rank 4");
  }
  if (input.extent(0) != weight.extent(1)) {
    throw std::invalid_argument("conv2d channel mismatch: input " + shape_string(input.shape()) +
                                " vs weight " + shape_string(weight.shape()));
  }
  if (bias.rank() != 1 || bias.extent(0) != weight.extent(0)) {
    throw std::invalid_argument("conv2d bias shape " + shape_string(bias.shape()) +
                                " does not match weight " + shape_string(weight.shape()));
  }
  const int c_out = weight.extent(0), kh = weight.extent(2), kw = weight.extent(3);
  const int h = input.extent(1), w = input.extent(2);
  const int h_out = h + 2 * padding - kh + 1;
  const int w_out = w + 2 * padding - kw + 1;
  if (h_out < 1 || w_out < 1) {
    throw std::invalid_argument("conv2d kernel " + shape_string(weight.shape()) +
                                " does not fit padded input " + shape_string(input.shape()));
  }

  const int k = input.extent(0) * kh * kw;
  const int n = h_out * w_out;
  typename Tensor<Scalar>::Array col;
  detail::im2col(input, kh, kw, padding, h_out, w_out, col);

  Tensor<Scalar> out({c_out, h_out, w_out});
  detail::ConstMatMap<Scalar> wm(weight.data(), c_out, k);
  detail::ConstMatMap<Scalar> cm(col.data(), k, n);
  detail::MatMap<Scalar> om(out.data(), c_out, n);
  om.noalias() = wm * cm;
  for (int c = 0; c < c_out; ++c) om.row(c).array() += bias.values()[c];

  if (tape) {
    out.ensure_grad();
    Tensor<Scalar> in_h = input, w_h = weight, b_h = bias;
    tape->record([in_h, w_h, b_h, out, padding]() mutable {
      const int c_out_b = w_h.extent(0), kh_b = w_h.extent(2), kw_b = w_h.extent(3);
      const int h_b = in_h.extent(1), w_b = in_h.extent(2);
      const int ho = out.extent(1), wo = out.extent(2);
      const int kk = in_h.extent(0) * kh_b * kw_b;
      const int nn = ho * wo;
      detail::ConstMatMap<Scalar> go(out.grad().data(), c_out_b, nn);
      if (b_h.has_grad()) {
        for (int c = 0; c < c_out_b; ++c) b_h.grad()[c] += go.row(c).sum();
      }
      typename Tensor<Scalar>::Array col_b;
      if (w_h.has_grad() || in_h.has_grad()) {
        detail::im2col(in_h, kh_b, kw_b, padding, ho, wo, col_b);
      }
      if (w_h.has_grad()) {
        detail::ConstMatMap<Scalar> cmb(col_b.data(), kk, nn);
        detail::MatMap<Scalar> gw(w_h.grad().data(), c_out_b, kk);
        gw.noalias() += go * cmb.transpose();
      }
      if (in_h.has_grad()) {
        typename Tensor<Scalar>::Array dcol(static_cast<Eigen::Index>(kk) * nn);
        detail::ConstMatMap<Scalar> wmb(w_h.data(), c_out_b, kk);
        detail::MatMap<Scalar> dm(dcol.data(), kk, nn);
        dm.noalias() = wmb.transpose() * go;
        detail::col2im_add<Scalar>(dcol, in_h.extent(0), h_b, w_b, kh_b, kw_b, padding, ho, wo,
                                   in_h.grad());
      }
    });
  }
  return out;
}

/// 2x2 max pooling with stride 2. The backward pass routes the gradient to the
/// arg-max position; ties go to the first occurrence in row-major window order.
template <typename Scalar>
Tensor<Scalar> maxpool2(const Tensor<Scalar>& input, Tape<Scalar>* tape = nullptr) {
  if (input.rank() != 3) throw std::invalid_argument("maxpool2 expects a rank-3 tensor");
  const int c_n = input.extent(0), h = input.extent(1), w = input.extent(2);
  if (h % 2 != 0 || w % 2 != 0) {
    throw std::invalid_argument("maxpool2 requires even spatial extents, got " +
                                shape_string(input.shape()));
  }
  Tensor<Scalar> out({c_n, h / 2, w / 2});
  auto argmax = std::make_shared<std::vector<int>>(static_cast<std::size_t>(out.size()));
  int oi = 0;
  for (int c = 0; c < c_n; ++c) {
    for (int i = 0; i < h; i += 2) {
      for (int j = 0; j < w; j += 2) {
        const int base = (c * h + i) * w + j;
        const int candidates[4] = {base, base + 1, base + w, base + w + 1};
        int best = candidates[0];
        Scalar best_v = input.values()[best];
        for (int t = 1; t < 4; ++t) {
          const Scalar v = input.values()[candidates[t]];
          if (v > best_v) {
            best_v = v;
            best = candidates[t];
          }
        }
        out.values()[oi] = best_v;
        (*argmax)[static_cast<std::size_t>(oi)] = best;
        ++oi;
      }
    }
  }
  if (tape) {
    out.ensure_grad();
    Tensor<Scalar> in_h = input;
    tape->record([in_h, out, argmax]() mutable {
      if (!in_h.has_grad()) return;
      for (int i = 0; i < out.size(); ++i) {
        in_h.grad()[(*argmax)[static_cast<std::size_t>(i)]] += out.grad()[i];
      }
    });
  }
  return out;
}

namespace detail {

struct LerpAxis {
  std::vector<int> lo, hi;
  std::vector<double> frac;
};

/// Half-pixel-center sampling: output index i reads source coordinate
/// (i + 0.5) / 2 - 0.5, clamped at the borders.
inline LerpAxis upsample_axis(int n_in) {
  LerpAxis a;
  const int n_out = 2 * n_in;
  a.lo.resize(n_out);
  a.hi.resize(n_out);
  a.frac.resize(n_out);
  for (int i = 0; i < n_out; ++i) {
    double x = (i + 0.5) / 2.0 - 0.5;
    if (x < 0.0) x = 0.0;
    if (x > n_in - 1) x = n_in - 1;
    const int lo = static_cast<int>(std::floor(x));
    a.lo[i] = lo;
    a.hi[i] = std::min(lo + 1, n_in - 1);
    a.frac[i] = x - lo;
  }
  return a;
}

}  // namespace detail

/// Bilinear x2 upsampling with half-pixel-center alignment; exactly linear,
/// so the backward pass scatters with the same four weights.
template <typename Scalar>
Tensor<Scalar> bilinear_upsample2(const Tensor<Scalar>& input, Tape<Scalar>* tape = nullptr) {
  if (input.rank() != 3) throw std::invalid_argument("bilinear_upsample2 expects a rank-3 tensor");
  const int c_n = input.extent(0), h = input.extent(1), w = input.extent(2);
  const detail::LerpAxis ay = detail::upsample_axis(h);
  const detail::LerpAxis ax = detail::upsample_axis(w);
  Tensor<Scalar> out({c_n, 2 * h, 2 * w});
  for (int c = 0; c < c_n; ++c) {
    const Scalar* src = input.data() + c * h * w;
    Scalar* dst = out.data() + c * 4 * h * w;
    for (int i = 0; i < 2 * h; ++i) {
      const Scalar* r0 = src + ay.lo[i] * w;
      const Scalar* r1 = src + ay.hi[i] * w;
      const Scalar fy = static_cast<Scalar>(ay.frac[i]);
      for (int j = 0; j < 2 * w; ++j) {
        const Scalar fx = static_cast<Scalar>(ax.frac[j]);
        const Scalar top = r0[ax.lo[j]] * (Scalar(1) - fx) + r0[ax.hi[j]] * fx;
        const Scalar bot = r1[ax.lo[j]] * (Scalar(1) - fx) + r1[ax.hi[j]] * fx;
        *dst++ = top * (Scalar(1) - fy) + bot * fy;
      }
    }
  }
  if (tape) {
    out.ensure_grad();
    Tensor<Scalar> in_h = input;
    tape->record([in_h, out, ay, ax]() mutable {
      if (!in_h.has_grad()) return;
      const int cn = in_h.extent(0), hh = in_h.extent(1), ww = in_h.extent(2);
      for (int c = 0; c < cn; ++c) {
        Scalar* gin = in_h.grad().data() + c * hh * ww;
        const Scalar* gout = out.grad().data() + c * 4 * hh * ww;
        for (int i = 0; i < 2 * hh; ++i) {
          const Scalar fy = static_cast<Scalar>(ay.frac[i]);
          for (int j = 0; j < 2 * ww; ++j) {
            const Scalar fx = static_cast<Scalar>(ax.frac[j]);
            const Scalar g = *gout++;
            gin[ay.lo[i] * ww + ax.lo[j]] += g * (Scalar(1) - fy) * (Scalar(1) - fx);
            gin[ay.lo[i] * ww + ax.hi[j]] += g * (Scalar(1) - fy) * fx;
            gin[ay.hi[i] * ww + ax.lo[j]] += g * fy * (Scalar(1) - fx);
            gin[ay.hi[i] * ww + ax.hi[j]] += g * fy * fx;
          }
        }
      }
    });
  }
  return out;
}

/// Channel-wise concatenation of rank-3 tensors with equal spatial extents.
/// Invalid (default-constructed) entries are skipped.
template <typename Scalar>
Tensor<Scalar> concat_channels(const std::vector<Tensor<Scalar>>& parts,
                               Tape<Scalar>* tape = nullptr) {
  std::vector<Tensor<Scalar>> live;
  for (const auto& p : parts) {
    if (p.valid()) live.push_back(p);
  }
  if (live.empty()) throw std::invalid_argument("concat_channels needs at least one tensor");
  if (live.size() == 1 && !tape) return live[0];
  const int h = live[0].extent(1), w = live[0].extent(2);
  int c_total = 0;
  for (const auto& p : live) {
    if (p.rank() != 3 || p.extent(1) != h || p.extent(2) != w) {
      throw std::invalid_argument("concat_channels spatial mismatch: " +
                                  shape_string(live[0].shape()) + " vs " +
                                  shape_string(p.shape()));
    }
    c_total += p.extent(0);
  }
  Tensor<Scalar> out({c_total, h, w});
  int offset = 0;
  for (const auto& p : live) {
    out.values().segment(offset, p.size()) = p.values();
    offset += p.size();
  }
  if (tape) {
    out.ensure_grad();
    tape->record([live, out]() mutable {
      int off = 0;
      for (auto& p : live) {
        if (p.has_grad()) p.grad() += out.grad().segment(off, p.size());
        off += p.size();
      }
    });
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> concat_channels(const Tensor<Scalar>& a, const Tensor<Scalar>& b,
                               Tape<Scalar>* tape = nullptr) {
  if (!b.valid()) return a;
  if (!a.valid()) return b;
  return concat_channels(std::vector<Tensor<Scalar>>{a, b}, tape);
}

template <typename Scalar>
Tensor<Scalar> relu(const Tensor<Scalar>& input, Tape<Scalar>* tape = nullptr) {
  Tensor<Scalar> out(input.shape());
  out.values() = input.values().max(Scalar(0));
  if (tape) {
    out.ensure_grad();
    Tensor<Scalar> in_h = input;
    tape->record([in_h, out]() mutable {
      if (!in_h.has_grad()) return;
      using Array = typename Tensor<Scalar>::Array;
      in_h.grad() += (in_h.values() > Scalar(0)).select(out.grad(), Array::Zero(out.size()));
    });
  }
  return out;
}

/// Numerically safe elementwise logistic; backward is y*(1-y).
template <typename Scalar>
Tensor<Scalar> sigmoid(const Tensor<Scalar>& input, Tape<Scalar>* tape = nullptr) {
  Tensor<Scalar> out(input.shape());
  for (int i = 0; i < input.size(); ++i) {
    const Scalar x = input.values()[i];
    if (x >= Scalar(0)) {
      out.values()[i] = Scalar(1) / (Scalar(1) + std::exp(-x));
    } else {
      const Scalar e = std::exp(x);
      out.values()[i] = e / (Scalar(1) + e);
    }
  }
  if (tape) {
    out.ensure_grad();
    Tensor<Scalar> in_h = input;
    tape->record([in_h, out]() mutable {
      if (!in_h.has_grad()) return;
      in_h.grad() += out.grad() * out.values() * (Scalar(1) - out.values());
    });
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> scale(const Tensor<Scalar>& input, Scalar factor, Tape<Scalar>* tape = nullptr) {
  Tensor<Scalar> out(input.shape());
  out.values() = input.values() * factor;
  if (tape) {
    out.ensure_grad();
    Tensor<Scalar> in_h = input;
    tape->record([in_h, out, factor]() mutable {
      if (in_h.has_grad()) in_h.grad() += out.grad() * factor;
    });
  }
  return out;
}

/// Copies channels [first, first+count) of a rank-3 tensor.
template <typename Scalar>
Tensor<Scalar> slice_channels(const Tensor<Scalar>& input, int first, int count,
                              Tape<Scalar>* tape = nullptr) {
  if (input.rank() != 3 || first < 0 || count < 1 || first + count > input.extent(0)) {
    throw std::invalid_argument("slice_channels [" + std::to_string(first) + ", " +
                                std::to_string(first + count) + ") out of range for " +
                                shape_string(input.shape()));
  }
  const int hw = input.extent(1) * input.extent(2);
  Tensor<Scalar> out({count, input.extent(1), input.extent(2)});
  out.values() = input.values().segment(first * hw, count * hw);
  if (tape) {
    out.ensure_grad();
    Tensor<Scalar> in_h = input;
    tape->record([in_h, out, first, hw, count]() mutable {
      if (in_h.has_grad()) {
        in_h.grad().segment(first * hw, count * hw) += out.grad();
      }
    });
  }
  return out;
}

/// 2x2 average pooling with stride 2 (used for conditioning pyramids).
template <typename Scalar>
Tensor<Scalar> avgpool2(const Tensor<Scalar>& input, Tape<Scalar>* tape = nullptr) {
  if (input.rank() != 3) throw std::invalid_argument("avgpool2 expects a rank-3 tensor");
  const int c_n = input.extent(0), h = input.extent(1), w = input.extent(2);
  if (h % 2 != 0 || w % 2 != 0) {
    throw std::invalid_argument("avgpool2 requires even spatial extents, got " +
                                shape_string(input.shape()));
  }
  Tensor<Scalar> out({c_n, h / 2, w / 2});
  int oi = 0;
  for (int c = 0; c < c_n; ++c) {
    for (int i = 0; i < h; i += 2) {
      for (int j = 0; j < w; j += 2) {
        const int base = (c * h + i) * w + j;
        out.values()[oi++] = (input.values()[base] + input.values()[base + 1] +
                              input.values()[base + w] + input.values()[base + w + 1]) /
                             Scalar(4);
      }
    }
  }
  if (tape) {
    out.ensure_grad();
    Tensor<Scalar> in_h = input;
    tape->record([in_h, out]() mutable {
      if (!in_h.has_grad()) return;
      const int cn = in_h.extent(0), hh = in_h.extent(1), ww = in_h.extent(2);
      int k = 0;
      for (int c = 0; c < cn; ++c) {
        for (int i = 0; i < hh; i += 2) {
          for (int j = 0; j < ww; j += 2) {
            const Scalar g = out.grad()[k++] / Scalar(4);
            const int base = (c * hh + i) * ww + j;
            in_h.grad()[base] += g;
            in_h.grad()[base + 1] += g;
            in_h.grad()[base + ww] += g;
            in_h.grad()[base + ww + 1] += g;
          }
        }
      }
    });
  }
  return out;
}

inline constexpr double kBceClamp = 1e-6;

/// Mean binary cross entropy over all entries, with the prediction clamped to
/// [1e-6, 1-1e-6] before the logs. Returns a shape-{1} scalar tensor.
template <typename Scalar>
Tensor<Scalar> bce_loss(const Tensor<Scalar>& predicted, const Tensor<Scalar>& target,
                        Tape<Scalar>* tape = nullptr) {
  if (predicted.shape() != target.shape()) {
    throw std::invalid_argument("bce_loss shape mismatch: predicted " +
                                shape_string(predicted.shape()) + " vs target " +
                                shape_string(target.shape()));
  }
  const Scalar eps = static_cast<Scalar>(kBceClamp);
  const int n = predicted.size();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    Scalar p = predicted.values()[i];
    if (p < eps) p = eps;
    if (p > Scalar(1) - eps) p = Scalar(1) - eps;
    const Scalar t = target.values()[i];
    acc -= static_cast<double>(t * std::log(p) + (Scalar(1) - t) * std::log(Scalar(1) - p));
  }
  Tensor<Scalar> out({1});
  out.values()[0] = static_cast<Scalar>(acc / n);
  if (tape) {
    out.ensure_grad();
    Tensor<Scalar> p_h = predicted, t_h = target;
    tape->record([p_h, t_h, out, eps, n]() mutable {
      if (!p_h.has_grad()) return;
      const Scalar g = out.grad()[0] / static_cast<Scalar>(n);
      for (int i = 0; i < n; ++i) {
        const Scalar p = p_h.values()[i];
        if (p <= eps || p >= Scalar(1) - eps) continue;  // clamped region: zero slope
        const Scalar t = t_h.values()[i];
        p_h.grad()[i] += g * (p - t) / (p * (Scalar(1) - p));
      }
    });
  }
  return out;
}

/// Weighted sum of scalar (shape-{1}) tensors; the backward pass distributes
/// the incoming gradient by weight.
template <typename Scalar>
Tensor<Scalar> weighted_sum(const std::vector<Tensor<Scalar>>& terms,
                            const std::vector<double>& weights, Tape<Scalar>* tape = nullptr) {
  if (terms.size() != weights.size() || terms.empty()) {
    throw std::invalid_argument("weighted_sum needs matching, non-empty terms and weights");
  }
  Tensor<Scalar> out({1});
  double acc = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].size() != 1) throw std::invalid_argument("weighted_sum terms must be scalars");
    acc += weights[i] * static_cast<double>(terms[i].values()[0]);
  }
  out.values()[0] = static_cast<Scalar>(acc);
  if (tape) {
    out.ensure_grad();
    std::vector<Tensor<Scalar>> terms_h = terms;
    std::vector<double> weights_h = weights;
    tape->record([terms_h, weights_h, out]() mutable {
      for (std::size_t i = 0; i < terms_h.size(); ++i) {
        if (terms_h[i].has_grad()) {
          terms_h[i].grad()[0] += out.grad()[0] * static_cast<Scalar>(weights_h[i]);
        }
      }
    });
  }
  return out;
}

}  // namespace ynet
