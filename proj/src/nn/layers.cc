// Copyright 2026 The melbridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "melbridge/nn/layers.h"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "melbridge/errors.h"

namespace melbridge::nn {

namespace {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<Mat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const Mat<T>>;

void Require(bool ok, const std::string& what) {
  if (!ok) throw InvalidInput(what);
}

template <typename T>
void RequireRank(const Tensor<T>& t, int rank, const char* op, const char* arg) {
  Require(t.rank() == rank, std::string(op) + ": " + arg + " must have rank " +
                                std::to_string(rank) + ", got " + ShapeString(t.shape));
}

// Unfolds one [I,H,W] image into an [I*k*k, H*W] patch matrix with zero
// padding k/2.
template <typename T>
void Im2Col(const T* x, int channels, int h, int w, int k, T* col) {
  const int p = k / 2;
  const int hw = h * w;
  for (int c = 0; c < channels; ++c) {
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        T* row = col + static_cast<std::size_t>((c * k + kh) * k + kw) * hw;
        const int dw = kw - p;
        const int w0 = std::max(0, -dw), w1 = std::min(w, w - dw);
        for (int y = 0; y < h; ++y) {
          T* out = row + y * w;
          const int sy = y + kh - p;
          if (sy < 0 || sy >= h || w0 >= w1) {
            std::fill(out, out + w, T(0));
            continue;
          }
          const T* src = x + (static_cast<std::size_t>(c) * h + sy) * w + dw;
          std::fill(out, out + w0, T(0));
          for (int xx = w0; xx < w1; ++xx) out[xx] = src[xx];
          std::fill(out + w1, out + w, T(0));
        }
      }
    }
  }
}

// Adjoint of Im2Col: accumulates patch gradients into the image gradient.
template <typename T>
void Col2ImAdd(const T* col, int channels, int h, int w, int k, T* x) {
  const int p = k / 2;
  const int hw = h * w;
  for (int c = 0; c < channels; ++c) {
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        const T* row = col + static_cast<std::size_t>((c * k + kh) * k + kw) * hw;
        const int dw = kw - p;
        const int w0 = std::max(0, -dw), w1 = std::min(w, w - dw);
        for (int y = 0; y < h; ++y) {
          const int sy = y + kh - p;
          if (sy < 0 || sy >= h) continue;
          const T* in = row + y * w;
          T* dst = x + (static_cast<std::size_t>(c) * h + sy) * w + dw;
          for (int xx = w0; xx < w1; ++xx) dst[xx] += in[xx];
        }
      }
    }
  }
}

}  // namespace

template <typename T>
int Conv2d(Tape<T>& tape, int x, int w, int b) {
  const Tensor<T>& xv = tape.value(x);
  const Tensor<T>& wv = tape.value(w);
  const Tensor<T>& bv = tape.value(b);
  RequireRank(xv, 4, "Conv2d", "input");
  RequireRank(wv, 4, "Conv2d", "weight");
  const int n = xv.dim(0), ci = xv.dim(1), h = xv.dim(2), wd = xv.dim(3);
  const int co = wv.dim(0), k = wv.dim(2);
  Require(wv.dim(1) == ci && wv.dim(3) == k && k % 2 == 1,
          "Conv2d: weight " + ShapeString(wv.shape) + " does not fit input " +
              ShapeString(xv.shape));
  Require(bv.shape == std::vector<int>{co}, "Conv2d: bias must have shape [" +
                                                std::to_string(co) + "]");
  const int hw = h * wd, kk = ci * k * k;
  Tensor<T> out({n, co, h, wd});
  const ConstMapMat<T> wm(wv.ptr(), co, kk);
  const Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bias(bv.ptr(), co);
  Mat<T> col(kk, hw);
  for (int s = 0; s < n; ++s) {
    const T* xs = xv.ptr() + static_cast<std::size_t>(s) * ci * hw;
    MapMat<T> os(out.ptr() + static_cast<std::size_t>(s) * co * hw, co, hw);
    if (k == 1) {
      os.noalias() = wm * ConstMapMat<T>(xs, ci, hw);
    } else {
      Im2Col(xs, ci, h, wd, k, col.data());
      os.noalias() = wm * col;
    }
    os.colwise() += bias;
  }
  const int self = tape.size();
  return tape.Record(std::move(out), {x, w, b}, [=](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    const Tensor<T>& xv = t.value(x);
    const ConstMapMat<T> wm(t.value(w).ptr(), co, kk);
    Mat<T> col(kk, hw), gcol(kk, hw);
    for (int s = 0; s < n; ++s) {
      const ConstMapMat<T> gs(g.ptr() + static_cast<std::size_t>(s) * co * hw, co, hw);
      const T* xs = xv.ptr() + static_cast<std::size_t>(s) * ci * hw;
      if (t.requires_grad(w)) {
        MapMat<T> gw(t.grad(w).ptr(), co, kk);
        if (k == 1) {
          gw.noalias() += gs * ConstMapMat<T>(xs, ci, hw).transpose();
        } else {
          Im2Col(xs, ci, h, wd, k, col.data());
          gw.noalias() += gs * col.transpose();
        }
      }
      if (t.requires_grad(b)) {
        Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>(t.grad(b).ptr(), co) +=
            gs.rowwise().sum();
      }
      if (t.requires_grad(x)) {
        T* gx = t.grad(x).ptr() + static_cast<std::size_t>(s) * ci * hw;
        if (k == 1) {
          MapMat<T>(gx, ci, hw).noalias() += wm.transpose() * gs;
        } else {
          gcol.noalias() = wm.transpose() * gs;
          Col2ImAdd(gcol.data(), ci, h, wd, k, gx);
        }
      }
    }
  });
}

template <typename T>
int ConvTranspose2x2(Tape<T>& tape, int x, int w, int b) {
  const Tensor<T>& xv = tape.value(x);
  const Tensor<T>& wv = tape.value(w);
  const Tensor<T>& bv = tape.value(b);
  RequireRank(xv, 4, "ConvTranspose2x2", "input");
  RequireRank(wv, 4, "ConvTranspose2x2", "weight");
  const int n = xv.dim(0), ci = xv.dim(1), h = xv.dim(2), wd = xv.dim(3);
  const int co = wv.dim(1);
  Require(wv.dim(0) == ci && wv.dim(2) == 2 && wv.dim(3) == 2,
          "ConvTranspose2x2: weight " + ShapeString(wv.shape) +
              " does not fit input " + ShapeString(xv.shape));
  Require(bv.shape == std::vector<int>{co}, "ConvTranspose2x2: bias must have shape [" +
                                                std::to_string(co) + "]");
  const int hw = h * wd, oh = 2 * h, ow = 2 * wd;
  Tensor<T> out({n, co, oh, ow});
  const ConstMapMat<T> wm(wv.ptr(), ci, co * 4);
  Mat<T> y(co * 4, hw);
  for (int s = 0; s < n; ++s) {
    y.noalias() = wm.transpose() *
                  ConstMapMat<T>(xv.ptr() + static_cast<std::size_t>(s) * ci * hw, ci, hw);
    T* os = out.ptr() + static_cast<std::size_t>(s) * co * oh * ow;
    for (int o = 0; o < co; ++o) {
      for (int a = 0; a < 2; ++a) {
        for (int c = 0; c < 2; ++c) {
          const T* row = y.data() + static_cast<std::size_t>(o * 4 + a * 2 + c) * hw;
          for (int yy = 0; yy < h; ++yy) {
            T* dst = os + (static_cast<std::size_t>(o) * oh + 2 * yy + a) * ow + c;
            for (int xx = 0; xx < wd; ++xx) dst[2 * xx] = row[yy * wd + xx] + bv.data[o];
          }
        }
      }
    }
  }
  const int self = tape.size();
  return tape.Record(std::move(out), {x, w, b}, [=](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    const Tensor<T>& xv = t.value(x);
    const ConstMapMat<T> wm(t.value(w).ptr(), ci, co * 4);
    Mat<T> gy(co * 4, hw);
    for (int s = 0; s < n; ++s) {
      const T* gs = g.ptr() + static_cast<std::size_t>(s) * co * oh * ow;
      for (int o = 0; o < co; ++o) {
        for (int a = 0; a < 2; ++a) {
          for (int c = 0; c < 2; ++c) {
            T* row = gy.data() + static_cast<std::size_t>(o * 4 + a * 2 + c) * hw;
            for (int yy = 0; yy < h; ++yy) {
              const T* src = gs + (static_cast<std::size_t>(o) * oh + 2 * yy + a) * ow + c;
              for (int xx = 0; xx < wd; ++xx) row[yy * wd + xx] = src[2 * xx];
            }
          }
        }
      }
      const ConstMapMat<T> xs(xv.ptr() + static_cast<std::size_t>(s) * ci * hw, ci, hw);
      if (t.requires_grad(w)) {
        MapMat<T>(t.grad(w).ptr(), ci, co * 4).noalias() += xs * gy.transpose();
      }
      if (t.requires_grad(b)) {
        T* gb = t.grad(b).ptr();
        for (int o = 0; o < co; ++o) {
          gb[o] += gy.middleRows(o * 4, 4).sum();
        }
      }
      if (t.requires_grad(x)) {
        MapMat<T>(t.grad(x).ptr() + static_cast<std::size_t>(s) * ci * hw, ci, hw)
            .noalias() += wm * gy;
      }
    }
  });
}

template <typename T>
int MaxPool2x2(Tape<T>& tape, int x) {
  const Tensor<T>& xv = tape.value(x);
  RequireRank(xv, 4, "MaxPool2x2", "input");
  const int n = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
  Require(h % 2 == 0 && w % 2 == 0,
          "MaxPool2x2: spatial size must be even, got " + ShapeString(xv.shape));
  const int oh = h / 2, ow = w / 2;
  Tensor<T> out({n, c, oh, ow});
  std::vector<int> argmax(out.size());
  for (int p = 0; p < n * c; ++p) {
    const T* src = xv.ptr() + static_cast<std::size_t>(p) * h * w;
    for (int yy = 0; yy < oh; ++yy) {
      for (int xx = 0; xx < ow; ++xx) {
        int best = (2 * yy) * w + 2 * xx;
        for (int cand : {best + 1, best + w, best + w + 1}) {
          if (src[cand] > src[best]) best = cand;
        }
        const std::size_t o = (static_cast<std::size_t>(p) * oh + yy) * ow + xx;
        out.data[o] = src[best];
        argmax[o] = best;
        tape.NoteBranch(static_cast<std::uint64_t>(best));
      }
    }
  }
  const int self = tape.size();
  return tape.Record(std::move(out), {x},
                     [=, argmax = std::move(argmax)](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    T* gx = t.grad(x).ptr();
    const std::size_t plane = static_cast<std::size_t>(oh) * ow;
    for (std::size_t o = 0; o < g.size(); ++o) {
      gx[(o / plane) * h * w + argmax[o]] += g.data[o];
    }
  });
}

template <typename T>
int BatchNorm2d(Tape<T>& tape, int x, int gamma, int beta,
                const Tensor<T>& running_mean, const Tensor<T>& running_var,
                bool training, Tensor<T>* new_mean, Tensor<T>* new_var) {
  const Tensor<T>& xv = tape.value(x);
  RequireRank(xv, 4, "BatchNorm2d", "input");
  const int n = xv.dim(0), c = xv.dim(1);
  const std::size_t hw = static_cast<std::size_t>(xv.dim(2)) * xv.dim(3);
  const std::vector<int> cshape{c};
  Require(tape.value(gamma).shape == cshape && tape.value(beta).shape == cshape &&
              running_mean.shape == cshape && running_var.shape == cshape,
          "BatchNorm2d: parameters must have shape [" + std::to_string(c) + "]");
  const double count = static_cast<double>(n) * hw;
  std::vector<T> mean(c), inv_std(c);
  for (int ch = 0; ch < c; ++ch) {
    double m, v;
    if (training) {
      double sum = 0.0;
      for (int s = 0; s < n; ++s) {
        const T* p = xv.ptr() + (static_cast<std::size_t>(s) * c + ch) * hw;
        for (std::size_t i = 0; i < hw; ++i) sum += p[i];
      }
      m = sum / count;
      double sq = 0.0;
      for (int s = 0; s < n; ++s) {
        const T* p = xv.ptr() + (static_cast<std::size_t>(s) * c + ch) * hw;
        for (std::size_t i = 0; i < hw; ++i) sq += (p[i] - m) * (p[i] - m);
      }
      v = sq / count;
      if (new_mean && new_var) {
        if (new_mean->shape != cshape) *new_mean = Tensor<T>(cshape);
        if (new_var->shape != cshape) *new_var = Tensor<T>(cshape);
        const double unbiased = count > 1 ? sq / (count - 1) : v;
        new_mean->data[ch] = static_cast<T>((1 - kBatchNormMomentum) * running_mean.data[ch] +
                                            kBatchNormMomentum * m);
        new_var->data[ch] = static_cast<T>((1 - kBatchNormMomentum) * running_var.data[ch] +
                                           kBatchNormMomentum * unbiased);
      }
    } else {
      m = running_mean.data[ch];
      v = running_var.data[ch];
    }
    mean[ch] = static_cast<T>(m);
    inv_std[ch] = static_cast<T>(1.0 / std::sqrt(v + kBatchNormEpsilon));
  }
  Tensor<T> out(xv.shape);
  const T* gm = tape.value(gamma).ptr();
  const T* bt = tape.value(beta).ptr();
  for (int s = 0; s < n; ++s) {
    for (int ch = 0; ch < c; ++ch) {
      const std::size_t off = (static_cast<std::size_t>(s) * c + ch) * hw;
      const T scale = gm[ch] * inv_std[ch];
      const T shift = bt[ch] - mean[ch] * scale;
      for (std::size_t i = 0; i < hw; ++i) out.data[off + i] = xv.data[off + i] * scale + shift;
    }
  }
  const int self = tape.size();
  return tape.Record(std::move(out), {x, gamma, beta}, [=](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    const Tensor<T>& xv = t.value(x);
    const T* gm = t.value(gamma).ptr();
    for (int ch = 0; ch < c; ++ch) {
      double sum_g = 0.0, sum_gx = 0.0;
      for (int s = 0; s < n; ++s) {
        const std::size_t off = (static_cast<std::size_t>(s) * c + ch) * hw;
        for (std::size_t i = 0; i < hw; ++i) {
          const double xhat = (xv.data[off + i] - mean[ch]) * inv_std[ch];
          sum_g += g.data[off + i];
          sum_gx += g.data[off + i] * xhat;
        }
      }
      if (t.requires_grad(gamma)) t.grad(gamma).data[ch] += static_cast<T>(sum_gx);
      if (t.requires_grad(beta)) t.grad(beta).data[ch] += static_cast<T>(sum_g);
      if (!t.requires_grad(x)) continue;
      T* gx = t.grad(x).ptr();
      const double scale = static_cast<double>(gm[ch]) * inv_std[ch];
      for (int s = 0; s < n; ++s) {
        const std::size_t off = (static_cast<std::size_t>(s) * c + ch) * hw;
        for (std::size_t i = 0; i < hw; ++i) {
          if (training) {
            const double xhat = (xv.data[off + i] - mean[ch]) * inv_std[ch];
            gx[off + i] += static_cast<T>(
                scale * (g.data[off + i] - sum_g / count - xhat * sum_gx / count));
          } else {
            gx[off + i] += static_cast<T>(scale * g.data[off + i]);
          }
        }
      }
    }
  });
}

template <typename T>
int Affine(Tape<T>& tape, int features, int weight, int bias) {
  const Tensor<T>& fv = tape.value(features);
  const Tensor<T>& wv = tape.value(weight);
  RequireRank(fv, 2, "Affine", "features");
  RequireRank(wv, 2, "Affine", "weight");
  const int n = fv.dim(0), d = fv.dim(1), k = wv.dim(0);
  Require(wv.dim(1) == d && tape.value(bias).shape == std::vector<int>{k},
          "Affine: weight " + ShapeString(wv.shape) + " / bias " +
              ShapeString(tape.value(bias).shape) + " do not fit features " +
              ShapeString(fv.shape));
  Tensor<T> out({n, k});
  MapMat<T> om(out.ptr(), n, k);
  om.noalias() = ConstMapMat<T>(fv.ptr(), n, d) * ConstMapMat<T>(wv.ptr(), k, d).transpose();
  om.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(
      tape.value(bias).ptr(), k);
  const int self = tape.size();
  return tape.Record(std::move(out), {features, weight, bias}, [=](Tape<T>& t) {
    const ConstMapMat<T> g(t.grad(self).ptr(), n, k);
    if (t.requires_grad(weight)) {
      MapMat<T>(t.grad(weight).ptr(), k, d).noalias() +=
          g.transpose() * ConstMapMat<T>(t.value(features).ptr(), n, d);
    }
    if (t.requires_grad(bias)) {
      Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(t.grad(bias).ptr(), k) +=
          g.colwise().sum();
    }
    if (t.requires_grad(features)) {
      MapMat<T>(t.grad(features).ptr(), n, d).noalias() +=
          g * ConstMapMat<T>(t.value(weight).ptr(), k, d);
    }
  });
}

template <typename T>
int ChannelMix(Tape<T>& tape, int x, int mix, int shift) {
  const Tensor<T>& xv = tape.value(x);
  RequireRank(xv, 4, "ChannelMix", "input");
  const int n = xv.dim(0), c = xv.dim(1);
  const int hw = xv.dim(2) * xv.dim(3);
  Require(tape.value(mix).shape == std::vector<int>{n, c * c} &&
              tape.value(shift).shape == std::vector<int>{n, c},
          "ChannelMix: mix " + ShapeString(tape.value(mix).shape) + " / shift " +
              ShapeString(tape.value(shift).shape) + " do not fit input " +
              ShapeString(xv.shape));
  Tensor<T> out(xv.shape);
  for (int s = 0; s < n; ++s) {
    MapMat<T> os(out.ptr() + static_cast<std::size_t>(s) * c * hw, c, hw);
    os.noalias() = ConstMapMat<T>(tape.value(mix).ptr() + static_cast<std::size_t>(s) * c * c, c, c) *
                   ConstMapMat<T>(xv.ptr() + static_cast<std::size_t>(s) * c * hw, c, hw);
    os.colwise() += Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>(
        tape.value(shift).ptr() + static_cast<std::size_t>(s) * c, c);
  }
  const int self = tape.size();
  return tape.Record(std::move(out), {x, mix, shift}, [=](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    for (int s = 0; s < n; ++s) {
      const ConstMapMat<T> gs(g.ptr() + static_cast<std::size_t>(s) * c * hw, c, hw);
      const ConstMapMat<T> xs(t.value(x).ptr() + static_cast<std::size_t>(s) * c * hw, c, hw);
      const ConstMapMat<T> ms(t.value(mix).ptr() + static_cast<std::size_t>(s) * c * c, c, c);
      if (t.requires_grad(mix)) {
        MapMat<T>(t.grad(mix).ptr() + static_cast<std::size_t>(s) * c * c, c, c).noalias() +=
            gs * xs.transpose();
      }
      if (t.requires_grad(shift)) {
        Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>(
            t.grad(shift).ptr() + static_cast<std::size_t>(s) * c, c) += gs.rowwise().sum();
      }
      if (t.requires_grad(x)) {
        MapMat<T>(t.grad(x).ptr() + static_cast<std::size_t>(s) * c * hw, c, hw).noalias() +=
            ms.transpose() * gs;
      }
    }
  });
}

template <typename T>
int PRelu(Tape<T>& tape, int x, int slope) {
  Require(tape.value(slope).shape == std::vector<int>{1}, "PRelu: slope must have shape [1]");
  const Tensor<T>& xv = tape.value(x);
  const T a = tape.value(slope).data[0];
  Tensor<T> out(xv.shape);
  std::uint64_t positives = 0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const T v = xv.data[i];
    out.data[i] = v > 0 ? v : a * v;
    if (v > 0) {
      positives = positives * 31 + i + 1;
    }
  }
  tape.NoteBranch(positives);
  const int self = tape.size();
  return tape.Record(std::move(out), {x, slope}, [=](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    const Tensor<T>& xv = t.value(x);
    const T a = t.value(slope).data[0];
    double ga = 0.0;
    T* gx = t.requires_grad(x) ? t.grad(x).ptr() : nullptr;
    for (std::size_t i = 0; i < xv.size(); ++i) {
      const T v = xv.data[i];
      if (v > 0) {
        if (gx) gx[i] += g.data[i];
      } else {
        if (gx) gx[i] += a * g.data[i];
        ga += static_cast<double>(g.data[i]) * v;
      }
    }
    if (t.requires_grad(slope)) t.grad(slope).data[0] += static_cast<T>(ga);
  });
}

template <typename T>
int Add(Tape<T>& tape, int a, int b) {
  const Tensor<T>& av = tape.value(a);
  const Tensor<T>& bv = tape.value(b);
  Require(av.shape == bv.shape, "Add: shape mismatch " + ShapeString(av.shape) + " vs " +
                                    ShapeString(bv.shape));
  Tensor<T> out(av.shape);
  for (std::size_t i = 0; i < av.size(); ++i) out.data[i] = av.data[i] + bv.data[i];
  const int self = tape.size();
  return tape.Record(std::move(out), {a, b}, [=](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    for (int target : {a, b}) {
      if (!t.requires_grad(target)) continue;
      T* gt = t.grad(target).ptr();
      for (std::size_t i = 0; i < g.size(); ++i) gt[i] += g.data[i];
    }
  });
}

template <typename T>
int EdgePad2d(Tape<T>& tape, int x, int h, int w) {
  const Tensor<T>& xv = tape.value(x);
  RequireRank(xv, 4, "EdgePad2d", "input");
  const int planes = xv.dim(0) * xv.dim(1), ih = xv.dim(2), iw = xv.dim(3);
  Require(h >= ih && w >= iw && ih > 0 && iw > 0,
          "EdgePad2d: cannot pad " + ShapeString(xv.shape) + " to " +
              std::to_string(h) + "x" + std::to_string(w));
  Tensor<T> out({xv.dim(0), xv.dim(1), h, w});
  for (int p = 0; p < planes; ++p) {
    for (int y = 0; y < h; ++y) {
      const T* src = xv.ptr() + (static_cast<std::size_t>(p) * ih + std::min(y, ih - 1)) * iw;
      T* dst = out.ptr() + (static_cast<std::size_t>(p) * h + y) * w;
      for (int c = 0; c < w; ++c) dst[c] = src[std::min(c, iw - 1)];
    }
  }
  const int self = tape.size();
  return tape.Record(std::move(out), {x}, [=](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    T* gx = t.grad(x).ptr();
    for (int p = 0; p < planes; ++p) {
      for (int y = 0; y < h; ++y) {
        T* dst = gx + (static_cast<std::size_t>(p) * ih + std::min(y, ih - 1)) * iw;
        const T* src = g.ptr() + (static_cast<std::size_t>(p) * h + y) * w;
        for (int c = 0; c < w; ++c) dst[std::min(c, iw - 1)] += src[c];
      }
    }
  });
}

template <typename T>
int Crop2d(Tape<T>& tape, int x, int h, int w) {
  const Tensor<T>& xv = tape.value(x);
  RequireRank(xv, 4, "Crop2d", "input");
  const int planes = xv.dim(0) * xv.dim(1), ih = xv.dim(2), iw = xv.dim(3);
  Require(h <= ih && w <= iw && h > 0 && w > 0,
          "Crop2d: cannot crop " + ShapeString(xv.shape) + " to " + std::to_string(h) +
              "x" + std::to_string(w));
  Tensor<T> out({xv.dim(0), xv.dim(1), h, w});
  for (int p = 0; p < planes; ++p) {
    for (int y = 0; y < h; ++y) {
      const T* src = xv.ptr() + (static_cast<std::size_t>(p) * ih + y) * iw;
      std::copy(src, src + w, out.ptr() + (static_cast<std::size_t>(p) * h + y) * w);
    }
  }
  const int self = tape.size();
  return tape.Record(std::move(out), {x}, [=](Tape<T>& t) {
    const Tensor<T>& g = t.grad(self);
    T* gx = t.grad(x).ptr();
    for (int p = 0; p < planes; ++p) {
      for (int y = 0; y < h; ++y) {
        const T* src = g.ptr() + (static_cast<std::size_t>(p) * h + y) * w;
        T* dst = gx + (static_cast<std::size_t>(p) * ih + y) * iw;
        for (int c = 0; c < w; ++c) dst[c] += src[c];
      }
    }
  });
}

template <typename T>
int L1Loss(Tape<T>& tape, int pred, const Tensor<T>& target, const Tensor<T>* mask) {
  const Tensor<T>& pv = tape.value(pred);
  Require(pv.shape == target.shape, "L1Loss: shape mismatch " + ShapeString(pv.shape) +
                                        " vs " + ShapeString(target.shape));
  Require(!mask || mask->shape == pv.shape, "L1Loss: mask shape mismatch");
  double sum = 0.0, count = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (mask && mask->data[i] == T(0)) continue;
    sum += std::abs(static_cast<double>(pv.data[i]) - target.data[i]);
    count += 1.0;
  }
  Require(count > 0, "L1Loss: empty mask");
  Tensor<T> out({1});
  out.data[0] = static_cast<T>(sum / count);
  const int self = tape.size();
  std::vector<T> sign(pv.size());
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (mask && mask->data[i] == T(0)) continue;
    const T d = pv.data[i] - target.data[i];
    sign[i] = static_cast<T>((d > 0) - (d < 0));
  }
  return tape.Record(std::move(out), {pred},
                     [=, sign = std::move(sign)](Tape<T>& t) {
    const double scale = t.grad(self).data[0] / count;
    T* gp = t.grad(pred).ptr();
    for (std::size_t i = 0; i < sign.size(); ++i) gp[i] += static_cast<T>(sign[i] * scale);
  });
}

template <typename T>
int WeightedSum(Tape<T>& tape, int x, const Tensor<T>& weights) {
  const Tensor<T>& xv = tape.value(x);
  Require(xv.shape == weights.shape, "WeightedSum: shape mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) sum += static_cast<double>(xv.data[i]) * weights.data[i];
  Tensor<T> out({1});
  out.data[0] = static_cast<T>(sum);
  const int self = tape.size();
  return tape.Record(std::move(out), {x}, [=](Tape<T>& t) {
    const T g = t.grad(self).data[0];
    T* gx = t.grad(x).ptr();
    for (std::size_t i = 0; i < weights.size(); ++i) gx[i] += g * weights.data[i];
  });
}

#define MELBRIDGE_INSTANTIATE_LAYERS(T)                                              \
  template int Conv2d<T>(Tape<T>&, int, int, int);                                   \
  template int ConvTranspose2x2<T>(Tape<T>&, int, int, int);                         \
  template int MaxPool2x2<T>(Tape<T>&, int);                                         \
  template int BatchNorm2d<T>(Tape<T>&, int, int, int, const Tensor<T>&,             \
                              const Tensor<T>&, bool, Tensor<T>*, Tensor<T>*);       \
  template int Affine<T>(Tape<T>&, int, int, int);                                   \
  template int ChannelMix<T>(Tape<T>&, int, int, int);                               \
  template int PRelu<T>(Tape<T>&, int, int);                                         \
  template int Add<T>(Tape<T>&, int, int);                                           \
  template int EdgePad2d<T>(Tape<T>&, int, int, int);                                \
  template int Crop2d<T>(Tape<T>&, int, int, int);                                   \
  template int L1Loss<T>(Tape<T>&, int, const Tensor<T>&, const Tensor<T>*);         \
  template int WeightedSum<T>(Tape<T>&, int, const Tensor<T>&);

MELBRIDGE_INSTANTIATE_LAYERS(float)
MELBRIDGE_INSTANTIATE_LAYERS(double)

#undef MELBRIDGE_INSTANTIATE_LAYERS

}  // namespace melbridge::nn
