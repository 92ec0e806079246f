#include "floorpp/nn/ops.hpp"

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <stdexcept>

namespace floorpp::nn {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " +
                                      shape_str(a.shape()) + " vs " +
                                      shape_str(b.shape()));
}

struct ConvGeom {
  int channels, height, width;
  int kh, kw, stride, pad_h, pad_w;
  int out_h, out_w;
  bool pointwise() const {
    return kh == 1 && kw == 1 && stride == 1 && pad_h == 0 && pad_w == 0;
  }
};

void im2col(const float* x, const ConvGeom& g, float* cols) {
  const int out_hw = g.out_h * g.out_w;
  for (int c = 0; c < g.channels; ++c) {
    const float* plane = x + static_cast<std::size_t>(c) * g.height * g.width;
    for (int ki = 0; ki < g.kh; ++ki) {
      for (int kj = 0; kj < g.kw; ++kj) {
        float* row = cols + static_cast<std::size_t>((c * g.kh + ki) * g.kw + kj) * out_hw;
        for (int oh = 0; oh < g.out_h; ++oh) {
          const int ih = oh * g.stride - g.pad_h + ki;
          float* dst = row + oh * g.out_w;
          if (ih < 0 || ih >= g.height) {
            std::fill(dst, dst + g.out_w, 0.0f);
            continue;
          }
          const float* src = plane + static_cast<std::size_t>(ih) * g.width;
          for (int ow = 0; ow < g.out_w; ++ow) {
            const int iw = ow * g.stride - g.pad_w + kj;
            dst[ow] = (iw >= 0 && iw < g.width) ? src[iw] : 0.0f;
          }
        }
      }
    }
  }
}

void col2im_add(const float* cols, const ConvGeom& g, float* dx) {
  const int out_hw = g.out_h * g.out_w;
  for (int c = 0; c < g.channels; ++c) {
    float* plane = dx + static_cast<std::size_t>(c) * g.height * g.width;
    for (int ki = 0; ki < g.kh; ++ki) {
      for (int kj = 0; kj < g.kw; ++kj) {
        const float* row =
            cols + static_cast<std::size_t>((c * g.kh + ki) * g.kw + kj) * out_hw;
        for (int oh = 0; oh < g.out_h; ++oh) {
          const int ih = oh * g.stride - g.pad_h + ki;
          if (ih < 0 || ih >= g.height) continue;
          float* dst = plane + static_cast<std::size_t>(ih) * g.width;
          const float* src = row + oh * g.out_w;
          for (int ow = 0; ow < g.out_w; ++ow) {
            const int iw = ow * g.stride - g.pad_w + kj;
            if (iw >= 0 && iw < g.width) dst[iw] += src[ow];
          }
        }
      }
    }
  }
}

// Up to four taps of a zero-padded bilinear read.
struct Taps {
  std::array<int, 4> index{};
  std::array<float, 4> weight{};
  int count = 0;
};

Taps bilinear_taps(int height, int width, Vec2 p) {
  const double u = p.x - 0.5;
  const double v = p.y - 0.5;
  const double x0 = std::floor(u);
  const double y0 = std::floor(v);
  const double fx = u - x0;
  const double fy = v - y0;
  Taps t;
  const int ix = static_cast<int>(x0);
  const int iy = static_cast<int>(y0);
  const double wx[2] = {1.0 - fx, fx};
  const double wy[2] = {1.0 - fy, fy};
  for (int dy = 0; dy < 2; ++dy) {
    const int y = iy + dy;
    if (y < 0 || y >= height) continue;
    for (int dx = 0; dx < 2; ++dx) {
      const int x = ix + dx;
      if (x < 0 || x >= width) continue;
      const double w = wx[dx] * wy[dy];
      if (w == 0.0) continue;
      t.index[t.count] = y * width + x;
      t.weight[t.count] = static_cast<float>(w);
      ++t.count;
    }
  }
  return t;
}

// Shared core of roi_align and sample_segments: reads every channel at a list
// of points. out[c * n_points + k] = fmap[c] sampled at points[k].
Tensor sample_points(const Tensor& fmap, const std::vector<Vec2>& points,
                     Shape out_shape) {
  require(fmap.ndim() == 3, "sample: feature map must be [C, H, W]");
  const int channels = fmap.dim(0);
  const int height = fmap.dim(1);
  const int width = fmap.dim(2);
  const std::size_t plane = static_cast<std::size_t>(height) * width;
  const std::size_t n = points.size();

  std::vector<Taps> taps(n);
  for (std::size_t k = 0; k < n; ++k) taps[k] = bilinear_taps(height, width, points[k]);

  std::vector<float> out(static_cast<std::size_t>(channels) * n, 0.0f);
  auto src = fmap.data();
  for (int c = 0; c < channels; ++c) {
    const float* p = src.data() + c * plane;
    float* dst = out.data() + c * n;
    for (std::size_t k = 0; k < n; ++k) {
      const Taps& t = taps[k];
      float acc = 0.0f;
      for (int q = 0; q < t.count; ++q) acc += t.weight[q] * p[t.index[q]];
      dst[k] = acc;
    }
  }

  return Tensor::make_result(
      std::move(out_shape), std::move(out), {fmap},
      [taps = std::move(taps), channels, plane, n](Node& self) {
        auto& parent = *self.parents[0];
        auto g = parent.grad_buffer();
        for (int c = 0; c < channels; ++c) {
          float* dst = g.data() + c * plane;
          const float* up = self.grad.data() + c * n;
          for (std::size_t k = 0; k < n; ++k) {
            const Taps& t = taps[k];
            for (int q = 0; q < t.count; ++q) dst[t.index[q]] += t.weight[q] * up[k];
          }
        }
      });
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride, int pad_h, int pad_w) {
  require(input.ndim() == 3, "conv2d: input must be [C, H, W], got " +
                                 shape_str(input.shape()));
  require(weight.ndim() == 4, "conv2d: weight must be [O, C, kh, kw], got " +
                                  shape_str(weight.shape()));
  require(stride >= 1, "conv2d: stride must be >= 1");
  require(pad_h >= 0 && pad_w >= 0, "conv2d: padding must be >= 0");
  ConvGeom g{};
  g.channels = input.dim(0);
  g.height = input.dim(1);
  g.width = input.dim(2);
  const int out_ch = weight.dim(0);
  require(weight.dim(1) == g.channels,
          "conv2d: weight expects " + std::to_string(weight.dim(1)) +
              " input channels, input has " + std::to_string(g.channels));
  require(bias.defined() && bias.numel() == static_cast<std::size_t>(out_ch),
          "conv2d: bias must have one entry per output channel");
  g.kh = weight.dim(2);
  g.kw = weight.dim(3);
  g.stride = stride;
  g.pad_h = pad_h;
  g.pad_w = pad_w;
  require(g.height + 2 * pad_h >= g.kh && g.width + 2 * pad_w >= g.kw,
          "conv2d: kernel larger than padded input");
  g.out_h = (g.height + 2 * pad_h - g.kh) / stride + 1;
  g.out_w = (g.width + 2 * pad_w - g.kw) / stride + 1;

  const int ck = g.channels * g.kh * g.kw;
  const int out_hw = g.out_h * g.out_w;

  std::vector<float> cols_storage;
  const float* cols_ptr = input.data().data();
  if (!g.pointwise()) {
    cols_storage.resize(static_cast<std::size_t>(ck) * out_hw);
    im2col(input.data().data(), g, cols_storage.data());
    cols_ptr = cols_storage.data();
  }

  std::vector<float> out(static_cast<std::size_t>(out_ch) * out_hw);
  {
    ConstMatMap w(weight.data().data(), out_ch, ck);
    ConstMatMap cols(cols_ptr, ck, out_hw);
    MatMap y(out.data(), out_ch, out_hw);
    y.noalias() = w * cols;
    auto b = bias.data();
    for (int o = 0; o < out_ch; ++o) y.row(o).array() += b[o];
  }
  cols_storage.clear();
  cols_storage.shrink_to_fit();

  return Tensor::make_result(
      {out_ch, g.out_h, g.out_w}, std::move(out), {input, weight, bias},
      [g, ck, out_hw, out_ch](Node& self) {
        Node& x = *self.parents[0];
        Node& w = *self.parents[1];
        Node& b = *self.parents[2];
        ConstMatMap dy(self.grad.data(), out_ch, out_hw);

        // Columns are recomputed rather than kept alive through the forward.
        std::vector<float> cols_storage;
        const float* cols_ptr = x.data.data();
        if (!g.pointwise()) {
          cols_storage.resize(static_cast<std::size_t>(ck) * out_hw);
          im2col(x.data.data(), g, cols_storage.data());
          cols_ptr = cols_storage.data();
        }
        if (w.requires_grad) {
          MatMap dw(w.grad_buffer().data(), out_ch, ck);
          ConstMatMap cols(cols_ptr, ck, out_hw);
          dw.noalias() += dy * cols.transpose();
        }
        if (b.requires_grad) {
          auto db = b.grad_buffer();
          // Plain loops: Eigen's vectorized sum depends on buffer alignment,
          // which would make training bits vary from run to run.
          for (int o = 0; o < out_ch; ++o) {
            double acc = 0.0;
            for (Eigen::Index k = 0; k < dy.cols(); ++k) acc += dy(o, k);
            db[o] += static_cast<float>(acc);
          }
        }
        if (x.requires_grad) {
          ConstMatMap wm(w.data.data(), out_ch, ck);
          if (g.pointwise()) {
            MatMap dx(x.grad_buffer().data(), ck, out_hw);
            dx.noalias() += wm.transpose() * dy;
          } else {
            RowMat dcols = wm.transpose() * dy;
            col2im_add(dcols.data(), g, x.grad_buffer().data());
          }
        }
      });
}

namespace {

template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& x, Fwd fwd, Deriv deriv) {
  auto in = x.data();
  std::vector<float> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fwd(in[i]);
  return Tensor::make_result(x.shape(), std::move(out), {x}, [deriv](Node& self) {
    Node& p = *self.parents[0];
    auto g = p.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] += self.grad[i] * deriv(p.data[i], self.data[i]);
    }
  });
}

}  // namespace

Tensor relu(const Tensor& x) {
  return unary(
      x, [](float v) { return v > 0.0f ? v : 0.0f; },
      [](float in, float) { return in > 0.0f ? 1.0f : 0.0f; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x,
      [](float v) {
        // Stable on both tails.
        if (v >= 0.0f) return 1.0f / (1.0f + std::exp(-v));
        const float e = std::exp(v);
        return e / (1.0f + e);
      },
      [](float, float out) { return out * (1.0f - out); });
}

Tensor tanh(const Tensor& x) {
  return unary(
      x, [](float v) { return std::tanh(v); },
      [](float, float out) { return 1.0f - out * out; });
}

Tensor scale(const Tensor& x, float s) {
  return unary(
      x, [s](float v) { return v * s; }, [s](float, float) { return s; });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  auto da = a.data();
  auto db = b.data();
  std::vector<float> out(da.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = da[i] + db[i];
  return Tensor::make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (auto& p : self.parents) {
      auto g = p->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  auto da = a.data();
  auto db = b.data();
  std::vector<float> out(da.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = da[i] * db[i];
  auto na = a.node();
  auto nb = b.node();
  return Tensor::make_result(a.shape(), std::move(out), {a, b},
                             [na, nb](Node& self) {
                               if (na->requires_grad) {
                                 auto g = na->grad_buffer();
                                 for (std::size_t i = 0; i < g.size(); ++i)
                                   g[i] += self.grad[i] * nb->data[i];
                               }
                               if (nb->requires_grad) {
                                 auto g = nb->grad_buffer();
                                 for (std::size_t i = 0; i < g.size(); ++i)
                                   g[i] += self.grad[i] * na->data[i];
                               }
                             });
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (float v : x.data()) acc += v;
  return Tensor::make_result({}, {static_cast<float>(acc)}, {x}, [](Node& self) {
    auto g = self.parents[0]->grad_buffer();
    for (auto& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  require(x.numel() > 0, "mean of empty tensor");
  return scale(sum(x), 1.0f / static_cast<float>(x.numel()));
}

Tensor mean_last(const Tensor& x) {
  require(x.ndim() >= 1, "mean_last needs at least one axis");
  const int last = x.dim(-1);
  require(last > 0, "mean_last over empty axis");
  Shape out_shape(x.shape().begin(), x.shape().end() - 1);
  const std::size_t rows = numel(out_shape);
  auto in = x.data();
  std::vector<float> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (int k = 0; k < last; ++k) acc += in[r * last + k];
    out[r] = static_cast<float>(acc / last);
  }
  return Tensor::make_result(std::move(out_shape), std::move(out), {x},
                             [rows, last](Node& self) {
                               auto g = self.parents[0]->grad_buffer();
                               const float inv = 1.0f / static_cast<float>(last);
                               for (std::size_t r = 0; r < rows; ++r)
                                 for (int k = 0; k < last; ++k)
                                   g[r * last + k] += self.grad[r] * inv;
                             });
}

Tensor reshape(const Tensor& x, Shape shape) {
  require(numel(shape) == x.numel(), "reshape: element count mismatch " +
                                         shape_str(x.shape()) + " -> " +
                                         shape_str(shape));
  std::vector<float> out(x.data().begin(), x.data().end());
  return Tensor::make_result(std::move(shape), std::move(out), {x}, [](Node& self) {
    auto g = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor gather(const Tensor& x, std::span<const int> indices) {
  auto in = x.data();
  std::vector<float> out(indices.size());
  std::vector<int> idx(indices.begin(), indices.end());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    require(idx[k] >= 0 && static_cast<std::size_t>(idx[k]) < in.size(),
            "gather: index out of range");
    out[k] = in[idx[k]];
  }
  const int n = static_cast<int>(idx.size());
  return Tensor::make_result({n}, std::move(out), {x},
                             [idx = std::move(idx)](Node& self) {
                               auto g = self.parents[0]->grad_buffer();
                               for (std::size_t k = 0; k < idx.size(); ++k)
                                 g[idx[k]] += self.grad[k];
                             });
}

Tensor upsample2x(const Tensor& x) {
  require(x.ndim() == 3, "upsample2x: input must be [C, H, W]");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int oh = 2 * h, ow = 2 * w;
  auto in = x.data();
  std::vector<float> out(static_cast<std::size_t>(c) * oh * ow);
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < oh; ++y) {
      const float* src = in.data() + (static_cast<std::size_t>(ch) * h + y / 2) * w;
      float* dst = out.data() + (static_cast<std::size_t>(ch) * oh + y) * ow;
      for (int xx = 0; xx < ow; ++xx) dst[xx] = src[xx / 2];
    }
  return Tensor::make_result({c, oh, ow}, std::move(out), {x},
                             [c, h, w, oh, ow](Node& self) {
                               auto g = self.parents[0]->grad_buffer();
                               for (int ch = 0; ch < c; ++ch)
                                 for (int y = 0; y < oh; ++y) {
                                   float* dst = g.data() +
                                                (static_cast<std::size_t>(ch) * h + y / 2) * w;
                                   const float* src =
                                       self.grad.data() +
                                       (static_cast<std::size_t>(ch) * oh + y) * ow;
                                   for (int xx = 0; xx < ow; ++xx) dst[xx / 2] += src[xx];
                                 }
                             });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require(x.ndim() == 2, "linear: input must be [N, F], got " + shape_str(x.shape()));
  require(weight.ndim() == 2 && weight.dim(1) == x.dim(1),
          "linear: weight " + shape_str(weight.shape()) + " incompatible with input " +
              shape_str(x.shape()));
  const int n = x.dim(0), f = x.dim(1), o = weight.dim(0);
  require(bias.numel() == static_cast<std::size_t>(o), "linear: bias size mismatch");
  std::vector<float> out(static_cast<std::size_t>(n) * o);
  {
    ConstMatMap xm(x.data().data(), n, f);
    ConstMatMap wm(weight.data().data(), o, f);
    MatMap y(out.data(), n, o);
    y.noalias() = xm * wm.transpose();
    auto b = bias.data();
    for (int r = 0; r < n; ++r)
      for (int k = 0; k < o; ++k) y(r, k) += b[k];
  }
  auto nx = x.node(), nw = weight.node(), nb = bias.node();
  return Tensor::make_result({n, o}, std::move(out), {x, weight, bias},
                             [nx, nw, nb, n, f, o](Node& self) {
                               ConstMatMap dy(self.grad.data(), n, o);
                               if (nw->requires_grad) {
                                 MatMap dw(nw->grad_buffer().data(), o, f);
                                 ConstMatMap xm(nx->data.data(), n, f);
                                 dw.noalias() += dy.transpose() * xm;
                               }
                               if (nb->requires_grad) {
                                 auto db = nb->grad_buffer();
                                 for (int k = 0; k < o; ++k) {
                                   double acc = 0.0;
                                   for (int r = 0; r < n; ++r) acc += dy(r, k);
                                   db[k] += static_cast<float>(acc);
                                 }
                               }
                               if (nx->requires_grad) {
                                 MatMap dx(nx->grad_buffer().data(), n, f);
                                 ConstMatMap wm(nw->data.data(), o, f);
                                 dx.noalias() += dy * wm;
                               }
                             });
}

float bilinear_at(std::span<const float> plane, int height, int width, Vec2 p) {
  const Taps t = bilinear_taps(height, width, p);
  float acc = 0.0f;
  for (int q = 0; q < t.count; ++q) acc += t.weight[q] * plane[t.index[q]];
  return acc;
}

Tensor roi_align_batch(const Tensor& fmap, std::span<const RoIBox> boxes, int pooled) {
  require(pooled >= 1, "roi_align: pooled size must be >= 1");
  require(fmap.ndim() == 3, "roi_align: feature map must be [C, H, W]");
  for (const auto& b : boxes) {
    require(b.width > 0.0 && b.height > 0.0, "roi_align: box dimensions must be positive");
  }
  const int channels = fmap.dim(0);
  const int n = static_cast<int>(boxes.size());
  const int bins = pooled * pooled;
  std::vector<Vec2> points;
  points.reserve(static_cast<std::size_t>(n) * bins);
  for (const auto& b : boxes) {
    const double bw = b.width / pooled;
    const double bh = b.height / pooled;
    const double x0 = b.center.x - 0.5 * b.width;
    const double y0 = b.center.y - 0.5 * b.height;
    for (int py = 0; py < pooled; ++py)
      for (int px = 0; px < pooled; ++px)
        points.push_back({x0 + (px + 0.5) * bw, y0 + (py + 0.5) * bh});
  }
  // Sampled as [C, N * bins], then permuted to [N, C * bins].
  Tensor sampled = sample_points(fmap, points,
                                 {channels, n * bins});
  auto src = sampled.data();
  std::vector<float> out(src.size());
  for (int c = 0; c < channels; ++c)
    for (int r = 0; r < n; ++r)
      for (int k = 0; k < bins; ++k)
        out[(static_cast<std::size_t>(r) * channels + c) * bins + k] =
            src[static_cast<std::size_t>(c) * n * bins + r * bins + k];
  return Tensor::make_result(
      {n, channels * bins}, std::move(out), {sampled},
      [channels, n, bins](Node& self) {
        auto g = self.parents[0]->grad_buffer();
        for (int c = 0; c < channels; ++c)
          for (int r = 0; r < n; ++r)
            for (int k = 0; k < bins; ++k)
              g[static_cast<std::size_t>(c) * n * bins + r * bins + k] +=
                  self.grad[(static_cast<std::size_t>(r) * channels + c) * bins + k];
      });
}

Tensor roi_align(const Tensor& fmap, const RoIBox& box, int pooled) {
  Tensor flat = roi_align_batch(fmap, std::span<const RoIBox>(&box, 1), pooled);
  return reshape(flat, {fmap.dim(0), pooled, pooled});
}

Tensor sample_segments(const Tensor& fmap,
                       std::span<const std::pair<Vec2, Vec2>> segments,
                       int samples) {
  require(samples >= 1, "sample_segments: need at least one sample");
  require(fmap.ndim() == 3, "sample_segments: feature map must be [C, H, W]");
  const int n = static_cast<int>(segments.size());
  std::vector<Vec2> points;
  points.reserve(static_cast<std::size_t>(n) * samples);
  for (const auto& [a, b] : segments) {
    for (int k = 0; k < samples; ++k) {
      const double t = (k + 0.5) / samples;
      points.push_back(a + (b - a) * t);
    }
  }
  return sample_points(fmap, points, {fmap.dim(0), n, samples});
}

Tensor binary_cross_entropy(const Tensor& probs, std::span<const float> targets) {
  require(probs.numel() == targets.size(), "binary_cross_entropy: length mismatch");
  require(!targets.empty(), "binary_cross_entropy: empty input");
  auto p = probs.data();
  const std::size_t n = targets.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double q = std::clamp(static_cast<double>(p[i]), static_cast<double>(kProbClamp),
                                1.0 - static_cast<double>(kProbClamp));
    acc -= targets[i] * std::log(q) + (1.0 - targets[i]) * std::log(1.0 - q);
  }
  std::vector<float> t(targets.begin(), targets.end());
  return Tensor::make_result(
      {}, {static_cast<float>(acc / n)}, {probs}, [t = std::move(t)](Node& self) {
        Node& parent = *self.parents[0];
        auto g = parent.grad_buffer();
        const double up = self.grad[0] / static_cast<double>(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
          const double q = parent.data[i];
          if (q < kProbClamp || q > 1.0 - kProbClamp) continue;
          g[i] += static_cast<float>(up * (-t[i] / q + (1.0 - t[i]) / (1.0 - q)));
        }
      });
}

Tensor smooth_l1_sum(const Tensor& pred, std::span<const float> targets) {
  require(pred.numel() == targets.size(), "smooth_l1_sum: length mismatch");
  auto p = pred.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double d = static_cast<double>(p[i]) - targets[i];
    acc += std::abs(d) < 1.0 ? 0.5 * d * d : std::abs(d) - 0.5;
  }
  std::vector<float> t(targets.begin(), targets.end());
  return Tensor::make_result({}, {static_cast<float>(acc)}, {pred},
                             [t = std::move(t)](Node& self) {
                               Node& parent = *self.parents[0];
                               auto g = parent.grad_buffer();
                               for (std::size_t i = 0; i < t.size(); ++i) {
                                 const double d = static_cast<double>(parent.data[i]) - t[i];
                                 const double dd = std::abs(d) < 1.0 ? d : (d > 0 ? 1.0 : -1.0);
                                 g[i] += static_cast<float>(self.grad[0] * dd);
                               }
                             });
}

}  // namespace floorpp::nn
