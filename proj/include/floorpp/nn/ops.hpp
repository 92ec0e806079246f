#pragma once

#include <span>
#include <vector>

#include "floorpp/geometry.hpp"
#include "floorpp/nn/tensor.hpp"

namespace floorpp::nn {

/// Cross-correlation of a [C, H, W] input with [O, C, kh, kw] weights.
/// Output spatial size is floor((in + 2 * pad - k) / stride) + 1.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride, int pad_h, int pad_w);
inline Tensor conv2d(const Tensor& input, const Tensor& weight,
                     const Tensor& bias, int stride, int padding) {
  return conv2d(input, weight, bias, stride, padding, padding);
}

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, float s);
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
/// Mean over the last axis; the axis is removed from the shape.
Tensor mean_last(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);
/// Picks flat elements; result has shape [indices.size()].
Tensor gather(const Tensor& x, std::span<const int> indices);
/// Nearest-neighbour 2x upsampling of a [C, H, W] tensor.
Tensor upsample2x(const Tensor& x);
/// x [N, F] times weight [O, F] transposed, plus bias [O].
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

/// Region pooled by roi_align. Coordinates are continuous cell units: cell
/// (i, j) covers [i, i+1) x [j, j+1) and its center is (i + 0.5, j + 0.5).
struct RoIBox {
  Vec2 center;
  double width = 0.0;
  double height = 0.0;
};

/// Bilinear read of channel plane `plane` ([H, W] row-major) at a cell-unit
/// coordinate. Samples outside the map read as zero.
float bilinear_at(std::span<const float> plane, int height, int width, Vec2 p);

/// One bilinear sample at the center of each of the P x P bins of every box.
/// fmap is [C, H, W]; the result is [N, C * P * P] laid out (c, py, px).
Tensor roi_align_batch(const Tensor& fmap, std::span<const RoIBox> boxes,
                       int pooled);
/// Single-box form returning [C, P, P].
Tensor roi_align(const Tensor& fmap, const RoIBox& box, int pooled);

/// Samples each segment at `samples` equally spaced bin centers.
/// Result is [C, N, samples], so a (1 x k) conv runs along each segment.
Tensor sample_segments(const Tensor& fmap,
                       std::span<const std::pair<Vec2, Vec2>> segments,
                       int samples);

/// Mean binary cross-entropy of probabilities against {0, 1} targets.
/// Probabilities are clamped to [1e-7, 1 - 1e-7].
Tensor binary_cross_entropy(const Tensor& probs, std::span<const float> targets);

/// Sum over elements of smoothL1(pred - target).
Tensor smooth_l1_sum(const Tensor& pred, std::span<const float> targets);

inline constexpr float kProbClamp = 1e-7f;

}  // namespace floorpp::nn
