#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "floorpp/nn/ops.hpp"
#include "floorpp/nn/tensor.hpp"

namespace floorpp::nn {

class NetworkParams;

/// Architecture hyper-parameters. Everything except the refinement scale can
/// be recovered from a parameter set (see NetworkConfig::infer).
struct NetworkConfig {
  int n_bins = 32;
  std::array<int, 3> widths{16, 32, 64};
  int c_feat = 32;
  int roi_pool = 7;       // P for corner RoIs
  int edge_samples = 16;  // P_e along an edge
  int refine_hidden = 64;
  int edge_blocks = 3;

  static NetworkConfig infer(const NetworkParams& params);
};

/// Ordered, uniquely named parameter tensors.
class NetworkParams {
 public:
  void add(std::string name, Tensor t);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::size_t size() const { return entries_.size(); }
  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }

  void zero_grad();
  std::size_t parameter_count() const;
  bool all_finite() const;
  /// Names of the parameters whose name starts with `prefix`.
  std::vector<std::string> names_with_prefix(const std::string& prefix) const;

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

/// He-normal weights from a seeded generator, zero biases.
NetworkParams init_params(const NetworkConfig& cfg, std::uint64_t seed);
/// All-zero parameters with the same names and shapes.
NetworkParams zero_params(const NetworkConfig& cfg);

/// 3-level encoder-decoder. tile is [n_bins, S, S] with S divisible by 8;
/// returns the [c_feat, S, S] feature map.
Tensor forward_backbone(const Tensor& tile, const NetworkParams& params);

/// 1x1 conv + sigmoid, [1, S, S].
Tensor corner_score_head(const Tensor& fmap, const NetworkParams& params);

/// roi_feats [N, c_feat * P * P] -> [N, 2] offsets (dx, dy) in cell units,
/// bounded by +-box_side / 2.
Tensor corner_refine_head(const Tensor& roi_feats, const NetworkParams& params,
                          double box_side);

/// edge_samples [c_feat, N, P_e] -> [N] scores in (0, 1).
Tensor edge_head(const Tensor& edge_samples, const NetworkParams& params);

/// Checkpoint I/O in the FPPN binary format: "FPPN", u32 version (1),
/// u32 count, then per parameter u16 name length, name bytes, u8 ndim,
/// u32 dims, little-endian float32 data.
void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path);
NetworkParams load_checkpoint(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_checkpoint(const NetworkParams& params);
NetworkParams decode_checkpoint(std::span<const std::uint8_t> bytes);

/// Adam with bias correction. State is keyed by position in the parameter set.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }
  void step(NetworkParams& params);

 private:
  double lr_, beta1_, beta2_, eps_;
  long step_count_ = 0;
  std::vector<std::vector<float>> m_, v_;
};

}  // namespace floorpp::nn
