#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace floorpp::nn {

using Shape = std::vector<int>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Graph node owned by one or more Tensor handles. Gradient buffers are
/// allocated lazily on first accumulation.
struct Node {
  Shape shape;
  std::vector<float> data;
  std::vector<float> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads self.grad and accumulates into the parents' grad buffers.
  std::function<void(Node& self)> backward_fn;

  bool is_leaf() const { return !backward_fn; }
  std::span<float> grad_buffer();
};

/// Row-major float32 tensor handle with reverse-mode autodiff.
///
/// Copies share the underlying node. Ops record a graph only when at least one
/// input requires a gradient and recording is enabled (see NoGradGuard).
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, float value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<float> data,
                     bool requires_grad = false);
  static Tensor scalar(float value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  int dim(int axis) const;
  int ndim() const { return static_cast<int>(shape().size()); }
  std::size_t numel() const;

  std::span<float> data();
  std::span<const float> data() const;
  float item() const;

  bool requires_grad() const;
  // Empty until backward() has reached this tensor.
  std::span<const float> grad() const;
  std::span<float> mutable_grad();
  void zero_grad();

  /// Reverse-mode pass from a scalar. Leaf gradients accumulate across calls;
  /// callers zero them between steps.
  void backward() const;

  /// Same data, no graph history.
  Tensor detach() const;

  std::shared_ptr<Node> node() const { return node_; }

  /// Builds an op result. Parents are kept in order; the backward function is
  /// attached only if some parent requires grad and recording is enabled.
  static Tensor make_result(Shape shape, std::vector<float> data,
                            std::vector<Tensor> parents,
                            std::function<void(Node&)> backward_fn);

 private:
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;
};

bool grad_enabled();

/// Disables graph recording on this thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace floorpp::nn
