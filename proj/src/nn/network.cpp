#include "floorpp/nn/network.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "floorpp/geometry.hpp"

namespace floorpp::nn {

namespace {

struct ParamSpec {
  std::string name;
  Shape shape;
  double init_std;  // 0 for biases
};

std::vector<ParamSpec> param_specs(const NetworkConfig& cfg) {
  const auto [w0, w1, w2] = cfg.widths;
  std::vector<ParamSpec> specs;
  auto conv = [&](const std::string& name, int out, int in, int kh, int kw, double gain = 1.0) {
    const double fan_in = static_cast<double>(in) * kh * kw;
    specs.push_back({name + ".weight", {out, in, kh, kw}, gain * std::sqrt(2.0 / fan_in)});
    specs.push_back({name + ".bias", {out}, 0.0});
  };
  auto fc = [&](const std::string& name, int out, int in, double gain = 1.0) {
    specs.push_back({name + ".weight", {out, in}, gain * std::sqrt(2.0 / in)});
    specs.push_back({name + ".bias", {out}, 0.0});
  };

  conv("enc0.conv1", w0, cfg.n_bins, 3, 3);
  conv("enc0.conv2", w0, w0, 3, 3);
  conv("enc1.conv1", w1, w0, 3, 3);
  conv("enc1.conv2", w1, w1, 3, 3);
  conv("enc2.conv1", w2, w1, 3, 3);
  conv("enc2.conv2", w2, w2, 3, 3);
  conv("enc3.conv1", w2, w2, 3, 3);
  conv("enc3.conv2", w2, w2, 3, 3);
  conv("dec2.conv1", w2, w2, 3, 3);
  conv("dec2.conv2", w2, w2, 3, 3);
  conv("dec1.conv1", w1, w2, 3, 3);
  conv("dec1.conv2", w1, w1, 3, 3);
  conv("dec0.conv1", w0, w1, 3, 3);
  conv("dec0.conv2", w0, w0, 3, 3);
  conv("out.conv", cfg.c_feat, w0, 3, 3);

  conv("score.conv", 1, cfg.c_feat, 1, 1, 0.5);

  fc("refine.fc1", cfg.refine_hidden, cfg.c_feat * cfg.roi_pool * cfg.roi_pool);
  fc("refine.fc2", 2, cfg.refine_hidden, 0.1);

  for (int b = 1; b <= cfg.edge_blocks; ++b) {
    const std::string base = "edge.res" + std::to_string(b);
    conv(base + ".conv1", cfg.c_feat, cfg.c_feat, 1, 3);
    conv(base + ".conv2", cfg.c_feat, cfg.c_feat, 1, 3, 0.1);
  }
  conv("edge.cls", 1, cfg.c_feat, 1, 1, 0.5);
  return specs;
}

Tensor conv_relu(const Tensor& x, const NetworkParams& p, const std::string& name,
                 int stride) {
  return relu(conv2d(x, p.at(name + ".weight"), p.at(name + ".bias"), stride, 1));
}

}  // namespace

NetworkConfig NetworkConfig::infer(const NetworkParams& params) {
  NetworkConfig cfg;
  const auto& e0 = params.at("enc0.conv1.weight");
  cfg.n_bins = e0.dim(1);
  cfg.widths = {e0.dim(0), params.at("enc1.conv1.weight").dim(0),
                params.at("enc2.conv1.weight").dim(0)};
  cfg.c_feat = params.at("out.conv.weight").dim(0);
  cfg.refine_hidden = params.at("refine.fc1.weight").dim(0);
  const int roi_features = params.at("refine.fc1.weight").dim(1);
  const int bins = roi_features / cfg.c_feat;
  cfg.roi_pool = static_cast<int>(std::lround(std::sqrt(static_cast<double>(bins))));
  if (cfg.roi_pool * cfg.roi_pool * cfg.c_feat != roi_features) {
    throw FormatError("refine.fc1.weight does not match a square RoI pool");
  }
  cfg.edge_blocks = 0;
  while (params.contains("edge.res" + std::to_string(cfg.edge_blocks + 1) + ".conv1.weight")) {
    ++cfg.edge_blocks;
  }
  return cfg;
}

void NetworkParams::add(std::string name, Tensor t) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter name " + name);
  entries_.emplace_back(std::move(name), std::move(t));
}

const Tensor& NetworkParams::at(const std::string& name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return t;
  throw std::out_of_range("missing parameter " + name);
}

bool NetworkParams::contains(const std::string& name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return true;
  return false;
}

void NetworkParams::zero_grad() {
  for (auto& [n, t] : entries_) t.zero_grad();
}

std::size_t NetworkParams::parameter_count() const {
  std::size_t total = 0;
  for (const auto& [n, t] : entries_) total += t.numel();
  return total;
}

bool NetworkParams::all_finite() const {
  for (const auto& [n, t] : entries_)
    for (float v : t.data())
      if (!std::isfinite(v)) return false;
  return true;
}

std::vector<std::string> NetworkParams::names_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [n, t] : entries_)
    if (n.rfind(prefix, 0) == 0) out.push_back(n);
  return out;
}

NetworkParams init_params(const NetworkConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  NetworkParams params;
  for (const auto& spec : param_specs(cfg)) {
    std::vector<float> data(numel(spec.shape), 0.0f);
    if (spec.init_std > 0.0) {
      std::normal_distribution<double> dist(0.0, spec.init_std);
      for (auto& v : data) v = static_cast<float>(dist(rng));
    }
    params.add(spec.name, Tensor::from(spec.shape, std::move(data), true));
  }
  return params;
}

NetworkParams zero_params(const NetworkConfig& cfg) {
  NetworkParams params;
  for (const auto& spec : param_specs(cfg)) {
    params.add(spec.name, Tensor::zeros(spec.shape, true));
  }
  return params;
}

Tensor forward_backbone(const Tensor& tile, const NetworkParams& p) {
  if (tile.ndim() != 3 || tile.dim(1) % 8 != 0 || tile.dim(2) % 8 != 0) {
    throw std::invalid_argument("forward_backbone: tile must be [bins, S, S] with S % 8 == 0, got " +
                                shape_str(tile.shape()));
  }
  Tensor e0 = conv_relu(conv_relu(tile, p, "enc0.conv1", 1), p, "enc0.conv2", 1);
  Tensor e1 = conv_relu(conv_relu(e0, p, "enc1.conv1", 2), p, "enc1.conv2", 1);
  Tensor e2 = conv_relu(conv_relu(e1, p, "enc2.conv1", 2), p, "enc2.conv2", 1);
  Tensor e3 = conv_relu(conv_relu(e2, p, "enc3.conv1", 2), p, "enc3.conv2", 1);

  auto up_level = [&](const Tensor& coarse, const Tensor& skip, const std::string& name) {
    Tensor u = conv_relu(upsample2x(coarse), p, name + ".conv1", 1);
    return conv_relu(add(u, skip), p, name + ".conv2", 1);
  };
  Tensor d2 = up_level(e3, e2, "dec2");
  Tensor d1 = up_level(d2, e1, "dec1");
  Tensor d0 = up_level(d1, e0, "dec0");
  return conv_relu(d0, p, "out.conv", 1);
}

Tensor corner_score_head(const Tensor& fmap, const NetworkParams& p) {
  return sigmoid(conv2d(fmap, p.at("score.conv.weight"), p.at("score.conv.bias"), 1, 0));
}

Tensor corner_refine_head(const Tensor& roi_feats, const NetworkParams& p, double box_side) {
  Tensor h = relu(linear(roi_feats, p.at("refine.fc1.weight"), p.at("refine.fc1.bias")));
  Tensor o = tanh(linear(h, p.at("refine.fc2.weight"), p.at("refine.fc2.bias")));
  return scale(o, static_cast<float>(0.5 * box_side));
}

Tensor edge_head(const Tensor& edge_samples, const NetworkParams& p) {
  const int n = edge_samples.dim(1);
  Tensor x = edge_samples;
  for (int b = 1; p.contains("edge.res" + std::to_string(b) + ".conv1.weight"); ++b) {
    const std::string base = "edge.res" + std::to_string(b);
    Tensor h = relu(conv2d(x, p.at(base + ".conv1.weight"), p.at(base + ".conv1.bias"), 1, 0, 1));
    h = conv2d(h, p.at(base + ".conv2.weight"), p.at(base + ".conv2.bias"), 1, 0, 1);
    x = relu(add(x, h));
  }
  // A 1x1 projection before the average pool equals pool-then-linear.
  Tensor logits = conv2d(x, p.at("edge.cls.weight"), p.at("edge.cls.bias"), 1, 0);
  return sigmoid(reshape(mean_last(logits), {n}));
}

// --- checkpoint ------------------------------------------------------------

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  using U = std::make_unsigned_t<T>;
  U u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      u |= static_cast<std::make_unsigned_t<T>>(bytes_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }
  std::string get_string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError("FPPN checkpoint truncated");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const NetworkParams& params) {
  std::vector<std::uint8_t> out{'F', 'P', 'P', 'N'};
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params.entries()) {
    if (name.size() > 0xFFFF) throw std::invalid_argument("parameter name too long");
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(t.ndim()));
    for (int d : t.shape()) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    for (float v : t.data()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

NetworkParams decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.get_string(4) != "FPPN") throw FormatError("not an FPPN checkpoint (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported FPPN checkpoint version " + std::to_string(version));
  }
  const auto count = r.get<std::uint32_t>();
  NetworkParams params;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto len = r.get<std::uint16_t>();
    std::string name = r.get_string(len);
    const auto ndim = r.get<std::uint8_t>();
    Shape shape(ndim);
    for (auto& d : shape) {
      const auto v = r.get<std::uint32_t>();
      if (v > 1u << 30) throw FormatError("implausible dimension in " + name);
      d = static_cast<int>(v);
    }
    std::vector<float> data(numel(shape));
    for (auto& v : data) {
      v = std::bit_cast<float>(r.get<std::uint32_t>());
      if (!std::isfinite(v)) throw FormatError("non-finite value in parameter " + name);
    }
    if (params.contains(name)) throw FormatError("duplicate parameter " + name);
    params.add(std::move(name), Tensor::from(std::move(shape), std::move(data), true));
  }
  if (!r.done()) throw FormatError("trailing bytes after FPPN checkpoint");
  return params;
}

void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

NetworkParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

// --- optimizer -------------------------------------------------------------

void Adam::step(NetworkParams& params) {
  const auto& entries = params.entries();
  if (m_.empty()) {
    for (const auto& [n, t] : entries) {
      m_.emplace_back(t.numel(), 0.0f);
      v_.emplace_back(t.numel(), 0.0f);
    }
  }
  if (m_.size() != entries.size()) throw std::logic_error("Adam: parameter set changed");
  ++step_count_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
  for (std::size_t k = 0; k < entries.size(); ++k) {
    Tensor t = entries[k].second;
    auto g = t.grad();
    if (g.empty()) continue;
    auto w = t.data();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = static_cast<float>(beta1_ * m[i] + (1.0 - beta1_) * g[i]);
      v[i] = static_cast<float>(beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i]);
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= static_cast<float>(lr_ * mhat / (std::sqrt(vhat) + eps_));
    }
  }
}

}  // namespace floorpp::nn
