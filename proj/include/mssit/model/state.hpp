#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "mssit/io.hpp"
#include "mssit/model/config.hpp"
#include "mssit/rng.hpp"
#include "mssit/tensor/tensor.hpp"

namespace mssit {

// Ordered collection of named parameter tensors. Iteration order is creation
// order, which fixes the checkpoint layout and the optimiser walk.
template <typename T>
class ParamStore {
 public:
  Tensor<T>& add(const std::string& name, Tensor<T> tensor) {
    require(index_.find(name) == index_.end(), "duplicate parameter name");
    index_[name] = items_.size();
    items_.push_back({name, std::move(tensor)});
    return items_.back().tensor;
  }

  bool has(const std::string& name) const { return index_.count(name) != 0; }

  Tensor<T>& get(const std::string& name) {
    const auto it = index_.find(name);
    if (it == index_.end()) throw DataError("missing parameter: " + name);
    return items_[it->second].tensor;
  }
  const Tensor<T>& get(const std::string& name) const {
    const auto it = index_.find(name);
    if (it == index_.end()) throw DataError("missing parameter: " + name);
    return items_[it->second].tensor;
  }

  std::vector<NamedTensor<T>>& items() { return items_; }
  const std::vector<NamedTensor<T>>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }

  std::size_t total_elements() const {
    std::size_t n = 0;
    for (const auto& it : items_) n += it.tensor.numel();
    return n;
  }

  void zero_grads() {
    for (auto& it : items_) it.tensor.zero_grad();
  }

 private:
  std::vector<NamedTensor<T>> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

// All learnable tensors of the network, discoverable by name.
template <typename T>
struct ModelState {
  ParamStore<T> params;
};

namespace detail {

template <typename T>
Tensor<T> init_weight(Shape shape, Rng& rng, double sigma = 0.02) {
  Tensor<T> t = Tensor<T>::zeros(std::move(shape));
  for (auto& v : t.values()) v = static_cast<T>(rng.truncated_normal(sigma));
  t.set_requires_grad();
  return t;
}

template <typename T>
Tensor<T> init_const(Shape shape, T value) {
  Tensor<T> t = Tensor<T>::zeros(std::move(shape));
  for (auto& v : t.values()) v = value;
  t.set_requires_grad();
  return t;
}

template <typename T>
void add_layer_norm(ParamStore<T>& ps, const std::string& prefix, std::size_t width) {
  ps.add(prefix + ".g", init_const<T>({width}, T{1}));
  ps.add(prefix + ".b", init_const<T>({width}, T{0}));
}

template <typename T>
void add_linear(ParamStore<T>& ps, const std::string& prefix, std::size_t in,
                std::size_t out, Rng& rng) {
  ps.add(prefix + ".w", init_weight<T>({in, out}, rng));
  ps.add(prefix + ".b", init_const<T>({out}, T{0}));
}

template <typename T>
void add_attention_layer(ParamStore<T>& ps, const std::string& prefix, std::size_t d,
                         std::size_t ffn_dim, Rng& rng) {
  add_layer_norm(ps, prefix + ".ln1", d);
  add_linear(ps, prefix + ".qkv", d, 3 * d, rng);
  add_linear(ps, prefix + ".out", d, d, rng);
  add_layer_norm(ps, prefix + ".ln2", d);
  add_linear(ps, prefix + ".ffn1", d, ffn_dim, rng);
  add_linear(ps, prefix + ".ffn2", ffn_dim, d, rng);
}

}  // namespace detail

// Creates and initialises every parameter: truncated normal (sigma 0.02) for
// projection matrices, zeros for biases and the positional embedding, ones
// for LayerNorm gains. Creation order is fixed so a seed fully determines the
// state.
template <typename T>
ModelState<T> init_model_state(const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  ModelState<T> state;
  ParamStore<T>& ps = state.params;

  const std::size_t seq_len = ico_face_count(5);
  const std::size_t tw = cfg.token_width();
  ps.add("pos_embedding", detail::init_const<T>({seq_len, tw}, T{0}));
  detail::add_layer_norm(ps, "embed_ln", tw);

  for (int l = 1; l <= 4; ++l) {
    const std::string p = "enc" + std::to_string(l);
    const std::size_t d = cfg.level_dim(l);
    const std::size_t in_w = l == 1 ? tw : 4 * cfg.level_dim(l - 1);
    const std::size_t ffn_dim = static_cast<std::size_t>(cfg.ffn_ratio * d);
    detail::add_linear(ps, p + ".proj", in_w, d, rng);
    detail::add_layer_norm(ps, p + ".proj_ln", d);
    for (int i = 0; i < cfg.layers_at(l); ++i)
      detail::add_attention_layer(ps, p + ".blk" + std::to_string(i), d, ffn_dim, rng);
    if (l < 4) detail::add_layer_norm(ps, p + ".merge_ln", 4 * d);
  }

  if (cfg.segmentation()) {
    for (int l = 3; l >= 1; --l) {
      const std::string p = "dec" + std::to_string(l);
      const std::size_t d = cfg.level_dim(l);
      const std::size_t in_w = cfg.level_dim(l + 1) / 4 + d;  // partition + skip
      const std::size_t ffn_dim = static_cast<std::size_t>(cfg.ffn_ratio * d);
      detail::add_linear(ps, p + ".reduce", in_w, d, rng);
      detail::add_layer_norm(ps, p + ".reduce_ln", d);
      for (int i = 0; i < cfg.decoder_layers_at(l); ++i)
        detail::add_attention_layer(ps, p + ".blk" + std::to_string(i), d, ffn_dim, rng);
    }
    detail::add_linear(ps, "seg_head", cfg.level_dim(1), cfg.num_classes, rng);
  } else {
    detail::add_linear(ps, "head", cfg.level_dim(4), cfg.regression_dim, rng);
  }
  return state;
}

// Trainable parameters of the encoder path (everything feeding the pooled
// representation): excludes task heads and the segmentation decoder.
template <typename T>
std::size_t encoder_parameter_count(const ModelState<T>& state) {
  std::size_t n = 0;
  for (const auto& [name, tensor] : state.params.items()) {
    if (name.rfind("dec", 0) == 0 || name.rfind("head", 0) == 0 ||
        name.rfind("seg_head", 0) == 0)
      continue;
    n += tensor.numel();
  }
  return n;
}

template <typename T>
void save_model(const std::string& path, const ModelConfig& cfg,
                const ModelState<T>& state) {
  write_checkpoint(path, state.params.items());
  cfg.to_kv().save(path + ".cfg");
}

template <typename T>
std::pair<ModelConfig, ModelState<T>> load_model(const std::string& path) {
  const ModelConfig cfg = ModelConfig::from_kv(io::KeyValueFile::load(path + ".cfg"));
  Rng rng(0);
  ModelState<T> state = init_model_state<T>(cfg, rng);
  auto records = read_checkpoint<T>(path);
  std::size_t matched = 0;
  for (auto& [name, tensor] : records) {
    if (!state.params.has(name)) throw DataError("unexpected checkpoint tensor: " + name);
    Tensor<T>& dst = state.params.get(name);
    if (dst.shape() != tensor.shape())
      throw DataError("checkpoint shape mismatch for " + name);
    dst.values() = tensor.values();
    ++matched;
  }
  if (matched != state.params.size())
    throw DataError("checkpoint is missing parameters for this config");
  return {cfg, std::move(state)};
}

}  // namespace mssit
