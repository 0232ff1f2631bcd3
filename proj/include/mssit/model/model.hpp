#pragma once

#include <array>
#include <string>
#include <vector>

#include "mssit/atlas.hpp"
#include "mssit/model/config.hpp"
#include "mssit/model/state.hpp"
#include "mssit/tensor/ops.hpp"

namespace mssit {

// Window layout for one level: tokens are contiguous 64-token (or global)
// ranges, shifting is a cyclic roll of the sequence.
struct WindowSpec {
  std::size_t window_size = 0;
  std::size_t shift_offset = 0;
  const std::vector<std::uint32_t>* roll_fwd = nullptr;
  const std::vector<std::uint32_t>* roll_back = nullptr;
};

inline WindowSpec window_spec(const SurfaceAtlas& atlas, int level) {
  WindowSpec spec;
  spec.window_size = atlas.maps.window_size[level];
  spec.shift_offset = atlas.maps.shift_offset[level];
  spec.roll_fwd = &atlas.roll_fwd[level];
  spec.roll_back = &atlas.roll_back[level];
  return spec;
}

template <typename T>
struct ForwardStats {
  std::size_t attention_score_entries = 0;       // allocated softmax entries
  std::vector<std::vector<T>> attention_probs;   // per-head capture, filled on request
};

template <typename T>
struct ForwardOptions {
  bool training = false;
  Rng* dropout_rng = nullptr;
  ForwardStats<T>* stats = nullptr;
  bool capture_attention = false;  // record the last global W-MHSA softmax
};

// --- core blocks -------------------------------------------------------------

namespace detail {

template <typename T>
Tensor<T> linear(Tape<T>* tape, const Tensor<T>& x, const ModelState<T>& state,
                 const std::string& prefix) {
  return add_rowvec(tape, matmul(tape, x, state.params.get(prefix + ".w")),
                    state.params.get(prefix + ".b"));
}

template <typename T>
Tensor<T> norm(Tape<T>* tape, const Tensor<T>& x, const ModelState<T>& state,
               const std::string& prefix) {
  return layer_norm(tape, x, state.params.get(prefix + ".g"),
                    state.params.get(prefix + ".b"));
}

}  // namespace detail

// Scaled dot-product multi-head attention within non-overlapping windows.
// The shifted variant rolls the sequence forward before attention and rolls
// the result back, so cross-window terms never appear inside a window.
template <typename T>
Tensor<T> window_mhsa(Tape<T>* tape, const Tensor<T>& tokens, const WindowSpec& spec,
                      int heads, const ModelState<T>& state, const std::string& prefix,
                      bool shifted, ForwardOptions<T>* opts = nullptr,
                      bool capture_here = false) {
  require(tokens.rank() == 2, "window_mhsa expects [N x d] tokens");
  const std::size_t n = tokens.size(0), d = tokens.size(1);
  require(spec.window_size > 0 && n % spec.window_size == 0,
          "sequence length not divisible into windows");
  require(heads > 0 && d % heads == 0, "heads must divide the token dim");
  const std::size_t w = spec.window_size;
  const std::size_t windows = n / w;
  const std::size_t hd = d / heads;
  const bool roll = shifted && spec.shift_offset > 0;

  Tensor<T> x = tokens;
  if (roll) x = gather_rows(tape, x, *spec.roll_fwd);

  const Tensor<T> qkv = detail::linear(tape, x, state, prefix + ".qkv");
  const Tensor<T> q = slice_cols(tape, qkv, 0, d);
  const Tensor<T> k = slice_cols(tape, qkv, d, d);
  const Tensor<T> v = slice_cols(tape, qkv, 2 * d, d);

  const T inv_sqrt = static_cast<T>(1.0 / std::sqrt(static_cast<double>(hd)));
  std::vector<Tensor<T>> head_outputs;
  head_outputs.reserve(heads);
  for (int h = 0; h < heads; ++h) {
    Tensor<T> qh = reshape(tape, slice_cols(tape, q, h * hd, hd), {windows, w, hd});
    Tensor<T> kh = reshape(tape, slice_cols(tape, k, h * hd, hd), {windows, w, hd});
    Tensor<T> vh = reshape(tape, slice_cols(tape, v, h * hd, hd), {windows, w, hd});
    Tensor<T> scores =
        scale(tape, matmul(tape, qh, transpose_last2(tape, kh)), inv_sqrt);
    Tensor<T> probs = softmax_last(tape, scores);
    if (opts != nullptr && opts->stats != nullptr) {
      opts->stats->attention_score_entries += probs.numel();
      if (capture_here && opts->capture_attention)
        opts->stats->attention_probs.push_back(probs.values());
    }
    Tensor<T> ctx = matmul(tape, probs, vh);
    head_outputs.push_back(reshape(tape, ctx, {n, hd}));
  }
  Tensor<T> merged = heads == 1 ? head_outputs[0] : concat_last(tape, head_outputs);
  Tensor<T> out = detail::linear(tape, merged, state, prefix + ".out");
  if (roll) out = gather_rows(tape, out, *spec.roll_back);
  return out;
}

template <typename T>
Tensor<T> ffn(Tape<T>* tape, const Tensor<T>& x, const ModelState<T>& state,
              const std::string& prefix) {
  Tensor<T> h = gelu(tape, detail::linear(tape, x, state, prefix + ".ffn1"));
  return detail::linear(tape, h, state, prefix + ".ffn2");
}

// One attention layer: W- or SW-MHSA plus its feed-forward, with residuals.
// Pre-norm by default; post-norm kept as a config switch.
template <typename T>
Tensor<T> attention_layer(Tape<T>* tape, Tensor<T> x, const WindowSpec& spec,
                          int heads, const ModelConfig& cfg, const ModelState<T>& state,
                          const std::string& prefix, bool shifted,
                          ForwardOptions<T>* opts = nullptr, bool capture_here = false) {
  if (cfg.norm_placement == NormPlacement::kPre) {
    Tensor<T> a = window_mhsa(tape, detail::norm(tape, x, state, prefix + ".ln1"), spec,
                              heads, state, prefix, shifted, opts, capture_here);
    x = add(tape, x, a);
    Tensor<T> f = ffn(tape, detail::norm(tape, x, state, prefix + ".ln2"), state, prefix);
    return add(tape, x, f);
  }
  Tensor<T> a =
      window_mhsa(tape, x, spec, heads, state, prefix, shifted, opts, capture_here);
  x = detail::norm(tape, add(tape, x, a), state, prefix + ".ln1");
  Tensor<T> f = ffn(tape, x, state, prefix);
  return detail::norm(tape, add(tape, x, f), state, prefix + ".ln2");
}

// One W+SW pair: X_hat = W-MSA(LN(X)) + X; Z = FFN(LN(X_hat)) + X_hat;
// Z_hat = SW-MSA(LN(Z)) + Z; out = FFN(LN(Z_hat)) + Z_hat.
template <typename T>
Tensor<T> local_mhsa_block(Tape<T>* tape, Tensor<T> x, const WindowSpec& spec, int heads,
                           const ModelConfig& cfg, const ModelState<T>& state,
                           const std::string& prefix, int first_layer,
                           bool allow_shift = true) {
  x = attention_layer(tape, x, spec, heads, cfg, state,
                      prefix + ".blk" + std::to_string(first_layer), false);
  x = attention_layer(tape, x, spec, heads, cfg, state,
                      prefix + ".blk" + std::to_string(first_layer + 1), allow_shift);
  return x;
}

// Positional embedding, LayerNorm and dropout applied to the flattened
// sequence before the encoder levels.
template <typename T>
Tensor<T> embed_input(Tape<T>* tape, const Tensor<T>& sequence, const ModelState<T>& state,
                      const ModelConfig& cfg, ForwardOptions<T>* opts = nullptr) {
  const Tensor<T>& pos = state.params.get("pos_embedding");
  require(sequence.shape() == pos.shape(), "sequence width does not match embedding");
  Tensor<T> x = embedding_add(tape, sequence, pos);
  x = detail::norm(tape, x, state, "embed_ln");
  const bool training = opts != nullptr && opts->training;
  if (training && cfg.dropout_rate > 0.0) {
    require(opts->dropout_rng != nullptr, "training forward needs a dropout stream");
    x = dropout(tape, x, 1.0 - cfg.dropout_rate, *opts->dropout_rng);
  }
  return x;
}

template <typename T>
struct EncoderOutput {
  Tensor<T> pooled;                    // [level_dim(4)]
  std::array<Tensor<T>, 5> pyramid;    // pre-merge outputs per level (1..4)
};

// The 4-level hierarchy: per level a linear projection, LayerNorm, the
// W/SW-alternating attention layers, then patch merging (omitted in the last
// level, where the sequence is mean-pooled into a single token).
template <typename T>
EncoderOutput<T> encoder_forward(Tape<T>* tape, const Tensor<T>& sequence,
                                 const SurfaceAtlas& atlas, const ModelConfig& cfg,
                                 const ModelState<T>& state,
                                 ForwardOptions<T>* opts = nullptr) {
  require(sequence.rank() == 2 &&
              sequence.size(0) == static_cast<std::size_t>(atlas.maps.level_length[1]) &&
              sequence.size(1) == static_cast<std::size_t>(cfg.token_width()),
          "encoder input must be [20480 x 6C]");
  EncoderOutput<T> out;
  Tensor<T> x = embed_input(tape, sequence, state, cfg, opts);
  for (int l = 1; l <= 4; ++l) {
    const std::string p = "enc" + std::to_string(l);
    const WindowSpec spec = window_spec(atlas, l);
    x = detail::linear(tape, x, state, p + ".proj");
    x = detail::norm(tape, x, state, p + ".proj_ln");
    const int layers = cfg.layers_at(l);
    const int last_w_layer = (layers - 1) & ~1;  // last even index
    for (int i = 0; i < layers; ++i) {
      // Alternate W / SW. The global level has a single window, so the
      // shift would be an exact no-op; run it unshifted.
      const bool shifted = (i % 2 == 1) && l < 4;
      const bool capture_here = l == 4 && i == last_w_layer;
      x = attention_layer(tape, x, spec, cfg.heads[l - 1], cfg, state,
                          p + ".blk" + std::to_string(i), shifted, opts, capture_here);
    }
    out.pyramid[l] = x;
    if (l < 4) {
      // Merge 4 sibling tokens: with contiguous child ordering this is a
      // pure reshape to [N/4 x 4d].
      x = reshape(tape, x, {x.size(0) / 4, 4 * x.size(1)});
      x = detail::norm(tape, x, state, p + ".merge_ln");
    }
  }
  out.pooled = mean_rows(tape, x);
  return out;
}

// Affine map from the pooled token to the regression output.
template <typename T>
Tensor<T> regression_head(Tape<T>* tape, const Tensor<T>& pooled,
                          const ModelState<T>& state) {
  const Tensor<T>& w = state.params.get("head.w");
  require(pooled.rank() == 1 && pooled.size(0) == w.size(0),
          "pooled width does not match the head");
  Tensor<T> row = reshape(tape, pooled, {1, pooled.size(0)});
  Tensor<T> y = add_rowvec(tape, matmul(tape, row, w), state.params.get("head.b"));
  return reshape(tape, y, {w.size(1)});
}

template <typename T>
Tensor<T> regression_forward(Tape<T>* tape, const Tensor<T>& sequence,
                             const SurfaceAtlas& atlas, const ModelConfig& cfg,
                             const ModelState<T>& state,
                             ForwardOptions<T>* opts = nullptr) {
  return regression_head(tape, encoder_forward(tape, sequence, atlas, cfg, state, opts).pooled,
                         state);
}

// U-shaped variant: decoder mirrors the encoder levels I2 -> I3 -> I4 -> I5
// with patch partition, a skip concatenation from the matching pyramid
// output, a linear reduction and the level's attention layers; the final
// 20480-token features are averaged onto the 40962 vertices and mapped to
// class logits.
template <typename T>
Tensor<T> segmentation_forward(Tape<T>* tape, const Tensor<T>& sequence,
                               const SurfaceAtlas& atlas, const ModelConfig& cfg,
                               const ModelState<T>& state,
                               ForwardOptions<T>* opts = nullptr) {
  require(cfg.segmentation(), "segmentation_forward needs num_classes >= 2");
  EncoderOutput<T> enc = encoder_forward(tape, sequence, atlas, cfg, state, opts);
  Tensor<T> x = enc.pyramid[4];  // [320 x level_dim(4)]
  for (int l = 3; l >= 1; --l) {
    const std::string p = "dec" + std::to_string(l);
    // patch partition: [M x 4D] -> [4M x D]
    x = reshape(tape, x, {x.size(0) * 4, x.size(1) / 4});
    x = concat_last(tape, {x, enc.pyramid[l]});
    x = detail::linear(tape, x, state, p + ".reduce");
    x = detail::norm(tape, x, state, p + ".reduce_ln");
    const WindowSpec spec = window_spec(atlas, l);
    for (int i = 0; i < cfg.decoder_layers_at(l); ++i) {
      const bool shifted = i % 2 == 1;
      x = attention_layer(tape, x, spec, cfg.heads[l - 1], cfg, state,
                          p + ".blk" + std::to_string(i), shifted, opts);
    }
  }
  Tensor<T> vertex_features = sparse_row_mix(tape, atlas.patch_to_vertex, x);
  return detail::linear(tape, vertex_features, state, "seg_head");  // [40962 x K]
}

// Attention weights of the final global W-MHSA, averaged over heads and query
// tokens, broadcast to the ico6 vertices through the face hierarchy and
// min-max normalised to [0, 1].
template <typename T>
std::vector<T> extract_attention(const Tensor<T>& sequence, const SurfaceAtlas& atlas,
                                 const ModelConfig& cfg, const ModelState<T>& state) {
  ForwardStats<T> stats;
  ForwardOptions<T> opts;
  opts.stats = &stats;
  opts.capture_attention = true;
  encoder_forward<T>(nullptr, sequence, atlas, cfg, state, &opts);
  if (stats.attention_probs.empty())
    throw DataError("no global attention layer available for extraction");

  const std::size_t n = atlas.maps.level_length[4];
  std::vector<double> token_weight(n, 0.0);
  for (const auto& probs : stats.attention_probs) {
    require(probs.size() == n * n, "unexpected attention capture shape");
    for (std::size_t q = 0; q < n; ++q)
      for (std::size_t kk = 0; kk < n; ++kk)
        token_weight[kk] += static_cast<double>(probs[q * n + kk]);
  }
  const double denom = static_cast<double>(stats.attention_probs.size()) * n;
  for (auto& v : token_weight) v /= denom;

  // Broadcast one weight per I2 face to its descendant patches, then average
  // onto vertices with the shared cover matrix.
  const std::size_t patches = atlas.maps.patch_vertices.size();
  Tensor<T> patch_w = Tensor<T>::zeros({patches, 1});
  for (std::size_t p = 0; p < patches; ++p)
    patch_w.data()[p] = static_cast<T>(token_weight[p / 64]);
  Tensor<T> vertex_w = sparse_row_mix<T>(nullptr, atlas.patch_to_vertex, patch_w);

  std::vector<T> out(vertex_w.values());
  T lo = out[0], hi = out[0];
  for (T v : out) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (static_cast<double>(hi - lo) < 1e-12) {
    std::fill(out.begin(), out.end(), T{0});
  } else {
    for (T& v : out) v = (v - lo) / (hi - lo);
  }
  return out;
}

}  // namespace mssit
