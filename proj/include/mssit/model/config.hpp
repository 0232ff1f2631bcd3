#pragma once

#include <array>
#include <sstream>
#include <string>

#include "mssit/common.hpp"
#include "mssit/io.hpp"

namespace mssit {

enum class DepthUnit {
  kAttentionLayers,  // depths count individual W/SW attention layers
  kBlockPairs,       // depths count W+SW pairs (twice the layers)
};

enum class NormPlacement { kPre, kPost };

// Architecture hyperparameters. Defaults give the 4-level network with
// {2,2,6,2} attention layers, {3,6,12,24} heads and base dim 96.
struct ModelConfig {
  int base_dim = 96;
  std::array<int, 4> depths = {2, 2, 6, 2};
  std::array<int, 4> heads = {3, 6, 12, 24};
  double ffn_ratio = 4.0;
  int in_channels = 4;
  int regression_dim = 1;
  int num_classes = 0;  // 0 selects the regression head
  double shift_fraction = 0.5;
  double dropout_rate = 0.1;  // after the positional embedding
  DepthUnit depth_unit = DepthUnit::kAttentionLayers;
  NormPlacement norm_placement = NormPlacement::kPre;
  std::array<int, 3> decoder_depths = {2, 2, 2};  // decoder levels 3, 2, 1

  int token_width() const { return 6 * in_channels; }
  int level_dim(int level) const { return base_dim << (level - 1); }
  int layers_at(int level) const {
    const int d = depths[level - 1];
    return depth_unit == DepthUnit::kAttentionLayers ? d : 2 * d;
  }
  int decoder_layers_at(int level) const {
    // decoder_depths is ordered for levels {3, 2, 1}
    const int d = decoder_depths[3 - level];
    return depth_unit == DepthUnit::kAttentionLayers ? d : 2 * d;
  }
  bool segmentation() const { return num_classes > 0; }

  void validate() const {
    require(base_dim >= 1, "base_dim must be positive");
    require(in_channels >= 1, "in_channels must be positive");
    require(ffn_ratio > 0.0, "ffn_ratio must be positive");
    require(shift_fraction >= 0.0 && shift_fraction <= 1.0,
            "shift_fraction must be in [0, 1]");
    require(dropout_rate >= 0.0 && dropout_rate < 1.0, "dropout rate in [0, 1)");
    require(num_classes == 0 || num_classes >= 2, "num_classes must be 0 or >= 2");
    require(regression_dim >= 1, "regression_dim must be positive");
    for (int l = 1; l <= 4; ++l) {
      require(heads[l - 1] >= 1, "head count must be positive");
      require(level_dim(l) % heads[l - 1] == 0, "heads must divide the level dim");
      require(layers_at(l) >= 1, "each level needs at least one attention layer");
      // W/SW alternation pairs up except at the global level, where the
      // shift is a no-op.
      if (shift_fraction > 0.0 && l < 4)
        require(layers_at(l) % 2 == 0, "depths must be even when shifts are enabled");
    }
    if (segmentation())
      for (int l = 1; l <= 3; ++l)
        require(decoder_layers_at(l) >= 1, "decoder levels need at least one layer");
  }

  io::KeyValueFile to_kv() const {
    io::KeyValueFile kv;
    auto join4 = [](const std::array<int, 4>& a) {
      std::ostringstream os;
      os << a[0] << "," << a[1] << "," << a[2] << "," << a[3];
      return os.str();
    };
    kv.set("base_dim", base_dim);
    kv.set("depths", join4(depths));
    kv.set("heads", join4(heads));
    kv.set("ffn_ratio", ffn_ratio);
    kv.set("channels", in_channels);
    kv.set("regression_dim", regression_dim);
    kv.set("num_classes", num_classes);
    kv.set("shift_fraction", shift_fraction);
    kv.set("dropout", dropout_rate);
    kv.set("depth_unit",
           depth_unit == DepthUnit::kAttentionLayers ? "layers" : "pairs");
    kv.set("norm_placement", norm_placement == NormPlacement::kPre ? "pre" : "post");
    std::ostringstream dd;
    dd << decoder_depths[0] << "," << decoder_depths[1] << "," << decoder_depths[2];
    kv.set("decoder_depths", dd.str());
    return kv;
  }

  static ModelConfig from_kv(const io::KeyValueFile& kv) {
    ModelConfig cfg;
    auto parse_list = [](const std::string& s, int* out, std::size_t n) {
      std::istringstream is(s);
      std::string item;
      std::size_t i = 0;
      while (std::getline(is, item, ',') && i < n) out[i++] = std::stoi(item);
      require(i == n, "bad depth/head list in config");
    };
    cfg.base_dim = static_cast<int>(kv.get_int_or("base_dim", cfg.base_dim));
    if (kv.has("depths")) parse_list(kv.get("depths"), cfg.depths.data(), 4);
    if (kv.has("heads")) parse_list(kv.get("heads"), cfg.heads.data(), 4);
    cfg.ffn_ratio = kv.get_double_or("ffn_ratio", cfg.ffn_ratio);
    cfg.in_channels = static_cast<int>(kv.get_int_or("channels", cfg.in_channels));
    cfg.regression_dim =
        static_cast<int>(kv.get_int_or("regression_dim", cfg.regression_dim));
    cfg.num_classes = static_cast<int>(kv.get_int_or("num_classes", cfg.num_classes));
    cfg.shift_fraction = kv.get_double_or("shift_fraction", cfg.shift_fraction);
    cfg.dropout_rate = kv.get_double_or("dropout", cfg.dropout_rate);
    const std::string unit = kv.get_or("depth_unit", "layers");
    require(unit == "layers" || unit == "pairs", "depth_unit must be layers|pairs");
    cfg.depth_unit = unit == "layers" ? DepthUnit::kAttentionLayers : DepthUnit::kBlockPairs;
    const std::string norm = kv.get_or("norm_placement", "pre");
    require(norm == "pre" || norm == "post", "norm_placement must be pre|post");
    cfg.norm_placement = norm == "pre" ? NormPlacement::kPre : NormPlacement::kPost;
    if (kv.has("decoder_depths"))
      parse_list(kv.get("decoder_depths"), cfg.decoder_depths.data(), 3);
    cfg.validate();
    return cfg;
  }
};

}  // namespace mssit
