#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mssit/model/state.hpp"
#include "mssit/tensor/tensor.hpp"

namespace mssit {

struct OptimizerConfig {
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  long warmup_iters = 1000;
  long total_iters = 0;  // warmup + cosine horizon
};

// Linear warmup to the base rate, then cosine decay to zero. Iterations are
// 1-based; the curve is continuous at the junction.
inline double scheduled_lr(const OptimizerConfig& cfg, long iteration) {
  require(iteration >= 1, "iteration is 1-based");
  if (cfg.warmup_iters > 0 && iteration <= cfg.warmup_iters)
    return cfg.lr * static_cast<double>(iteration) / static_cast<double>(cfg.warmup_iters);
  if (cfg.total_iters <= cfg.warmup_iters) return cfg.lr;
  const double progress = static_cast<double>(iteration - cfg.warmup_iters) /
                          static_cast<double>(cfg.total_iters - cfg.warmup_iters);
  return cfg.lr * 0.5 * (1.0 + std::cos(M_PI * std::min(progress, 1.0)));
}

// Decoupled-weight-decay Adam over a named parameter store. Moments are kept
// in double regardless of the training precision. Decay is skipped for
// rank-1 parameters (biases, LayerNorm gains/shifts).
template <typename T>
class AdamW {
 public:
  AdamW(ParamStore<T>& params, OptimizerConfig cfg) : params_(&params), cfg_(cfg) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(params.items()[i].tensor.numel(), 0.0);
      v_[i].assign(params.items()[i].tensor.numel(), 0.0);
    }
  }

  const OptimizerConfig& config() const { return cfg_; }
  long iteration() const { return iteration_; }

  // One update from the gradients currently stored on the parameters.
  void step() {
    ++iteration_;
    const double lr_t = scheduled_lr(cfg_, iteration_);
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(iteration_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(iteration_));
    for (std::size_t p = 0; p < params_->size(); ++p) {
      Tensor<T>& t = params_->items()[p].tensor;
      if (!t.requires_grad()) continue;
      require(t.has_grad(), "adamw_step: parameter has no gradient");
      const bool decay_this = t.rank() >= 2;
      std::vector<T>& values = t.values();
      const std::vector<T>& grad = t.grad();
      std::vector<double>& m = m_[p];
      std::vector<double>& v = v_[p];
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double g = static_cast<double>(grad[i]);
        m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
        v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        double update = lr_t * m_hat / (std::sqrt(v_hat) + cfg_.eps);
        if (decay_this && cfg_.weight_decay > 0.0)
          update += lr_t * cfg_.weight_decay * static_cast<double>(values[i]);
        values[i] = static_cast<T>(static_cast<double>(values[i]) - update);
      }
    }
  }

  // Optimiser state as named tensors for checkpointing; loading restores the
  // exact moments and step count, so a resumed step is bit-identical.
  std::vector<NamedTensor<double>> export_state() const {
    std::vector<NamedTensor<double>> items;
    items.push_back({"opt.iteration",
                     Tensor<double>::scalar(static_cast<double>(iteration_))});
    for (std::size_t p = 0; p < params_->size(); ++p) {
      const std::string& name = params_->items()[p].name;
      const Shape& shape = params_->items()[p].tensor.shape();
      items.push_back({"opt.m." + name, Tensor<double>::from(shape, m_[p])});
      items.push_back({"opt.v." + name, Tensor<double>::from(shape, v_[p])});
    }
    return items;
  }

  void import_state(const std::vector<NamedTensor<double>>& items) {
    for (const auto& [name, tensor] : items) {
      if (name == "opt.iteration") {
        iteration_ = static_cast<long>(tensor.values()[0]);
        continue;
      }
      const bool is_m = name.rfind("opt.m.", 0) == 0;
      const bool is_v = name.rfind("opt.v.", 0) == 0;
      if (!is_m && !is_v) continue;
      const std::string param = name.substr(6);
      for (std::size_t p = 0; p < params_->size(); ++p) {
        if (params_->items()[p].name != param) continue;
        require(tensor.numel() == m_[p].size(), "optimizer state shape mismatch");
        (is_m ? m_ : v_)[p] = tensor.values();
        break;
      }
    }
  }

 private:
  ParamStore<T>* params_;
  OptimizerConfig cfg_;
  long iteration_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace mssit
