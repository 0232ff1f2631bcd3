#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mssit/tensor/ops.hpp"

namespace mssit {

// Mean squared error over a batch. Gradient flows to pred (and target, if it
// ever requires grad): d/d(pred) = 2 (pred - target) / B.
template <typename T>
Tensor<T> mse_loss(Tape<T>* tape, const Tensor<T>& pred, const Tensor<T>& target) {
  require(pred.shape() == target.shape(), "mse_loss: shapes differ");
  require(pred.numel() > 0, "mse_loss: empty batch");
  const std::size_t n = pred.numel();
  T sum{0};
  for (std::size_t i = 0; i < n; ++i) {
    const T d = pred.data()[i] - target.data()[i];
    sum += d * d;
  }
  Tensor<T> out = Tensor<T>::scalar(sum / static_cast<T>(n));
  if (detail::track(tape, pred, target)) {
    out.set_requires_grad();
    Tensor<T> pv = pred, tv = target, ov = out;
    tape->record([pv, tv, ov, n]() mutable {
      const T g = ov.grad()[0] * T{2} / static_cast<T>(n);
      if (pv.requires_grad()) {
        std::vector<T>& gp = pv.grad();
        for (std::size_t i = 0; i < n; ++i) gp[i] += g * (pv.data()[i] - tv.data()[i]);
      }
      if (tv.requires_grad()) {
        std::vector<T>& gt = tv.grad();
        for (std::size_t i = 0; i < n; ++i) gt[i] -= g * (pv.data()[i] - tv.data()[i]);
      }
    });
  }
  return out;
}

// Unweighted sum of soft-Dice loss and mean cross-entropy on per-vertex
// logits [V x K] against integer labels. Dice uses softmax probabilities,
// one-hot targets and smoothing eps on both numerator and denominator.
template <typename T>
Tensor<T> dice_ce_loss(Tape<T>* tape, const Tensor<T>& logits,
                       const std::vector<std::uint32_t>& labels, double eps = 1e-5) {
  require(logits.rank() == 2, "dice_ce_loss expects [V x K] logits");
  const std::size_t v_count = logits.size(0), k_count = logits.size(1);
  require(labels.size() == v_count, "dice_ce_loss: label count mismatch");
  for (std::uint32_t l : labels)
    require(l < k_count, "dice_ce_loss: label out of range");

  // softmax probabilities kept for the backward pass
  std::vector<double> probs(v_count * k_count);
  for (std::size_t i = 0; i < v_count; ++i) {
    const T* row = logits.data() + i * k_count;
    double mx = row[0];
    for (std::size_t k = 1; k < k_count; ++k) mx = std::max<double>(mx, row[k]);
    double sum = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      probs[i * k_count + k] = std::exp(static_cast<double>(row[k]) - mx);
      sum += probs[i * k_count + k];
    }
    for (std::size_t k = 0; k < k_count; ++k) probs[i * k_count + k] /= sum;
  }

  double ce = 0.0;
  for (std::size_t i = 0; i < v_count; ++i)
    ce -= std::log(std::max(probs[i * k_count + labels[i]], 1e-300));
  ce /= static_cast<double>(v_count);

  std::vector<double> p_sum(k_count, 0.0), intersect(k_count, 0.0), y_sum(k_count, 0.0);
  for (std::size_t i = 0; i < v_count; ++i) {
    for (std::size_t k = 0; k < k_count; ++k) p_sum[k] += probs[i * k_count + k];
    intersect[labels[i]] += probs[i * k_count + labels[i]];
    y_sum[labels[i]] += 1.0;
  }
  double dice_mean = 0.0;
  std::vector<double> num(k_count), den(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    num[k] = 2.0 * intersect[k] + eps;
    den[k] = p_sum[k] + y_sum[k] + eps;
    dice_mean += num[k] / den[k];
  }
  dice_mean /= static_cast<double>(k_count);

  Tensor<T> out = Tensor<T>::scalar(static_cast<T>(1.0 - dice_mean + ce));
  if (detail::track(tape, logits)) {
    out.set_requires_grad();
    Tensor<T> lv = logits, ov = out;
    tape->record([lv, ov, labels, probs = std::move(probs), num = std::move(num),
                  den = std::move(den), v_count, k_count]() mutable {
      const double g = static_cast<double>(ov.grad()[0]);
      std::vector<T>& gl = lv.grad();
      const double inv_v = 1.0 / static_cast<double>(v_count);
      const double inv_k = 1.0 / static_cast<double>(k_count);
      std::vector<double> dprob(k_count);
      for (std::size_t i = 0; i < v_count; ++i) {
        // d(loss)/d(prob_ic), then chain through the softmax row
        for (std::size_t c = 0; c < k_count; ++c) {
          const double y = labels[i] == c ? 1.0 : 0.0;
          // Dice term: -(1/K) * (2y*den - num)/den^2 ; CE term: -y/(V*p)
          double d = -inv_k * (2.0 * y * den[c] - num[c]) / (den[c] * den[c]);
          if (y > 0.0) d -= inv_v / probs[i * k_count + c];
          dprob[c] = d;
        }
        double dot = 0.0;
        for (std::size_t c = 0; c < k_count; ++c)
          dot += dprob[c] * probs[i * k_count + c];
        for (std::size_t c = 0; c < k_count; ++c) {
          const double p = probs[i * k_count + c];
          gl[i * k_count + c] += static_cast<T>(g * p * (dprob[c] - dot));
        }
      }
    });
  }
  return out;
}

// --- evaluation metrics (no gradients) ---------------------------------------

inline double mean_absolute_error(const std::vector<double>& pred,
                                  const std::vector<double>& target) {
  require(pred.size() == target.size() && !pred.empty(), "MAE: bad batch");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - target[i]);
  return sum / static_cast<double>(pred.size());
}

// Hard Dice per class: 2|A&B| / (|A| + |B|); classes absent from both the
// prediction and the truth score 1.
inline std::vector<double> dice_per_class(const std::vector<std::uint32_t>& pred,
                                          const std::vector<std::uint32_t>& truth,
                                          std::size_t k_count) {
  require(pred.size() == truth.size(), "dice: size mismatch");
  std::vector<double> inter(k_count, 0.0), pa(k_count, 0.0), ta(k_count, 0.0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < k_count) pa[pred[i]] += 1.0;
    if (truth[i] < k_count) ta[truth[i]] += 1.0;
    if (pred[i] == truth[i] && pred[i] < k_count) inter[pred[i]] += 1.0;
  }
  std::vector<double> dice(k_count);
  for (std::size_t k = 0; k < k_count; ++k)
    dice[k] = (pa[k] + ta[k]) == 0.0 ? 1.0 : 2.0 * inter[k] / (pa[k] + ta[k]);
  return dice;
}

// Mean over classes 1..K-1: class 0 is background/unlabelled and excluded
// from the reported metric (it still participates in the Dice loss).
inline double mean_dice(const std::vector<std::uint32_t>& pred,
                        const std::vector<std::uint32_t>& truth, std::size_t k_count) {
  const auto dice = dice_per_class(pred, truth, k_count);
  require(k_count >= 2, "mean_dice needs at least 2 classes");
  double sum = 0.0;
  for (std::size_t k = 1; k < k_count; ++k) sum += dice[k];
  return sum / static_cast<double>(k_count - 1);
}

}  // namespace mssit
