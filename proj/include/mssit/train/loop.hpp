#pragma once

#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "mssit/model/model.hpp"
#include "mssit/train/dataset.hpp"
#include "mssit/train/loss.hpp"
#include "mssit/train/optimizer.hpp"
#include "mssit/train/sampler.hpp"

namespace mssit {

struct TrainConfig {
  Task task = Task::kRegression;
  double lr = 1e-5;
  long warmup_iters = 1000;
  long epochs = 1000;
  int batch_size = 16;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int balance_bins = 10;
  std::uint64_t seed = 42;
  long max_iterations = 0;  // 0 = no cap
  bool normalize_inputs = true;
  AugmentConfig augment;
  bool augment_enabled = true;
  std::string out_dir = "run";

  void validate(std::size_t train_size) const {
    require(lr > 0.0, "learning rate must be positive");
    require(epochs >= 1 && batch_size >= 1, "epochs and batch size must be positive");
    require(balance_bins >= 1, "balance_bins must be >= 1");
    const long iters_per_epoch =
        static_cast<long>((train_size + batch_size - 1) / batch_size);
    const long total = max_iterations > 0
                           ? std::min(max_iterations, epochs * iters_per_epoch)
                           : epochs * iters_per_epoch;
    require(warmup_iters < total, "warmup must be shorter than the total iterations");
  }

  // Per-task defaults: regression 1e-5/1000/1000/16, segmentation
  // 3e-4/100/200/1, rotation range 30 vs 15 degrees.
  static TrainConfig defaults_for(Task task) {
    TrainConfig cfg;
    cfg.task = task;
    if (task == Task::kSegmentation) {
      cfg.lr = 3e-4;
      cfg.warmup_iters = 100;
      cfg.epochs = 200;
      cfg.batch_size = 1;
      cfg.augment.rotation_range_deg = 15.0;
    }
    return cfg;
  }
};

struct EpochRecord {
  long epoch = 0;
  std::string split;
  double loss = 0.0;
  double metric = 0.0;  // MAE or mean Dice
};

struct TrainResult {
  std::string best_checkpoint;
  std::string final_checkpoint;
  std::string metrics_path;
  std::vector<EpochRecord> log;
  double best_val_loss = std::numeric_limits<double>::infinity();
  double final_val_metric = 0.0;
  long iterations_run = 0;
};

namespace detail {

inline void append_metric(std::ofstream& out, std::vector<EpochRecord>& log,
                          const EpochRecord& rec) {
  log.push_back(rec);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%ld,%s,%.17g,%.17g\n", rec.epoch, rec.split.c_str(),
                rec.loss, rec.metric);
  out << buf;
  out.flush();
}

}  // namespace detail

// Full training harness: balanced (regression) or shuffled-sequential
// (segmentation) sampling, optional augmentation, AdamW with warmup+cosine,
// per-epoch train/val logging, best- and final-checkpoint retention.
template <typename T = float>
TrainResult train_loop(const Dataset& dataset, const ModelConfig& model_cfg,
                       const TrainConfig& cfg, const SurfaceAtlas& atlas) {
  const auto train_idx = dataset.split_indices("train");
  const auto val_idx = dataset.split_indices("val");
  require(!train_idx.empty(), "train split is empty");
  cfg.validate(train_idx.size());
  model_cfg.validate();
  require((cfg.task == Task::kSegmentation) == model_cfg.segmentation(),
          "task does not match the model head");

  std::filesystem::create_directories(cfg.out_dir);
  const std::string best_path = cfg.out_dir + "/best.ckpt";
  const std::string final_path = cfg.out_dir + "/final.ckpt";
  const std::string metrics_path = cfg.out_dir + "/metrics.csv";

  Rng master(cfg.seed);
  Rng init_rng = master.derive(1);
  Rng augment_rng = master.derive(2);
  Rng dropout_rng = master.derive(3);
  Rng shuffle_rng = master.derive(4);

  ModelState<T> state = init_model_state<T>(model_cfg, init_rng);
  OptimizerConfig opt_cfg;
  opt_cfg.lr = cfg.lr;
  opt_cfg.beta1 = cfg.beta1;
  opt_cfg.beta2 = cfg.beta2;
  opt_cfg.eps = cfg.eps;
  opt_cfg.weight_decay = cfg.weight_decay;
  opt_cfg.warmup_iters = cfg.warmup_iters;
  const long iters_per_epoch =
      static_cast<long>((train_idx.size() + cfg.batch_size - 1) / cfg.batch_size);
  opt_cfg.total_iters = cfg.max_iterations > 0
                            ? std::min(cfg.max_iterations, cfg.epochs * iters_per_epoch)
                            : cfg.epochs * iters_per_epoch;
  AdamW<T> optimizer(state.params, opt_cfg);

  std::vector<double> train_targets;
  for (std::uint32_t i : train_idx) train_targets.push_back(dataset.sample(i).target);
  BalancedSampler sampler(cfg.task == Task::kRegression ? train_targets
                                                        : std::vector<double>(train_idx.size(), 0.0),
                          cfg.task == Task::kRegression ? cfg.balance_bins : 1,
                          master.derive(5).raw());

  auto fetch = [&](std::uint32_t dataset_index, bool augment) {
    SurfaceSample s = cfg.normalize_inputs ? dataset.normalized_sample(dataset_index)
                                           : dataset.sample(dataset_index);
    if (augment && cfg.augment_enabled)
      s = apply_augmentation(s, cfg.augment, atlas, augment_rng);
    return s;
  };

  auto forward_loss = [&](Tape<T>* tape, const std::vector<SurfaceSample>& batch,
                          std::vector<double>* preds_out) {
    if (cfg.task == Task::kRegression) {
      std::vector<Tensor<T>> preds;
      std::vector<T> targets;
      for (const auto& s : batch) {
        auto seq = sequence_from_surface(s.data, s.channels, atlas.maps);
        Tensor<T> tokens = Tensor<T>::from(
            {seq.size() / (6 * s.channels), 6 * s.channels},
            std::vector<T>(seq.begin(), seq.end()));
        ForwardOptions<T> opts;
        opts.training = tape != nullptr;
        opts.dropout_rng = &dropout_rng;
        Tensor<T> pred = regression_forward(tape, tokens, atlas, model_cfg, state,
                                            tape != nullptr ? &opts : nullptr);
        preds.push_back(reshape(tape, pred, {1, 1}));
        targets.push_back(static_cast<T>(s.target));
        if (preds_out != nullptr)
          preds_out->push_back(static_cast<double>(pred.data()[0]));
      }
      Tensor<T> pred_row =
          preds.size() == 1 ? preds[0] : concat_last(tape, preds);
      const std::size_t batch_n = targets.size();
      Tensor<T> target_row = Tensor<T>::from({1, batch_n}, std::move(targets));
      return mse_loss(tape, pred_row, target_row);
    }
    // segmentation: mean of per-sample Dice+CE losses
    Tensor<T> total;
    for (const auto& s : batch) {
      auto seq = sequence_from_surface(s.data, s.channels, atlas.maps);
      Tensor<T> tokens = Tensor<T>::from({seq.size() / (6 * s.channels), 6 * s.channels},
                                         std::vector<T>(seq.begin(), seq.end()));
      ForwardOptions<T> opts;
      opts.training = tape != nullptr;
      opts.dropout_rng = &dropout_rng;
      Tensor<T> logits = segmentation_forward(tape, tokens, atlas, model_cfg, state,
                                              tape != nullptr ? &opts : nullptr);
      Tensor<T> loss = dice_ce_loss(tape, logits, s.labels);
      total = total.defined() ? add(tape, total, loss) : loss;
    }
    return scale(tape, total, static_cast<T>(1.0 / batch.size()));
  };

  auto evaluate = [&](const std::vector<std::uint32_t>& idx, double* metric_out) {
    double loss_sum = 0.0;
    double metric = 0.0;
    for (std::uint32_t i : idx) {
      const SurfaceSample s = fetch(i, false);
      if (cfg.task == Task::kRegression) {
        std::vector<double> pred;
        loss_sum += static_cast<double>(forward_loss(nullptr, {s}, &pred).item());
        metric += std::abs(pred[0] - s.target);
      } else {
        auto seq = sequence_from_surface(s.data, s.channels, atlas.maps);
        Tensor<T> tokens = Tensor<T>::from(
            {seq.size() / (6 * s.channels), 6 * s.channels},
            std::vector<T>(seq.begin(), seq.end()));
        Tensor<T> logits =
            segmentation_forward<T>(nullptr, tokens, atlas, model_cfg, state);
        loss_sum += static_cast<double>(dice_ce_loss<T>(nullptr, logits, s.labels).item());
        std::vector<std::uint32_t> pred_labels(s.labels.size());
        const std::size_t k = model_cfg.num_classes;
        for (std::size_t v = 0; v < pred_labels.size(); ++v) {
          const T* row = logits.data() + v * k;
          std::size_t best = 0;
          for (std::size_t c = 1; c < k; ++c)
            if (row[c] > row[best]) best = c;  // ties keep the lowest class
          pred_labels[v] = static_cast<std::uint32_t>(best);
        }
        metric += mean_dice(pred_labels, s.labels, k);
      }
    }
    if (metric_out != nullptr)
      *metric_out = idx.empty() ? 0.0 : metric / static_cast<double>(idx.size());
    return idx.empty() ? 0.0 : loss_sum / static_cast<double>(idx.size());
  };

  std::ofstream metrics(metrics_path);
  if (!metrics) throw DataError("cannot open metric log: " + metrics_path);
  metrics << "epoch,split,loss,metric\n";

  TrainResult result;
  result.best_checkpoint = best_path;
  result.final_checkpoint = final_path;
  result.metrics_path = metrics_path;

  long iteration = 0;
  bool stop = false;
  for (long epoch = 1; epoch <= cfg.epochs && !stop; ++epoch) {
    double train_loss_sum = 0.0;
    long train_batches = 0;
    std::vector<std::uint32_t> order;
    if (cfg.task == Task::kSegmentation) {
      order = shuffled_indices(train_idx.size(), shuffle_rng);
    }
    for (long it = 0; it < iters_per_epoch && !stop; ++it) {
      std::vector<SurfaceSample> batch;
      for (int b = 0; b < cfg.batch_size; ++b) {
        std::uint32_t local;
        if (cfg.task == Task::kRegression) {
          local = sampler.next();
        } else {
          local = order[(it * cfg.batch_size + b) % order.size()];
        }
        batch.push_back(fetch(train_idx[local], true));
      }
      Tape<T> tape;
      Tensor<T> loss = forward_loss(&tape, batch, nullptr);
      const double loss_value = static_cast<double>(loss.item());
      if (!std::isfinite(loss_value))
        throw NumericError("training diverged: non-finite loss at iteration " +
                           std::to_string(iteration + 1));
      state.params.zero_grads();
      tape.backward(loss);
      optimizer.step();
      train_loss_sum += loss_value;
      ++train_batches;
      ++iteration;
      if (cfg.max_iterations > 0 && iteration >= cfg.max_iterations) stop = true;
    }

    detail::append_metric(metrics, result.log,
                          {epoch, "train", train_loss_sum / train_batches, 0.0});
    double val_metric = 0.0;
    const double val_loss = evaluate(val_idx, &val_metric);
    if (!val_idx.empty()) {
      detail::append_metric(metrics, result.log, {epoch, "val", val_loss, val_metric});
      if (val_loss < result.best_val_loss) {
        result.best_val_loss = val_loss;
        save_model(best_path, model_cfg, state);
      }
      result.final_val_metric = val_metric;
    }
  }
  result.iterations_run = iteration;

  save_model(final_path, model_cfg, state);
  write_checkpoint(final_path + ".opt", optimizer.export_state());
  if (val_idx.empty()) save_model(best_path, model_cfg, state);
  return result;
}

}  // namespace mssit
