#pragma once

// CTC training with an l2 penalty on the attribute projection, plain SGD,
// global-norm clipping and uniform corpus sampling.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "upm/data.hpp"
#include "upm/model.hpp"

namespace upm {

struct TrainConfig {
  double learning_rate = 0.005;
  double reg_lambda = 1e-4;
  std::size_t batch_size = 4;
  std::size_t max_steps = 1000;
  /// 0 disables clipping.
  double grad_clip_norm = 5.0;
  std::uint64_t seed = 1;
  double validation_fraction = 0.05;
  std::size_t log_every = 100;

  void validate() const;
};

struct HistoryEntry {
  std::size_t step;
  double train_loss;
  /// NaN when there is no validation data.
  double val_loss;
};

using ProgressSink = std::function<void(const HistoryEntry&)>;

/// Writes `step=<n> train_loss=<f> val_loss=<f>`.
std::string format_progress(const HistoryEntry& entry);

using Batch = std::vector<const Utterance*>;

struct UpmGradients {
  Encoder encoder;
  MatrixXd projection;
};

struct BaselineGradients {
  Encoder encoder;
  MatrixXd output;
};

template <typename Grads>
struct Objective {
  double loss;
  Grads grads;
};

/// Mean CTC loss over the batch plus reg_lambda * ||V||_F^2, with exact
/// gradients for the encoder and V. Signatures are constants.
Objective<UpmGradients> objective_and_grads(const UpmModel& model, const Batch& batch,
                                            const TrainConfig& config);
/// Mean CTC loss over the batch; the output layer is not regularized.
Objective<BaselineGradients> objective_and_grads(const BaselineModel& model, const Batch& batch,
                                                 const TrainConfig& config);

Batch as_batch(const std::vector<Utterance>& utterances);

/// Scales `grads` so their joint l2 norm is at most `max_norm`; returns the
/// norm before scaling. `max_norm` <= 0 leaves them untouched.
double clip_gradients(UpmGradients& grads, double max_norm);
double clip_gradients(BaselineGradients& grads, double max_norm);
double gradient_norm(const UpmGradients& grads);
double gradient_norm(const BaselineGradients& grads);

/// Uniform sampling: one corpus with probability 1/K, then batch_size
/// utterances drawn with replacement from it. Throws EmptyCorpus.
Batch sample_batch(const std::vector<Corpus>& corpora, const TrainConfig& config,
                   std::mt19937_64& rng);
/// Index of the corpus chosen for one batch, exposed for frequency checks.
std::size_t sample_corpus_index(std::size_t corpus_count, std::mt19937_64& rng);

struct DataSplit {
  std::vector<Corpus> train;
  std::vector<Utterance> validation;
};

/// Per corpus: seeded shuffle, the last ceil(fraction * n) utterances go to
/// validation, always leaving at least one for training.
DataSplit split_validation(const std::vector<Corpus>& corpora, double fraction, std::uint64_t seed);

template <typename Model>
struct TrainResult {
  Model model;
  std::vector<HistoryEntry> history;
};

TrainResult<UpmModel> train(UpmModel model, const std::vector<Corpus>& corpora,
                            const TrainConfig& config, const ProgressSink& sink = {});
TrainResult<BaselineModel> train_baseline(BaselineModel model, const std::vector<Corpus>& corpora,
                                          const TrainConfig& config, const ProgressSink& sink = {});

/// Mean per-utterance CTC loss without the regularizer.
double mean_ctc_loss(const UpmModel& model, const std::vector<Utterance>& utterances);
double mean_ctc_loss(const BaselineModel& model, const std::vector<Utterance>& utterances);

}  // namespace upm
