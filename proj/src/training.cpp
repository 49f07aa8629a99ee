#include "upm/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace upm {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0)) throw ConfigError("learning_rate must be non-negative");
  if (!(reg_lambda >= 0)) throw ConfigError("reg_lambda must be non-negative");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(grad_clip_norm >= 0)) throw ConfigError("grad_clip_norm must be non-negative");
  if (!(validation_fraction >= 0 && validation_fraction < 1)) {
    throw ConfigError("validation_fraction must lie in [0, 1)");
  }
  if (log_every == 0) throw ConfigError("log_every must be positive");
}

std::string format_progress(const HistoryEntry& entry) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "step=%zu train_loss=%.6f val_loss=%.6f", entry.step,
                entry.train_loss, entry.val_loss);
  return buf;
}

Batch as_batch(const std::vector<Utterance>& utterances) {
  Batch batch;
  for (const auto& u : utterances) batch.push_back(&u);
  return batch;
}

namespace {

double squared_norm(const Encoder& e) {
  double total = 0;
  e.visit([&](auto block) { total += block.squaredNorm(); });
  return total;
}

void scale(Encoder& e, double factor) {
  e.visit([&](auto block) { block *= factor; });
}

void axpy(Encoder& target, double alpha, const Encoder& delta) {
  std::vector<const double*> sources;
  delta.visit([&](auto block) { sources.push_back(block.data()); });
  std::size_t i = 0;
  target.visit([&](auto block) {
    block += alpha * Eigen::Map<const VectorXd>(sources[i++], block.size());
  });
}

void add_into(Encoder& acc, const Encoder& delta) { axpy(acc, 1.0, delta); }

void check_batch(const Batch& batch) {
  if (batch.empty()) throw EmptyCorpus("objective over an empty batch");
}

template <typename Body>
auto with_utterance_context(const Utterance& utt, Body&& body) {
  try {
    return body();
  } catch (const ImpossibleAlignment& e) {
    throw ImpossibleAlignment(e.what(), utt.id);
  } catch (const TranscriptPhonemeOutsideInventory& e) {
    throw TranscriptPhonemeOutsideInventory(utt.id + ": " + e.what());
  }
}

}  // namespace

Objective<UpmGradients> objective_and_grads(const UpmModel& model, const Batch& batch,
                                            const TrainConfig& config) {
  check_batch(batch);
  const double weight = 1.0 / static_cast<double>(batch.size());
  Objective<UpmGradients> out{0.0, {Encoder::zeros(model.encoder().config()),
                                    MatrixXd::Zero(model.projection().rows(),
                                                   model.projection().cols())}};
  for (const Utterance* utt : batch) {
    with_utterance_context(*utt, [&] {
      const auto& sig = model.signature(utt->language);
      const LabelSeq labels = encode_transcript(utt->transcript, sig);
      const UpmForward fwd = upm_forward(model, utt->features_as_double(), utt->language);
      const auto ctc = ctc_loss(fwd.logits, labels);
      out.loss += weight * ctc.loss;

      // l = g S^T, g = h V^T.
      const MatrixXd grad_attr = weight * ctc.grad_logits * sig.as<double>();
      out.grads.projection.noalias() += grad_attr.transpose() * fwd.hidden.values;
      const MatrixXd grad_h = grad_attr * model.projection();
      add_into(out.grads.encoder, encoder_backward(model.encoder(), fwd.hidden, grad_h).params);
      return 0;
    });
  }
  out.loss += config.reg_lambda * model.projection().squaredNorm();
  out.grads.projection += 2.0 * config.reg_lambda * model.projection();
  return out;
}

Objective<BaselineGradients> objective_and_grads(const BaselineModel& model, const Batch& batch,
                                                 const TrainConfig&) {
  check_batch(batch);
  const double weight = 1.0 / static_cast<double>(batch.size());
  Objective<BaselineGradients> out{0.0, {Encoder::zeros(model.encoder().config()),
                                         MatrixXd::Zero(model.output().rows(),
                                                        model.output().cols())}};
  for (const Utterance* utt : batch) {
    with_utterance_context(*utt, [&] {
      const LabelSeq labels = encode_transcript(utt->transcript, model.shared_inventory());
      const BaselineForward fwd = baseline_forward(model, utt->features_as_double());
      const auto ctc = ctc_loss(fwd.logits, labels);
      out.loss += weight * ctc.loss;
      const MatrixXd grad_logits = weight * ctc.grad_logits;
      out.grads.output.noalias() += grad_logits.transpose() * fwd.hidden.values;
      const MatrixXd grad_h = grad_logits * model.output();
      add_into(out.grads.encoder, encoder_backward(model.encoder(), fwd.hidden, grad_h).params);
      return 0;
    });
  }
  return out;
}

double gradient_norm(const UpmGradients& g) {
  return std::sqrt(squared_norm(g.encoder) + g.projection.squaredNorm());
}

double gradient_norm(const BaselineGradients& g) {
  return std::sqrt(squared_norm(g.encoder) + g.output.squaredNorm());
}

double clip_gradients(UpmGradients& g, double max_norm) {
  const double norm = gradient_norm(g);
  if (max_norm > 0 && norm > max_norm) {
    const double factor = max_norm / norm;
    scale(g.encoder, factor);
    g.projection *= factor;
  }
  return norm;
}

double clip_gradients(BaselineGradients& g, double max_norm) {
  const double norm = gradient_norm(g);
  if (max_norm > 0 && norm > max_norm) {
    const double factor = max_norm / norm;
    scale(g.encoder, factor);
    g.output *= factor;
  }
  return norm;
}

std::size_t sample_corpus_index(std::size_t corpus_count, std::mt19937_64& rng) {
  if (corpus_count == 0) throw EmptyCorpus("no corpora to sample from");
  return std::uniform_int_distribution<std::size_t>(0, corpus_count - 1)(rng);
}

Batch sample_batch(const std::vector<Corpus>& corpora, const TrainConfig& config,
                   std::mt19937_64& rng) {
  for (const auto& c : corpora) {
    if (c.utterances.empty()) throw EmptyCorpus("corpus '" + c.language + "' has no utterances");
  }
  const Corpus& corpus = corpora[sample_corpus_index(corpora.size(), rng)];
  std::uniform_int_distribution<std::size_t> pick(0, corpus.utterances.size() - 1);
  Batch batch;
  batch.reserve(config.batch_size);
  for (std::size_t i = 0; i < config.batch_size; ++i) batch.push_back(&corpus.utterances[pick(rng)]);
  return batch;
}

DataSplit split_validation(const std::vector<Corpus>& corpora, double fraction, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DataSplit out;
  for (const auto& corpus : corpora) {
    const std::size_t n = corpus.utterances.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t held = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
    if (n > 0) held = std::min(held, n - 1);
    Corpus train{corpus.language, corpus.inventory, {}};
    for (std::size_t i = 0; i < n; ++i) {
      const auto& utt = corpus.utterances[order[i]];
      if (i < n - held) {
        train.utterances.push_back(utt);
      } else {
        out.validation.push_back(utt);
      }
    }
    out.train.push_back(std::move(train));
  }
  return out;
}

double mean_ctc_loss(const UpmModel& model, const std::vector<Utterance>& utterances) {
  if (utterances.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0;
  for (const auto& utt : utterances) {
    const auto& sig = model.signature(utt.language);
    const auto logits = upm_logits(model, utt.features_as_double(), utt.language);
    total += ctc_loss(logits, encode_transcript(utt.transcript, sig)).loss;
  }
  return total / static_cast<double>(utterances.size());
}

double mean_ctc_loss(const BaselineModel& model, const std::vector<Utterance>& utterances) {
  if (utterances.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0;
  for (const auto& utt : utterances) {
    const auto logits = baseline_logits(model, utt.features_as_double());
    total += ctc_loss(logits, encode_transcript(utt.transcript, model.shared_inventory())).loss;
  }
  return total / static_cast<double>(utterances.size());
}

namespace {

void apply_update(UpmModel& model, const UpmGradients& g, double lr) {
  axpy(model.encoder(), -lr, g.encoder);
  model.projection() -= lr * g.projection;
}

void apply_update(BaselineModel& model, const BaselineGradients& g, double lr) {
  axpy(model.encoder(), -lr, g.encoder);
  model.output() -= lr * g.output;
}

template <typename Model>
TrainResult<Model> run_sgd(Model model, const std::vector<Corpus>& corpora,
                           const TrainConfig& config, const ProgressSink& sink) {
  config.validate();
  if (corpora.empty()) throw EmptyCorpus("training needs at least one corpus");
  TrainResult<Model> result{std::move(model), {}};
  if (config.max_steps == 0) return result;

  // Separate streams for the split and for batch sampling.
  std::seed_seq split_seed{config.seed, std::uint64_t{0x5117}};
  std::seed_seq sample_seed{config.seed, std::uint64_t{0xba7c}};
  std::mt19937_64 split_rng(split_seed);
  std::mt19937_64 rng(sample_seed);
  const DataSplit split = split_validation(corpora, config.validation_fraction, split_rng());

  double interval_loss = 0;
  std::size_t interval_steps = 0;
  for (std::size_t step = 1; step <= config.max_steps; ++step) {
    const Batch batch = sample_batch(split.train, config, rng);
    auto objective = objective_and_grads(result.model, batch, config);
    clip_gradients(objective.grads, config.grad_clip_norm);
    if (config.learning_rate != 0) {
      apply_update(result.model, objective.grads, config.learning_rate);
    }

    interval_loss += objective.loss;
    ++interval_steps;
    if (step % config.log_every == 0 || step == config.max_steps) {
      HistoryEntry entry{step, interval_loss / static_cast<double>(interval_steps),
                         mean_ctc_loss(result.model, split.validation)};
      result.history.push_back(entry);
      if (sink) sink(entry);
      interval_loss = 0;
      interval_steps = 0;
    }
  }
  return result;
}

}  // namespace

TrainResult<UpmModel> train(UpmModel model, const std::vector<Corpus>& corpora,
                            const TrainConfig& config, const ProgressSink& sink) {
  for (const auto& c : corpora) model.signature(c.language);
  return run_sgd(std::move(model), corpora, config, sink);
}

TrainResult<BaselineModel> train_baseline(BaselineModel model, const std::vector<Corpus>& corpora,
                                          const TrainConfig& config, const ProgressSink& sink) {
  return run_sgd(std::move(model), corpora, config, sink);
}

}  // namespace upm
