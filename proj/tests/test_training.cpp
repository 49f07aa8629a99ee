#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"
#include "upm/config.hpp"
#include "upm/errors.hpp"
#include "upm/experiment.hpp"
#include "upm/synthetic.hpp"
#include "upm/training.hpp"

using namespace upm;

namespace {

Corpus toy_corpus(const std::string& language, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Corpus c{language, testkit::phonemes({"p", "a:"}), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const auto frames = static_cast<Eigen::Index>(4 + rng() % 3);
    Utterance u{language + "-" + std::to_string(i), language,
                testkit::random_matrix(frames, 3, rng).cast<float>(), {}};
    const std::size_t len = 1 + rng() % 2;
    for (std::size_t k = 0; k < len; ++k) u.transcript.push_back(c.inventory[rng() % 2]);
    if (len == 2 && u.transcript[0] == u.transcript[1]) u.transcript.pop_back();
    c.utterances.push_back(std::move(u));
  }
  return c;
}

VectorXd pack(const UpmModel& m) {
  const VectorXd e = m.encoder().flatten();
  VectorXd out(e.size() + m.projection().size());
  out << e, m.projection().reshaped<Eigen::RowMajor>();
  return out;
}

void unpack(UpmModel& m, const VectorXd& theta) {
  const auto n = static_cast<Eigen::Index>(m.encoder().parameter_count());
  m.encoder().assign(theta.head(n));
  m.projection().reshaped<Eigen::RowMajor>() = theta.tail(theta.size() - n);
}

VectorXd pack(const UpmGradients& g) {
  const VectorXd e = g.encoder.flatten();
  VectorXd out(e.size() + g.projection.size());
  out << e, g.projection.reshaped<Eigen::RowMajor>();
  return out;
}

}  // namespace

TEST(Objective, SingleUtteranceWithoutRegularizerIsCtcLoss) {
  const auto model = testkit::tiny_upm(1);
  const auto corpus = toy_corpus("toy", 1, 2);
  TrainConfig cfg;
  cfg.reg_lambda = 0;
  const auto obj = objective_and_grads(model, as_batch(corpus.utterances), cfg);
  const auto& u = corpus.utterances[0];
  const double direct =
      ctc_loss(upm_logits(model, u.features_as_double(), "toy"), encode_transcript(u.transcript, model.signature("toy"))).loss;
  EXPECT_DOUBLE_EQ(obj.loss, direct);
}

TEST(Objective, RegularizerVanishesAtZeroProjection) {
  auto model = testkit::tiny_upm(1);
  model.projection().setZero();
  const auto corpus = toy_corpus("toy", 3, 2);
  TrainConfig with, without;
  with.reg_lambda = 10.0;
  without.reg_lambda = 0.0;
  EXPECT_EQ(objective_and_grads(model, as_batch(corpus.utterances), with).loss,
            objective_and_grads(model, as_batch(corpus.utterances), without).loss);
}

TEST(Objective, RegularizerGradientIsTwoLambdaV) {
  const auto model = testkit::tiny_upm(3);
  const auto corpus = toy_corpus("toy", 2, 5);
  TrainConfig with, without;
  with.reg_lambda = 0.25;
  without.reg_lambda = 0.0;
  const auto a = objective_and_grads(model, as_batch(corpus.utterances), with);
  const auto b = objective_and_grads(model, as_batch(corpus.utterances), without);
  const MatrixXd diff = a.grads.projection - b.grads.projection;
  EXPECT_LT((diff - 0.5 * model.projection()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(a.loss - b.loss, 0.25 * model.projection().squaredNorm(), 1e-14);
  EXPECT_EQ(a.grads.encoder, b.grads.encoder);
}

TEST(Objective, FullModelGradientCheck) {
  const auto corpus = toy_corpus("toy", 1, 9);
  TrainConfig cfg;
  cfg.reg_lambda = 0.1;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto model = testkit::tiny_upm(seed);
    const auto batch = as_batch(corpus.utterances);
    const auto obj = objective_and_grads(model, batch, cfg);
    auto f = [&](const VectorXd& theta) {
      auto m = model;
      unpack(m, theta);
      return objective_and_grads(m, batch, cfg).loss;
    };
    EXPECT_LT(grad_check<double>(f, pack(model), pack(obj.grads), 1e-5), 1e-5);
  }
}

TEST(Objective, BaselineGradientCheck) {
  const auto table = testkit::tiny_table();
  const auto corpus = toy_corpus("toy", 2, 4);
  const auto shared = make_inventory("shared", corpus.inventory, table);
  const auto model = BaselineModel::initialize({3, 1, 2}, table, shared, 5);
  const auto batch = as_batch(corpus.utterances);
  const auto obj = objective_and_grads(model, batch, TrainConfig{});
  const auto n = static_cast<Eigen::Index>(model.encoder().parameter_count());
  VectorXd theta(n + model.output().size()), grad(theta.size());
  theta << model.encoder().flatten(), model.output().reshaped<Eigen::RowMajor>();
  grad << obj.grads.encoder.flatten(), obj.grads.output.reshaped<Eigen::RowMajor>();
  auto f = [&](const VectorXd& t) {
    auto m = model;
    m.encoder().assign(t.head(n));
    m.output().reshaped<Eigen::RowMajor>() = t.tail(t.size() - n);
    return objective_and_grads(m, batch, TrainConfig{}).loss;
  };
  EXPECT_LT(grad_check<double>(f, theta, grad, 1e-5), 1e-5);
}

TEST(Objective, ErrorsNameTheUtterance) {
  const auto model = testkit::tiny_upm(1);
  Utterance u{"short-1", "toy", Matrix<float>::Zero(1, 3), testkit::phonemes({"p", "a:"})};
  try {
    objective_and_grads(model, Batch{&u}, TrainConfig{});
    FAIL();
  } catch (const ImpossibleAlignment& e) {
    EXPECT_EQ(e.utterance(), "short-1");
  }
  u.language = "unknown";
  EXPECT_THROW(objective_and_grads(model, Batch{&u}, TrainConfig{}), UnknownLanguage);
  EXPECT_THROW(objective_and_grads(model, Batch{}, TrainConfig{}), EmptyCorpus);
}

TEST(Clipping, CapsGlobalNorm) {
  const auto model = testkit::tiny_upm(2);
  const auto corpus = toy_corpus("toy", 4, 3);
  auto obj = objective_and_grads(model, as_batch(corpus.utterances), TrainConfig{});
  const double before = gradient_norm(obj.grads);
  ASSERT_GT(before, 1e-3);
  const double cap = before / 4;
  EXPECT_DOUBLE_EQ(clip_gradients(obj.grads, cap), before);
  EXPECT_LE(gradient_norm(obj.grads), cap + 1e-9);
  auto untouched = objective_and_grads(model, as_batch(corpus.utterances), TrainConfig{});
  clip_gradients(untouched.grads, 0.0);
  EXPECT_DOUBLE_EQ(gradient_norm(untouched.grads), before);
}

TEST(Sampling, SingleCorpusAlwaysChosen) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_corpus_index(1, rng), 0u);
}

TEST(Sampling, CorporaChosenUniformly) {
  std::mt19937_64 rng(12345);
  std::vector<std::size_t> counts(4, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[sample_corpus_index(4, rng)];
  for (auto c : counts) EXPECT_NEAR(static_cast<double>(c) / draws, 0.25, 0.01);
}

TEST(Sampling, BatchComesFromOneCorpus) {
  const std::vector<Corpus> corpora{toy_corpus("x", 5, 1), toy_corpus("y", 5, 2), toy_corpus("z", 5, 3)};
  TrainConfig cfg;
  cfg.batch_size = 6;
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const auto batch = sample_batch(corpora, cfg, rng);
    ASSERT_EQ(batch.size(), 6u);
    for (const auto* u : batch) EXPECT_EQ(u->language, batch.front()->language);
  }
  std::vector<Corpus> with_empty = corpora;
  with_empty.push_back(Corpus{"e", {}, {}});
  EXPECT_THROW(sample_batch(with_empty, cfg, rng), EmptyCorpus);
  EXPECT_THROW(sample_batch({}, cfg, rng), EmptyCorpus);
}

TEST(Split, HoldsOutCeilingFractionPerCorpus) {
  const std::vector<Corpus> corpora{toy_corpus("x", 30, 1), toy_corpus("y", 3, 2)};
  const auto split = split_validation(corpora, 0.05, 7);
  EXPECT_EQ(split.train[0].utterances.size(), 28u);
  EXPECT_EQ(split.train[1].utterances.size(), 2u);
  EXPECT_EQ(split.validation.size(), 3u);
  const auto again = split_validation(corpora, 0.05, 7);
  EXPECT_EQ(again.validation, split.validation);
  EXPECT_EQ(split_validation({toy_corpus("x", 1, 1)}, 0.5, 1).train[0].utterances.size(), 1u);
}

TEST(Train, ZeroStepsLeavesModelAndHistoryEmpty) {
  const auto model = testkit::tiny_upm(1);
  TrainConfig cfg;
  cfg.max_steps = 0;
  const auto r = train(model, {toy_corpus("toy", 5, 1)}, cfg);
  EXPECT_EQ(r.model, model);
  EXPECT_TRUE(r.history.empty());
}

TEST(Train, ZeroLearningRateLeavesParametersBitwise) {
  const auto model = testkit::tiny_upm(1);
  TrainConfig cfg;
  cfg.learning_rate = 0;
  cfg.max_steps = 20;
  cfg.log_every = 5;
  const auto r = train(model, {toy_corpus("toy", 5, 1)}, cfg);
  EXPECT_EQ(r.model, model);
  EXPECT_EQ(r.history.size(), 4u);

  const auto table = testkit::tiny_table();
  const auto shared = make_inventory("shared", testkit::phonemes({"p", "a:"}), table);
  const auto baseline = BaselineModel::initialize({3, 1, 2}, table, shared, 2);
  EXPECT_EQ(train_baseline(baseline, {toy_corpus("toy", 5, 1)}, cfg).model, baseline);
}

TEST(Train, DeterministicAndSignaturesFixed) {
  const auto model = testkit::tiny_upm(1);
  TrainConfig cfg;
  cfg.max_steps = 30;
  cfg.learning_rate = 0.1;
  const std::vector<Corpus> corpora{toy_corpus("toy", 8, 1)};
  const auto a = train(model, corpora, cfg);
  const auto b = train(model, corpora, cfg);
  EXPECT_EQ(serialize_checkpoint(a.model), serialize_checkpoint(b.model));
  EXPECT_EQ(a.model.signatures(), model.signatures());
  EXPECT_NE(a.model.projection(), model.projection());
  ASSERT_EQ(a.history.size(), 1u);
  EXPECT_EQ(a.history[0].step, 30u);
}

TEST(Train, ProgressLineFormat) {
  EXPECT_EQ(format_progress({100, 1.5, 2.25}), "step=100 train_loss=1.500000 val_loss=2.250000");
}

TEST(Train, ConfigValidation) {
  TrainConfig cfg;
  cfg.validation_fraction = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.learning_rate = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

// Two synthetic languages, 2000 steps: both models fit their training data.
TEST(Train, SyntheticTwoLanguageTaskConverges) {
  const auto table = load_default_table();
  ExperimentConfig cfg;
  cfg.synth.num_languages = 2;
  cfg.synth.seed = 3;
  cfg.train.seed = 3;
  cfg.train.log_every = 1000;
  const auto data = generate_synthetic(cfg.synth, table);
  EncoderConfig enc = cfg.encoder;
  enc.input_dim = cfg.synth.feature_dim;

  auto all_utterances = [&] {
    std::vector<Utterance> out;
    for (const auto& c : data.train) out.insert(out.end(), c.utterances.begin(), c.utterances.end());
    return out;
  }();

  UpmModel upm_init = UpmModel::initialize(enc, table, cfg.train.seed);
  for (const auto& c : data.train) upm_init.add_inventory(make_inventory(c.language, c.inventory, table));
  const double upm_before = mean_ctc_loss(upm_init, all_utterances);
  const auto upm_after = train_upm(data.train, table, enc, cfg.train).model;
  const double upm_ratio = mean_ctc_loss(upm_after, all_utterances) / upm_before;
  RecordProperty("upm_loss_ratio", std::to_string(upm_ratio));
  EXPECT_LT(upm_ratio, 0.25);

  std::vector<PhonemeInventory> invs;
  for (const auto& c : data.train) invs.push_back(make_inventory(c.language, c.inventory, table));
  const auto base_init = BaselineModel::initialize(enc, table, shared_inventory(invs, table), cfg.train.seed);
  const double base_before = mean_ctc_loss(base_init, all_utterances);
  const auto base_after = train_shared_baseline(data.train, table, enc, cfg.train).model;
  const double base_ratio = mean_ctc_loss(base_after, all_utterances) / base_before;
  RecordProperty("baseline_loss_ratio", std::to_string(base_ratio));
  EXPECT_LT(base_ratio, 0.5);
}
