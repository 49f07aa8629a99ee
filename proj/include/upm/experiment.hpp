#pragma once

// End-to-end runs on synthetic languages: train both model kinds, decode the
// held-out target language greedily and score it.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "upm/config.hpp"
#include "upm/evaluation.hpp"
#include "upm/model.hpp"
#include "upm/synthetic.hpp"
#include "upm/training.hpp"

namespace upm {

struct Transcription {
  std::string id;
  Sequence phonemes;
};

/// Greedy decoding with the signature registered for `language`.
std::vector<Transcription> transcribe(const UpmModel& model, const std::vector<Utterance>& utterances,
                                      const LanguageId& language);
/// Greedy decoding over the shared training inventory.
std::vector<Transcription> transcribe(const BaselineModel& model,
                                      const std::vector<Utterance>& utterances);

/// `utt_id<TAB>space-separated phonemes`.
void write_transcriptions(std::ostream& out, const std::vector<Transcription>& rows);
/// Throws ParseError on a malformed line or a repeated id.
std::vector<Transcription> read_transcriptions(std::istream& in, const std::string& source = "<hyp>");

/// Pairs every reference utterance with its hypothesis by id. Throws
/// ParseError when a hypothesis is missing.
std::vector<ScoredPair> pair_by_id(const std::vector<Utterance>& references,
                                   const std::vector<Transcription>& hypotheses);

/// Fresh models seeded from `train.seed`, trained on `corpora`.
TrainResult<UpmModel> train_upm(const std::vector<Corpus>& corpora, const BasePhonemeTable& table,
                                const EncoderConfig& encoder, const TrainConfig& train,
                                const ProgressSink& sink = {});
TrainResult<BaselineModel> train_shared_baseline(const std::vector<Corpus>& corpora,
                                                 const BasePhonemeTable& table,
                                                 const EncoderConfig& encoder,
                                                 const TrainConfig& train,
                                                 const ProgressSink& sink = {});

struct ModeResult {
  ErrorReport report;
  SeenUnseenReport split;
};

struct ZeroShotResult {
  std::size_t languages = 0;
  ModeResult upm;
  ModeResult baseline;
};

/// Trains both kinds on `data.train`, retargets the UPM to the test inventory
/// and scores both on `data.test`.
ZeroShotResult run_zero_shot(const SynthDataset& data, const BasePhonemeTable& table,
                             const ExperimentConfig& config);

struct SweepRun {
  std::string mode;  // "baseline" or "upm"
  std::size_t languages;
  std::uint64_t seed;
  double per;
  std::optional<double> unseen_per;
};

struct SweepRow {
  std::string mode;
  std::size_t languages;
  double mean_per;
};

using SweepProgress = std::function<void(const SweepRun&)>;

/// Per seed, one dataset is generated with the largest count and every count
/// trains on a prefix of its languages, so all counts share the test language.
/// `config.synth.seed` and `config.train.seed` are replaced by each seed.
std::vector<SweepRun> run_sweep(const ExperimentConfig& config, const BasePhonemeTable& table,
                                const std::vector<std::size_t>& language_counts,
                                const std::vector<std::uint64_t>& seeds,
                                const SweepProgress& progress = {});

/// Mean PER per (mode, count), ordered by mode then count.
std::vector<SweepRow> summarize_sweep(const std::vector<SweepRun>& runs);

void write_sweep_tsv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_sweep_runs_tsv(std::ostream& out, const std::vector<SweepRun>& runs);

}  // namespace upm
