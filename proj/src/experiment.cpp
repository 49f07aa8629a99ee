#include "upm/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <functional>
#include <map>
#include <ostream>
#include <set>

#include "text_util.hpp"
#include "upm/errors.hpp"

namespace upm {

std::vector<Transcription> transcribe(const UpmModel& model, const std::vector<Utterance>& utterances,
                                      const LanguageId& language) {
  const SignatureMatrix& sig = model.signature(language);
  std::vector<Transcription> out;
  out.reserve(utterances.size());
  for (const auto& utt : utterances) {
    const auto labels = greedy_decode(upm_logits(model, utt.features_as_double(), language));
    out.push_back({utt.id, label_strings(labels, sig)});
  }
  return out;
}

std::vector<Transcription> transcribe(const BaselineModel& model,
                                      const std::vector<Utterance>& utterances) {
  std::vector<Transcription> out;
  out.reserve(utterances.size());
  for (const auto& utt : utterances) {
    const auto labels = greedy_decode(baseline_logits(model, utt.features_as_double()));
    out.push_back({utt.id, label_strings(labels, model.shared_inventory())});
  }
  return out;
}

void write_transcriptions(std::ostream& out, const std::vector<Transcription>& rows) {
  for (const auto& row : rows) {
    out << row.id << '\t';
    for (std::size_t i = 0; i < row.phonemes.size(); ++i) {
      if (i) out << ' ';
      out << row.phonemes[i];
    }
    out << '\n';
  }
}

std::vector<Transcription> read_transcriptions(std::istream& in, const std::string& source) {
  std::vector<Transcription> out;
  std::set<std::string> ids;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    line = detail::strip_cr(std::move(line));
    if (detail::is_comment_or_blank(line)) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ParseError(source + ":" + std::to_string(number) + ": expected 'utt_id<TAB>phonemes'");
    }
    Transcription row{line.substr(0, tab), detail::tokenize(std::string_view(line).substr(tab + 1))};
    if (!ids.insert(row.id).second) {
      throw ParseError(source + ":" + std::to_string(number) + ": repeated utterance id '" +
                       row.id + "'");
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<ScoredPair> pair_by_id(const std::vector<Utterance>& references,
                                   const std::vector<Transcription>& hypotheses) {
  std::map<std::string, const Sequence*> by_id;
  for (const auto& h : hypotheses) by_id[h.id] = &h.phonemes;
  std::vector<ScoredPair> pairs;
  pairs.reserve(references.size());
  for (const auto& ref : references) {
    auto it = by_id.find(ref.id);
    if (it == by_id.end()) throw ParseError("no hypothesis for utterance '" + ref.id + "'");
    pairs.emplace_back(phoneme_strings(ref.transcript), *it->second);
  }
  return pairs;
}

namespace {

std::vector<PhonemeInventory> inventories_of(const std::vector<Corpus>& corpora,
                                             const BasePhonemeTable& table) {
  std::vector<PhonemeInventory> out;
  for (const auto& c : corpora) out.push_back(make_inventory(c.language, c.inventory, table));
  return out;
}

}  // namespace

TrainResult<UpmModel> train_upm(const std::vector<Corpus>& corpora, const BasePhonemeTable& table,
                                const EncoderConfig& encoder, const TrainConfig& train,
                                const ProgressSink& sink) {
  UpmModel model = UpmModel::initialize(encoder, table, train.seed);
  for (const auto& inv : inventories_of(corpora, table)) model.add_inventory(inv);
  return upm::train(std::move(model), corpora, train, sink);
}

TrainResult<BaselineModel> train_shared_baseline(const std::vector<Corpus>& corpora,
                                                 const BasePhonemeTable& table,
                                                 const EncoderConfig& encoder,
                                                 const TrainConfig& train,
                                                 const ProgressSink& sink) {
  const auto shared = shared_inventory(inventories_of(corpora, table), table);
  BaselineModel model = BaselineModel::initialize(encoder, table, shared, train.seed);
  return upm::train_baseline(std::move(model), corpora, train, sink);
}

ZeroShotResult run_zero_shot(const SynthDataset& data, const BasePhonemeTable& table,
                             const ExperimentConfig& config) {
  config.validate();
  EncoderConfig encoder = config.encoder;
  encoder.input_dim = config.synth.feature_dim;

  const auto test_inventory = phoneme_strings(data.test.inventory);
  std::set<std::string> train_union;
  for (const auto& p : data.train_union) train_union.insert(p.xsampa());

  auto score = [&](const std::vector<Transcription>& hyps) {
    const auto pairs = pair_by_id(data.test.utterances, hyps);
    return ModeResult{error_report(pairs), seen_unseen_split(pairs, test_inventory, train_union)};
  };

  ZeroShotResult result;
  result.languages = data.train.size();

  const auto upm = train_upm(data.train, table, encoder, config.train).model;
  const auto target = retarget(upm, data.test.inventory, data.test.language);
  result.upm = score(transcribe(target, data.test.utterances, data.test.language));

  const auto baseline = train_shared_baseline(data.train, table, encoder, config.train).model;
  result.baseline = score(transcribe(baseline, data.test.utterances));
  return result;
}

std::vector<SweepRun> run_sweep(const ExperimentConfig& config, const BasePhonemeTable& table,
                                const std::vector<std::size_t>& language_counts,
                                const std::vector<std::uint64_t>& seeds,
                                const SweepProgress& progress) {
  if (language_counts.empty() || seeds.empty()) {
    throw ConfigError("a sweep needs at least one language count and one seed");
  }
  const std::size_t largest = *std::max_element(language_counts.begin(), language_counts.end());
  std::vector<SweepRun> runs;
  for (std::uint64_t seed : seeds) {
    ExperimentConfig run_config = config;
    run_config.synth.seed = seed;
    run_config.train.seed = seed;
    run_config.synth.num_languages = largest;
    const SynthDataset full = generate_synthetic(run_config.synth, table);
    for (std::size_t count : language_counts) {
      const auto result = run_zero_shot(restrict_languages(full, count), table, run_config);
      for (const auto& [mode, r] : {std::pair{"baseline", &result.baseline}, std::pair{"upm", &result.upm}}) {
        runs.push_back({mode, count, seed, r->report.per, r->split.unseen_per});
        if (progress) progress(runs.back());
      }
    }
  }
  return runs;
}

std::vector<SweepRow> summarize_sweep(const std::vector<SweepRun>& runs) {
  std::map<std::pair<std::string, std::size_t>, std::pair<double, std::size_t>> acc;
  for (const auto& r : runs) {
    auto& [sum, n] = acc[{r.mode, r.languages}];
    sum += r.per;
    ++n;
  }
  std::vector<SweepRow> rows;
  for (const auto& [key, value] : acc) {
    rows.push_back({key.first, key.second, value.first / static_cast<double>(value.second)});
  }
  return rows;
}

namespace {

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

void write_sweep_tsv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "mode\tlanguages\tmean_per\n";
  for (const auto& r : rows) out << r.mode << '\t' << r.languages << '\t' << number(r.mean_per) << '\n';
}

void write_sweep_runs_tsv(std::ostream& out, const std::vector<SweepRun>& runs) {
  out << "mode\tlanguages\tseed\tper\tunseen_per\n";
  for (const auto& r : runs) {
    out << r.mode << '\t' << r.languages << '\t' << r.seed << '\t' << number(r.per) << '\t'
        << (r.unseen_per ? number(*r.unseen_per) : "N.A.") << '\n';
  }
}

}  // namespace upm
