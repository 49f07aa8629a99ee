#include "upm/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>

#include "text_util.hpp"
#include "upm/errors.hpp"

namespace upm {

std::vector<KeyValue> parse_key_values(std::istream& in, const std::string& source) {
  std::vector<KeyValue> out;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    line = detail::strip_cr(std::move(line));
    if (detail::is_comment_or_blank(line)) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(source + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    KeyValue kv{std::string(detail::trim(std::string_view(line).substr(0, eq))),
                std::string(detail::trim(std::string_view(line).substr(eq + 1))), number};
    if (kv.key.empty()) throw ParseError(source + ":" + std::to_string(number) + ": empty key");
    out.push_back(std::move(kv));
  }
  return out;
}

std::vector<KeyValue> load_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  return parse_key_values(in, path.string());
}

namespace {

using Setter = std::function<void(const std::string&)>;

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("invalid value '" + text + "' for key '" + key + "'");
  }
  return value;
}

template <typename T>
Setter bind(T& field, const std::string& key) {
  return [&field, key](const std::string& text) { field = parse_number<T>(text, key); };
}

using SetterTable = std::vector<std::pair<std::string, Setter>>;

void add_train(SetterTable& t, TrainConfig& c) {
  t.emplace_back("learning_rate", bind(c.learning_rate, "learning_rate"));
  t.emplace_back("reg_lambda", bind(c.reg_lambda, "reg_lambda"));
  t.emplace_back("batch_size", bind(c.batch_size, "batch_size"));
  t.emplace_back("max_steps", bind(c.max_steps, "max_steps"));
  t.emplace_back("grad_clip_norm", bind(c.grad_clip_norm, "grad_clip_norm"));
  t.emplace_back("validation_fraction", bind(c.validation_fraction, "validation_fraction"));
  t.emplace_back("log_every", bind(c.log_every, "log_every"));
}

void add_encoder(SetterTable& t, EncoderConfig& e) {
  t.emplace_back("layers", bind(e.layers, "layers"));
  t.emplace_back("cells", bind(e.cells, "cells"));
}

void add_synth(SetterTable& t, SynthSpec& s) {
  t.emplace_back("num_languages", bind(s.num_languages, "num_languages"));
  t.emplace_back("phonemes_per_language", bind(s.phonemes_per_language, "phonemes_per_language"));
  t.emplace_back("num_unseen_test_phonemes",
                 bind(s.num_unseen_test_phonemes, "num_unseen_test_phonemes"));
  t.emplace_back("min_frames_per_phoneme", bind(s.min_frames_per_phoneme, "min_frames_per_phoneme"));
  t.emplace_back("max_frames_per_phoneme", bind(s.max_frames_per_phoneme, "max_frames_per_phoneme"));
  t.emplace_back("feature_dim", bind(s.feature_dim, "feature_dim"));
  t.emplace_back("noise_sigma", bind(s.noise_sigma, "noise_sigma"));
  t.emplace_back("utterances_per_language",
                 bind(s.utterances_per_language, "utterances_per_language"));
  t.emplace_back("test_utterances", bind(s.test_utterances, "test_utterances"));
  t.emplace_back("min_utterance_phonemes", bind(s.min_utterance_phonemes, "min_utterance_phonemes"));
  t.emplace_back("max_utterance_phonemes", bind(s.max_utterance_phonemes, "max_utterance_phonemes"));
}

SetterTable train_table(TrainSettings& s) {
  SetterTable t;
  add_train(t, s.train);
  t.emplace_back("seed", bind(s.train.seed, "seed"));
  add_encoder(t, s.encoder);
  return t;
}

SetterTable experiment_table(ExperimentConfig& c) {
  SetterTable t;
  add_synth(t, c.synth);
  t.emplace_back("seed", [&c](const std::string& text) {
    c.synth.seed = c.train.seed = parse_number<std::uint64_t>(text, "seed");
  });
  add_train(t, c.train);
  add_encoder(t, c.encoder);
  return t;
}

void apply_table(const SetterTable& table, const std::vector<KeyValue>& entries) {
  for (const auto& kv : entries) {
    auto it = std::find_if(table.begin(), table.end(),
                           [&](const auto& row) { return row.first == kv.key; });
    if (it == table.end()) {
      throw ConfigError("unknown config key '" + kv.key + "' on line " + std::to_string(kv.line));
    }
    it->second(kv.value);
  }
}

std::vector<std::string> names(const SetterTable& table) {
  std::vector<std::string> out;
  for (const auto& row : table) out.push_back(row.first);
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  synth.validate();
  train.validate();
  if (encoder.layers == 0 || encoder.cells == 0) {
    throw ConfigError("layers and cells must be positive");
  }
}

void apply_config(const std::vector<KeyValue>& entries, TrainSettings& settings) {
  apply_table(train_table(settings), entries);
}

void apply_config(const std::vector<KeyValue>& entries, ExperimentConfig& config) {
  apply_table(experiment_table(config), entries);
  config.encoder.input_dim = config.synth.feature_dim;
}

TrainSettings load_train_settings(const std::filesystem::path& path) {
  TrainSettings settings;
  apply_config(load_key_values(path), settings);
  return settings;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  ExperimentConfig config;
  apply_config(load_key_values(path), config);
  return config;
}

std::vector<std::string> train_keys() {
  TrainSettings scratch;
  return names(train_table(scratch));
}

std::vector<std::string> experiment_keys() {
  ExperimentConfig scratch;
  return names(experiment_table(scratch));
}

}  // namespace upm
