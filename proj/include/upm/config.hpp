#pragma once

// Plain `key = value` configuration files. `#` starts a comment line.
// Training keys map 1:1 onto TrainConfig plus the encoder shape; experiment
// files may additionally carry SynthSpec keys. Unknown keys are rejected.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "upm/encoder.hpp"
#include "upm/synthetic.hpp"
#include "upm/training.hpp"

namespace upm {

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Throws ParseError on a line without `=` or with an empty key.
std::vector<KeyValue> parse_key_values(std::istream& in, const std::string& source = "<config>");
std::vector<KeyValue> load_key_values(const std::filesystem::path& path);

/// Model and optimizer settings for `train`. The encoder input width is taken
/// from the data, so only layers and cells are configurable here.
struct TrainSettings {
  TrainConfig train;
  EncoderConfig encoder;
};

/// Everything one synthetic zero-shot run needs. `seed` in a file sets both
/// the data seed and the training seed. The step size is larger than the
/// TrainConfig default because these runs are only a few thousand steps long.
struct ExperimentConfig {
  SynthSpec synth;
  TrainConfig train{.learning_rate = 0.05, .max_steps = 2000};
  EncoderConfig encoder{.input_dim = 12, .layers = 1, .cells = 16};

  void validate() const;
};

/// Throws ConfigError for unknown keys or unparsable values.
void apply_config(const std::vector<KeyValue>& entries, TrainSettings& settings);
void apply_config(const std::vector<KeyValue>& entries, ExperimentConfig& config);

/// Missing keys keep the struct defaults.
TrainSettings load_train_settings(const std::filesystem::path& path);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Every key understood by the respective `apply_config`, in documentation order.
std::vector<std::string> train_keys();
std::vector<std::string> experiment_keys();

}  // namespace upm
