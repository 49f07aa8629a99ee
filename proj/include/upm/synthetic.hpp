#pragma once

// Attribute-grounded synthetic languages. Every attribute gets a Gaussian
// prototype vector; a phoneme's emission mean is the average of its
// attributes' prototypes, so unseen phonemes are acoustically composable from
// attributes that training languages exercise.

#include <cstdint>
#include <set>
#include <vector>

#include "upm/attribute_catalog.hpp"
#include "upm/data.hpp"

namespace upm {

struct SynthSpec {
  std::size_t num_languages = 3;
  std::size_t phonemes_per_language = 8;
  std::size_t num_unseen_test_phonemes = 3;
  std::size_t min_frames_per_phoneme = 2;
  std::size_t max_frames_per_phoneme = 5;
  std::size_t feature_dim = 12;
  double noise_sigma = 0.3;
  std::uint64_t seed = 1;
  std::size_t utterances_per_language = 200;
  std::size_t test_utterances = 100;
  std::size_t min_utterance_phonemes = 3;
  std::size_t max_utterance_phonemes = 7;

  /// Throws InfeasibleSpec on inconsistent sizes or ranges.
  void validate() const;
};

struct SynthDataset {
  std::vector<Corpus> train;
  Corpus test;
  std::set<Phoneme> train_union;
};

/// Candidate phonemes: every base entry plus consonant x {_h,_>,_w,_j} and
/// vowel x {:,~} combinations, keeping the first phoneme for each distinct
/// attribute set.
std::vector<Phoneme> synthetic_universe(const BasePhonemeTable& table);

/// Deterministic in `spec.seed`. The test inventory holds exactly
/// num_unseen_test_phonemes phonemes outside the training union, each built
/// only from attributes some training phoneme carries. Throws InfeasibleSpec.
SynthDataset generate_synthetic(const SynthSpec& spec, const BasePhonemeTable& table);

/// Keeps the first `count` training languages and recomputes the union. The
/// test corpus is unchanged.
SynthDataset restrict_languages(const SynthDataset& dataset, std::size_t count);

std::set<Phoneme> inventory_union(const std::vector<Corpus>& corpora);

}  // namespace upm
