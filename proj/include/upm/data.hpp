#pragma once

// Utterances, corpora, the manifest format and binary feature files.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "upm/ctc.hpp"
#include "upm/numerics.hpp"
#include "upm/signature.hpp"
#include "upm/xsampa.hpp"

namespace upm {

using FeatureMatrix = Matrix<float>;

struct Utterance {
  std::string id;
  LanguageId language;
  FeatureMatrix features;  // T x d_in
  std::vector<Phoneme> transcript;

  MatrixXd features_as_double() const { return features.cast<double>(); }
  bool operator==(const Utterance&) const = default;
};

struct Corpus {
  LanguageId language;
  std::vector<Phoneme> inventory;
  std::vector<Utterance> utterances;

  bool operator==(const Corpus&) const = default;
};

inline constexpr std::uint32_t kFeatureVersion = 1;

/// "ZPHF", u32 version, u32 T, u32 d_in, T*d_in float32, little-endian.
void write_feature_file(const std::filesystem::path& path, const FeatureMatrix& features);
/// Throws IoError or BadFeatureHeader.
FeatureMatrix read_feature_file(const std::filesystem::path& path);

/// Manifest rows: utt_id<TAB>language<TAB>feature_path<TAB>transcript. Feature
/// paths are relative to the manifest directory unless absolute; each
/// language needs `<language>.inv` beside the manifest. Corpora come back in
/// first-appearance order.
std::vector<Corpus> load_dataset(const std::filesystem::path& manifest);

/// Writes features under `dir/feats/`, one inventory file per language and
/// the manifest itself. Returns the manifest path.
std::filesystem::path write_dataset(const std::filesystem::path& dir,
                                    const std::vector<Corpus>& corpora,
                                    const std::string& manifest_name = "manifest.tsv");

/// Throws TranscriptPhonemeOutsideInventory.
LabelSeq encode_transcript(const std::vector<Phoneme>& transcript, const SignatureMatrix& sig);

std::vector<std::string> phoneme_strings(const std::vector<Phoneme>& phonemes);

}  // namespace upm
