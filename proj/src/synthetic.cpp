#include "upm/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <random>

namespace upm {

namespace {

constexpr int kMaxAttempts = 64;

template <typename T>
std::vector<T> sample_distinct(const std::vector<T>& pool, std::size_t k, std::mt19937_64& rng) {
  std::vector<T> items = pool;
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, items.size() - 1);
    std::swap(items[i], items[pick(rng)]);
  }
  items.resize(k);
  return items;
}

std::string language_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "lang%02zu", k + 1);
  return buf;
}

std::string utterance_id(const std::string& language, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu", i);
  return language + "-" + buf;
}

struct Acoustics {
  // One prototype row per catalog attribute.
  MatrixXd prototypes;
  std::map<Phoneme, VectorXd> means;
};

Utterance make_utterance(const std::string& id, const LanguageId& language,
                         const std::vector<Phoneme>& inventory, const Acoustics& acoustics,
                         const SynthSpec& spec, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> length(spec.min_utterance_phonemes,
                                                    spec.max_utterance_phonemes);
  std::uniform_int_distribution<std::size_t> pick(0, inventory.size() - 1);
  std::uniform_int_distribution<std::size_t> duration(spec.min_frames_per_phoneme,
                                                      spec.max_frames_per_phoneme);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma);

  Utterance utt{id, language, {}, {}};
  const std::size_t n = length(rng);
  std::vector<std::size_t> frames;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t p = pick(rng);
    while (inventory.size() > 1 && !utt.transcript.empty() && inventory[p] == utt.transcript.back()) {
      p = pick(rng);
    }
    utt.transcript.push_back(inventory[p]);
    frames.push_back(duration(rng));
  }
  std::size_t total = 0;
  for (std::size_t f : frames) total += f;
  utt.features.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(spec.feature_dim));
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const VectorXd& mean = acoustics.means.at(utt.transcript[i]);
    for (std::size_t f = 0; f < frames[i]; ++f, ++row) {
      for (Eigen::Index j = 0; j < mean.size(); ++j) {
        utt.features(row, j) = static_cast<float>(mean[j] + noise(rng));
      }
    }
  }
  return utt;
}

}  // namespace

void SynthSpec::validate() const {
  if (num_languages == 0) throw InfeasibleSpec("num_languages must be positive");
  if (phonemes_per_language == 0) throw InfeasibleSpec("phonemes_per_language must be positive");
  if (num_unseen_test_phonemes > phonemes_per_language) {
    throw InfeasibleSpec("more unseen test phonemes than the test inventory holds");
  }
  if (min_frames_per_phoneme == 0 || min_frames_per_phoneme > max_frames_per_phoneme) {
    throw InfeasibleSpec("frames_per_phoneme range is empty or starts at zero");
  }
  if (min_utterance_phonemes == 0 || min_utterance_phonemes > max_utterance_phonemes) {
    throw InfeasibleSpec("utterance length range is empty or starts at zero");
  }
  if (feature_dim == 0) throw InfeasibleSpec("feature_dim must be positive");
  if (!(noise_sigma >= 0)) throw InfeasibleSpec("noise_sigma must be non-negative");
  if (utterances_per_language == 0 || test_utterances == 0) {
    throw InfeasibleSpec("every corpus needs at least one utterance");
  }
}

std::vector<Phoneme> synthetic_universe(const BasePhonemeTable& table) {
  const auto& catalog = table.catalog();
  const auto consonant = catalog.find("consonant");
  const auto vowel = catalog.find("vowel");
  std::vector<std::string> candidates;
  std::vector<std::string> combos;
  for (const auto& [key, entry] : table.entries()) {
    if (entry.kind != EntryKind::kBase) continue;
    candidates.push_back(key);
    if (consonant && entry.attributes.count(*consonant)) {
      for (const char* d : {"_h", "_>", "_w", "_j"}) combos.push_back(key + d);
    } else if (vowel && entry.attributes.count(*vowel)) {
      for (const char* d : {":", "~"}) combos.push_back(key + d);
    }
  }
  candidates.insert(candidates.end(), combos.begin(), combos.end());

  std::vector<Phoneme> out;
  std::set<AttributeSet> taken;
  for (const auto& text : candidates) {
    try {
      Phoneme p(text);
      auto assignment = assign_attributes(p, table);
      if (taken.insert(assignment.attributes).second) out.push_back(std::move(p));
    } catch (const UnknownPhoneme&) {
      // Combination not expressible with this table.
    }
  }
  return out;
}

std::set<Phoneme> inventory_union(const std::vector<Corpus>& corpora) {
  std::set<Phoneme> out;
  for (const auto& c : corpora) out.insert(c.inventory.begin(), c.inventory.end());
  return out;
}

SynthDataset generate_synthetic(const SynthSpec& spec, const BasePhonemeTable& table) {
  spec.validate();
  const auto universe = synthetic_universe(table);
  if (universe.size() < spec.phonemes_per_language) {
    throw InfeasibleSpec("the base table yields only " + std::to_string(universe.size()) +
                         " distinct phonemes");
  }
  std::map<Phoneme, AttributeSet> attributes;
  for (const auto& p : universe) attributes[p] = assign_attributes(p, table).attributes;

  std::mt19937_64 rng(spec.seed);
  const std::size_t seen_in_test = spec.phonemes_per_language - spec.num_unseen_test_phonemes;

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<std::vector<Phoneme>> inventories;
    std::set<Phoneme> train_union;
    AttributeSet covered;
    for (std::size_t k = 0; k < spec.num_languages; ++k) {
      inventories.push_back(sample_distinct(universe, spec.phonemes_per_language, rng));
      for (const auto& p : inventories.back()) {
        train_union.insert(p);
        covered.insert(attributes[p].begin(), attributes[p].end());
      }
    }
    std::vector<Phoneme> candidates;
    for (const auto& p : universe) {
      if (train_union.count(p)) continue;
      const auto& attrs = attributes[p];
      if (std::includes(covered.begin(), covered.end(), attrs.begin(), attrs.end())) {
        candidates.push_back(p);
      }
    }
    if (candidates.size() < spec.num_unseen_test_phonemes || train_union.size() < seen_in_test) {
      continue;
    }

    const std::vector<Phoneme> union_list(train_union.begin(), train_union.end());
    auto test_inventory = sample_distinct(union_list, seen_in_test, rng);
    const auto unseen = sample_distinct(candidates, spec.num_unseen_test_phonemes, rng);
    test_inventory.insert(test_inventory.end(), unseen.begin(), unseen.end());
    test_inventory = sample_distinct(test_inventory, test_inventory.size(), rng);

    Acoustics acoustics;
    const auto& catalog = table.catalog();
    acoustics.prototypes.resize(static_cast<Eigen::Index>(catalog.size()),
                                static_cast<Eigen::Index>(spec.feature_dim));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& v : acoustics.prototypes.reshaped<Eigen::RowMajor>()) v = gauss(rng);
    for (const auto& p : universe) {
      VectorXd mean = VectorXd::Zero(static_cast<Eigen::Index>(spec.feature_dim));
      for (std::size_t a : attributes[p]) {
        mean += acoustics.prototypes.row(static_cast<Eigen::Index>(a)).transpose();
      }
      acoustics.means[p] = mean / static_cast<double>(attributes[p].size());
    }

    SynthDataset out;
    for (std::size_t k = 0; k < spec.num_languages; ++k) {
      Corpus corpus{language_name(k), inventories[k], {}};
      for (std::size_t i = 0; i < spec.utterances_per_language; ++i) {
        corpus.utterances.push_back(make_utterance(utterance_id(corpus.language, i),
                                                   corpus.language, corpus.inventory, acoustics,
                                                   spec, rng));
      }
      out.train.push_back(std::move(corpus));
    }
    out.test = Corpus{"target", test_inventory, {}};
    for (std::size_t i = 0; i < spec.test_utterances; ++i) {
      out.test.utterances.push_back(
          make_utterance(utterance_id("target", i), "target", test_inventory, acoustics, spec, rng));
    }
    out.train_union = std::move(train_union);
    return out;
  }
  throw InfeasibleSpec("could not draw " + std::to_string(spec.num_unseen_test_phonemes) +
                       " unseen, attribute-covered test phonemes after " +
                       std::to_string(kMaxAttempts) + " attempts");
}

SynthDataset restrict_languages(const SynthDataset& dataset, std::size_t count) {
  if (count == 0 || count > dataset.train.size()) {
    throw InfeasibleSpec("cannot keep " + std::to_string(count) + " of " +
                         std::to_string(dataset.train.size()) + " training languages");
  }
  SynthDataset out;
  out.train.assign(dataset.train.begin(), dataset.train.begin() + static_cast<std::ptrdiff_t>(count));
  out.test = dataset.test;
  out.train_union = inventory_union(out.train);
  return out;
}

}  // namespace upm
