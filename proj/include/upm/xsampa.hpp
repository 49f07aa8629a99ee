#pragma once

// Attribute assignment for X-SAMPA phonemes by iterated longest-suffix
// stripping against the base table.

#include <compare>
#include <string>
#include <utility>
#include <vector>

#include "upm/attribute_catalog.hpp"

namespace upm {

/// An X-SAMPA phoneme string. Non-empty, no whitespace.
class Phoneme {
 public:
  Phoneme() = default;
  /// Throws ParseError on an empty string or embedded whitespace.
  explicit Phoneme(std::string xsampa);

  const std::string& xsampa() const { return xsampa_; }
  auto operator<=>(const Phoneme&) const = default;

 private:
  std::string xsampa_;
};

struct MatchedPart {
  std::string text;
  EntryKind kind;

  bool operator==(const MatchedPart&) const = default;
};

struct AttributeAssignment {
  Phoneme phoneme;
  AttributeSet attributes;
  /// Left-to-right: the final base match first, then each stripped suffix in
  /// string order. Concatenating the texts gives back the phoneme.
  std::vector<MatchedPart> matched_parts;

  bool operator==(const AttributeAssignment&) const = default;
};

/// Throws UnknownPhoneme when some remainder has no suffix in the table.
AttributeAssignment assign_attributes(const Phoneme& phoneme, const BasePhonemeTable& table);

/// Element-wise assignment, failing on the first error. Throws
/// DuplicatePhoneme, or UnknownPhoneme carrying the failing index.
std::vector<AttributeAssignment> assign_inventory(const std::vector<Phoneme>& phonemes,
                                                  const BasePhonemeTable& table);

std::vector<Phoneme> to_phonemes(const std::vector<std::string>& xsampa);

}  // namespace upm
