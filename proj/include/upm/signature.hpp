#pragma once

// Binary phoneme-by-attribute signature matrices.

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "upm/attribute_catalog.hpp"
#include "upm/numerics.hpp"
#include "upm/xsampa.hpp"

namespace upm {

using LanguageId = std::string;

/// Label written for the blank row of a serialized signature.
inline constexpr const char* kBlankLabel = "<blank>";

struct PhonemeInventory {
  LanguageId language;
  std::vector<Phoneme> phonemes;
  std::vector<AttributeAssignment> assignments;

  std::size_t size() const { return phonemes.size(); }
};

/// Runs attribute assignment over `phonemes`; throws as assign_inventory.
PhonemeInventory make_inventory(LanguageId language, std::vector<Phoneme> phonemes,
                                const BasePhonemeTable& table);

/// One X-SAMPA phoneme per line; blank lines and '#' comments skipped.
std::vector<Phoneme> read_inventory_file(const std::filesystem::path& path);
void write_inventory_file(const std::filesystem::path& path, const std::vector<Phoneme>& phonemes);

using BitMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// (z+1) x a binary matrix: one row per phoneme in inventory order, then the
/// blank row, which is one-hot at the catalog's blank attribute.
class SignatureMatrix {
 public:
  SignatureMatrix() = default;
  /// Validates the row invariants; throws EmptyAttributeSet or ShapeMismatch.
  SignatureMatrix(BitMatrix bits, std::vector<std::string> phoneme_labels,
                  std::size_t blank_attribute);

  std::size_t phoneme_count() const { return labels_.size(); }
  std::size_t attribute_count() const { return static_cast<std::size_t>(bits_.cols()); }
  std::size_t blank_row() const { return labels_.size(); }
  std::size_t blank_attribute() const { return blank_attribute_; }
  const BitMatrix& bits() const { return bits_; }
  /// Phoneme labels only; the blank row has no entry here.
  const std::vector<std::string>& phoneme_labels() const { return labels_; }
  /// Row of `xsampa`, or -1.
  std::ptrdiff_t row_of(const std::string& xsampa) const;

  template <typename Scalar>
  Matrix<Scalar> as() const {
    return bits_.cast<Scalar>();
  }

  bool operator==(const SignatureMatrix& o) const {
    return labels_ == o.labels_ && blank_attribute_ == o.blank_attribute_ && bits_ == o.bits_;
  }

 private:
  BitMatrix bits_;
  std::vector<std::string> labels_;
  std::size_t blank_attribute_ = 0;
};

/// Throws EmptyAttributeSet if any phoneme carries no attribute.
SignatureMatrix build_signature(const PhonemeInventory& inventory, const AttributeCatalog& catalog);

/// Unordered pairs (i < j) of phoneme rows with identical bits.
std::vector<std::pair<std::size_t, std::size_t>> warn_collisions(const SignatureMatrix& sig);

/// Text form: "z a", z+1 rows of 0/1, then z+1 row labels (blank last).
void write_signature(std::ostream& out, const SignatureMatrix& sig);
SignatureMatrix read_signature(std::istream& in, std::size_t blank_attribute);

}  // namespace upm
