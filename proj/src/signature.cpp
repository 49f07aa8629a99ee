#include "upm/signature.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "text_util.hpp"
#include "upm/errors.hpp"

namespace upm {

PhonemeInventory make_inventory(LanguageId language, std::vector<Phoneme> phonemes,
                                const BasePhonemeTable& table) {
  auto assignments = assign_inventory(phonemes, table);
  return {std::move(language), std::move(phonemes), std::move(assignments)};
}

std::vector<Phoneme> read_inventory_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open inventory " + path.string());
  std::vector<Phoneme> out;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::is_comment_or_blank(line)) continue;
    out.emplace_back(std::string(detail::trim(line)));
  }
  return out;
}

void write_inventory_file(const std::filesystem::path& path, const std::vector<Phoneme>& phonemes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write inventory " + path.string());
  for (const auto& p : phonemes) out << p.xsampa() << '\n';
}

SignatureMatrix::SignatureMatrix(BitMatrix bits, std::vector<std::string> phoneme_labels,
                                 std::size_t blank_attribute)
    : bits_(std::move(bits)), labels_(std::move(phoneme_labels)), blank_attribute_(blank_attribute) {
  const auto z = static_cast<Eigen::Index>(labels_.size());
  if (bits_.rows() != z + 1) {
    throw ShapeMismatch("signature has " + std::to_string(bits_.rows()) + " rows for " +
                        std::to_string(z) + " phonemes plus blank");
  }
  if (blank_attribute_ >= static_cast<std::size_t>(bits_.cols())) {
    throw ShapeMismatch("blank attribute outside the signature columns");
  }
  const auto blank = static_cast<Eigen::Index>(blank_attribute_);
  for (Eigen::Index i = 0; i < z; ++i) {
    if ((bits_.row(i).array() > 1).any()) throw ParseError("signature cells must be 0 or 1");
    if (bits_.row(i).cast<int>().sum() == 0) {
      throw EmptyAttributeSet("phoneme '" + labels_[i] + "' has no attributes");
    }
    if (bits_(i, blank) != 0) {
      throw ParseError("phoneme '" + labels_[i] + "' sets the blank attribute");
    }
  }
  if (bits_.row(z).cast<int>().sum() != 1 || bits_(z, blank) != 1) {
    throw ParseError("blank row must be one-hot at the blank attribute");
  }
}

std::ptrdiff_t SignatureMatrix::row_of(const std::string& xsampa) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == xsampa) return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

SignatureMatrix build_signature(const PhonemeInventory& inventory, const AttributeCatalog& catalog) {
  const auto z = static_cast<Eigen::Index>(inventory.size());
  BitMatrix bits = BitMatrix::Zero(z + 1, static_cast<Eigen::Index>(catalog.size()));
  std::vector<std::string> labels;
  labels.reserve(inventory.size());
  for (Eigen::Index i = 0; i < z; ++i) {
    const auto& assignment = inventory.assignments.at(i);
    if (assignment.attributes.empty()) {
      throw EmptyAttributeSet("phoneme '" + assignment.phoneme.xsampa() + "' has no attributes");
    }
    for (std::size_t a : assignment.attributes) bits(i, static_cast<Eigen::Index>(a)) = 1;
    labels.push_back(inventory.phonemes.at(i).xsampa());
  }
  bits(z, static_cast<Eigen::Index>(catalog.blank_index())) = 1;
  return SignatureMatrix(std::move(bits), std::move(labels), catalog.blank_index());
}

std::vector<std::pair<std::size_t, std::size_t>> warn_collisions(const SignatureMatrix& sig) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const auto z = static_cast<Eigen::Index>(sig.phoneme_count());
  for (Eigen::Index i = 0; i < z; ++i) {
    for (Eigen::Index j = i + 1; j < z; ++j) {
      if (sig.bits().row(i) == sig.bits().row(j)) {
        out.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      }
    }
  }
  return out;
}

void write_signature(std::ostream& out, const SignatureMatrix& sig) {
  const auto& bits = sig.bits();
  out << sig.phoneme_count() << ' ' << sig.attribute_count() << '\n';
  for (Eigen::Index i = 0; i < bits.rows(); ++i) {
    for (Eigen::Index j = 0; j < bits.cols(); ++j) {
      if (j) out << ' ';
      out << static_cast<int>(bits(i, j));
    }
    out << '\n';
  }
  for (const auto& label : sig.phoneme_labels()) out << label << '\n';
  out << kBlankLabel << '\n';
}

SignatureMatrix read_signature(std::istream& in, std::size_t blank_attribute) {
  std::size_t z = 0, a = 0;
  if (!(in >> z >> a)) throw ParseError("signature: missing 'z a' header");
  BitMatrix bits(static_cast<Eigen::Index>(z + 1), static_cast<Eigen::Index>(a));
  for (Eigen::Index i = 0; i < bits.rows(); ++i) {
    for (Eigen::Index j = 0; j < bits.cols(); ++j) {
      int v = 0;
      if (!(in >> v) || (v != 0 && v != 1)) {
        throw ParseError("signature: bad cell at row " + std::to_string(i));
      }
      bits(i, j) = static_cast<std::uint8_t>(v);
    }
  }
  std::vector<std::string> labels(z);
  for (auto& label : labels) {
    if (!(in >> label)) throw ParseError("signature: missing row label");
  }
  std::string blank;
  if (!(in >> blank) || blank != kBlankLabel) throw ParseError("signature: missing blank label");
  return SignatureMatrix(std::move(bits), std::move(labels), blank_attribute);
}

}  // namespace upm
