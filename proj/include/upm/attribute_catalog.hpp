#pragma once

// Articulatory attribute universe and the curated base-phoneme table.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace upm {

enum class AttributeCategory { kConsonant, kVowel, kDiacritic, kBlank };

std::string_view to_string(AttributeCategory category);
std::optional<AttributeCategory> parse_category(std::string_view text);

struct Attribute {
  std::size_t index;
  std::string name;
  AttributeCategory category;

  bool operator==(const Attribute&) const = default;
};

using AttributeSet = std::set<std::size_t>;

/// The ordered set of attributes a model predicts over, including exactly one
/// blank attribute named "blank". Immutable once constructed.
class AttributeCatalog {
 public:
  AttributeCatalog() = default;
  /// Throws ParseError when names repeat, the blank row is missing or
  /// duplicated, or fewer than two attributes are given.
  explicit AttributeCatalog(
      const std::vector<std::pair<std::string, AttributeCategory>>& rows);

  std::size_t size() const { return attributes_.size(); }
  std::size_t blank_index() const { return blank_index_; }
  const std::vector<Attribute>& attributes() const { return attributes_; }
  const Attribute& operator[](std::size_t i) const { return attributes_.at(i); }

  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws UnknownAttribute.
  std::size_t index_of(std::string_view name) const;

  bool operator==(const AttributeCatalog& other) const {
    return attributes_ == other.attributes_;
  }

 private:
  std::vector<Attribute> attributes_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
  std::size_t blank_index_ = 0;
};

AttributeCatalog parse_catalog(std::istream& in, const std::string& source = "<catalog>");
AttributeCatalog load_catalog(const std::filesystem::path& path);
void write_catalog(std::ostream& out, const AttributeCatalog& catalog);

enum class EntryKind { kBase, kDiacritic };

std::string_view to_string(EntryKind kind);

struct TableEntry {
  EntryKind kind;
  AttributeSet attributes;

  bool operator==(const TableEntry&) const = default;
};

/// The restricted assignment function: X-SAMPA base phonemes and diacritic
/// suffixes mapped to non-empty, blank-free attribute sets.
class BasePhonemeTable {
 public:
  BasePhonemeTable() = default;
  explicit BasePhonemeTable(AttributeCatalog catalog) : catalog_(std::move(catalog)) {}

  /// Throws ParseError on an empty or repeated key, EmptyAttributeSet on an
  /// empty set, UnknownAttribute on an out-of-range id or the blank attribute.
  void add(std::string xsampa, EntryKind kind, AttributeSet attributes);

  const TableEntry* find(std::string_view xsampa) const;
  bool contains(std::string_view xsampa) const { return find(xsampa) != nullptr; }

  const std::map<std::string, TableEntry, std::less<>>& entries() const { return entries_; }
  const AttributeCatalog& catalog() const { return catalog_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t longest_key() const { return longest_key_; }

  bool operator==(const BasePhonemeTable& other) const {
    return catalog_ == other.catalog_ && entries_ == other.entries_;
  }

 private:
  AttributeCatalog catalog_;
  std::map<std::string, TableEntry, std::less<>> entries_;
  std::size_t longest_key_ = 0;
};

BasePhonemeTable parse_base_table(std::istream& in, const AttributeCatalog& catalog,
                                  const std::string& source = "<table>");
BasePhonemeTable load_base_table(const std::filesystem::path& path,
                                 const AttributeCatalog& catalog);
void write_base_table(std::ostream& out, const BasePhonemeTable& table);

/// Comma-separated attribute names in catalog order.
std::string join_attribute_names(const AttributeSet& attributes, const AttributeCatalog& catalog);

/// Directory holding the shipped catalog.tsv and base_table.tsv. Honors the
/// UPM_DATA_DIR environment variable.
std::filesystem::path default_data_dir();
AttributeCatalog load_default_catalog();
BasePhonemeTable load_default_table();

}  // namespace upm
