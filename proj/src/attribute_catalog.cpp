#include "upm/attribute_catalog.hpp"

#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include "text_util.hpp"
#include "upm/errors.hpp"

namespace upm {

std::string_view to_string(AttributeCategory category) {
  switch (category) {
    case AttributeCategory::kConsonant: return "consonant";
    case AttributeCategory::kVowel: return "vowel";
    case AttributeCategory::kDiacritic: return "diacritic";
    case AttributeCategory::kBlank: return "blank";
  }
  return "?";
}

std::optional<AttributeCategory> parse_category(std::string_view text) {
  if (text == "consonant") return AttributeCategory::kConsonant;
  if (text == "vowel") return AttributeCategory::kVowel;
  if (text == "diacritic") return AttributeCategory::kDiacritic;
  if (text == "blank") return AttributeCategory::kBlank;
  return std::nullopt;
}

std::string_view to_string(EntryKind kind) {
  return kind == EntryKind::kBase ? "base" : "diacritic";
}

AttributeCatalog::AttributeCatalog(
    const std::vector<std::pair<std::string, AttributeCategory>>& rows) {
  std::optional<std::size_t> blank;
  for (const auto& [name, category] : rows) {
    if (name.empty()) throw ParseError("attribute name is empty");
    if (by_name_.count(name)) throw ParseError("duplicate attribute '" + name + "'");
    const std::size_t index = attributes_.size();
    if (category == AttributeCategory::kBlank || name == "blank") {
      if (category != AttributeCategory::kBlank || name != "blank") {
        throw ParseError("the blank attribute must be named 'blank' with category blank");
      }
      if (blank) throw ParseError("more than one blank attribute");
      blank = index;
    }
    attributes_.push_back({index, name, category});
    by_name_.emplace(name, index);
  }
  if (!blank) throw ParseError("catalog has no 'blank' attribute");
  if (attributes_.size() < 2) throw ParseError("catalog needs at least two attributes");
  blank_index_ = *blank;
}

std::optional<std::size_t> AttributeCatalog::find(std::string_view name) const {
  const auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::size_t AttributeCatalog::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw UnknownAttribute("unknown attribute '" + std::string(name) + "'");
}

AttributeCatalog parse_catalog(std::istream& in, const std::string& source) {
  std::vector<std::pair<std::string, AttributeCategory>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_cr(line);
    if (detail::is_comment_or_blank(line)) continue;
    const auto fields = detail::split(line, '\t');
    const std::string where = source + ":" + std::to_string(lineno);
    if (fields.size() != 2) throw ParseError(where + ": expected name<TAB>category");
    const auto name = std::string(detail::trim(fields[0]));
    const auto category = parse_category(detail::trim(fields[1]));
    if (!category) throw ParseError(where + ": unknown category '" + fields[1] + "'");
    rows.emplace_back(name, *category);
  }
  try {
    return AttributeCatalog(rows);
  } catch (const ParseError& e) {
    throw ParseError(source + ": " + e.what());
  }
}

AttributeCatalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open catalog " + path.string());
  return parse_catalog(in, path.string());
}

void write_catalog(std::ostream& out, const AttributeCatalog& catalog) {
  for (const auto& a : catalog.attributes()) {
    out << a.name << '\t' << to_string(a.category) << '\n';
  }
}

void BasePhonemeTable::add(std::string xsampa, EntryKind kind, AttributeSet attributes) {
  if (xsampa.empty()) throw ParseError("table entry with empty X-SAMPA string");
  if (entries_.count(xsampa)) throw ParseError("duplicate table entry '" + xsampa + "'");
  if (attributes.empty()) {
    throw EmptyAttributeSet("table entry '" + xsampa + "' has no attributes");
  }
  for (std::size_t a : attributes) {
    if (a >= catalog_.size()) {
      throw UnknownAttribute("table entry '" + xsampa + "' references attribute " +
                             std::to_string(a) + " outside the catalog");
    }
    if (a == catalog_.blank_index()) {
      throw UnknownAttribute("table entry '" + xsampa + "' references the blank attribute");
    }
  }
  longest_key_ = std::max(longest_key_, xsampa.size());
  entries_.emplace(std::move(xsampa), TableEntry{kind, std::move(attributes)});
}

const TableEntry* BasePhonemeTable::find(std::string_view xsampa) const {
  const auto it = entries_.find(xsampa);
  return it == entries_.end() ? nullptr : &it->second;
}

BasePhonemeTable parse_base_table(std::istream& in, const AttributeCatalog& catalog,
                                  const std::string& source) {
  BasePhonemeTable table(catalog);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_cr(line);
    if (detail::is_comment_or_blank(line)) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto fields = detail::split(line, '\t');
    if (fields.size() != 3) throw ParseError(where + ": expected xsampa<TAB>kind<TAB>attributes");
    const auto key = std::string(detail::trim(fields[0]));
    const auto kind_text = detail::trim(fields[1]);
    EntryKind kind;
    if (kind_text == "base") {
      kind = EntryKind::kBase;
    } else if (kind_text == "diacritic") {
      kind = EntryKind::kDiacritic;
    } else {
      throw ParseError(where + ": unknown entry kind '" + std::string(kind_text) + "'");
    }
    AttributeSet attributes;
    for (const auto& name : detail::split(fields[2], ',')) {
      const auto trimmed = detail::trim(name);
      if (trimmed.empty()) continue;
      const auto index = catalog.find(trimmed);
      if (!index) {
        throw UnknownAttribute(where + ": unknown attribute '" + std::string(trimmed) + "'");
      }
      attributes.insert(*index);
    }
    try {
      table.add(key, kind, std::move(attributes));
    } catch (const Error& e) {
      // Preserve the concrete error type while adding the location.
      if (dynamic_cast<const UnknownAttribute*>(&e)) throw UnknownAttribute(where + ": " + e.what());
      if (dynamic_cast<const EmptyAttributeSet*>(&e)) throw ParseError(where + ": " + e.what());
      throw ParseError(where + ": " + e.what());
    }
  }
  return table;
}

BasePhonemeTable load_base_table(const std::filesystem::path& path,
                                 const AttributeCatalog& catalog) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open base table " + path.string());
  return parse_base_table(in, catalog, path.string());
}

std::string join_attribute_names(const AttributeSet& attributes,
                                 const AttributeCatalog& catalog) {
  std::string out;
  for (std::size_t a : attributes) {
    if (!out.empty()) out += ',';
    out += catalog[a].name;
  }
  return out;
}

void write_base_table(std::ostream& out, const BasePhonemeTable& table) {
  for (const auto& [key, entry] : table.entries()) {
    out << key << '\t' << to_string(entry.kind) << '\t'
        << join_attribute_names(entry.attributes, table.catalog()) << '\n';
  }
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("UPM_DATA_DIR"); env && *env) return env;
  return UPM_DEFAULT_DATA_DIR;
}

AttributeCatalog load_default_catalog() {
  return load_catalog(default_data_dir() / "catalog.tsv");
}

BasePhonemeTable load_default_table() {
  return load_base_table(default_data_dir() / "base_table.tsv", load_default_catalog());
}

}  // namespace upm
