#include "upm/xsampa.hpp"

#include <algorithm>
#include <set>

#include "upm/errors.hpp"

namespace upm {

Phoneme::Phoneme(std::string xsampa) : xsampa_(std::move(xsampa)) {
  if (xsampa_.empty()) throw ParseError("empty phoneme");
  if (xsampa_.find_first_of(" \t\r\n") != std::string::npos) {
    throw ParseError("phoneme '" + xsampa_ + "' contains whitespace");
  }
}

AttributeAssignment assign_attributes(const Phoneme& phoneme, const BasePhonemeTable& table) {
  AttributeAssignment out{phoneme, {}, {}};
  std::string rest = phoneme.xsampa();
  std::vector<MatchedPart> suffixes;  // in stripping order (right to left)

  while (!table.contains(rest)) {
    // `rest` itself is not an entry, so only proper suffixes can match.
    const TableEntry* found = nullptr;
    std::size_t length = std::min(table.longest_key(), rest.size() - 1);
    for (; length > 0; --length) {
      found = table.find(std::string_view(rest).substr(rest.size() - length));
      if (found) break;
    }
    if (!found) throw UnknownPhoneme(phoneme.xsampa(), rest);
    out.attributes.insert(found->attributes.begin(), found->attributes.end());
    suffixes.push_back({rest.substr(rest.size() - length), found->kind});
    rest.erase(rest.size() - length);
  }
  const TableEntry& base = *table.find(rest);
  out.attributes.insert(base.attributes.begin(), base.attributes.end());
  out.matched_parts.push_back({rest, base.kind});
  out.matched_parts.insert(out.matched_parts.end(), suffixes.rbegin(), suffixes.rend());
  return out;
}

std::vector<AttributeAssignment> assign_inventory(const std::vector<Phoneme>& phonemes,
                                                  const BasePhonemeTable& table) {
  std::set<Phoneme> seen;
  for (const auto& p : phonemes) {
    if (!seen.insert(p).second) {
      throw DuplicatePhoneme("phoneme '" + p.xsampa() + "' appears twice in the inventory");
    }
  }
  std::vector<AttributeAssignment> out;
  out.reserve(phonemes.size());
  for (std::size_t i = 0; i < phonemes.size(); ++i) {
    try {
      out.push_back(assign_attributes(phonemes[i], table));
    } catch (const UnknownPhoneme& e) {
      throw UnknownPhoneme(e.phoneme(), e.remainder(), static_cast<std::ptrdiff_t>(i));
    }
  }
  return out;
}

std::vector<Phoneme> to_phonemes(const std::vector<std::string>& xsampa) {
  std::vector<Phoneme> out;
  out.reserve(xsampa.size());
  for (const auto& s : xsampa) out.emplace_back(s);
  return out;
}

}  // namespace upm
