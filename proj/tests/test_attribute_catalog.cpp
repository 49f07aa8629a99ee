#include <gtest/gtest.h>

#include <sstream>

#include "test_support.hpp"
#include "upm/attribute_catalog.hpp"
#include "upm/errors.hpp"

using namespace upm;

TEST(AttributeCatalog, ReadsRowsInFileOrder) {
  std::istringstream in("vowel\tvowel\nopen\tvowel\nfront\tvowel\nunrounded\tvowel\nblank\tblank\n");
  const auto catalog = parse_catalog(in);
  EXPECT_EQ(catalog.size(), 5u);
  EXPECT_EQ(catalog.blank_index(), 4u);
  EXPECT_EQ(catalog[2].name, "front");
  EXPECT_EQ(catalog.index_of("open"), 1u);
}

TEST(AttributeCatalog, RejectsMissingBlank) {
  std::istringstream in("vowel\tvowel\nopen\tvowel\n");
  EXPECT_THROW(parse_catalog(in), ParseError);
}

TEST(AttributeCatalog, RejectsDuplicateNamesAndBadCategories) {
  std::istringstream dup("vowel\tvowel\nvowel\tvowel\nblank\tblank\n");
  EXPECT_THROW(parse_catalog(dup), ParseError);
  std::istringstream bad("vowel\tcolour\nblank\tblank\n");
  EXPECT_THROW(parse_catalog(bad), ParseError);
  std::istringstream two_blanks("blank\tblank\nnull\tblank\nvowel\tvowel\n");
  EXPECT_THROW(parse_catalog(two_blanks), ParseError);
}

TEST(AttributeCatalog, SkipsCommentsAndBlankLines) {
  std::istringstream in("# header\n\nstop\tconsonant\n\nblank\tblank\n");
  EXPECT_EQ(parse_catalog(in).size(), 2u);
}

TEST(AttributeCatalog, ShippedCatalogCoversPlaceAndMannerClasses) {
  const auto catalog = load_default_catalog();
  EXPECT_GE(catalog.size(), 30u);
  for (const char* name : {"labial", "coronal", "dorsal", "stop", "fricative", "approximant",
                           "vowel", "ejective", "nasal"}) {
    EXPECT_TRUE(catalog.find(name).has_value()) << name;
  }
  EXPECT_EQ(catalog[catalog.blank_index()].name, "blank");
  EXPECT_EQ(catalog[catalog.blank_index()].category, AttributeCategory::kBlank);
}

TEST(BaseTable, ParsesBaseAndDiacriticRows) {
  const auto catalog = load_default_catalog();
  std::istringstream in("a\tbase\tvowel,open,front,unrounded\n_>\tdiacritic\tejective\n");
  const auto table = parse_base_table(in, catalog);
  ASSERT_TRUE(table.contains("a"));
  EXPECT_EQ(table.find("a")->attributes.size(), 4u);
  EXPECT_EQ(table.find("a")->kind, EntryKind::kBase);
  EXPECT_EQ(table.find("_>")->kind, EntryKind::kDiacritic);
  EXPECT_EQ(table.find("_>")->attributes, AttributeSet{catalog.index_of("ejective")});
}

TEST(BaseTable, RejectsUnknownAttributeAndBlank) {
  const auto catalog = load_default_catalog();
  std::istringstream unknown("a\tbase\tvowel,xyzzy\n");
  EXPECT_THROW(parse_base_table(unknown, catalog), UnknownAttribute);
  std::istringstream blank("a\tbase\tvowel,blank\n");
  EXPECT_THROW(parse_base_table(blank, catalog), Error);
  std::istringstream dup("a\tbase\tvowel\na\tbase\topen\n");
  EXPECT_THROW(parse_base_table(dup, catalog), ParseError);
  std::istringstream kind("a\tprefix\tvowel\n");
  EXPECT_THROW(parse_base_table(kind, catalog), ParseError);
}

TEST(BaseTable, ShippedEntriesAreNonEmptyAndBlankFree) {
  const auto table = load_default_table();
  const auto blank = table.catalog().blank_index();
  EXPECT_GT(table.size(), 50u);
  for (const auto& [key, entry] : table.entries()) {
    EXPECT_FALSE(key.empty());
    EXPECT_FALSE(entry.attributes.empty()) << key;
    EXPECT_EQ(entry.attributes.count(blank), 0u) << key;
  }
}

TEST(BaseTable, CatalogAndTableRoundTrip) {
  const auto table = load_default_table();
  std::ostringstream cat_out, table_out;
  write_catalog(cat_out, table.catalog());
  write_base_table(table_out, table);
  std::istringstream cat_in(cat_out.str());
  const auto catalog = parse_catalog(cat_in);
  EXPECT_EQ(catalog, table.catalog());
  std::istringstream table_in(table_out.str());
  EXPECT_EQ(parse_base_table(table_in, catalog), table);
}

TEST(BaseTable, AddValidatesEntries) {
  auto table = testkit::tiny_table();
  EXPECT_THROW(table.add("", EntryKind::kBase, {0}), ParseError);
  EXPECT_THROW(table.add("b", EntryKind::kBase, {}), EmptyAttributeSet);
  EXPECT_THROW(table.add("b", EntryKind::kBase, {9}), UnknownAttribute);
  EXPECT_THROW(table.add("b", EntryKind::kBase, {3}), UnknownAttribute);
  EXPECT_THROW(table.add("p", EntryKind::kBase, {0}), ParseError);
}
