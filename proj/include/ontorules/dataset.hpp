#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ontorules {

struct Attribute {
  std::string id;
  std::size_t index = 0;

  bool operator==(const Attribute&) const = default;
};

// An attribute=value pair. Ordering is the canonical item order: attribute
// index first, then value.
struct Item {
  std::uint32_t attribute = 0;
  std::int32_t value = 0;

  auto operator<=>(const Item&) const = default;
};

// Sorted, duplicate-free list of items.
using Itemset = std::vector<Item>;

void canonicalize(Itemset& items);
bool is_canonical(const Itemset& items);
// True iff every item of `needle` occurs in `haystack`; both canonical.
bool contains_all(const Itemset& haystack, const Itemset& needle);
bool intersects(const Itemset& a, const Itemset& b);
Itemset set_union(const Itemset& a, const Itemset& b);
Itemset set_intersection(const Itemset& a, const Itemset& b);
Itemset set_difference(const Itemset& a, const Itemset& b);

class Dataset {
 public:
  Dataset() = default;
  // Validates header uniqueness, attribute bounds and one-item-per-attribute
  // transactions; canonicalizes every transaction.
  Dataset(std::vector<std::string> attribute_ids, std::vector<Itemset> transactions);

  // Parses a header row of attribute ids followed by rows of integer cells.
  // Empty cells contribute no item.
  static Dataset load_csv(std::string_view text);
  static Dataset load_csv(std::istream& in);
  static Dataset load_csv_file(const std::string& path);

  // Inverse of load_csv (up to whitespace): load_csv(to_csv()) == *this.
  std::string to_csv() const;

  const std::vector<Attribute>& attributes() const { return attributes_; }
  const std::vector<Itemset>& transactions() const { return transactions_; }
  std::size_t size() const { return transactions_.size(); }
  bool empty() const { return transactions_.empty(); }

  std::optional<std::size_t> find_attribute(std::string_view id) const;

  // Throws Error(lookup_error) for unknown attributes.
  Item item_of(std::string_view attribute_id, std::int32_t value) const;
  // Parses "attr=value".
  Item parse_item(std::string_view text) const;
  Itemset parse_itemset(std::string_view text, char separator = ' ') const;

  std::string render(Item item) const;
  std::string render(const Itemset& items, std::string_view separator = " ") const;

  // Items occurring in at least one transaction, canonical order. Their
  // position in this list is the dense item id used by the miner.
  const std::vector<Item>& distinct_items() const { return distinct_items_; }
  std::optional<std::uint32_t> item_id(Item item) const;

  std::string digest() const;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.attributes_ == b.attributes_ && a.transactions_ == b.transactions_;
  }

 private:
  void index_items();

  std::vector<Attribute> attributes_;
  std::vector<Itemset> transactions_;
  std::unordered_map<std::string, std::size_t> attribute_lookup_;
  std::vector<Item> distinct_items_;
};

struct DatasetStats {
  std::size_t transactions = 0;
  std::size_t attributes = 0;
  std::size_t distinct_items = 0;
  // (attribute id, sorted distinct values) in header order.
  std::vector<std::pair<std::string, std::vector<std::int32_t>>> values;
};

DatasetStats stats(const Dataset& dataset);

}  // namespace ontorules
