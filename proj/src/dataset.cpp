#include "ontorules/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "ontorules/digest.hpp"
#include "ontorules/error.hpp"

namespace ontorules {

void canonicalize(Itemset& items) {
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
}

bool is_canonical(const Itemset& items) {
  return std::adjacent_find(items.begin(), items.end(),
                            [](const Item& a, const Item& b) { return !(a < b); }) == items.end();
}

bool contains_all(const Itemset& haystack, const Itemset& needle) {
  return std::includes(haystack.begin(), haystack.end(), needle.begin(), needle.end());
}

bool intersects(const Itemset& a, const Itemset& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      return true;
    }
  }
  return false;
}

Itemset set_union(const Itemset& a, const Itemset& b) {
  Itemset out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

Itemset set_intersection(const Itemset& a, const Itemset& b) {
  Itemset out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

Itemset set_difference(const Itemset& a, const Itemset& b) {
  Itemset out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

std::optional<std::int32_t> parse_int(std::string_view s) {
  std::int32_t v = 0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace

Dataset::Dataset(std::vector<std::string> attribute_ids, std::vector<Itemset> transactions) {
  attributes_.reserve(attribute_ids.size());
  for (std::size_t i = 0; i < attribute_ids.size(); ++i) {
    if (attribute_ids[i].empty()) {
      throw Error(errc::kSchema, "empty attribute id in column " + std::to_string(i + 1));
    }
    if (!attribute_lookup_.emplace(attribute_ids[i], i).second) {
      throw Error(errc::kSchema, "duplicate attribute id '" + attribute_ids[i] + "'");
    }
    attributes_.push_back({std::move(attribute_ids[i]), i});
  }
  for (std::size_t t = 0; t < transactions.size(); ++t) {
    Itemset& items = transactions[t];
    canonicalize(items);
    for (std::size_t k = 0; k < items.size(); ++k) {
      if (items[k].attribute >= attributes_.size()) {
        throw Error(errc::kSchema, "transaction " + std::to_string(t + 1) + " references attribute index " +
                                       std::to_string(items[k].attribute) + " outside the header");
      }
      if (k > 0 && items[k - 1].attribute == items[k].attribute) {
        throw Error(errc::kSchema, "transaction " + std::to_string(t + 1) + " has two values for attribute '" +
                                       attributes_[items[k].attribute].id + "'");
      }
    }
  }
  transactions_ = std::move(transactions);
  index_items();
}

void Dataset::index_items() {
  std::set<Item> seen;
  for (const auto& t : transactions_) seen.insert(t.begin(), t.end());
  distinct_items_.assign(seen.begin(), seen.end());
}

Dataset Dataset::load_csv(std::string_view text) {
  std::vector<std::string> header;
  std::vector<Itemset> rows;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!have_header) {
      if (trim(line).empty()) continue;
      for (auto cell : split_cells(line)) header.emplace_back(cell);
      have_header = true;
      continue;
    }
    // A trailing newline at end of input is not a data row.
    if (line.empty() && pos > text.size()) break;
    auto cells = split_cells(line);
    if (cells.size() > header.size()) {
      throw Error(errc::kParse, "row has " + std::to_string(cells.size()) + " cells but the header has " +
                                    std::to_string(header.size()),
                  SourceLocation{line_no, header.size() + 1});
    }
    Itemset row;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c].empty()) continue;
      auto value = parse_int(cells[c]);
      if (!value) {
        throw Error(errc::kParse,
                    "non-integer cell '" + std::string(cells[c]) + "' at row " + std::to_string(line_no) +
                        ", column " + std::to_string(c + 1),
                    SourceLocation{line_no, c + 1});
      }
      row.push_back({static_cast<std::uint32_t>(c), *value});
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw Error(errc::kEmptyDataset, "missing header row");
  if (rows.empty()) throw Error(errc::kEmptyDataset, "dataset has no data rows");
  return Dataset(std::move(header), std::move(rows));
}

Dataset Dataset::load_csv(std::istream& in) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return load_csv(std::string_view(text));
}

Dataset Dataset::load_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::kIo, "cannot read dataset file '" + path + "'");
  return load_csv(in);
}

std::string Dataset::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (i) out += ',';
    out += attributes_[i].id;
  }
  out += '\n';
  for (const auto& t : transactions_) {
    std::vector<std::string> cells(attributes_.size());
    for (const auto& item : t) cells[item.attribute] = std::to_string(item.value);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  }
  return out;
}

std::optional<std::size_t> Dataset::find_attribute(std::string_view id) const {
  auto it = attribute_lookup_.find(std::string(id));
  if (it == attribute_lookup_.end()) return std::nullopt;
  return it->second;
}

Item Dataset::item_of(std::string_view attribute_id, std::int32_t value) const {
  auto index = find_attribute(attribute_id);
  if (!index) throw Error(errc::kLookup, "unknown attribute '" + std::string(attribute_id) + "'");
  return {static_cast<std::uint32_t>(*index), value};
}

Item Dataset::parse_item(std::string_view text) const {
  text = trim(text);
  auto eq = text.rfind('=');
  if (eq == std::string_view::npos) {
    throw Error(errc::kParse, "item '" + std::string(text) + "' is not of the form attr=value");
  }
  auto value = parse_int(trim(text.substr(eq + 1)));
  if (!value) throw Error(errc::kParse, "item '" + std::string(text) + "' has a non-integer value");
  return item_of(trim(text.substr(0, eq)), *value);
}

Itemset Dataset::parse_itemset(std::string_view text, char separator) const {
  Itemset out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(separator, start);
    if (end == std::string_view::npos) end = text.size();
    auto token = trim(text.substr(start, end - start));
    if (!token.empty()) out.push_back(parse_item(token));
    start = end + 1;
  }
  canonicalize(out);
  return out;
}

std::string Dataset::render(Item item) const {
  std::string attr = item.attribute < attributes_.size() ? attributes_[item.attribute].id
                                                         : "#" + std::to_string(item.attribute);
  return attr + "=" + std::to_string(item.value);
}

std::string Dataset::render(const Itemset& items, std::string_view separator) const {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += separator;
    out += render(items[i]);
  }
  return out;
}

std::optional<std::uint32_t> Dataset::item_id(Item item) const {
  auto it = std::lower_bound(distinct_items_.begin(), distinct_items_.end(), item);
  if (it == distinct_items_.end() || *it != item) return std::nullopt;
  return static_cast<std::uint32_t>(it - distinct_items_.begin());
}

std::string Dataset::digest() const { return sha256_hex(to_csv()); }

DatasetStats stats(const Dataset& dataset) {
  DatasetStats s;
  s.transactions = dataset.size();
  s.attributes = dataset.attributes().size();
  s.distinct_items = dataset.distinct_items().size();
  s.values.reserve(s.attributes);
  for (const auto& a : dataset.attributes()) s.values.push_back({a.id, {}});
  for (const auto& item : dataset.distinct_items()) s.values[item.attribute].second.push_back(item.value);
  return s;
}

}  // namespace ontorules
