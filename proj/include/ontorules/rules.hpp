#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ontorules/dataset.hpp"

namespace ontorules {

// Exact rational stored as integer counts.
struct Fraction {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Fraction& a, const Fraction& b) {
    return static_cast<unsigned __int128>(a.num) * b.den == static_cast<unsigned __int128>(b.num) * a.den;
  }
};

// Implication antecedent -> consequent with the counts it was mined from.
struct AssociationRule {
  Itemset antecedent;
  Itemset consequent;
  std::uint64_t count_xy = 0;
  std::uint64_t count_x = 0;
  std::uint64_t n = 0;

  Fraction support() const { return {count_xy, n}; }
  Fraction confidence() const { return {count_xy, count_x}; }

  // Rule identity is (antecedent, consequent).
  bool same_rule(const AssociationRule& other) const {
    return antecedent == other.antecedent && consequent == other.consequent;
  }
  bool operator==(const AssociationRule&) const = default;
};

// Canonical storage order: antecedent, then consequent, lexicographic on items.
bool canonical_less(const AssociationRule& a, const AssociationRule& b);
// Display order: confidence desc, support desc, then canonical.
bool display_less(const AssociationRule& a, const AssociationRule& b);

struct RuleSet {
  std::vector<AssociationRule> rules;
  std::string provenance;

  std::size_t size() const { return rules.size(); }
  bool empty() const { return rules.empty(); }
};

// Sorts canonically and drops duplicate (antecedent, consequent) pairs.
void canonicalize(RuleSet& rules);

// Versioned line-oriented rules file. One rule per line:
//   antecedent TAB consequent TAB count_xy TAB count_x TAB n
// with items written as space separated attr=value in canonical order.
std::string write_rules(const RuleSet& rules, const Dataset& vocabulary);
RuleSet read_rules(std::string_view text, const Dataset& vocabulary);
RuleSet read_rules_file(const std::string& path, const Dataset& vocabulary);

// Decimal rendering with a fixed number of digits, e.g. 0.852.
std::string format_decimal(const Fraction& f, int digits = 3);
// Percentage rendering, e.g. 85.2%.
std::string format_percent(const Fraction& f, int digits = 1);

}  // namespace ontorules
