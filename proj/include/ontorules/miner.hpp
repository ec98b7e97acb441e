#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>

#include "ontorules/dataset.hpp"
#include "ontorules/rules.hpp"

namespace ontorules {

struct MiningParams {
  double min_sup = 0.02;
  double max_sup = 1.0;
  double min_conf = 0.8;
  std::size_t max_consequent_len = 1;

  // Throws Error(config_error) unless every fraction is in (0,1],
  // min_sup <= max_sup and max_consequent_len >= 1.
  void validate() const;
  std::string describe() const;
  bool operator==(const MiningParams&) const = default;
};

// Smallest count c with c/n >= fraction.
std::uint64_t min_count_for(double fraction, std::uint64_t n);
// Largest count c with c/n <= fraction.
std::uint64_t max_count_for(double fraction, std::uint64_t n);
// num/den >= fraction, robust to the binary representation of `fraction`.
bool at_least(std::uint64_t num, std::uint64_t den, double fraction);

struct FrequentItemsets {
  std::map<Itemset, std::uint64_t> counts;
  std::uint64_t n = 0;
  double min_sup = 0.0;

  std::size_t size() const { return counts.size(); }
};

// Levelwise Apriori over per-item transaction bitsets.
FrequentItemsets mine_frequent(const Dataset& dataset, double min_sup);

// Every rule X -> Y drawn from a frequent itemset with |Y| <= max_consequent_len
// that passes the support band and minimum confidence. Canonical order.
RuleSet generate_rules(const FrequentItemsets& frequent, const MiningParams& params);

RuleSet mine_rules(const Dataset& dataset, const MiningParams& params);

// Exact support of an itemset; the empty itemset has support 1.
Fraction support(const Dataset& dataset, const Itemset& itemset);

}  // namespace ontorules
