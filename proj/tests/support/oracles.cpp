#include "oracles.hpp"

#include <algorithm>

namespace oracle {

std::map<Itemset, std::uint64_t> frequent_itemsets(const Dataset& ds, std::uint64_t min_count) {
  std::map<Itemset, std::uint64_t> counts;
  for (const auto& t : ds.transactions()) {
    const std::size_t k = t.size();
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << k); ++mask) {
      Itemset s;
      for (std::size_t b = 0; b < k; ++b) {
        if (mask & (std::uint64_t{1} << b)) s.push_back(t[b]);
      }
      ++counts[s];
    }
  }
  for (auto it = counts.begin(); it != counts.end();) {
    it = it->second < min_count ? counts.erase(it) : std::next(it);
  }
  return counts;
}

std::vector<ontorules::AssociationRule> rules(const Dataset& ds, const ExactParams& p) {
  const std::uint64_t n = ds.size();
  std::vector<ontorules::AssociationRule> out;
  if (n == 0) return out;
  // Enumerate with count >= 1, apply exact thresholds afterwards.
  const auto all = frequent_itemsets(ds, 1);
  for (const auto& [z, cz] : all) {
    if (z.size() < 2) continue;
    const std::uint64_t scale = static_cast<std::uint64_t>(p.scale);
    if (cz * scale < static_cast<std::uint64_t>(p.min_sup) * n) continue;
    if (cz * scale > static_cast<std::uint64_t>(p.max_sup) * n) continue;
    const std::size_t k = z.size();
    for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t{1} << k); ++mask) {
      Itemset x, y;
      for (std::size_t b = 0; b < k; ++b) ((mask & (std::uint64_t{1} << b)) ? y : x).push_back(z[b]);
      if (y.size() > p.max_consequent) continue;
      const std::uint64_t cx = all.at(x);
      if (cz * scale < static_cast<std::uint64_t>(p.min_conf) * cx) continue;
      out.push_back({x, y, cz, cx, n});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.antecedent, a.consequent) < std::tie(b.antecedent, b.consequent);
  });
  return out;
}

Dataset random_dataset(std::mt19937_64& rng, std::size_t attrs, int values, std::size_t rows, double empty_prob) {
  std::vector<std::string> header;
  for (std::size_t a = 0; a < attrs; ++a) header.push_back("a" + std::to_string(a + 1));
  std::uniform_int_distribution<int> value(1, values);
  std::bernoulli_distribution empty(empty_prob);
  std::vector<Itemset> tx;
  for (std::size_t r = 0; r < rows; ++r) {
    Itemset t;
    for (std::size_t a = 0; a < attrs; ++a) {
      if (!empty(rng)) t.push_back({static_cast<std::uint32_t>(a), value(rng)});
    }
    tx.push_back(std::move(t));
  }
  return Dataset(std::move(header), std::move(tx));
}

RefSchema from_resolved(const ontorules::ResolvedSchema& rs) {
  RefSchema s;
  s.implicative = rs.schema.implicative;
  for (const auto& t : rs.antecedent) s.antecedent.push_back({{t.items.begin(), t.items.end()}, t.negated});
  for (const auto& t : rs.consequent) s.consequent.push_back({{t.items.begin(), t.items.end()}, t.negated});
  return s;
}

namespace {

std::set<Item> as_set(const Itemset& s) { return {s.begin(), s.end()}; }

// exists i in f(term), i in side
bool exists_in(const RefTerm& t, const std::set<Item>& side) {
  for (const auto& i : t.ext) {
    if (side.count(i)) return true;
  }
  return false;
}

// for all i in f(term), i not in side
bool none_in(const RefTerm& t, const std::set<Item>& side) {
  for (const auto& i : t.ext) {
    if (side.count(i)) return false;
  }
  return true;
}

bool verifies(const RefTerm& t, const std::set<Item>& side) { return t.negated ? none_in(t, side) : exists_in(t, side); }

}  // namespace

bool ref_conforms(const ontorules::AssociationRule& r, const RefSchema& s, bool all_mode) {
  const auto a = as_set(r.antecedent);
  const auto b = as_set(r.consequent);
  if (s.implicative) {
    for (const auto& t : s.antecedent) {
      if (!verifies(t, a)) return false;
    }
    for (const auto& t : s.consequent) {
      if (!verifies(t, b)) return false;
    }
    return true;
  }
  std::set<Item> ab = a;
  ab.insert(b.begin(), b.end());
  for (const auto& t : s.antecedent) {
    if (t.negated || !all_mode) {
      if (!verifies(t, ab)) return false;
      continue;
    }
    if (t.ext.empty()) return false;
    for (const auto& i : t.ext) {
      if (!ab.count(i)) return false;
    }
  }
  return true;
}

bool ref_unexpected(const ontorules::AssociationRule& r, const RefSchema& s, ontorules::Scope scope) {
  const auto a = as_set(r.antecedent);
  const auto b = as_set(r.consequent);
  const bool invert_condition = scope != ontorules::Scope::kConclusion;
  const bool invert_conclusion = scope != ontorules::Scope::kCondition;
  for (const auto& t : s.antecedent) {
    if (invert_condition ? !none_in(t, a) : !verifies(t, a)) return false;
  }
  for (const auto& t : s.consequent) {
    if (invert_conclusion ? !none_in(t, b) : !verifies(t, b)) return false;
  }
  return true;
}

bool ref_exception(const ontorules::AssociationRule& r, const RefSchema& s) {
  const auto a = as_set(r.antecedent);
  for (const auto& t : s.antecedent) {
    if (!verifies(t, a)) return false;
  }
  bool has_z = false;
  for (const auto& i : r.antecedent) {
    bool covered = false;
    for (const auto& t : s.antecedent) covered = covered || t.ext.count(i);
    has_z = has_z || !covered;
  }
  if (!has_z) return false;
  for (const auto& t : s.consequent) {
    std::set<std::uint32_t> questions;
    for (const auto& y : t.ext) questions.insert(y.attribute);
    for (const auto& i : r.consequent) {
      if (questions.count(i.attribute) && !t.ext.count(i)) return true;
    }
  }
  return false;
}

}  // namespace oracle
