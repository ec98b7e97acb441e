#include "ontorules/miner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "ontorules/error.hpp"

namespace ontorules {

namespace {

// Absorbs the representation error of fractions like 0.1 * 60.
constexpr double kCountSlack = 1e-6;

bool in_unit_interval(double f) { return f > 0.0 && f <= 1.0; }

using Bits = std::vector<std::uint64_t>;

struct Level {
  std::vector<std::uint32_t> ids;
  Bits bits;
  std::uint64_t count = 0;
};

std::uint64_t popcount(const Bits& bits) {
  std::uint64_t c = 0;
  for (auto w : bits) c += static_cast<std::uint64_t>(std::popcount(w));
  return c;
}

Itemset to_itemset(const std::vector<std::uint32_t>& ids, const std::vector<Item>& items) {
  Itemset out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(items[id]);
  return out;
}

// Calls fn(indices) for every k-combination of [0, n), lexicographically.
template <typename Fn>
void for_each_combination(std::size_t n, std::size_t k, Fn&& fn) {
  if (k == 0 || k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  for (;;) {
    fn(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

void MiningParams::validate() const {
  if (!in_unit_interval(min_sup)) throw Error(errc::kConfig, "min_sup must be in (0,1]");
  if (!in_unit_interval(max_sup)) throw Error(errc::kConfig, "max_sup must be in (0,1]");
  if (!in_unit_interval(min_conf)) throw Error(errc::kConfig, "min_conf must be in (0,1]");
  if (min_sup > max_sup) throw Error(errc::kConfig, "min_sup must not exceed max_sup");
  if (max_consequent_len < 1) throw Error(errc::kConfig, "max_consequent_len must be at least 1");
}

std::string MiningParams::describe() const {
  std::ostringstream os;
  os << "min_sup=" << min_sup << " max_sup=" << max_sup << " min_conf=" << min_conf
     << " max_consequent=" << max_consequent_len;
  return os.str();
}

std::uint64_t min_count_for(double fraction, std::uint64_t n) {
  double c = std::ceil(fraction * static_cast<double>(n) - kCountSlack);
  if (c < 1.0) return fraction > 0.0 ? 1 : 0;
  return static_cast<std::uint64_t>(c);
}

std::uint64_t max_count_for(double fraction, std::uint64_t n) {
  double c = std::floor(fraction * static_cast<double>(n) + kCountSlack);
  return c < 0.0 ? 0 : static_cast<std::uint64_t>(c);
}

bool at_least(std::uint64_t num, std::uint64_t den, double fraction) {
  return static_cast<double>(num) + kCountSlack >= fraction * static_cast<double>(den);
}

FrequentItemsets mine_frequent(const Dataset& dataset, double min_sup) {
  FrequentItemsets out;
  out.n = dataset.size();
  out.min_sup = min_sup;
  if (!(min_sup > 0.0 && min_sup <= 1.0)) throw Error(errc::kConfig, "min_sup must be in (0,1]");
  if (dataset.empty()) return out;

  const std::uint64_t n = dataset.size();
  const std::uint64_t threshold = min_count_for(min_sup, n);
  if (threshold > n) return out;

  const auto& items = dataset.distinct_items();
  const std::size_t words = (n + 63) / 64;
  std::vector<Bits> tids(items.size(), Bits(words, 0));
  for (std::size_t t = 0; t < dataset.transactions().size(); ++t) {
    for (const auto& item : dataset.transactions()[t]) {
      tids[*dataset.item_id(item)][t / 64] |= std::uint64_t{1} << (t % 64);
    }
  }

  std::vector<Level> current;
  for (std::uint32_t id = 0; id < items.size(); ++id) {
    auto c = popcount(tids[id]);
    if (c >= threshold) current.push_back({{id}, tids[id], c});
  }

  while (!current.empty()) {
    for (const auto& f : current) out.counts.emplace(to_itemset(f.ids, items), f.count);

    // `current` is sorted lexicographically by ids; candidates join pairs
    // that share all but the last id.
    std::vector<Level> next;
    const std::size_t k = current.front().ids.size();
    std::vector<std::vector<std::uint32_t>> keys;
    keys.reserve(current.size());
    for (const auto& f : current) keys.push_back(f.ids);
    auto is_frequent = [&](const std::vector<std::uint32_t>& ids) {
      return std::binary_search(keys.begin(), keys.end(), ids);
    };
    std::vector<std::uint32_t> subset(k);
    for (std::size_t i = 0; i < current.size(); ++i) {
      for (std::size_t j = i + 1; j < current.size(); ++j) {
        const auto& a = current[i].ids;
        const auto& b = current[j].ids;
        if (!std::equal(a.begin(), a.end() - 1, b.begin())) break;
        // Two values of one attribute never co-occur.
        if (items[a.back()].attribute == items[b.back()].attribute) continue;
        std::vector<std::uint32_t> cand(a);
        cand.push_back(b.back());
        bool all_subsets = true;
        for (std::size_t drop = 0; drop + 2 < cand.size() && all_subsets; ++drop) {
          subset.clear();
          for (std::size_t m = 0; m < cand.size(); ++m) {
            if (m != drop) subset.push_back(cand[m]);
          }
          all_subsets = is_frequent(subset);
        }
        if (!all_subsets) continue;
        Bits bits(words);
        for (std::size_t w = 0; w < words; ++w) bits[w] = current[i].bits[w] & tids[b.back()][w];
        auto c = popcount(bits);
        if (c >= threshold) next.push_back({std::move(cand), std::move(bits), c});
      }
    }
    current = std::move(next);
  }
  return out;
}

RuleSet generate_rules(const FrequentItemsets& frequent, const MiningParams& params) {
  params.validate();
  RuleSet out;
  out.provenance = "mined " + params.describe();
  const std::uint64_t n = frequent.n;
  if (n == 0) return out;
  const std::uint64_t lo = min_count_for(params.min_sup, n);
  const std::uint64_t hi = max_count_for(params.max_sup, n);

  for (const auto& [itemset, count_xy] : frequent.counts) {
    if (itemset.size() < 2 || count_xy < lo || count_xy > hi) continue;
    const std::size_t max_k = std::min(params.max_consequent_len, itemset.size() - 1);
    for (std::size_t k = 1; k <= max_k; ++k) {
      for_each_combination(itemset.size(), k, [&](const std::vector<std::size_t>& pick) {
        Itemset consequent;
        Itemset antecedent;
        std::size_t p = 0;
        for (std::size_t m = 0; m < itemset.size(); ++m) {
          if (p < pick.size() && pick[p] == m) {
            consequent.push_back(itemset[m]);
            ++p;
          } else {
            antecedent.push_back(itemset[m]);
          }
        }
        auto it = frequent.counts.find(antecedent);
        if (it == frequent.counts.end()) return;  // only if mined with another min_sup
        const std::uint64_t count_x = it->second;
        if (!at_least(count_xy, count_x, params.min_conf)) return;
        out.rules.push_back({std::move(antecedent), std::move(consequent), count_xy, count_x, n});
      });
    }
  }
  std::sort(out.rules.begin(), out.rules.end(), canonical_less);
  return out;
}

RuleSet mine_rules(const Dataset& dataset, const MiningParams& params) {
  params.validate();
  return generate_rules(mine_frequent(dataset, params.min_sup), params);
}

Fraction support(const Dataset& dataset, const Itemset& itemset) {
  std::uint64_t count = 0;
  for (const auto& t : dataset.transactions()) {
    if (contains_all(t, itemset)) ++count;
  }
  return {count, dataset.size()};
}

}  // namespace ontorules
