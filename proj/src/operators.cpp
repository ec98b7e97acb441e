#include "ontorules/operators.hpp"

#include <algorithm>

#include "ontorules/error.hpp"

namespace ontorules {

namespace {

bool avoids(const ResolvedTerm& term, const Itemset& items) { return !intersects(term.items, items); }

template <typename Pred>
bool every(const std::vector<ResolvedTerm>& terms, Pred pred) {
  return std::all_of(terms.begin(), terms.end(), pred);
}

template <typename Pred>
RuleSet filter(const RuleSet& rules, std::string provenance, Pred keep) {
  RuleSet out;
  out.provenance = std::move(provenance);
  for (const auto& r : rules.rules) {
    if (keep(r)) out.rules.push_back(r);
  }
  return out;
}

void require(const ResolvedSchema& schema, OperatorKind kind, Scope scope = Scope::kCondition) {
  check_applicable({kind, scope, schema.schema.name}, schema.schema);
}

}  // namespace

const char* to_string(MatchMode mode) { return mode == MatchMode::kAll ? "all" : "any"; }

MatchMode parse_match_mode(std::string_view text) {
  if (text == "any") return MatchMode::kAny;
  if (text == "all") return MatchMode::kAll;
  throw Error(errc::kParse, "unknown match mode '" + std::string(text) + "' (expected any or all)");
}

bool term_matches(const ResolvedTerm& term, const Itemset& items) {
  return intersects(term.items, items) != term.negated;
}

bool conforms(const AssociationRule& rule, const ResolvedSchema& schema, MatchMode mode) {
  if (schema.schema.implicative) {
    return every(schema.antecedent, [&](const ResolvedTerm& t) { return term_matches(t, rule.antecedent); }) &&
           every(schema.consequent, [&](const ResolvedTerm& t) { return term_matches(t, rule.consequent); });
  }
  const Itemset both = set_union(rule.antecedent, rule.consequent);
  return every(schema.antecedent, [&](const ResolvedTerm& t) {
    if (mode == MatchMode::kAny || t.negated) return term_matches(t, both);
    return !t.items.empty() && contains_all(both, t.items);
  });
}

bool is_unexpected(const AssociationRule& rule, const ResolvedSchema& schema, Scope scope) {
  const auto& a = rule.antecedent;
  const auto& b = rule.consequent;
  auto matches = [](const Itemset& side) { return [&side](const ResolvedTerm& t) { return term_matches(t, side); }; };
  auto misses = [](const Itemset& side) { return [&side](const ResolvedTerm& t) { return avoids(t, side); }; };
  switch (scope) {
    case Scope::kCondition:
      return every(schema.antecedent, misses(a)) && every(schema.consequent, matches(b));
    case Scope::kConclusion:
      return every(schema.antecedent, matches(a)) && every(schema.consequent, misses(b));
    case Scope::kBoth:
      return every(schema.antecedent, misses(a)) && every(schema.consequent, misses(b));
  }
  return false;
}

bool is_exception(const AssociationRule& rule, const ResolvedSchema& schema) {
  const auto& a = rule.antecedent;
  const auto& b = rule.consequent;
  if (!every(schema.antecedent, [&](const ResolvedTerm& t) { return term_matches(t, a); })) return false;

  // Z: at least one condition item the schema's condition does not account for.
  Itemset covered;
  for (const auto& t : schema.antecedent) covered = set_union(covered, t.items);
  if (set_difference(a, covered).empty()) return false;

  // Not-Y: a conclusion item answering a consequent question differently.
  for (const auto& t : schema.consequent) {
    for (const auto& item : b) {
      const bool same_question = std::any_of(t.items.begin(), t.items.end(),
                                             [&](const Item& y) { return y.attribute == item.attribute; });
      if (same_question && !std::binary_search(t.items.begin(), t.items.end(), item)) return true;
    }
  }
  return false;
}

RuleSet apply_conform(const RuleSet& rules, const ResolvedSchema& schema, MatchMode mode) {
  return filter(rules, "conform " + schema.schema.name,
                [&](const AssociationRule& r) { return conforms(r, schema, mode); });
}

RuleSet apply_prune(const RuleSet& rules, const ResolvedSchema& schema, MatchMode mode) {
  return filter(rules, "prune " + schema.schema.name,
                [&](const AssociationRule& r) { return !conforms(r, schema, mode); });
}

RuleSet apply_unexpected(const RuleSet& rules, const ResolvedSchema& schema, Scope scope) {
  require(schema, OperatorKind::kUnexpected, scope);
  return filter(rules, std::string("unexpected(") + to_string(scope) + ") " + schema.schema.name,
                [&](const AssociationRule& r) { return is_unexpected(r, schema, scope); });
}

RuleSet apply_exception(const RuleSet& rules, const ResolvedSchema& schema) {
  require(schema, OperatorKind::kException);
  return filter(rules, "exception " + schema.schema.name,
                [&](const AssociationRule& r) { return is_exception(r, schema); });
}

RuleSet apply_operator(const OperatorSpec& spec, const RuleSet& rules, const ResolvedSchema& schema,
                       MatchMode mode) {
  check_applicable(spec, schema.schema);
  switch (spec.kind) {
    case OperatorKind::kPrune:
      return apply_prune(rules, schema, mode);
    case OperatorKind::kConform:
      return apply_conform(rules, schema, mode);
    case OperatorKind::kUnexpected:
      return apply_unexpected(rules, schema, spec.scope);
    case OperatorKind::kException:
      return apply_exception(rules, schema);
  }
  return {};
}

}  // namespace ontorules
