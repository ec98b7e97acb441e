#pragma once

#include <string_view>

#include "ontorules/rules.hpp"
#include "ontorules/schema.hpp"

namespace ontorules {

// How a non-implicative schema's positive terms are matched: `kAny` needs
// one item of the term's extension in the rule, `kAll` needs all of them.
enum class MatchMode { kAny, kAll };
const char* to_string(MatchMode mode);
MatchMode parse_match_mode(std::string_view text);

// Positive term: extension meets the itemset. Negated term: it does not.
bool term_matches(const ResolvedTerm& term, const Itemset& items);

bool conforms(const AssociationRule& rule, const ResolvedSchema& schema, MatchMode mode);
bool is_unexpected(const AssociationRule& rule, const ResolvedSchema& schema, Scope scope);
bool is_exception(const AssociationRule& rule, const ResolvedSchema& schema);

// Filters keep input order and never modify rules.
RuleSet apply_conform(const RuleSet& rules, const ResolvedSchema& schema, MatchMode mode);
RuleSet apply_prune(const RuleSet& rules, const ResolvedSchema& schema, MatchMode mode);
RuleSet apply_unexpected(const RuleSet& rules, const ResolvedSchema& schema, Scope scope);
RuleSet apply_exception(const RuleSet& rules, const ResolvedSchema& schema);

// Dispatches on spec.kind after check_applicable.
RuleSet apply_operator(const OperatorSpec& spec, const RuleSet& rules, const ResolvedSchema& schema,
                       MatchMode mode);

}  // namespace ontorules
