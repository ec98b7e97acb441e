#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ontorules/dataset.hpp"
#include "ontorules/ontology.hpp"

namespace ontorules {

struct SchemaTerm {
  std::string concept_name;
  bool negated = false;

  bool operator==(const SchemaTerm&) const = default;
};

// <X1, ..., Xs1 -> Y1, ..., Ys2>; the arrow is absent for non-implicative schemas.
struct RuleSchema {
  std::string name;
  std::vector<SchemaTerm> antecedent;
  std::vector<SchemaTerm> consequent;
  bool implicative = true;

  // Throws Error(validity_error) when the shape invariants do not hold.
  void validate() const;
  bool operator==(const RuleSchema&) const = default;
};

enum class OperatorKind { kPrune, kConform, kUnexpected, kException };
enum class Scope { kCondition, kConclusion, kBoth };

const char* to_string(OperatorKind kind);
const char* to_string(Scope scope);
OperatorKind parse_operator_kind(std::string_view text);
Scope parse_scope(std::string_view text);

struct OperatorSpec {
  OperatorKind kind = OperatorKind::kConform;
  Scope scope = Scope::kCondition;  // only meaningful for kUnexpected
  std::string schema;

  bool operator==(const OperatorSpec&) const = default;
};

std::string format_operator(const OperatorSpec& spec);

// Throws Error(validity_error) if `spec` cannot be applied to `schema`:
// unexpected and exception need an implicative schema, and the side they
// invert must not hold negated terms.
void check_applicable(const OperatorSpec& spec, const RuleSchema& schema);

struct Script {
  std::vector<RuleSchema> schemas;
  std::vector<OperatorSpec> operators;
};

// Line-oriented rule schema language:
//   schema NAME: <TERM {, TERM} [-> TERM {, TERM}]>
//   apply OP[(SCOPE)] NAME
// TERM is [!]ConceptName; `#` starts a comment.
Script parse_script(std::string_view text);
std::string format_schema(const RuleSchema& schema);
std::string format_script(const Script& script);

struct ResolvedTerm {
  std::string concept_name;
  bool negated = false;
  Itemset items;
};

struct ResolvedSchema {
  RuleSchema schema;
  std::vector<ResolvedTerm> antecedent;
  std::vector<ResolvedTerm> consequent;
  std::vector<std::string> diagnostics;  // e.g. empty extensions
};

ResolvedSchema resolve(const RuleSchema& schema, const ExtensionIndex& extensions);
ResolvedSchema resolve(const RuleSchema& schema, const Ontology& ontology, const Dataset& dataset);

}  // namespace ontorules
