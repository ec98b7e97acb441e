#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ontorules/dataset.hpp"

namespace ontorules {

// Expression defining a concept over other concepts and answer codes.
struct ConceptExpr {
  enum class Kind { kRef, kOr, kAnd, kAnswerIn };

  Kind kind = Kind::kRef;
  std::string concept_name;          // kRef
  std::vector<ConceptExpr> operands;  // kOr, kAnd
  std::vector<std::int32_t> values;   // kAnswerIn, sorted and unique

  static ConceptExpr ref(std::string name);
  static ConceptExpr any_of(std::vector<ConceptExpr> operands);
  static ConceptExpr all_of(std::vector<ConceptExpr> operands);
  static ConceptExpr answer_in(std::vector<std::int32_t> values);

  bool operator==(const ConceptExpr&) const = default;
};

// Parses the JSON object notation used in ontology `define` blocks, e.g.
// {"and": [{"concept": "ComfortApartment"}, {"answerIn": [1, 2]}]}.
// A bare JSON string is accepted as a concept reference.
ConceptExpr parse_concept_expr(std::string_view json_text);
std::string format_concept_expr(const ConceptExpr& expr);

enum class ConceptKind { kLeaf, kGeneralized, kDefined };
const char* to_string(ConceptKind kind);

// Item as written in an ontology document; the attribute need not exist in
// any particular dataset.
struct MappedItem {
  std::string attribute;
  std::int32_t value = 0;

  auto operator<=>(const MappedItem&) const = default;
  std::string str() const { return attribute + "=" + std::to_string(value); }
};

struct Concept {
  std::string name;
  std::vector<std::string> parents;
  std::vector<std::string> children;
  ConceptKind kind = ConceptKind::kLeaf;
  std::vector<MappedItem> items;  // leaf mapping, sorted
  std::optional<ConceptExpr> definition;
};

// Concept DAG (subsumption), leaf-to-item mapping and defined concepts.
// Immutable after parse.
class Ontology {
 public:
  Ontology() = default;

  // Document format: {"concepts": [{"name", "parents", "items", "define"}]}.
  // Throws Error with codes parse_error, schema_error, resolution_error or
  // cycle_error.
  static Ontology parse(std::string_view document);
  static Ontology parse_file(const std::string& path);

  const std::vector<Concept>& concepts() const { return concepts_; }
  bool contains(std::string_view name) const;
  // Throws Error(lookup_error).
  const Concept& concept_named(std::string_view name) const;
  std::vector<std::string> roots() const;

  // Leaf concepts reachable downward from `name`, reflexively. Sorted.
  std::vector<std::string> leaves_under(std::string_view name) const;

  // Union of all leaf mappings, sorted.
  std::vector<MappedItem> mapped_items() const;

  const std::string& source() const { return source_; }
  std::string digest() const;

 private:
  std::vector<Concept> concepts_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string source_;
};

// The concept-to-itemset mapping f, evaluated for one (ontology, dataset)
// pair. Every concept's extension is computed up front so the index can be
// shared across threads without locking.
//
// The item universe is the dataset's distinct items together with every
// mapped item whose attribute exists in the dataset header.
class ExtensionIndex {
 public:
  ExtensionIndex(const Ontology& ontology, const Dataset& dataset);

  // Throws Error(resolution_error) for unknown concepts.
  const Itemset& of_concept(std::string_view name) const;
  Itemset evaluate(const ConceptExpr& expr) const;
  const Itemset& universe() const { return universe_; }

 private:
  std::unordered_map<std::string, Itemset> extensions_;
  Itemset universe_;
};

Itemset item_extension(const Ontology& ontology, const ConceptExpr& expr, const Dataset& dataset);

struct MappingReport {
  std::vector<std::string> unmapped;  // dataset items no leaf maps
  std::vector<std::string> phantom;   // mapped items absent from the dataset
  // Set when the ontology maps items but none of their attributes exist in
  // the dataset header.
  bool fatal = false;
};

MappingReport validate_against(const Ontology& ontology, const Dataset& dataset);

}  // namespace ontorules
