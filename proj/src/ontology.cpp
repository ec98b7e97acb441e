#include "ontorules/ontology.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>

#include <nlohmann/json.hpp>

#include "ontorules/digest.hpp"
#include "ontorules/error.hpp"

namespace ontorules {

using json = nlohmann::json;

namespace {

SourceLocation location_of(std::string_view text, std::size_t byte) {
  SourceLocation loc{1, 1};
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++loc.line;
      loc.column = 1;
    } else {
      ++loc.column;
    }
  }
  return loc;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(errc::kParse, std::string("malformed document: ") + e.what(), location_of(text, e.byte));
  }
}

ConceptExpr expr_from_json(const json& node, const std::string& where) {
  if (node.is_string()) return ConceptExpr::ref(node.get<std::string>());
  if (!node.is_object() || node.size() != 1) {
    throw Error(errc::kSchema, where + ": an expression is an object with exactly one of or/and/concept/answerIn");
  }
  const auto& [key, value] = *node.items().begin();
  if (key == "concept") {
    if (!value.is_string() || value.get<std::string>().empty()) {
      throw Error(errc::kSchema, where + ": 'concept' must be a nonempty string");
    }
    return ConceptExpr::ref(value.get<std::string>());
  }
  if (key == "or" || key == "and") {
    if (!value.is_array() || value.empty()) throw Error(errc::kSchema, where + ": '" + key + "' needs a nonempty list");
    std::vector<ConceptExpr> operands;
    for (const auto& op : value) operands.push_back(expr_from_json(op, where));
    return key == "or" ? ConceptExpr::any_of(std::move(operands)) : ConceptExpr::all_of(std::move(operands));
  }
  if (key == "answerIn") {
    if (!value.is_array() || value.empty()) throw Error(errc::kSchema, where + ": 'answerIn' needs a nonempty list");
    std::vector<std::int32_t> values;
    for (const auto& v : value) {
      if (!v.is_number_integer()) throw Error(errc::kSchema, where + ": 'answerIn' values must be integers");
      values.push_back(v.get<std::int32_t>());
    }
    return ConceptExpr::answer_in(std::move(values));
  }
  throw Error(errc::kSchema, where + ": unknown expression key '" + key + "'");
}

json expr_to_json(const ConceptExpr& expr) {
  switch (expr.kind) {
    case ConceptExpr::Kind::kRef:
      return json{{"concept", expr.concept_name}};
    case ConceptExpr::Kind::kOr:
    case ConceptExpr::Kind::kAnd: {
      json ops = json::array();
      for (const auto& op : expr.operands) ops.push_back(expr_to_json(op));
      return json{{expr.kind == ConceptExpr::Kind::kOr ? "or" : "and", ops}};
    }
    case ConceptExpr::Kind::kAnswerIn:
      return json{{"answerIn", expr.values}};
  }
  return {};
}

void collect_refs(const ConceptExpr& expr, std::vector<std::string>& out) {
  if (expr.kind == ConceptExpr::Kind::kRef) out.push_back(expr.concept_name);
  for (const auto& op : expr.operands) collect_refs(op, out);
}

MappedItem parse_mapped_item(const std::string& text, const std::string& where) {
  auto eq = text.rfind('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(errc::kSchema, where + ": item '" + text + "' is not of the form attr=value");
  }
  std::int32_t value = 0;
  const char* first = text.data() + eq + 1;
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (first == last || ec != std::errc() || ptr != last) {
    throw Error(errc::kSchema, where + ": item '" + text + "' has a non-integer value");
  }
  return {text.substr(0, eq), value};
}

// Returns a node on a cycle of `edges`, if any.
std::optional<std::string> find_cycle(const std::vector<std::string>& nodes,
                                      const std::function<std::vector<std::string>(const std::string&)>& edges) {
  enum class Mark { kNone, kActive, kDone };
  std::unordered_map<std::string, Mark> mark;
  std::optional<std::string> hit;
  std::function<bool(const std::string&)> visit = [&](const std::string& node) {
    auto& m = mark[node];
    if (m == Mark::kDone) return false;
    if (m == Mark::kActive) {
      hit = node;
      return true;
    }
    m = Mark::kActive;
    for (const auto& next : edges(node)) {
      if (visit(next)) return true;
    }
    mark[node] = Mark::kDone;
    return false;
  };
  for (const auto& n : nodes) {
    if (visit(n)) return hit;
  }
  return std::nullopt;
}

}  // namespace

ConceptExpr ConceptExpr::ref(std::string name) {
  ConceptExpr e;
  e.kind = Kind::kRef;
  e.concept_name = std::move(name);
  return e;
}

ConceptExpr ConceptExpr::any_of(std::vector<ConceptExpr> operands) {
  ConceptExpr e;
  e.kind = Kind::kOr;
  e.operands = std::move(operands);
  return e;
}

ConceptExpr ConceptExpr::all_of(std::vector<ConceptExpr> operands) {
  ConceptExpr e;
  e.kind = Kind::kAnd;
  e.operands = std::move(operands);
  return e;
}

ConceptExpr ConceptExpr::answer_in(std::vector<std::int32_t> values) {
  ConceptExpr e;
  e.kind = Kind::kAnswerIn;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  e.values = std::move(values);
  return e;
}

ConceptExpr parse_concept_expr(std::string_view json_text) {
  return expr_from_json(parse_json(json_text), "expression");
}

std::string format_concept_expr(const ConceptExpr& expr) { return expr_to_json(expr).dump(); }

const char* to_string(ConceptKind kind) {
  switch (kind) {
    case ConceptKind::kLeaf:
      return "leaf";
    case ConceptKind::kGeneralized:
      return "generalized";
    case ConceptKind::kDefined:
      return "defined";
  }
  return "?";
}

Ontology Ontology::parse(std::string_view document) {
  Ontology o;
  o.source_ = std::string(document);
  const json root = parse_json(document);
  if (!root.is_object()) throw Error(errc::kSchema, "ontology document must be an object");
  for (const auto& [key, value] : root.items()) {
    if (key == "version") {
      if (value != 1) throw Error(errc::kSchema, "unsupported ontology version " + value.dump());
    } else if (key != "concepts") {
      throw Error(errc::kSchema, "unknown top-level key '" + key + "'");
    }
  }
  if (!root.contains("concepts") || !root["concepts"].is_array()) {
    throw Error(errc::kSchema, "ontology document needs a 'concepts' list");
  }

  for (const auto& entry : root["concepts"]) {
    if (!entry.is_object()) throw Error(errc::kSchema, "concept entries must be objects");
    if (!entry.contains("name") || !entry["name"].is_string() || entry["name"].get<std::string>().empty()) {
      throw Error(errc::kSchema, "concept entry without a nonempty 'name'");
    }
    Concept c;
    c.name = entry["name"].get<std::string>();
    const std::string where = "concept '" + c.name + "'";
    for (const auto& [key, value] : entry.items()) {
      if (key == "name") continue;
      if (key == "parents") {
        if (!value.is_array()) throw Error(errc::kSchema, where + ": 'parents' must be a list");
        for (const auto& p : value) {
          if (!p.is_string()) throw Error(errc::kSchema, where + ": parent names must be strings");
          c.parents.push_back(p.get<std::string>());
        }
      } else if (key == "items") {
        if (!value.is_array()) throw Error(errc::kSchema, where + ": 'items' must be a list");
        for (const auto& it : value) {
          if (!it.is_string()) throw Error(errc::kSchema, where + ": items must be \"attr=value\" strings");
          c.items.push_back(parse_mapped_item(it.get<std::string>(), where));
        }
      } else if (key == "define") {
        c.definition = expr_from_json(value, where);
      } else {
        throw Error(errc::kSchema, where + ": unknown key '" + key + "'");
      }
    }
    std::sort(c.items.begin(), c.items.end());
    c.items.erase(std::unique(c.items.begin(), c.items.end()), c.items.end());
    std::sort(c.parents.begin(), c.parents.end());
    c.parents.erase(std::unique(c.parents.begin(), c.parents.end()), c.parents.end());
    if (c.definition && !c.items.empty()) {
      throw Error(errc::kSchema, where + ": a concept cannot have both 'items' and 'define'");
    }
    if (!o.index_.emplace(c.name, o.concepts_.size()).second) {
      throw Error(errc::kSchema, "duplicate concept name '" + c.name + "'");
    }
    o.concepts_.push_back(std::move(c));
  }

  for (const auto& c : o.concepts_) {
    for (const auto& p : c.parents) {
      if (!o.contains(p)) throw Error(errc::kResolution, "concept '" + c.name + "' has unknown parent '" + p + "'");
    }
    if (c.definition) {
      std::vector<std::string> refs;
      collect_refs(*c.definition, refs);
      for (const auto& r : refs) {
        if (!o.contains(r)) {
          throw Error(errc::kResolution, "definition of '" + c.name + "' references unknown concept '" + r + "'");
        }
      }
    }
  }
  for (std::size_t i = 0; i < o.concepts_.size(); ++i) {
    for (const auto& p : o.concepts_[i].parents) o.concepts_[o.index_.at(p)].children.push_back(o.concepts_[i].name);
  }

  std::vector<std::string> names;
  for (const auto& c : o.concepts_) names.push_back(c.name);
  if (auto hit = find_cycle(names, [&](const std::string& n) { return o.concept_named(n).parents; })) {
    throw Error(errc::kCycle, "subsumption cycle through concept '" + *hit + "'");
  }

  for (auto& c : o.concepts_) {
    std::sort(c.children.begin(), c.children.end());
    if (c.definition) {
      if (!c.children.empty()) {
        throw Error(errc::kSchema, "defined concept '" + c.name + "' cannot subsume other concepts");
      }
      c.kind = ConceptKind::kDefined;
    } else if (!c.children.empty()) {
      if (!c.items.empty()) {
        throw Error(errc::kSchema, "concept '" + c.name + "' has children and 'items'; only leaves map items");
      }
      c.kind = ConceptKind::kGeneralized;
    } else {
      c.kind = ConceptKind::kLeaf;
    }
  }

  // Extensions depend on children (generalized) and references (defined).
  auto depends_on = [&](const std::string& n) {
    const Concept& c = o.concept_named(n);
    std::vector<std::string> deps;
    if (c.definition) {
      collect_refs(*c.definition, deps);
    } else {
      deps = c.children;
    }
    return deps;
  };
  if (auto hit = find_cycle(names, depends_on)) {
    throw Error(errc::kCycle, "definition cycle through concept '" + *hit + "'");
  }
  return o;
}

Ontology Ontology::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::kIo, "cannot read ontology file '" + path + "'");
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse(text);
}

bool Ontology::contains(std::string_view name) const { return index_.count(std::string(name)) != 0; }

const Concept& Ontology::concept_named(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw Error(errc::kLookup, "unknown concept '" + std::string(name) + "'");
  return concepts_[it->second];
}

std::vector<std::string> Ontology::roots() const {
  std::vector<std::string> out;
  for (const auto& c : concepts_) {
    if (c.parents.empty()) out.push_back(c.name);
  }
  return out;
}

std::vector<std::string> Ontology::leaves_under(std::string_view name) const {
  std::set<std::string> seen;
  std::set<std::string> leaves;
  std::vector<std::string> stack{concept_named(name).name};
  while (!stack.empty()) {
    std::string n = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    const Concept& c = concept_named(n);
    if (c.kind == ConceptKind::kLeaf) leaves.insert(n);
    for (const auto& child : c.children) stack.push_back(child);
  }
  return {leaves.begin(), leaves.end()};
}

std::vector<MappedItem> Ontology::mapped_items() const {
  std::set<MappedItem> all;
  for (const auto& c : concepts_) all.insert(c.items.begin(), c.items.end());
  return {all.begin(), all.end()};
}

std::string Ontology::digest() const { return sha256_hex(source_); }

ExtensionIndex::ExtensionIndex(const Ontology& ontology, const Dataset& dataset) {
  auto to_item = [&](const MappedItem& m) -> std::optional<Item> {
    auto index = dataset.find_attribute(m.attribute);
    if (!index) return std::nullopt;
    return Item{static_cast<std::uint32_t>(*index), m.value};
  };

  universe_ = dataset.distinct_items();
  for (const auto& m : ontology.mapped_items()) {
    if (auto item = to_item(m)) universe_.push_back(*item);
  }
  canonicalize(universe_);

  // Parse-time checks guarantee the dependency graph is acyclic.
  std::function<const Itemset&(const Concept&)> compute = [&](const Concept& c) -> const Itemset& {
    if (auto it = extensions_.find(c.name); it != extensions_.end()) return it->second;
    Itemset ext;
    switch (c.kind) {
      case ConceptKind::kLeaf:
        for (const auto& m : c.items) {
          if (auto item = to_item(m)) ext.push_back(*item);
        }
        canonicalize(ext);
        break;
      case ConceptKind::kGeneralized:
        for (const auto& child : c.children) ext = set_union(ext, compute(ontology.concept_named(child)));
        break;
      case ConceptKind::kDefined: {
        std::function<Itemset(const ConceptExpr&)> eval = [&](const ConceptExpr& e) -> Itemset {
          switch (e.kind) {
            case ConceptExpr::Kind::kRef:
              return compute(ontology.concept_named(e.concept_name));
            case ConceptExpr::Kind::kOr: {
              Itemset acc;
              for (const auto& op : e.operands) acc = set_union(acc, eval(op));
              return acc;
            }
            case ConceptExpr::Kind::kAnd: {
              Itemset acc = eval(e.operands.front());
              for (std::size_t i = 1; i < e.operands.size(); ++i) acc = set_intersection(acc, eval(e.operands[i]));
              return acc;
            }
            case ConceptExpr::Kind::kAnswerIn:
              return evaluate(e);
          }
          return {};
        };
        ext = eval(*c.definition);
        break;
      }
    }
    return extensions_.emplace(c.name, std::move(ext)).first->second;
  };
  for (const auto& c : ontology.concepts()) compute(c);
}

const Itemset& ExtensionIndex::of_concept(std::string_view name) const {
  auto it = extensions_.find(std::string(name));
  if (it == extensions_.end()) throw Error(errc::kResolution, "unknown concept '" + std::string(name) + "'");
  return it->second;
}

Itemset ExtensionIndex::evaluate(const ConceptExpr& expr) const {
  switch (expr.kind) {
    case ConceptExpr::Kind::kRef:
      return of_concept(expr.concept_name);
    case ConceptExpr::Kind::kOr: {
      Itemset acc;
      for (const auto& op : expr.operands) acc = set_union(acc, evaluate(op));
      return acc;
    }
    case ConceptExpr::Kind::kAnd: {
      if (expr.operands.empty()) return {};
      Itemset acc = evaluate(expr.operands.front());
      for (std::size_t i = 1; i < expr.operands.size(); ++i) acc = set_intersection(acc, evaluate(expr.operands[i]));
      return acc;
    }
    case ConceptExpr::Kind::kAnswerIn: {
      Itemset out;
      for (const auto& item : universe_) {
        if (std::binary_search(expr.values.begin(), expr.values.end(), item.value)) out.push_back(item);
      }
      return out;
    }
  }
  return {};
}

Itemset item_extension(const Ontology& ontology, const ConceptExpr& expr, const Dataset& dataset) {
  return ExtensionIndex(ontology, dataset).evaluate(expr);
}

MappingReport validate_against(const Ontology& ontology, const Dataset& dataset) {
  MappingReport report;
  std::set<Item> mapped;
  bool any_known_attribute = false;
  const auto all = ontology.mapped_items();
  for (const auto& m : all) {
    auto index = dataset.find_attribute(m.attribute);
    if (!index) {
      report.phantom.push_back(m.str());
      continue;
    }
    any_known_attribute = true;
    Item item{static_cast<std::uint32_t>(*index), m.value};
    mapped.insert(item);
    if (!dataset.item_id(item)) report.phantom.push_back(m.str());
  }
  for (const auto& item : dataset.distinct_items()) {
    if (!mapped.count(item)) report.unmapped.push_back(dataset.render(item));
  }
  report.fatal = !all.empty() && !any_known_attribute;
  return report;
}

}  // namespace ontorules
