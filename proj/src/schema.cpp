#include "ontorules/schema.hpp"

#include <cctype>
#include <set>
#include <unordered_map>

#include "ontorules/error.hpp"

namespace ontorules {

namespace {

struct Token {
  enum class Kind { kIdent, kBang, kComma, kArrow, kOpen, kClose, kColon, kLParen, kRParen, kEnd };
  Kind kind = Kind::kEnd;
  std::string text;
  std::size_t column = 0;
};

bool is_ident_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || c == '.' || u >= 0x80;
}

std::vector<Token> tokenize(std::string_view line, std::size_t line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    const std::size_t col = i + 1;
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') break;
    if (is_ident_char(c)) {
      std::size_t j = i;
      while (j < line.size() && is_ident_char(line[j])) ++j;
      out.push_back({Token::Kind::kIdent, std::string(line.substr(i, j - i)), col});
      i = j;
      continue;
    }
    if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
      out.push_back({Token::Kind::kArrow, "->", col});
      i += 2;
      continue;
    }
    Token::Kind kind;
    switch (c) {
      case '!':
        kind = Token::Kind::kBang;
        break;
      case ',':
        kind = Token::Kind::kComma;
        break;
      case '<':
        kind = Token::Kind::kOpen;
        break;
      case '>':
        kind = Token::Kind::kClose;
        break;
      case ':':
        kind = Token::Kind::kColon;
        break;
      case '(':
        kind = Token::Kind::kLParen;
        break;
      case ')':
        kind = Token::Kind::kRParen;
        break;
      default:
        throw Error(errc::kParse, "unexpected character '" + std::string(1, c) + "' at line " +
                                      std::to_string(line_no) + ", column " + std::to_string(col),
                    SourceLocation{line_no, col});
    }
    out.push_back({kind, std::string(1, c), col});
    ++i;
  }
  out.push_back({Token::Kind::kEnd, "", line.size() + 1});
  return out;
}

class LineParser {
 public:
  LineParser(std::vector<Token> tokens, std::size_t line_no) : tokens_(std::move(tokens)), line_no_(line_no) {}

  const Token& peek() const { return tokens_[pos_]; }
  bool at(Token::Kind kind) const { return peek().kind == kind; }

  const Token& expect(Token::Kind kind, const char* what) {
    if (!at(kind)) fail(std::string("expected ") + what);
    return tokens_[pos_++];
  }

  bool accept(Token::Kind kind) {
    if (!at(kind)) return false;
    ++pos_;
    return true;
  }

  [[noreturn]] void fail(const std::string& message) const {
    const Token& t = peek();
    std::string found = t.kind == Token::Kind::kEnd ? "end of line" : "'" + t.text + "'";
    throw Error(errc::kParse,
                message + " but found " + found + " at line " + std::to_string(line_no_) + ", column " +
                    std::to_string(t.column),
                SourceLocation{line_no_, t.column});
  }

  std::vector<SchemaTerm> terms() {
    std::vector<SchemaTerm> out;
    do {
      SchemaTerm term;
      term.negated = accept(Token::Kind::kBang);
      term.concept_name = expect(Token::Kind::kIdent, "a concept name").text;
      out.push_back(std::move(term));
    } while (accept(Token::Kind::kComma));
    return out;
  }

  RuleSchema schema_body(std::string name) {
    RuleSchema s;
    s.name = std::move(name);
    expect(Token::Kind::kOpen, "'<'");
    s.antecedent = terms();
    s.implicative = accept(Token::Kind::kArrow);
    if (s.implicative) s.consequent = terms();
    expect(Token::Kind::kClose, s.implicative ? "',' or '>'" : "',', '->' or '>'");
    return s;
  }

  std::size_t line() const { return line_no_; }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::size_t line_no_;
};

void check_terms(const std::vector<SchemaTerm>& terms, const std::string& name) {
  for (const auto& t : terms) {
    if (t.concept_name.empty()) throw Error(errc::kValidity, "schema '" + name + "' has an empty term");
  }
}

std::string join_terms(const std::vector<SchemaTerm>& terms) {
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) out += ", ";
    if (terms[i].negated) out += '!';
    out += terms[i].concept_name;
  }
  return out;
}

bool any_negated(const std::vector<SchemaTerm>& terms) {
  for (const auto& t : terms) {
    if (t.negated) return true;
  }
  return false;
}

}  // namespace

void RuleSchema::validate() const {
  if (name.empty()) throw Error(errc::kValidity, "rule schema without a name");
  if (antecedent.empty()) throw Error(errc::kValidity, "schema '" + name + "' needs at least one term");
  if (implicative && consequent.empty()) {
    throw Error(errc::kValidity, "implicative schema '" + name + "' needs a consequent");
  }
  if (!implicative && !consequent.empty()) {
    throw Error(errc::kValidity, "non-implicative schema '" + name + "' cannot have a consequent");
  }
  check_terms(antecedent, name);
  check_terms(consequent, name);
}

const char* to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::kPrune:
      return "prune";
    case OperatorKind::kConform:
      return "conform";
    case OperatorKind::kUnexpected:
      return "unexpected";
    case OperatorKind::kException:
      return "exception";
  }
  return "?";
}

const char* to_string(Scope scope) {
  switch (scope) {
    case Scope::kCondition:
      return "condition";
    case Scope::kConclusion:
      return "conclusion";
    case Scope::kBoth:
      return "both";
  }
  return "?";
}

OperatorKind parse_operator_kind(std::string_view text) {
  if (text == "prune") return OperatorKind::kPrune;
  if (text == "conform") return OperatorKind::kConform;
  if (text == "unexpected") return OperatorKind::kUnexpected;
  if (text == "exception") return OperatorKind::kException;
  throw Error(errc::kParse, "unknown operator '" + std::string(text) + "'");
}

Scope parse_scope(std::string_view text) {
  if (text == "condition") return Scope::kCondition;
  if (text == "conclusion") return Scope::kConclusion;
  if (text == "both") return Scope::kBoth;
  throw Error(errc::kParse, "unknown scope '" + std::string(text) + "'");
}

std::string format_operator(const OperatorSpec& spec) {
  std::string out = to_string(spec.kind);
  if (spec.kind == OperatorKind::kUnexpected) out += std::string("(") + to_string(spec.scope) + ")";
  return out + " " + spec.schema;
}

void check_applicable(const OperatorSpec& spec, const RuleSchema& schema) {
  const bool needs_implication = spec.kind == OperatorKind::kUnexpected || spec.kind == OperatorKind::kException;
  if (needs_implication && !schema.implicative) {
    throw Error(errc::kValidity, std::string(to_string(spec.kind)) + " needs an implicative schema; '" +
                                     schema.name + "' has no arrow");
  }
  if (spec.kind == OperatorKind::kUnexpected) {
    const bool cond = spec.scope != Scope::kConclusion && any_negated(schema.antecedent);
    const bool concl = spec.scope != Scope::kCondition && any_negated(schema.consequent);
    if (cond || concl) {
      throw Error(errc::kValidity, "unexpected(" + std::string(to_string(spec.scope)) + ") would invert a negated term of '" +
                                       schema.name + "'");
    }
  }
  if (spec.kind == OperatorKind::kException && any_negated(schema.consequent)) {
    throw Error(errc::kValidity, "exception cannot contradict a negated consequent term of '" + schema.name + "'");
  }
}

Script parse_script(std::string_view text) {
  Script script;
  struct PendingApply {
    OperatorSpec spec;
    SourceLocation where;
  };
  std::vector<PendingApply> applies;
  std::unordered_map<std::string, std::size_t> by_name;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line_no;

    LineParser p(tokenize(line, line_no), line_no);
    if (p.at(Token::Kind::kEnd)) continue;
    const Token keyword = p.expect(Token::Kind::kIdent, "'schema' or 'apply'");
    if (keyword.text == "schema") {
      const Token name = p.expect(Token::Kind::kIdent, "a schema name");
      p.expect(Token::Kind::kColon, "':'");
      RuleSchema s = p.schema_body(name.text);
      p.expect(Token::Kind::kEnd, "end of line");
      if (!by_name.emplace(s.name, script.schemas.size()).second) {
        throw Error(errc::kSchema,
                    "duplicate schema name '" + s.name + "' at line " + std::to_string(line_no),
                    SourceLocation{line_no, name.column});
      }
      script.schemas.push_back(std::move(s));
    } else if (keyword.text == "apply") {
      const Token op = p.expect(Token::Kind::kIdent, "an operator");
      OperatorSpec spec;
      try {
        spec.kind = parse_operator_kind(op.text);
      } catch (const Error& e) {
        throw Error(errc::kParse, std::string(e.what()) + " at line " + std::to_string(line_no),
                    SourceLocation{line_no, op.column});
      }
      if (p.accept(Token::Kind::kLParen)) {
        const Token scope = p.expect(Token::Kind::kIdent, "a scope");
        if (spec.kind != OperatorKind::kUnexpected) {
          throw Error(errc::kParse, "only 'unexpected' takes a scope (line " + std::to_string(line_no) + ")",
                      SourceLocation{line_no, scope.column});
        }
        try {
          spec.scope = parse_scope(scope.text);
        } catch (const Error& e) {
          throw Error(errc::kParse, std::string(e.what()) + " at line " + std::to_string(line_no),
                      SourceLocation{line_no, scope.column});
        }
        p.expect(Token::Kind::kRParen, "')'");
      }
      const Token name = p.expect(Token::Kind::kIdent, "a schema name");
      p.expect(Token::Kind::kEnd, "end of line");
      spec.schema = name.text;
      applies.push_back({std::move(spec), SourceLocation{line_no, name.column}});
    } else {
      throw Error(errc::kParse,
                  "expected 'schema' or 'apply' at line " + std::to_string(line_no) + ", column " +
                      std::to_string(keyword.column),
                  SourceLocation{line_no, keyword.column});
    }
  }

  for (auto& a : applies) {
    auto it = by_name.find(a.spec.schema);
    if (it == by_name.end()) {
      throw Error(errc::kLookup,
                  "apply references unknown schema '" + a.spec.schema + "' at line " + std::to_string(a.where.line),
                  a.where);
    }
    try {
      check_applicable(a.spec, script.schemas[it->second]);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (line " + std::to_string(a.where.line) + ")", a.where);
    }
    script.operators.push_back(std::move(a.spec));
  }
  return script;
}

std::string format_schema(const RuleSchema& schema) {
  std::string out = "<" + join_terms(schema.antecedent);
  if (schema.implicative) out += " -> " + join_terms(schema.consequent);
  return out + ">";
}

std::string format_script(const Script& script) {
  std::string out;
  for (const auto& s : script.schemas) out += "schema " + s.name + ": " + format_schema(s) + "\n";
  for (const auto& op : script.operators) out += "apply " + format_operator(op) + "\n";
  return out;
}

ResolvedSchema resolve(const RuleSchema& schema, const ExtensionIndex& extensions) {
  schema.validate();
  ResolvedSchema out;
  out.schema = schema;
  auto resolve_side = [&](const std::vector<SchemaTerm>& terms, std::vector<ResolvedTerm>& into) {
    for (const auto& t : terms) {
      ResolvedTerm r{t.concept_name, t.negated, extensions.of_concept(t.concept_name)};
      if (r.items.empty()) {
        out.diagnostics.push_back("warning: term '" + t.concept_name + "' of schema '" + schema.name +
                                  "' has an empty item extension");
      }
      into.push_back(std::move(r));
    }
  };
  resolve_side(schema.antecedent, out.antecedent);
  resolve_side(schema.consequent, out.consequent);
  return out;
}

ResolvedSchema resolve(const RuleSchema& schema, const Ontology& ontology, const Dataset& dataset) {
  return resolve(schema, ExtensionIndex(ontology, dataset));
}

}  // namespace ontorules
